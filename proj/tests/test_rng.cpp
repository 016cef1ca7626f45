#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "nlstorus/rng.hpp"

using namespace nlstorus;

TEST_CASE("deterministic per (seed, tag, stream)") {
    Rng a(42, "x", 3), b(42, "x", 3);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("streams and tags decorrelate") {
    Rng a(42, "x", 0), b(42, "x", 1), c(42, "y", 0), d(7, "x", 0);
    int eq_ab = 0, eq_ac = 0, eq_ad = 0;
    for (int i = 0; i < 64; ++i) {
        std::uint64_t va = a.next_u64();
        if (va == b.next_u64()) ++eq_ab;
        if (va == c.next_u64()) ++eq_ac;
        if (va == d.next_u64()) ++eq_ad;
    }
    CHECK(eq_ab == 0);
    CHECK(eq_ac == 0);
    CHECK(eq_ad == 0);
}

TEST_CASE("uniform moments") {
    Rng rng(1, "mom", 0);
    const int n = 200000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        s += u;
        s2 += u * u;
    }
    double mean = s / n, var = s2 / n - mean * mean;
    CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
    CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.02));
}

TEST_CASE("gaussian moments") {
    Rng rng(9, "gauss", 0);
    const int n = 200000;
    double s = 0, s2 = 0, s4 = 0;
    for (int i = 0; i < n; ++i) {
        double g = rng.gaussian();
        s += g;
        s2 += g * g;
        s4 += g * g * g * g;
    }
    CHECK(s / n == doctest::Approx(0.0).epsilon(0.02));
    CHECK(std::abs(s / n) < 0.02);
    CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(s4 / n == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("below is unbiased across small ranges") {
    Rng rng(5, "below", 0);
    int counts[7] = {0};
    const int n = 140000;
    for (int i = 0; i < n; ++i) ++counts[rng.below(7)];
    for (int k = 0; k < 7; ++k)
        CHECK(double(counts[k]) / n == doctest::Approx(1.0 / 7.0).epsilon(0.05));
}

TEST_CASE("low bit balance") {
    Rng rng(11, "bits", 2);
    long ones = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) ones += rng.next_u32() & 1u;
    CHECK(double(ones) / n == doctest::Approx(0.5).epsilon(0.02));
}
