#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "nlstorus/kernels.hpp"
#include "nlstorus/rng.hpp"

using namespace nlstorus;

namespace {

std::vector<double> random_array(std::size_t n, std::uint64_t stream) {
    Rng rng(123, "kernel-test", stream);
    std::vector<double> x(n);
    for (double& v : x) v = rng.gaussian();
    return x;
}

}  // namespace

TEST_CASE("scalar and simd backends agree") {
    const kernels::Backend& sc = kernels::scalar_backend();
    const kernels::Backend* vec = nullptr;
#if defined(__x86_64__)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        vec = kernels::avx2_backend();
#endif
    if (!vec) {
        MESSAGE("no simd backend on this machine; scalar only");
        return;
    }
    for (std::size_t n : {0u, 1u, 5u, 64u, 257u, 4096u}) {
        std::vector<double> a = random_array(2 * n + 7, n);
        std::vector<double> b = random_array(2 * n + 7, n + 1000);
        double s1 = sc.sum_sq(a.data(), a.size());
        double s2 = vec->sum_sq(a.data(), a.size());
        CHECK(s1 == doctest::Approx(s2).epsilon(1e-12));

        double d1 = sc.sum_diff_sq(a.data(), b.data(), a.size());
        double d2 = vec->sum_diff_sq(a.data(), b.data(), a.size());
        CHECK(d1 == doctest::Approx(d2).epsilon(1e-12));

        for (double p : {2.0, 4.0, 6.0, 3.3}) {
            double p1 = sc.sum_abs_pow(a.data(), n, p);
            double p2 = vec->sum_abs_pow(a.data(), n, p);
            CHECK(p1 == doctest::Approx(p2).epsilon(1e-12));
        }

        double o1[2], o2[2];
        sc.dot_conj(a.data(), b.data(), n, o1);
        vec->dot_conj(a.data(), b.data(), n, o2);
        CHECK(o1[0] == doctest::Approx(o2[0]).epsilon(1e-10));
        CHECK(o1[1] == doctest::Approx(o2[1]).epsilon(1e-10));

        std::vector<double> c1 = a, c2 = a;
        sc.scale(c1.data(), c1.size(), 1.7);
        vec->scale(c2.data(), c2.size(), 1.7);
        for (std::size_t i = 0; i < c1.size(); ++i) CHECK(c1[i] == c2[i]);
    }
}

TEST_CASE("kernels match direct formulas") {
    std::vector<double> a = random_array(34, 7);
    double ss = 0;
    for (double v : a) ss += v * v;
    CHECK(kernels::sum_sq(a.data(), a.size()) == doctest::Approx(ss).epsilon(1e-13));

    const auto* z = reinterpret_cast<const kernels::cplx*>(a.data());
    double p6 = 0;
    for (std::size_t i = 0; i < 17; ++i) p6 += std::pow(std::norm(z[i]), 3.0);
    CHECK(kernels::sum_abs_pow(z, 17, 6.0) == doctest::Approx(p6).epsilon(1e-12));
}

TEST_CASE("abs_pow even fast path") {
    CHECK(kernels::abs_pow(2.0, 0.0, 4.0) == doctest::Approx(16.0));
    CHECK(kernels::abs_pow(1.0, 1.0, 6.0) == doctest::Approx(8.0));
    CHECK(kernels::abs_pow(0.3, -0.4, 5.0) == doctest::Approx(std::pow(0.5, 5.0)));
}
