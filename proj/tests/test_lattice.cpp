#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nlstorus/lattice.hpp"
#include "nlstorus/rng.hpp"

using namespace nlstorus;

namespace {

Field random_field(const TorusShape& s, std::uint64_t stream) {
    Rng rng(2024, "lattice-test", stream);
    Field f(s);
    for (long i = 0; i < s.N; ++i) f.v[i] = cplx{rng.gaussian(), rng.gaussian()};
    return f;
}

Field eigenvector(const TorusShape& s, const std::vector<int>& k) {
    Field f(s);
    for (long x = 0; x < s.N; ++x) {
        auto xc = s.coords(x);
        long dot = 0;
        for (int a = 0; a < s.d; ++a) dot += long(k[a]) * xc[a];
        double ang = 2.0 * M_PI * double(dot % s.n) / s.n;
        f.v[x] = cplx{std::cos(ang), std::sin(ang)} / std::sqrt(double(s.N));
    }
    return f;
}

cplx inner(const Field& a, const Field& b) {
    cplx acc{0, 0};
    for (long i = 0; i < a.shape.N; ++i) acc += a.v[i] * std::conj(b.v[i]);
    return acc;
}

}  // namespace

TEST_CASE("shape indexing round-trips and neighbors") {
    TorusShape s = TorusShape::make(3, 4);
    CHECK(s.N == 64);
    for (long i = 0; i < s.N; ++i) CHECK(s.index(s.coords(i)) == i);
    // neighbor is an involution with the opposite direction
    for (long i = 0; i < s.N; ++i)
        for (int a = 0; a < 3; ++a) CHECK(s.neighbor(s.neighbor(i, a, +1), a, -1) == i);
    CHECK_THROWS(TorusShape::make(0, 4));
    CHECK_THROWS(TorusShape::make(3, 1));
}

TEST_CASE("laplacian of constants vanishes; indicator case") {
    TorusShape s = TorusShape::make(3, 4);
    Field c(s);
    for (auto& z : c.v) z = cplx{2.5, -1.0};
    Field lc = laplacian(c);
    for (auto& z : lc.v) CHECK(std::abs(z) < 1e-14);

    Field e0(s);
    e0.v[0] = 1.0;
    Field le = laplacian(e0);
    CHECK(le.v[0].real() == doctest::Approx(-6.0));
    int ones = 0;
    for (long i = 1; i < s.N; ++i) {
        if (std::abs(le.v[i]) > 0) {
            CHECK(le.v[i].real() == doctest::Approx(1.0));
            ++ones;
        }
    }
    CHECK(ones == 6);
    CHECK(dirichlet_energy(e0) == doctest::Approx(6.0));
}

TEST_CASE("eigenvector relations") {
    TorusShape s = TorusShape::make(3, 6);
    std::vector<int> k{1, 3, 5};
    double lam = eigenvalue(s, k);
    CHECK(lam >= 0.0);
    CHECK(lam <= 12.0);
    Field phi = eigenvector(s, k);
    Field lphi = laplacian(phi);
    for (long i = 0; i < s.N; ++i)
        CHECK(std::abs(lphi.v[i] + lam * phi.v[i]) < 1e-12);
    CHECK(dirichlet_energy(phi) == doctest::Approx(lam).epsilon(1e-12));
    // lambda maximal at k_i = n/2 for even n
    std::vector<int> kmax{3, 3, 3};
    CHECK(eigenvalue(s, kmax) == doctest::Approx(12.0));
}

TEST_CASE("dirichlet energy equals <f, -Delta f> on random fields") {
    TorusShape s = TorusShape::make(3, 4);
    for (int rep = 0; rep < 100; ++rep) {
        Field f = random_field(s, std::uint64_t(rep));
        Field lf = laplacian(f);
        double quad = -inner(lf, f).real();
        double en = dirichlet_energy(f);
        CHECK(en == doctest::Approx(quad).epsilon(1e-10));
    }
}

TEST_CASE("norms") {
    TorusShape s = TorusShape::make(3, 4);
    Field z(s);
    CHECK(norm_pp(z, 3.0) == 0.0);
    z.v[5] = cplx{0, 2.0};
    CHECK(norm_pp(z, 4.0) == doctest::Approx(16.0));
    CHECK(norm_inf(z) == doctest::Approx(2.0));
    CHECK_THROWS(norm_pp(z, 0.5));

    // lp upper bound ||f||_p^p <= ||f||_inf^{p-2} ||f||_2^2
    Field f = random_field(s, 99);
    double p = 4.0;
    CHECK(norm_pp(f, p) <= std::pow(norm_inf(f), p - 2.0) * norm2_sq(f) * (1 + 1e-12));
}

TEST_CASE("nls hamiltonian normalization") {
    TorusShape s = TorusShape::make(3, 2);  // N = 64? no: 2^3 = 8
    CHECK(s.N == 8);
    TorusShape s4 = TorusShape::make(3, 4);
    CHECK(nu_n(1.0, 6.0, 64) == doctest::Approx((2.0 / 6.0) / (64.0 * 64.0)));
    CHECK(nu_n(1.0, 6.0, 64) == doctest::Approx(5.0863e-5).epsilon(1e-3));
    Field z(s4);
    CHECK(nls_hamiltonian(z, 1.0, 6.0) == 0.0);

    // single spike of modulus sqrt(N): H = 2d N - nu_N N^{p/2}
    Field spike(s4);
    double N = double(s4.N);
    spike.v[0] = std::sqrt(N);
    double p = 6.0, nu = 1.3;
    double expect = 2.0 * 3 * N - nu_n(nu, p, s4.N) * std::pow(N, p / 2.0);
    CHECK(nls_hamiltonian(spike, nu, p) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("fourier transform: unitarity, diagonalization, oracle") {
    for (int n : {2, 3, 4, 6, 8, 12}) {
        TorusShape s = TorusShape::make(3, n);
        Field f = random_field(s, std::uint64_t(100 + n));
        Field fk = fourier(f);
        // Parseval
        CHECK(norm2_sq(fk) == doctest::Approx(norm2_sq(f)).epsilon(1e-12));
        // round trip
        Field back = inverse_fourier(fk);
        for (long i = 0; i < s.N; ++i) CHECK(std::abs(back.v[i] - f.v[i]) < 1e-10);
        // against the direct O(N^2) oracle
        if (s.N <= 512) {
            Field fd = fourier_direct(f);
            for (long i = 0; i < s.N; ++i) CHECK(std::abs(fk.v[i] - fd.v[i]) < 1e-10);
        }
    }
    // constant field -> mass only at k = 0 with value c sqrt(N)
    TorusShape s = TorusShape::make(3, 4);
    Field c(s);
    for (auto& z : c.v) z = cplx{1.5, 0.5};
    Field ck = fourier(c);
    CHECK(std::abs(ck.v[0] - cplx{1.5, 0.5} * std::sqrt(64.0)) < 1e-12);
    for (long i = 1; i < s.N; ++i) CHECK(std::abs(ck.v[i]) < 1e-12);
    // Parseval on 100 random fields
    for (int rep = 0; rep < 100; ++rep) {
        Field f = random_field(s, std::uint64_t(500 + rep));
        CHECK(norm2_sq(fourier(f)) == doctest::Approx(norm2_sq(f)).epsilon(1e-11));
    }
}

TEST_CASE("fourier diagonalizes the laplacian") {
    TorusShape s = TorusShape::make(2, 6);
    Field f = random_field(s, 777);
    Field lf = laplacian(f);
    Field lk = fourier(lf);
    Field fk = fourier(f);
    auto lam = all_eigenvalues(s);
    for (long k = 0; k < s.N; ++k)
        CHECK(std::abs(-lk.v[k] - lam[std::size_t(k)] * fk.v[k]) < 1e-10);
}
