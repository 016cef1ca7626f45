#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nlstorus/greens.hpp"
#include "nlstorus/spherical.hpp"
#include "oracle_smallcase.hpp"

using namespace nlstorus;

namespace {

std::vector<double> mode_means_without_zero(const TorusShape& s, double theta) {
    auto lam = all_eigenvalues(s);
    std::vector<double> mu;
    for (std::size_t k = 1; k < lam.size(); ++k) mu.push_back(1.0 / (theta * lam[k]));
    return mu;
}

struct SmallCaseStats {
    std::vector<double> zero_mode;  // |y_0|^2
    std::vector<double> total;      // ||psi||^2
};

SmallCaseStats fourier_stats(const SampleBatch& batch) {
    SmallCaseStats st;
    for (const Field& f : batch.fields) {
        Field y = fourier(f);
        st.zero_mode.push_back(std::norm(y.v[0]));
        st.total.push_back(norm2_sq(f));
    }
    return st;
}

}  // namespace

TEST_CASE("small-case exactness oracle, strategy A (theta >= C_d)") {
    TorusShape s = TorusShape::make(3, 2);
    double c3 = c_d(3);
    SphericalParams p;
    p.shape = s;
    p.theta = 2.0 * c3;
    SampleBatch batch = sample_spherical(p, 30000, 77);
    CHECK(batch.exact);
    // every accepted sample satisfies the ball constraint exactly
    for (const Field& f : batch.fields) CHECK(norm2_sq(f) <= double(s.N) * (1 + 1e-12));

    auto mu = mode_means_without_zero(s, p.theta);
    auto sp = smallcase::exponential_sum_density(mu, 4.0 * s.N, 4000);
    const int bins = 24;
    auto st = fourier_stats(batch);
    double tv0 = smallcase::tv_distance(
        smallcase::zero_mode_bin_probs(sp, double(s.N), bins),
        smallcase::histogram(st.zero_mode, double(s.N), bins));
    double tvt = smallcase::tv_distance(
        smallcase::total_mass_bin_probs(sp, double(s.N), bins),
        smallcase::histogram(st.total, double(s.N), bins));
    MESSAGE("TV zero-mode ", tv0, " total ", tvt);
    CHECK(tv0 < 0.05);
    CHECK(tvt < 0.05);
}

TEST_CASE("small-case exactness oracle, strategy B (theta < C_d)") {
    TorusShape s = TorusShape::make(3, 2);
    double c3 = c_d(3);
    SphericalParams p;
    p.shape = s;
    p.theta = 0.5 * c3;
    SampleBatch batch = sample_spherical(p, 30000, 78);
    auto mu = mode_means_without_zero(s, p.theta);
    auto sp = smallcase::exponential_sum_density(mu, 4.0 * s.N, 4000);
    const int bins = 24;
    auto st = fourier_stats(batch);
    double tv0 = smallcase::tv_distance(
        smallcase::zero_mode_bin_probs(sp, double(s.N), bins),
        smallcase::histogram(st.zero_mode, double(s.N), bins));
    double tvt = smallcase::tv_distance(
        smallcase::total_mass_bin_probs(sp, double(s.N), bins),
        smallcase::histogram(st.total, double(s.N), bins));
    MESSAGE("TV zero-mode ", tv0, " total ", tvt);
    CHECK(tv0 < 0.05);
    CHECK(tvt < 0.05);
}

TEST_CASE("gamma cutoff is honored and matches the scaled law") {
    TorusShape s = TorusShape::make(3, 2);
    double c3 = c_d(3);
    SphericalParams p;
    p.shape = s;
    p.theta = 1.2 * c3;
    p.gamma = 0.5;
    SampleBatch batch = sample_spherical(p, 20000, 5);
    for (const Field& f : batch.fields) CHECK(norm2_sq(f) <= p.gamma * double(s.N) * (1 + 1e-12));
    // oracle at the same (theta, gamma): modes exp(-theta lambda s), ball gamma N
    auto mu = mode_means_without_zero(s, p.theta);
    auto sp = smallcase::exponential_sum_density(mu, 4.0 * s.N, 4000);
    auto st = fourier_stats(batch);
    const int bins = 20;
    double tvt = smallcase::tv_distance(
        smallcase::total_mass_bin_probs(sp, p.gamma * double(s.N), bins),
        smallcase::histogram(st.total, p.gamma * double(s.N), bins));
    CHECK(tvt < 0.05);
}

TEST_CASE("massless acceptance rate approaches 1 - C_d/theta") {
    double c3 = c_d(3);
    SphericalParams p;
    p.theta = 2.0 * c3;
    p.shape = TorusShape::make(3, 8);
    SampleBatch b8 = sample_spherical(p, 4000, 11);
    CHECK(std::abs(b8.acceptance - 0.5) < 0.1);
}

TEST_CASE("massive regime: E||psi||^2/N saturates and covariance matches the kernel") {
    double c3 = c_d(3);
    SphericalParams p;
    p.shape = TorusShape::make(3, 8);
    p.theta = 0.6 * c3;
    long count = 4000;
    SampleBatch batch = sample_spherical(p, count, 12);
    double mean_mass = 0;
    for (const Field& f : batch.fields) mean_mass += norm2_sq(f) / double(p.shape.N);
    mean_mass /= double(count);
    CHECK(mean_mass > 0.9);
    CHECK(mean_mass <= 1.0);

    double m = solve_mass(p.theta, 3);
    TorusGreens g(p.shape, m);
    std::vector<std::vector<int>> offsets{{0, 0, 0}, {1, 0, 0}, {0, 2, 0}};
    CovarianceTable cov = empirical_covariance(batch.fields, offsets);
    for (std::size_t o = 0; o < offsets.size(); ++o) {
        long disp = p.shape.index(offsets[o]);
        double target = g.at_offset(disp) / p.theta;
        CHECK(std::abs(cov.entries[o].mean.real() - target) <
              3.0 * cov.entries[o].se_re + 0.03 * std::abs(target) + 2e-3);
    }
}

TEST_CASE("boundary sampler: mean field equals the harmonic extension") {
    TorusShape s = TorusShape::make(3, 8);
    double c3 = c_d(3);
    SphericalParams p;
    p.shape = s;
    p.theta = 0.2;
    CHECK(p.theta < c3);
    Boundary bd;
    bd.U = SiteSet::of(s, {0});
    bd.f = Field(s);
    bd.f.v[0] = 1.0;
    p.boundary = bd;
    SampleBatch batch = sample_spherical_boundary(p, 6000, 21);
    // boundary equality is exact
    for (const Field& f : batch.fields) CHECK(f.v[0] == cplx{1.0, 0.0});

    double mN = solve_mass_with_boundary(s, bd.U, bd.f, p.theta, p.gamma);
    Field h = harmonic_extension(s, bd.U, bd.f, mN);
    // empirical mean at every site within 3 SE (plus a tiny numerical floor)
    std::vector<cplx> mean(std::size_t(s.N), cplx{0, 0});
    for (const Field& f : batch.fields)
        for (long i = 0; i < s.N; ++i) mean[std::size_t(i)] += f.v[std::size_t(i)];
    for (auto& z : mean) z /= double(batch.fields.size());
    // per-site SE ~ sqrt(Var/count); variance bounded by the diagonal kernel
    double var = 1.0 / (p.theta) * 0.3;  // crude bound on G^{m,U^c}(x,x)/theta
    double se = std::sqrt(var / double(batch.fields.size()));
    long violations = 0;
    for (long i = 0; i < s.N; ++i)
        if (std::abs(mean[std::size_t(i)] - h.v[std::size_t(i)]) > 3.5 * se) ++violations;
    CHECK(violations <= s.N / 100);
}

TEST_CASE("degenerate boundary reduces to the plain sampler") {
    TorusShape s = TorusShape::make(3, 4);
    SphericalParams p;
    p.shape = s;
    p.theta = 0.2;
    p.boundary = Boundary{SiteSet::empty(s), Field(s)};
    SampleBatch a = sample_spherical_boundary(p, 50, 3);
    SphericalParams q = p;
    q.boundary.reset();
    SampleBatch b = sample_spherical(q, 50, 3);
    for (long i = 0; i < 50; ++i)
        for (long x = 0; x < s.N; ++x)
            CHECK(std::abs(a.fields[std::size_t(i)].v[std::size_t(x)] -
                           b.fields[std::size_t(i)].v[std::size_t(x)]) < 1e-12);
}

TEST_CASE("covariance estimator on constant fields") {
    TorusShape s = TorusShape::make(2, 4);
    std::vector<Field> fields(40, Field(s));
    for (auto& f : fields)
        for (auto& z : f.v) z = cplx{0.5, -0.25};
    auto cov = empirical_covariance(fields, {{0, 0}, {1, 2}});
    for (const auto& e : cov.entries) {
        CHECK(e.mean.real() == doctest::Approx(0.3125));
        CHECK(e.mean.imag() == doctest::Approx(0.0));
        CHECK(e.se_re == doctest::Approx(0.0));
    }
}

TEST_CASE("mcmc fallback is flagged and roughly matches the exact law") {
    TorusShape s = TorusShape::make(3, 4);
    double c3 = c_d(3);
    SphericalParams p;
    p.shape = s;
    p.theta = 0.5 * c3;
    SampleBatch mc = sample_spherical_mcmc(p, 3000, 9, 6, 3000);
    CHECK(!mc.exact);
    SampleBatch ex = sample_spherical(p, 3000, 10);
    double mm = 0, me = 0;
    for (const Field& f : mc.fields) mm += norm2_sq(f);
    for (const Field& f : ex.fields) me += norm2_sq(f);
    mm /= double(mc.fields.size());
    me /= double(ex.fields.size());
    CHECK(std::abs(mm - me) / me < 0.05);
}
