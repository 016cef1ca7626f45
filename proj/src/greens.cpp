#include "nlstorus/greens.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <thread>

#include "nlstorus/fft_internal.hpp"

namespace nlstorus {

namespace {

std::vector<double> spectral_kernel(const TorusShape& shape, const std::vector<double>& inv_spec) {
    // kernel(r) = (1/N) sum_k inv_spec_k e^{i 2 pi k.r / n}
    Field spec(shape);
    for (long k = 0; k < shape.N; ++k) spec.v[k] = cplx{inv_spec[k], 0.0};
    Field ker = inverse_fourier(spec);
    std::vector<double> out(std::size_t(shape.N));
    double scale = 1.0 / std::sqrt(double(shape.N));
    for (long i = 0; i < shape.N; ++i) out[i] = ker.v[i].real() * scale;
    return out;
}

long displacement(const TorusShape& s, long x, long y) {
    std::vector<int> xc = s.coords(x), yc = s.coords(y), dc(s.d);
    for (int a = 0; a < s.d; ++a) {
        int c = xc[a] - yc[a];
        if (c < 0) c += s.n;
        dc[a] = c;
    }
    return s.index(dc);
}

}  // namespace

TorusGreens::TorusGreens(const TorusShape& shape, double m) : shape_(shape), m_(m) {
    if (!(m > 0)) throw std::invalid_argument("TorusGreens: mass must be positive");
    std::vector<double> lam = all_eigenvalues(shape);
    std::vector<double> inv(lam.size());
    for (std::size_t i = 0; i < lam.size(); ++i) inv[i] = 1.0 / (lam[i] + m);
    kernel_ = spectral_kernel(shape, inv);
}

double TorusGreens::at(long x, long y) const { return kernel_[displacement(shape_, x, y)]; }

ZeroAvgGreens::ZeroAvgGreens(const TorusShape& shape) : shape_(shape) {
    std::vector<double> lam = all_eigenvalues(shape);
    std::vector<double> inv(lam.size(), 0.0);
    for (std::size_t i = 1; i < lam.size(); ++i) inv[i] = 1.0 / lam[i];
    kernel_ = spectral_kernel(shape, inv);
}

double ZeroAvgGreens::at(long x, long y) const { return kernel_[displacement(shape_, x, y)]; }

SiteSet SiteSet::empty(const TorusShape& s) {
    SiteSet u;
    u.shape = s;
    u.mask.assign(std::size_t(s.N), 0);
    return u;
}

SiteSet SiteSet::of(const TorusShape& s, const std::vector<long>& members) {
    SiteSet u = empty(s);
    for (long i : members)
        if (!u.mask[std::size_t(i)]) {
            u.mask[std::size_t(i)] = 1;
            u.sites.push_back(i);
        }
    std::sort(u.sites.begin(), u.sites.end());
    return u;
}

std::vector<long> SiteSet::inner_boundary() const {
    std::vector<long> b;
    for (long i : sites) {
        bool edge = false;
        for (int a = 0; a < shape.d && !edge; ++a)
            edge = !contains(shape.neighbor(i, a, +1)) || !contains(shape.neighbor(i, a, -1));
        if (edge) b.push_back(i);
    }
    return b;
}

std::vector<int> distance_to_set(const TorusShape& shape, const SiteSet& U) {
    std::vector<int> dist(std::size_t(shape.N), -1);
    std::deque<long> q;
    for (long i : U.sites) {
        dist[std::size_t(i)] = 0;
        q.push_back(i);
    }
    while (!q.empty()) {
        long i = q.front();
        q.pop_front();
        for (int a = 0; a < shape.d; ++a)
            for (int dir : {+1, -1}) {
                long j = shape.neighbor(i, a, dir);
                if (dist[std::size_t(j)] < 0) {
                    dist[std::size_t(j)] = dist[std::size_t(i)] + 1;
                    q.push_back(j);
                }
            }
    }
    return dist;
}

DirichletSpectrum dirichlet_spectrum(const TorusShape& shape, const SiteSet& U) {
    DirichletSpectrum sp;
    sp.shape = shape;
    sp.pos_of_site.assign(std::size_t(shape.N), -1);
    for (long i = 0; i < shape.N; ++i)
        if (!U.contains(i)) {
            sp.pos_of_site[std::size_t(i)] = long(sp.free_sites.size());
            sp.free_sites.push_back(i);
        }
    long k = long(sp.free_sites.size());
    if (k > 4096)
        throw std::invalid_argument("dirichlet_spectrum: dense eigensolve limited to 4096 unknowns");
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(k, k);
    for (long r = 0; r < k; ++r) {
        long i = sp.free_sites[std::size_t(r)];
        A(r, r) = 2.0 * shape.d;
        for (int a = 0; a < shape.d; ++a)
            for (int dir : {+1, -1}) {
                long j = shape.neighbor(i, a, dir);
                long c = sp.pos_of_site[std::size_t(j)];
                if (c >= 0) A(r, c) -= 1.0;
            }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    sp.eigenvalues = es.eigenvalues();
    sp.eigenvectors = es.eigenvectors();
    return sp;
}

struct DirichletGreens::Impl {
    TorusShape shape;
    SiteSet U;
    double m;
    std::vector<long> free_sites;
    std::vector<long> pos_of_site;
    Eigen::SparseMatrix<double> A;
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
};

DirichletGreens::DirichletGreens(const TorusShape& shape, const SiteSet& U, double m)
    : impl_(std::make_shared<Impl>()) {
    if (U.sites.empty() && !(m > 0))
        throw std::invalid_argument("DirichletGreens: empty hole requires positive mass");
    if (m < 0) throw std::invalid_argument("DirichletGreens: mass must be >= 0");
    Impl& im = *impl_;
    im.shape = shape;
    im.U = U;
    im.m = m;
    im.pos_of_site.assign(std::size_t(shape.N), -1);
    for (long i = 0; i < shape.N; ++i)
        if (!U.contains(i)) {
            im.pos_of_site[std::size_t(i)] = long(im.free_sites.size());
            im.free_sites.push_back(i);
        }
    long k = long(im.free_sites.size());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(std::size_t(k) * (2 * shape.d + 1));
    for (long r = 0; r < k; ++r) {
        long i = im.free_sites[std::size_t(r)];
        trip.emplace_back(r, r, 2.0 * shape.d + m);
        for (int a = 0; a < shape.d; ++a)
            for (int dir : {+1, -1}) {
                long j = shape.neighbor(i, a, dir);
                long c = im.pos_of_site[std::size_t(j)];
                if (c >= 0) trip.emplace_back(r, c, -1.0);
            }
    }
    im.A.resize(k, k);
    im.A.setFromTriplets(trip.begin(), trip.end());
    im.llt.compute(im.A);
    if (im.llt.info() != Eigen::Success)
        throw std::runtime_error("DirichletGreens: factorization failed");
}

std::vector<double> DirichletGreens::column(long y) const {
    const Impl& im = *impl_;
    std::vector<double> out(std::size_t(im.shape.N), 0.0);
    long c = im.pos_of_site[std::size_t(y)];
    if (c < 0) return out;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(im.A.rows());
    rhs(c) = 1.0;
    Eigen::VectorXd g = im.llt.solve(rhs);
    for (long r = 0; r < long(im.free_sites.size()); ++r)
        out[std::size_t(im.free_sites[std::size_t(r)])] = g(r);
    return out;
}

double DirichletGreens::at(long x, long y) const {
    const Impl& im = *impl_;
    long rx = im.pos_of_site[std::size_t(x)];
    long cy = im.pos_of_site[std::size_t(y)];
    if (rx < 0 || cy < 0) return 0.0;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(im.A.rows());
    rhs(cy) = 1.0;
    Eigen::VectorXd g = im.llt.solve(rhs);
    return g(rx);
}

double DirichletGreens::trace_free() const {
    const Impl& im = *impl_;
    long k = im.A.rows();
    double acc = 0;
    for (long c = 0; c < k; ++c) {
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
        rhs(c) = 1.0;
        acc += im.llt.solve(rhs)(c);
    }
    return acc;
}

Field harmonic_extension(const TorusShape& shape, const SiteSet& U, const Field& f, double m) {
    if (!(m > 0)) throw std::invalid_argument("harmonic_extension: mass must be positive");
    if (U.sites.empty()) return Field(shape);
    for (long i : U.sites)
        if (!std::isfinite(f.v[std::size_t(i)].real()) || !std::isfinite(f.v[std::size_t(i)].imag()))
            throw std::invalid_argument("harmonic_extension: boundary values must be finite");
    // rhs(x) = sum over boundary neighbors of f; solve (-Delta_{U^c}+m) h = rhs
    std::vector<long> bnd = U.inner_boundary();
    std::vector<char> is_bnd(std::size_t(shape.N), 0);
    for (long b : bnd) is_bnd[std::size_t(b)] = 1;
    Field h(shape);
    // assemble the same sparse operator (cheap at these sizes)
    std::vector<long> free_sites;
    std::vector<long> pos(std::size_t(shape.N), -1);
    for (long i = 0; i < shape.N; ++i)
        if (!U.contains(i)) {
            pos[std::size_t(i)] = long(free_sites.size());
            free_sites.push_back(i);
        }
    long k = long(free_sites.size());
    Eigen::VectorXd rr = Eigen::VectorXd::Zero(k), ri = Eigen::VectorXd::Zero(k);
    for (long r = 0; r < k; ++r) {
        long i = free_sites[std::size_t(r)];
        for (int a = 0; a < shape.d; ++a)
            for (int dir : {+1, -1}) {
                long j = shape.neighbor(i, a, dir);
                if (U.contains(j) && is_bnd[std::size_t(j)]) {
                    rr(r) += f.v[std::size_t(j)].real();
                    ri(r) += f.v[std::size_t(j)].imag();
                }
            }
    }
    Eigen::SparseMatrix<double> A(k, k);
    {
        std::vector<Eigen::Triplet<double>> trip;
        for (long r = 0; r < k; ++r) {
            long i = free_sites[std::size_t(r)];
            trip.emplace_back(r, r, 2.0 * shape.d + m);
            for (int a = 0; a < shape.d; ++a)
                for (int dir : {+1, -1}) {
                    long j = shape.neighbor(i, a, dir);
                    long c = pos[std::size_t(j)];
                    if (c >= 0) trip.emplace_back(r, c, -1.0);
                }
        }
        A.setFromTriplets(trip.begin(), trip.end());
    }
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(A);
    Eigen::VectorXd hr = llt.solve(rr), hi = llt.solve(ri);
    for (long r = 0; r < k; ++r)
        h.v[std::size_t(free_sites[std::size_t(r)])] = cplx{hr(r), hi(r)};
    for (long i : U.sites) h.v[std::size_t(i)] = f.v[std::size_t(i)];
    return h;
}

double harmonic_decay_rate(double m, int d) { return std::log((m + 2.0 * d) / (2.0 * d)); }

namespace {

double boundary_norm_sq_free(const DirichletSpectrum& sp, const Eigen::VectorXd& br,
                             const Eigen::VectorXd& bi, double m) {
    // h = (A0 + m)^{-1} b in the eigenbasis; returns ||h||^2 on U^c
    Eigen::VectorXd cr = sp.eigenvectors.transpose() * br;
    Eigen::VectorXd ci = sp.eigenvectors.transpose() * bi;
    double acc = 0;
    for (long i = 0; i < cr.size(); ++i) {
        double den = sp.eigenvalues(i) + m;
        acc += (cr(i) * cr(i) + ci(i) * ci(i)) / (den * den);
    }
    return acc;
}

struct BoundaryMassContext {
    const DirichletSpectrum* sp = nullptr;
    DirichletSpectrum own;
    std::vector<double> torus_lam;  // when U empty
    Eigen::VectorXd br, bi;
    bool has_boundary = false;
};

BoundaryMassContext make_bm_context(const TorusShape& shape, const SiteSet& U, const Field& f,
                                     const DirichletSpectrum* cached) {
    BoundaryMassContext ctx;
    if (U.sites.empty()) {
        ctx.torus_lam = all_eigenvalues(shape);
        return ctx;
    }
    if (cached) {
        ctx.sp = cached;
    } else {
        ctx.own = dirichlet_spectrum(shape, U);
        ctx.sp = &ctx.own;
    }
    const DirichletSpectrum& sp = *ctx.sp;
    long k = long(sp.free_sites.size());
    ctx.br = Eigen::VectorXd::Zero(k);
    ctx.bi = Eigen::VectorXd::Zero(k);
    std::vector<long> bnd = U.inner_boundary();
    std::vector<char> is_bnd(std::size_t(shape.N), 0);
    for (long b : bnd) is_bnd[std::size_t(b)] = 1;
    for (long r = 0; r < k; ++r) {
        long i = sp.free_sites[std::size_t(r)];
        for (int a = 0; a < shape.d; ++a)
            for (int dir : {+1, -1}) {
                long j = shape.neighbor(i, a, dir);
                if (U.contains(j) && is_bnd[std::size_t(j)]) {
                    ctx.br(r) += f.v[std::size_t(j)].real();
                    ctx.bi(r) += f.v[std::size_t(j)].imag();
                }
            }
    }
    ctx.has_boundary = true;
    return ctx;
}

double bm_residual(const BoundaryMassContext& ctx, const TorusShape& shape, double theta,
                   double gamma, double m) {
    double target = theta * gamma * double(shape.N);
    double acc = 0;
    if (!ctx.torus_lam.empty()) {
        for (double lam : ctx.torus_lam) acc += 1.0 / (lam + m);
        return acc - target;
    }
    const DirichletSpectrum& sp = *ctx.sp;
    for (long i = 0; i < sp.eigenvalues.size(); ++i) acc += 1.0 / (sp.eigenvalues(i) + m);
    if (ctx.has_boundary) acc += theta * boundary_norm_sq_free(sp, ctx.br, ctx.bi, m);
    return acc - target;
}

}  // namespace

double boundary_mass_residual(const TorusShape& shape, const SiteSet& U, const Field& f,
                              double theta, double gamma, double m,
                              const DirichletSpectrum* cached) {
    BoundaryMassContext ctx = make_bm_context(shape, U, f, cached);
    return bm_residual(ctx, shape, theta, gamma, m);
}

double solve_mass_with_boundary(const TorusShape& shape, const SiteSet& U, const Field& f,
                                double theta, double gamma, const DirichletSpectrum* cached) {
    if (!(theta > 0)) throw std::invalid_argument("solve_mass_with_boundary: theta must be positive");
    if (!(gamma > 0 && gamma <= 1))
        throw std::invalid_argument("solve_mass_with_boundary: gamma must be in (0,1]");
    BoundaryMassContext ctx = make_bm_context(shape, U, f, cached);
    double lo = 0.0;
    double r_lo;
    if (!U.sites.empty()) {
        r_lo = bm_residual(ctx, shape, theta, gamma, 0.0);
        if (r_lo <= 0)
            throw NoMassSolution("solve_mass_with_boundary: no root in (0, inf) for these inputs");
    }
    double hi = 1.0;
    while (bm_residual(ctx, shape, theta, gamma, hi) > 0) {
        hi *= 2.0;
        if (hi > 1e12) throw NoMassSolution("solve_mass_with_boundary: root bracketing failed");
    }
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (bm_residual(ctx, shape, theta, gamma, mid) > 0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-14 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

std::pair<double, double> killed_walk_green_mc(const TorusShape& shape, const SiteSet& U, double m,
                                               long x, long y, long walks, Rng& rng) {
    double kill = m / (m + 2.0 * shape.d);
    if (U.contains(x) || U.contains(y)) return {0.0, 0.0};
    double sum = 0, sumsq = 0;
    for (long w = 0; w < walks; ++w) {
        long pos = x;
        double visits = 0;
        for (;;) {
            if (pos == y) visits += 1.0;
            if (m > 0 && rng.uniform() < kill) break;
            int a = int(rng.below(std::uint64_t(shape.d)));
            int dir = rng.uniform() < 0.5 ? +1 : -1;
            pos = shape.neighbor(pos, a, dir);
            if (U.contains(pos)) break;
        }
        sum += visits;
        sumsq += visits * visits;
    }
    double mean = sum / double(walks);
    double var = std::max(0.0, sumsq / double(walks) - mean * mean);
    double se = std::sqrt(var / double(walks));
    double scale = 1.0 / (2.0 * shape.d + m);
    return {mean * scale, se * scale};
}

std::pair<double, double> c3_random_walk_mc(long walks, int threads, std::uint64_t seed, int radius) {
    if (threads < 1) threads = 1;
    long r2cut = long(radius) * radius;
    std::vector<double> sums(std::size_t(threads), 0.0), sumsqs(std::size_t(threads), 0.0);
    auto worker = [&](int t) {
        Rng rng(seed, "c3walk", std::uint64_t(t));
        long lo = walks * t / threads, hi = walks * (t + 1) / threads;
        double s = 0, ss = 0;
        for (long w = lo; w < hi; ++w) {
            int c[3] = {0, 0, 0};
            long rr = 0;
            double visits = 1.0;  // time 0 at the origin
            bool alive = true;
            while (alive) {
                // two moves per draw; 2^32 mod 36 = 4, bias ~ 1e-9
                std::uint32_t r = rng.next_u32() % 36u;
                for (int half = 0; half < 2 && alive; ++half) {
                    std::uint32_t mv = half == 0 ? r % 6u : r / 6u;
                    int axis = int(mv >> 1);
                    int dir = (mv & 1u) ? -1 : 1;
                    int nx = c[axis] + dir;
                    rr += 2 * long(nx) * dir - 1;  // (x+-1)^2 - x^2
                    c[axis] = nx;
                    if (rr == 0) visits += 1.0;
                    if (rr >= r2cut) {
                        // expected further visits from the exit point: the walk
                        // is transient, G_walk(0, v) ~ 3/(2 pi |v|) at large |v|
                        visits += 3.0 / (2.0 * M_PI * std::sqrt(double(rr)));
                        alive = false;
                    }
                }
            }
            s += visits;
            ss += visits * visits;
        }
        sums[std::size_t(t)] = s;
        sumsqs[std::size_t(t)] = ss;
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
    double sum = 0, sumsq = 0;
    for (int t = 0; t < threads; ++t) {
        sum += sums[std::size_t(t)];
        sumsq += sumsqs[std::size_t(t)];
    }
    double mean = sum / double(walks);
    double var = std::max(0.0, sumsq / double(walks) - mean * mean);
    double se = std::sqrt(var / double(walks));
    return {mean / 6.0, se / 6.0};
}

}  // namespace nlstorus
