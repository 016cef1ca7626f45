#include "nlstorus/spherical.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <thread>

#include "nlstorus/kernels.hpp"

namespace nlstorus {

int worker_threads() {
    if (const char* env = std::getenv("NLS_LATTICE_THREADS")) {
        int t = std::atoi(env);
        if (t >= 1) return t;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? int(hw) : 1;
}

namespace {

struct ModeSampler {
    // one rejection-sampling attempt in Fourier coordinates; returns success
    // and fills modes + their l2 mass
    TorusShape shape;
    double theta, gamma;
    bool massless;   // strategy A
    double m = 0;    // strategy B tilt mass
    std::vector<double> sigma;  // per-mode component std dev (E|y_k|^2 = 2 sigma^2)

    bool attempt(Rng& rng, std::vector<cplx>& y, double& mass) const {
        long N = shape.N;
        double ball = gamma * double(N);
        double s = 0;
        if (massless) {
            // zero mode uniform on the disc of radius sqrt(gamma N)
            double r2 = ball * rng.uniform();
            double ang = 2.0 * M_PI * rng.uniform();
            y[0] = std::sqrt(r2) * cplx{std::cos(ang), std::sin(ang)};
            s += r2;
            for (long k = 1; k < N; ++k) {
                double sd = sigma[std::size_t(k)];
                cplx z{sd * rng.gaussian(), sd * rng.gaussian()};
                y[std::size_t(k)] = z;
                s += std::norm(z);
            }
            mass = s;
            return s <= ball;
        }
        for (long k = 0; k < N; ++k) {
            double sd = sigma[std::size_t(k)];
            cplx z{sd * rng.gaussian(), sd * rng.gaussian()};
            y[std::size_t(k)] = z;
            s += std::norm(z);
        }
        mass = s;
        if (s > ball) return false;
        double logw = theta * m * (s - ball);  // <= 0
        return std::log(rng.uniform()) < logw;
    }
};

ModeSampler make_mode_sampler(const SphericalParams& p) {
    ModeSampler ms;
    ms.shape = p.shape;
    ms.theta = p.theta;
    ms.gamma = p.gamma;
    double theta_eff = p.theta * p.gamma;
    double cd = (p.shape.d >= 3) ? c_d(p.shape.d) : 1e300;
    std::vector<double> lam = all_eigenvalues(p.shape);
    ms.sigma.resize(lam.size());
    if (theta_eff >= cd) {
        ms.massless = true;
        ms.m = 0;
        for (std::size_t k = 1; k < lam.size(); ++k)
            ms.sigma[k] = std::sqrt(0.5 / (p.theta * lam[k]));
        ms.sigma[0] = 0;
    } else {
        ms.massless = false;
        ms.m = solve_mass(theta_eff, p.shape.d);
        for (std::size_t k = 0; k < lam.size(); ++k)
            ms.sigma[k] = std::sqrt(0.5 / (p.theta * (lam[k] + ms.m)));
    }
    return ms;
}

void check_params(const SphericalParams& p) {
    if (!(p.theta > 0)) throw std::invalid_argument("spherical: theta must be positive");
    if (!(p.gamma > 0 && p.gamma <= 1))
        throw std::invalid_argument("spherical: gamma must be in (0,1]");
}

}  // namespace

SampleBatch sample_spherical(const SphericalParams& params, long count, std::uint64_t seed) {
    check_params(params);
    if (params.boundary) throw std::invalid_argument("sample_spherical: boundary not allowed here");
    ModeSampler ms = make_mode_sampler(params);
    SampleBatch batch;
    batch.seed = seed;
    batch.count = count;
    batch.theta = params.theta;
    batch.gamma = params.gamma;
    batch.fields.resize(std::size_t(count));

    int threads = std::min<long>(worker_threads(), std::max<long>(1, count));
    std::vector<long> attempts(std::size_t(threads), 0);
    std::vector<char> failed(std::size_t(threads), 0);
    auto worker = [&](int t) {
        long lo = count * t / threads, hi = count * (t + 1) / threads;
        std::vector<cplx> y(std::size_t(ms.shape.N));
        long att = 0;
        for (long i = lo; i < hi; ++i) {
            Rng rng(seed, "spherical", std::uint64_t(i));
            double mass = 0;
            long local = 0;
            for (;;) {
                ++att;
                ++local;
                if (ms.attempt(rng, y, mass)) break;
                if (local > 400000 && double(local) > 4.0 / params.min_accept) {
                    failed[std::size_t(t)] = 1;
                    attempts[std::size_t(t)] = att;
                    return;
                }
            }
            Field yk(ms.shape);
            yk.v = y;
            batch.fields[std::size_t(i)] = inverse_fourier(yk);
        }
        attempts[std::size_t(t)] = att;
    };
    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
        for (auto& th : pool) th.join();
    }
    batch.attempts = 0;
    for (long a : attempts) batch.attempts += a;
    bool any_failed = false;
    for (char fchar : failed) any_failed |= (fchar != 0);
    batch.acceptance = batch.attempts ? double(count) / double(batch.attempts) : 0.0;
    if (any_failed) throw AcceptanceRateError(batch.acceptance);
    return batch;
}

namespace {

// shared machinery for drawing the Dirichlet Gaussian psi_1 with covariance
// (1/theta) (-Delta_{U^c} + m)^{-1}
struct DirichletSampler {
    TorusShape shape;
    std::vector<long> free_sites;
    bool use_spectrum = false;
    // spectral path
    Eigen::MatrixXd vecs;
    Eigen::VectorXd scale;  // 1/sqrt(theta (lambda_i + m))
    // sparse path: A = P^T L L^T P, draw x = P^T L^{-T} z / sqrt(theta)
    std::unique_ptr<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>> llt;
    double inv_sqrt_theta = 1;

    void draw(Rng& rng, Field& out) const {
        long k = long(free_sites.size());
        Eigen::VectorXd zr(k), zi(k);
        for (long i = 0; i < k; ++i) {
            zr(i) = rng.gaussian() * M_SQRT1_2;
            zi(i) = rng.gaussian() * M_SQRT1_2;
        }
        Eigen::VectorXd xr, xi;
        if (use_spectrum) {
            xr = vecs * (scale.asDiagonal() * zr);
            xi = vecs * (scale.asDiagonal() * zi);
        } else {
            xr = llt->permutationPinv() * llt->matrixU().solve(zr);
            xi = llt->permutationPinv() * llt->matrixU().solve(zi);
            xr *= inv_sqrt_theta;
            xi *= inv_sqrt_theta;
        }
        std::fill(out.v.begin(), out.v.end(), cplx{0, 0});
        for (long i = 0; i < k; ++i) out.v[std::size_t(free_sites[std::size_t(i)])] = cplx{xr(i), xi(i)};
    }
};

DirichletSampler make_dirichlet_sampler(const TorusShape& shape, const SiteSet& U, double theta,
                                        double m, const DirichletSpectrum* sp) {
    DirichletSampler ds;
    ds.shape = shape;
    long nfree = shape.N - U.size();
    if (nfree <= 4096 && sp) {
        ds.use_spectrum = true;
        ds.free_sites = sp->free_sites;
        ds.vecs = sp->eigenvectors;
        ds.scale.resize(sp->eigenvalues.size());
        for (long i = 0; i < sp->eigenvalues.size(); ++i)
            ds.scale(i) = 1.0 / std::sqrt(theta * (sp->eigenvalues(i) + m));
        return ds;
    }
    // sparse factorization of (-Delta_{U^c} + m)
    std::vector<long> pos(std::size_t(shape.N), -1);
    for (long i = 0; i < shape.N; ++i)
        if (!U.contains(i)) {
            pos[std::size_t(i)] = long(ds.free_sites.size());
            ds.free_sites.push_back(i);
        }
    long kf = long(ds.free_sites.size());
    std::vector<Eigen::Triplet<double>> trip;
    for (long r = 0; r < kf; ++r) {
        long i = ds.free_sites[std::size_t(r)];
        trip.emplace_back(r, r, 2.0 * shape.d + m);
        for (int a = 0; a < shape.d; ++a)
            for (int dir : {+1, -1}) {
                long j = shape.neighbor(i, a, dir);
                long c = pos[std::size_t(j)];
                if (c >= 0) trip.emplace_back(r, c, -1.0);
            }
    }
    Eigen::SparseMatrix<double> A(kf, kf);
    A.setFromTriplets(trip.begin(), trip.end());
    ds.llt = std::make_unique<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>>();
    ds.llt->compute(A);
    if (ds.llt->info() != Eigen::Success)
        throw std::runtime_error("dirichlet sampler: factorization failed");
    ds.inv_sqrt_theta = 1.0 / std::sqrt(theta);
    ds.use_spectrum = false;
    return ds;
}

}  // namespace

SampleBatch sample_spherical_boundary(const SphericalParams& params, long count,
                                      std::uint64_t seed) {
    check_params(params);
    if (!params.boundary || params.boundary->U.sites.empty()) {
        // degenerate case: identical in law to the plain sampler
        SphericalParams plain = params;
        plain.boundary.reset();
        return sample_spherical(plain, count, seed);
    }
    const Boundary& bd = *params.boundary;
    const TorusShape& shape = params.shape;
    long nfree = shape.N - bd.U.size();

    std::optional<DirichletSpectrum> sp;
    const DirichletSpectrum* spp = nullptr;
    if (nfree <= 4096) {
        sp = dirichlet_spectrum(shape, bd.U);
        spp = &*sp;
    }
    double mN = solve_mass_with_boundary(shape, bd.U, bd.f, params.theta, params.gamma, spp);
    Field h = harmonic_extension(shape, bd.U, bd.f, mN);
    DirichletSampler ds = make_dirichlet_sampler(shape, bd.U, params.theta, mN, spp);

    SampleBatch batch;
    batch.seed = seed;
    batch.count = count;
    batch.theta = params.theta;
    batch.gamma = params.gamma;
    batch.fields.resize(std::size_t(count));
    double ball = params.gamma * double(shape.N);

    long attempts = 0;
    bool fail = false;
    Field psi1(shape);
    for (long i = 0; i < count && !fail; ++i) {
        Rng rng(seed, "spherical-bd", std::uint64_t(i));
        long local = 0;
        for (;;) {
            ++attempts;
            ++local;
            ds.draw(rng, psi1);
            // psi = psi1 + h on the free sites; mass counted on U^c only
            double s = 0;
            for (long rpos = 0; rpos < long(ds.free_sites.size()); ++rpos) {
                long site = ds.free_sites[std::size_t(rpos)];
                psi1.v[std::size_t(site)] += h.v[std::size_t(site)];
                s += std::norm(psi1.v[std::size_t(site)]);
            }
            bool ok = false;
            if (s <= ball) {
                double logw = params.theta * mN * (s - ball);
                ok = std::log(rng.uniform()) < logw;
            }
            if (ok) {
                Field& out = batch.fields[std::size_t(i)];
                out = psi1;
                for (long u : bd.U.sites) out.v[std::size_t(u)] = bd.f.v[std::size_t(u)];
                break;
            }
            if (local > 400000 && double(local) > 4.0 / params.min_accept) {
                fail = true;
                break;
            }
        }
    }
    batch.attempts = attempts;
    batch.acceptance = attempts ? double(count) / double(attempts) : 0.0;
    if (fail) throw AcceptanceRateError(batch.acceptance);
    return batch;
}

SampleBatch sample_spherical_mcmc(const SphericalParams& params, long count, std::uint64_t seed,
                                  long sweeps_between, long burnin_sweeps) {
    check_params(params);
    if (params.boundary) throw std::invalid_argument("mcmc fallback: boundary not supported");
    const TorusShape& shape = params.shape;
    std::vector<double> lam = all_eigenvalues(shape);
    double theta_eff = params.theta * params.gamma;
    double m = (shape.d >= 3 && theta_eff < c_d(shape.d)) ? solve_mass(theta_eff, shape.d) : 0.0;
    double ball = params.gamma * double(shape.N);

    Rng rng(seed, "spherical-mcmc", 0);
    std::vector<cplx> y(std::size_t(shape.N));
    // start from the tilted Gaussian projected into the ball
    double mass = 0;
    for (long k = 0; k < shape.N; ++k) {
        double sd = std::sqrt(0.5 / (params.theta * (lam[std::size_t(k)] + m + (k == 0 ? 1e-3 : 0))));
        y[std::size_t(k)] = cplx{sd * rng.gaussian(), sd * rng.gaussian()};
        mass += std::norm(y[std::size_t(k)]);
    }
    if (mass > ball) {
        double sc = std::sqrt(0.5 * ball / mass);
        for (auto& z : y) z *= sc;
        mass *= sc * sc;
    }

    SampleBatch batch;
    batch.seed = seed;
    batch.count = count;
    batch.theta = params.theta;
    batch.gamma = params.gamma;
    batch.exact = false;
    batch.fields.reserve(std::size_t(count));

    long accepted = 0, proposed = 0;
    auto sweep = [&]() {
        for (long k = 0; k < shape.N; ++k) {
            double lk = lam[std::size_t(k)];
            double sd = std::sqrt(0.5 / (params.theta * (lk + m + 0.05)));
            cplx prop = y[std::size_t(k)] + cplx{sd * rng.gaussian(), sd * rng.gaussian()};
            double dmass = std::norm(prop) - std::norm(y[std::size_t(k)]);
            ++proposed;
            if (mass + dmass > ball) continue;
            double dlog = -params.theta * lk * dmass;
            if (dlog >= 0 || std::log(rng.uniform()) < dlog) {
                y[std::size_t(k)] = prop;
                mass += dmass;
                ++accepted;
            }
        }
    };
    for (long s = 0; s < burnin_sweeps; ++s) sweep();
    for (long i = 0; i < count; ++i) {
        for (long s = 0; s < sweeps_between; ++s) sweep();
        Field yk(shape);
        yk.v = y;
        batch.fields.push_back(inverse_fourier(yk));
    }
    batch.attempts = proposed;
    batch.acceptance = proposed ? double(accepted) / double(proposed) : 0.0;
    return batch;
}

CovarianceTable empirical_covariance(const std::vector<Field>& fields,
                                     const std::vector<std::vector<int>>& offsets, bool center,
                                     const std::vector<char>* allowed) {
    if (fields.empty()) throw std::invalid_argument("empirical_covariance: empty batch");
    const TorusShape& shape = fields.front().shape;
    const int nbatch = 20;
    long M = long(fields.size());

    CovarianceTable table;
    table.samples = M;
    table.entries.resize(offsets.size());

    // precompute per-offset shifted index map
    std::vector<std::vector<long>> shift_map(offsets.size(), std::vector<long>(std::size_t(shape.N)));
    for (std::size_t o = 0; o < offsets.size(); ++o)
        for (long i = 0; i < shape.N; ++i) shift_map[o][std::size_t(i)] = shape.shifted(i, offsets[o]);

    std::vector<std::vector<cplx>> batch_means(offsets.size(),
                                               std::vector<cplx>(std::size_t(nbatch), cplx{0, 0}));
    std::vector<std::vector<long>> batch_counts(offsets.size(),
                                                std::vector<long>(std::size_t(nbatch), 0));

    std::vector<cplx> work(std::size_t(shape.N));
    for (long s = 0; s < M; ++s) {
        int b = int(s * nbatch / M);
        const Field& f = fields[std::size_t(s)];
        const cplx* src = f.v.data();
        if (center) {
            cplx mean{0, 0};
            long cnt = 0;
            for (long i = 0; i < shape.N; ++i)
                if (!allowed || (*allowed)[std::size_t(i)]) {
                    mean += f.v[std::size_t(i)];
                    ++cnt;
                }
            mean /= double(cnt);
            for (long i = 0; i < shape.N; ++i) work[std::size_t(i)] = f.v[std::size_t(i)] - mean;
            src = work.data();
        }
        for (std::size_t o = 0; o < offsets.size(); ++o) {
            cplx acc{0, 0};
            long cnt = 0;
            const auto& map = shift_map[o];
            for (long x = 0; x < shape.N; ++x) {
                long xo = map[std::size_t(x)];
                if (allowed && (!(*allowed)[std::size_t(x)] || !(*allowed)[std::size_t(xo)])) continue;
                acc += src[xo] * std::conj(src[x]);
                ++cnt;
            }
            if (cnt) {
                batch_means[o][std::size_t(b)] += acc / double(cnt);
                batch_counts[o][std::size_t(b)] += 1;
            }
        }
    }

    for (std::size_t o = 0; o < offsets.size(); ++o) {
        cplx total{0, 0};
        std::vector<cplx> bm;
        for (int b = 0; b < nbatch; ++b)
            if (batch_counts[o][std::size_t(b)]) {
                cplx v = batch_means[o][std::size_t(b)] / double(batch_counts[o][std::size_t(b)]);
                bm.push_back(v);
                total += v;
            }
        long nb = long(bm.size());
        cplx mean = total / double(nb);
        double vr = 0, vi = 0;
        for (const cplx& v : bm) {
            vr += (v.real() - mean.real()) * (v.real() - mean.real());
            vi += (v.imag() - mean.imag()) * (v.imag() - mean.imag());
        }
        CovarianceEntry e;
        e.offset = offsets[o];
        e.mean = mean;
        e.se_re = nb > 1 ? std::sqrt(vr / double(nb - 1) / double(nb)) : 0.0;
        e.se_im = nb > 1 ? std::sqrt(vi / double(nb - 1) / double(nb)) : 0.0;
        table.entries[o] = e;
    }
    return table;
}

}  // namespace nlstorus
