#include "nlstorus/nls_field.hpp"

#include <algorithm>
#include <cmath>

#include "nlstorus/kernels.hpp"
#include "nlstorus/tempering.hpp"

namespace nlstorus {

namespace {

bool violates_cap(const NlsParams& p, double abs2) {
    return p.linf_cap && abs2 > (*p.linf_cap) * (*p.linf_cap) * (1 + 1e-15);
}

}  // namespace

double log_density(const NlsParams& params, const Field& f) {
    const TorusShape& s = params.shape;
    double nuN = nu_n(params.nu, params.p, s.N);
    double mass_free = 0;
    if (params.boundary && !params.boundary->U.sites.empty()) {
        const SiteSet& U = params.boundary->U;
        for (long i = 0; i < s.N; ++i)
            if (!U.contains(i)) mass_free += std::norm(f.v[std::size_t(i)]);
        // boundary equality is a hard constraint
        for (long i : U.sites)
            if (std::abs(f.v[std::size_t(i)] - params.boundary->f.v[std::size_t(i)]) > 0)
                return -std::numeric_limits<double>::infinity();
    } else {
        mass_free = norm2_sq(f);
    }
    if (mass_free > params.gamma * double(s.N) * (1 + 1e-15))
        return -std::numeric_limits<double>::infinity();
    if (params.linf_cap && norm_inf(f) > *params.linf_cap * (1 + 1e-15))
        return -std::numeric_limits<double>::infinity();
    return params.theta * (nuN * norm_pp(f, params.p) - dirichlet_energy(f));
}

namespace mcmc_detail {

void State::sync() {
    const TorusShape& s = params.shape;
    S2 = 0;
    total = cplx{0, 0};
    for (long i : movable_sites) {
        S2 += std::norm(psi[std::size_t(i)]);
        total += psi[std::size_t(i)];
    }
    Field f(s);
    f.v = psi;
    Sp = norm_pp(f, params.p);
    Sgrad = dirichlet_energy(f);
}

State make_state(const NlsParams& params, const Field& start, NeighborTable& nbr) {
    State st;
    st.params = params;
    st.nbr = &nbr;
    st.psi = start.v;
    st.nuN = nu_n(params.nu, params.p, params.shape.N);
    st.movable.assign(std::size_t(params.shape.N), 1);
    if (params.boundary && !params.boundary->U.sites.empty()) {
        for (long i : params.boundary->U.sites) {
            st.movable[std::size_t(i)] = 0;
            st.psi[std::size_t(i)] = params.boundary->f.v[std::size_t(i)];
        }
    }
    for (long i = 0; i < params.shape.N; ++i)
        if (st.movable[std::size_t(i)]) st.movable_sites.push_back(i);
    st.sync();
    return st;
}

namespace {

// gradient contribution of the edges at `site` against current neighbors
inline double local_grad(const State& st, long site, cplx value) {
    const std::int32_t* row = st.nbr->row(site);
    double acc = 0;
    for (int j = 0; j < st.nbr->deg; ++j) acc += std::norm(value - st.psi[std::size_t(row[j])]);
    return acc;
}

inline double site_pow(const State& st, cplx z) {
    return kernels::abs_pow(z.real(), z.imag(), st.params.p);
}

}  // namespace

Proposal propose_site_gauss(const State& st, long site, cplx delta) {
    Proposal pr;
    pr.kind = 0;
    pr.site = site;
    cplx oldv = st.psi[std::size_t(site)];
    cplx newv = oldv + delta;
    pr.new_value = newv;
    pr.dS2 = std::norm(newv) - std::norm(oldv);
    if (st.S2 + pr.dS2 > st.params.gamma * double(st.params.shape.N)) return pr;
    if (violates_cap(st.params, std::norm(newv))) return pr;
    pr.dSgrad = local_grad(st, site, newv) - local_grad(st, site, oldv);
    pr.dSp = site_pow(st, newv) - site_pow(st, oldv);
    pr.log_ratio = st.params.theta * (st.nuN * pr.dSp - pr.dSgrad);
    pr.valid = true;
    return pr;
}

Proposal propose_radial(const State& st, long site, double log_scale) {
    Proposal pr;
    pr.kind = 1;
    pr.site = site;
    cplx oldv = st.psi[std::size_t(site)];
    if (std::norm(oldv) < 1e-300) return pr;  // radial coordinate degenerate at 0
    double r = std::exp(log_scale);
    cplx newv = r * oldv;
    pr.new_value = newv;
    pr.dS2 = std::norm(newv) - std::norm(oldv);
    if (st.S2 + pr.dS2 > st.params.gamma * double(st.params.shape.N)) return pr;
    if (violates_cap(st.params, std::norm(newv))) return pr;
    pr.dSgrad = local_grad(st, site, newv) - local_grad(st, site, oldv);
    pr.dSp = site_pow(st, newv) - site_pow(st, oldv);
    // radius move in the (radius, phase) chart carries the area factor r^2
    pr.log_ratio = st.params.theta * (st.nuN * pr.dSp - pr.dSgrad) + 2.0 * log_scale;
    pr.valid = true;
    return pr;
}

Proposal propose_zero_shift(const State& st, cplx delta) {
    Proposal pr;
    pr.kind = 2;
    pr.shift = delta;
    long nm = long(st.movable_sites.size());
    if (nm != st.params.shape.N) return pr;  // disabled under boundary pinning
    pr.dS2 = 2.0 * (std::conj(delta) * st.total).real() + double(nm) * std::norm(delta);
    if (st.S2 + pr.dS2 > st.params.gamma * double(st.params.shape.N)) return pr;
    double new_sp = 0;
    double cap2 = st.params.linf_cap ? (*st.params.linf_cap) * (*st.params.linf_cap) : 0;
    for (long i = 0; i < st.params.shape.N; ++i) {
        cplx z = st.psi[std::size_t(i)] + delta;
        if (st.params.linf_cap && std::norm(z) > cap2 * (1 + 1e-15)) return pr;
        new_sp += site_pow(st, z);
    }
    pr.dSp = new_sp - st.Sp;
    pr.dSgrad = 0.0;  // constants are in the kernel of the gradient
    pr.log_ratio = st.params.theta * st.nuN * pr.dSp;
    pr.valid = true;
    return pr;
}

Proposal propose_teleport(const State& st, long site, double new_site_mass, double phase) {
    Proposal pr;
    pr.kind = 3;
    pr.site = site;
    double a = std::norm(st.psi[std::size_t(site)]);
    double M = st.S2;
    double rest = M - a;
    if (rest <= 1e-300) return pr;
    if (new_site_mass < 0 || new_site_mass >= M) return pr;
    double t = std::sqrt((M - new_site_mass) / rest);
    pr.bulk_scale = t;
    long nm = long(st.movable_sites.size());
    bool pinned = nm != st.params.shape.N;

    double rad = std::sqrt(new_site_mass);
    pr.new_value = cplx{rad * std::cos(phase), rad * std::sin(phase)};

    if (violates_cap(st.params, new_site_mass)) return pr;
    if (st.params.linf_cap && t > 1.0) {
        double cap2 = (*st.params.linf_cap) * (*st.params.linf_cap);
        for (long i : st.movable_sites)
            if (i != site && std::norm(st.psi[std::size_t(i)]) * t * t > cap2 * (1 + 1e-15))
                return pr;
    }

    double p = st.params.p;
    double tp = std::pow(t, p);
    double new_sp, new_sgrad;
    if (!pinned) {
        new_sp = tp * (st.Sp - site_pow(st, st.psi[std::size_t(site)])) + std::pow(new_site_mass, 0.5 * p);
        // edges at the site need the exact values; the rest scales by t^2
        double gx_old = local_grad(st, site, st.psi[std::size_t(site)]);
        double gx_new = 0;
        const std::int32_t* row = st.nbr->row(site);
        for (int j = 0; j < st.nbr->deg; ++j)
            gx_new += std::norm(pr.new_value - t * st.psi[std::size_t(row[j])]);
        new_sgrad = t * t * (st.Sgrad - gx_old) + gx_new;
    } else {
        // with pinned sites the bulk scaling is not a global similarity;
        // recompute the sums over the full stencil
        const TorusShape& s = st.params.shape;
        auto value_at = [&](long i) -> cplx {
            if (i == site) return pr.new_value;
            if (!st.movable[std::size_t(i)]) return st.psi[std::size_t(i)];
            return t * st.psi[std::size_t(i)];
        };
        new_sp = 0;
        for (long i = 0; i < s.N; ++i) new_sp += site_pow(st, value_at(i));
        new_sgrad = 0;
        for (long i = 0; i < s.N; ++i) {
            for (int axishift = 0; axishift < s.d; ++axishift) {
                long j = s.neighbor(i, axishift, +1);
                new_sgrad += std::norm(value_at(i) - value_at(j));
            }
        }
    }
    pr.dSp = new_sp - st.Sp;
    pr.dSgrad = new_sgrad - st.Sgrad;
    pr.dS2 = 0.0;  // teleport conserves the free-site mass exactly
    double jac = (2.0 * double(nm) - 4.0) * std::log(t);
    pr.log_ratio = st.params.theta * (st.nuN * pr.dSp - pr.dSgrad) + jac;
    pr.valid = true;
    return pr;
}

void apply(State& st, const Proposal& pr) {
    switch (pr.kind) {
        case 0:
        case 1: {
            cplx oldv = st.psi[std::size_t(pr.site)];
            st.psi[std::size_t(pr.site)] = pr.new_value;
            st.total += pr.new_value - oldv;
            break;
        }
        case 2: {
            for (long i : st.movable_sites) st.psi[std::size_t(i)] += pr.shift;
            st.total += double(st.movable_sites.size()) * pr.shift;
            break;
        }
        case 3: {
            double t = pr.bulk_scale;
            cplx oldv = st.psi[std::size_t(pr.site)];
            cplx newtotal{0, 0};
            for (long i : st.movable_sites) {
                if (i == pr.site) continue;
                st.psi[std::size_t(i)] *= t;
                newtotal += st.psi[std::size_t(i)];
            }
            st.psi[std::size_t(pr.site)] = pr.new_value;
            st.total = newtotal + pr.new_value;
            (void)oldv;
            break;
        }
    }
    st.S2 += pr.dS2;
    st.Sp += pr.dSp;
    st.Sgrad += pr.dSgrad;
}

}  // namespace mcmc_detail

namespace {

double integrated_autocorrelation(const std::vector<double>& xs) {
    long n = long(xs.size());
    if (n < 8) return 1.0;
    double mean = 0;
    for (double x : xs) mean += x;
    mean /= double(n);
    double var = 0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= double(n);
    if (var <= 0) return 1.0;
    double iat = 1.0;
    for (long lag = 1; lag < n / 4; ++lag) {
        double c = 0;
        for (long i = 0; i + lag < n; ++i) c += (xs[std::size_t(i)] - mean) * (xs[std::size_t(i + lag)] - mean);
        c /= double(n - lag) * var;
        if (c <= 0.02) break;
        iat += 2.0 * c;
    }
    return iat;
}

}  // namespace

ChainRecord run_mcmc(const NlsParams& params, const Schedule& schedule, std::uint64_t seed,
                     const Field* init) {
    const TorusShape& s = params.shape;
    if (!(params.theta > 0)) throw std::invalid_argument("run_mcmc: theta must be positive");
    if (params.nu < 0) throw std::invalid_argument("run_mcmc: nu must be >= 0");
    if (!(params.p > 2)) throw std::invalid_argument("run_mcmc: p must be > 2");
    MoveMixture mix = schedule.mix;
    bool pinned = params.boundary && !params.boundary->U.sites.empty();
    if (pinned) {
        mix.site_gauss += mix.zero_shift;  // zero-mode shifts break the pinning
        mix.zero_shift = 0;
    }
    if (!(mix.site_gauss > 0))
        throw std::invalid_argument("run_mcmc: nonergodic schedule (site moves disabled)");
    double mix_total = mix.site_gauss + mix.radial + mix.zero_shift + mix.teleport;

    NeighborTable nbr(s);
    Rng rng(seed, "nls-mcmc", 0);

    Field start(s);
    if (init) {
        start = *init;
    } else {
        double target = 0.3 * params.gamma * double(s.N);
        double acc = 0;
        for (long i = 0; i < s.N; ++i) {
            start.v[std::size_t(i)] = cplx{rng.gaussian(), rng.gaussian()};
            acc += std::norm(start.v[std::size_t(i)]);
        }
        double sc = std::sqrt(target / acc);
        for (auto& z : start.v) z *= sc;
        if (params.linf_cap)
            for (auto& z : start.v)
                if (std::abs(z) > *params.linf_cap) z *= 0.9 * *params.linf_cap / std::abs(z);
    }
    mcmc_detail::State st = mcmc_detail::make_state(params, start, nbr);
    if (st.S2 > params.gamma * double(s.N))
        throw std::invalid_argument("run_mcmc: initial state violates the mass constraint");

    double sigma_site = 0.4 * std::sqrt(1.0 / params.theta);
    double s_radial = 0.5;
    double sigma_shift = 0.5 * std::sqrt(1.0 / (params.theta * double(s.N)));
    double amax_frac = 0.98;

    long nm = long(st.movable_sites.size());
    ChainRecord rec;
    rec.seed = seed;
    rec.sweeps = schedule.sweeps;
    rec.burnin = schedule.burnin;

    long prop_cnt[4] = {0, 0, 0, 0}, acc_cnt[4] = {0, 0, 0, 0};
    long adapt_prop[4] = {0, 0, 0, 0}, adapt_acc[4] = {0, 0, 0, 0};

    long total_sweeps = schedule.burnin + schedule.sweeps;
    long snap_stride = std::max<long>(1, schedule.sweeps / std::max<long>(1, schedule.max_snapshots));
    std::vector<double> tilt_trace;

    for (long sweep = 0; sweep < total_sweeps; ++sweep) {
        for (long step = 0; step < nm; ++step) {
            double u = rng.uniform() * mix_total;
            int kind;
            if (u < mix.site_gauss)
                kind = 0;
            else if (u < mix.site_gauss + mix.radial)
                kind = 1;
            else if (u < mix.site_gauss + mix.radial + mix.zero_shift)
                kind = 2;
            else
                kind = 3;
            mcmc_detail::Proposal pr;
            switch (kind) {
                case 0: {
                    long site = st.movable_sites[std::size_t(rng.below(std::uint64_t(nm)))];
                    cplx delta{sigma_site * rng.gaussian() * M_SQRT1_2,
                               sigma_site * rng.gaussian() * M_SQRT1_2};
                    pr = mcmc_detail::propose_site_gauss(st, site, delta);
                    break;
                }
                case 1: {
                    long site = st.movable_sites[std::size_t(rng.below(std::uint64_t(nm)))];
                    double ls = rng.uniform(-s_radial, s_radial);
                    pr = mcmc_detail::propose_radial(st, site, ls);
                    break;
                }
                case 2: {
                    cplx delta{sigma_shift * rng.gaussian() * M_SQRT1_2,
                               sigma_shift * rng.gaussian() * M_SQRT1_2};
                    pr = mcmc_detail::propose_zero_shift(st, delta);
                    break;
                }
                default: {
                    long site = st.movable_sites[std::size_t(rng.below(std::uint64_t(nm)))];
                    double cap = amax_frac * std::min(params.gamma * double(s.N), st.S2);
                    double amass = cap * rng.uniform();
                    double phase = 2.0 * M_PI * rng.uniform();
                    // the reverse draw must be able to produce the current
                    // site mass from the same uniform window
                    if (std::norm(st.psi[std::size_t(site)]) <= cap)
                        pr = mcmc_detail::propose_teleport(st, site, amass, phase);
                    break;
                }
            }
            ++prop_cnt[kind];
            ++adapt_prop[kind];
            if (pr.valid && (pr.log_ratio >= 0 || std::log(rng.uniform()) < pr.log_ratio)) {
                mcmc_detail::apply(st, pr);
                ++acc_cnt[kind];
                ++adapt_acc[kind];
            }
        }
        if ((sweep + 1) % 64 == 0) st.sync();  // kill floating-point drift

        if (schedule.adapt && sweep < schedule.burnin && (sweep + 1) % 200 == 0) {
            auto tune = [](double& scale, long acc, long prop) {
                if (prop < 50) return;
                double rate = double(acc) / double(prop);
                if (rate < 0.23) scale *= 0.8;
                if (rate > 0.45) scale *= 1.25;
            };
            tune(sigma_site, adapt_acc[0], adapt_prop[0]);
            tune(s_radial, adapt_acc[1], adapt_prop[1]);
            tune(sigma_shift, adapt_acc[2], adapt_prop[2]);
            s_radial = std::min(s_radial, 3.0);
            for (int k = 0; k < 4; ++k) adapt_prop[k] = adapt_acc[k] = 0;
        }

        bool measuring = sweep >= schedule.burnin;
        if ((sweep + 1) % schedule.trace_interval == 0) {
            TraceRow row;
            row.sweep = sweep + 1;
            row.mass_fraction_total = st.S2 / double(s.N);
            double mx = 0;
            for (long i : st.movable_sites) mx = std::max(mx, std::norm(st.psi[std::size_t(i)]));
            row.linf_over_sqrtN = std::sqrt(mx / double(s.N));
            row.tilt = st.nuN * st.Sp;
            row.sep_mass_fraction = 0;
            if (!pinned && st.S2 < double(s.N) * (1 - 1e-9)) {
                Field f(s);
                f.v = st.psi;
                SeparatingSet ss = separating_set(f, schedule.sep_eps);
                row.sep_mass_fraction = mass_fraction(f, ss.U);
            }
            rec.trace.push_back(row);
            if (measuring) tilt_trace.push_back(row.tilt);
        }
        if (measuring && (sweep - schedule.burnin + 1) % snap_stride == 0 &&
            long(rec.snapshots.size()) < schedule.max_snapshots) {
            Field f(s);
            f.v = st.psi;
            rec.snapshots.push_back(std::move(f));
        }
    }

    rec.accept_site = prop_cnt[0] ? double(acc_cnt[0]) / double(prop_cnt[0]) : 0;
    rec.accept_radial = prop_cnt[1] ? double(acc_cnt[1]) / double(prop_cnt[1]) : 0;
    rec.accept_shift = prop_cnt[2] ? double(acc_cnt[2]) / double(prop_cnt[2]) : 0;
    rec.accept_teleport = prop_cnt[3] ? double(acc_cnt[3]) / double(prop_cnt[3]) : 0;
    rec.final_state = Field(s);
    rec.final_state.v = st.psi;
    rec.iat_tilt = integrated_autocorrelation(tilt_trace);
    long thin = schedule.thin_snapshots;
    if (thin <= 0) thin = std::max<long>(snap_stride, long(std::ceil(rec.iat_tilt * schedule.trace_interval / 4.0)));
    rec.thin = thin;
    if (thin > snap_stride && !rec.snapshots.empty()) {
        long keep_every = (thin + snap_stride - 1) / snap_stride;
        std::vector<Field> kept;
        for (std::size_t i = 0; i < rec.snapshots.size(); i += std::size_t(keep_every))
            kept.push_back(std::move(rec.snapshots[i]));
        rec.snapshots = std::move(kept);
    }
    return rec;
}

ReweightResult importance_reweight_spherical(const SampleBatch& batch, const NlsParams& params,
                                             const std::vector<std::vector<int>>& offsets,
                                             double ess_floor) {
    if (batch.fields.empty()) throw std::invalid_argument("reweight: empty batch");
    const TorusShape& s = params.shape;
    if (!(s == batch.fields.front().shape))
        throw std::invalid_argument("reweight: shape mismatch");
    double nuN = nu_n(params.nu, params.p, s.N);
    long M = long(batch.fields.size());
    std::vector<double> logw(static_cast<std::size_t>(M), 0.0);
    double maxlw = -1e300;
    for (long i = 0; i < M; ++i) {
        double lw = params.theta * nuN * norm_pp(batch.fields[std::size_t(i)], params.p);
        logw[std::size_t(i)] = lw;
        maxlw = std::max(maxlw, lw);
    }
    double sw = 0, sw2 = 0, sexp = 0;
    for (double lw : logw) {
        double w = std::exp(lw - maxlw);
        sw += w;
        sw2 += w * w;
        sexp += std::exp(lw);
    }
    ReweightResult out;
    out.ess = sw * sw / sw2;
    out.mean_weight = sexp / double(M);
    if (out.ess < ess_floor) throw EssFloorError(out.ess);

    double mass = 0;
    for (long i = 0; i < M; ++i)
        mass += std::exp(logw[std::size_t(i)] - maxlw) * norm2_sq(batch.fields[std::size_t(i)]);
    out.mass_mean = mass / sw / double(s.N);

    // weighted two-point estimator with batch-mean errors over 20 blocks
    out.covariance.entries.resize(offsets.size());
    out.covariance.samples = M;
    const int nb = 20;
    for (std::size_t o = 0; o < offsets.size(); ++o) {
        std::vector<long> map(std::size_t(s.N));
        for (long i = 0; i < s.N; ++i) map[std::size_t(i)] = s.shifted(i, offsets[o]);
        std::vector<double> bw(nb, 0.0);
        std::vector<cplx> bv(nb, cplx{0, 0});
        for (long i = 0; i < M; ++i) {
            int b = int(i * nb / M);
            const Field& f = batch.fields[std::size_t(i)];
            cplx acc{0, 0};
            for (long x = 0; x < s.N; ++x) acc += f.v[std::size_t(map[std::size_t(x)])] * std::conj(f.v[std::size_t(x)]);
            double w = std::exp(logw[std::size_t(i)] - maxlw);
            bv[std::size_t(b)] += w * acc / double(s.N);
            bw[std::size_t(b)] += w;
        }
        cplx mean{0, 0};
        std::vector<cplx> ratios;
        double wtot = 0;
        for (int b = 0; b < nb; ++b)
            if (bw[std::size_t(b)] > 0) {
                ratios.push_back(bv[std::size_t(b)] / bw[std::size_t(b)]);
                mean += bv[std::size_t(b)];
                wtot += bw[std::size_t(b)];
            }
        mean /= wtot;
        double vr = 0, vi = 0;
        for (const cplx& r : ratios) {
            vr += (r.real() - mean.real()) * (r.real() - mean.real());
            vi += (r.imag() - mean.imag()) * (r.imag() - mean.imag());
        }
        long k = long(ratios.size());
        CovarianceEntry e;
        e.offset = offsets[o];
        e.mean = mean;
        e.se_re = k > 1 ? std::sqrt(vr / double(k - 1) / double(k)) : 0;
        e.se_im = k > 1 ? std::sqrt(vi / double(k - 1) / double(k)) : 0;
        out.covariance.entries[o] = e;
    }
    return out;
}

}  // namespace nlstorus
