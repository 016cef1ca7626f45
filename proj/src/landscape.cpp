#include "nlstorus/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlstorus/lattice.hpp"
#include "nlstorus/rng.hpp"

namespace nlstorus {

namespace {

constexpr double kPlateauTol = 1e-6;

struct Box {
    int d, L;
    long N;
    std::vector<long> stride;
    Box(int d_, int L_) : d(d_), L(L_) {
        N = 1;
        stride.assign(std::size_t(d), 0);
        long acc = 1;
        for (int a = d - 1; a >= 0; --a) {
            stride[std::size_t(a)] = acc;
            acc *= L;
        }
        N = acc;
    }
    long nb(long i, int axis, int dir) const {
        long st = stride[std::size_t(axis)];
        long block = st * L;
        long base = (i / block) * block;
        long off = i - base;
        long c = off / st;
        long rest = off - c * st;
        long cc = c + dir;
        if (cc >= L) cc -= L;
        if (cc < 0) cc += L;
        return base + cc * st + rest;
    }
};

double box_energy(const Box& bx, const std::vector<double>& psi, double p, double coeff) {
    double grad = 0, pp = 0;
    for (long i = 0; i < bx.N; ++i) {
        double v = psi[std::size_t(i)];
        for (int a = 0; a < bx.d; ++a) {
            double dvi = v - psi[std::size_t(bx.nb(i, a, +1))];
            grad += dvi * dvi;
        }
        pp += std::pow(std::abs(v), p);
    }
    return grad - (2.0 / p) * coeff * pp;
}

void box_gradient(const Box& bx, const std::vector<double>& psi, double p, double coeff,
                  std::vector<double>& g) {
    for (long i = 0; i < bx.N; ++i) {
        double v = psi[std::size_t(i)];
        double acc = 2.0 * bx.d * v;
        for (int a = 0; a < bx.d; ++a)
            acc -= psi[std::size_t(bx.nb(i, a, +1))] + psi[std::size_t(bx.nb(i, a, -1))];
        double av = std::abs(v);
        double ppart = av > 0 ? std::pow(av, p - 2.0) * v : 0.0;
        g[std::size_t(i)] = 2.0 * acc - 2.0 * coeff * ppart;
    }
}

void project_mass(std::vector<double>& psi, double a) {
    double s = 0;
    for (double v : psi) s += v * v;
    double sc = std::sqrt(a / s);
    for (double& v : psi) v *= sc;
}

double flow(const Box& bx, std::vector<double>& psi, double a, double p, double coeff,
            long max_iters, double tol) {
    project_mass(psi, a);
    double e = box_energy(bx, psi, p, coeff);
    std::vector<double> g(std::size_t(bx.N)), trial(std::size_t(bx.N));
    double eta = 0.02;
    for (long it = 0; it < max_iters; ++it) {
        box_gradient(bx, psi, p, coeff, g);
        bool moved = false;
        for (int bt = 0; bt < 50; ++bt) {
            for (long i = 0; i < bx.N; ++i)
                trial[std::size_t(i)] = psi[std::size_t(i)] - eta * g[std::size_t(i)];
            project_mass(trial, a);
            double et = box_energy(bx, trial, p, coeff);
            if (et <= e) {
                bool done = (e - et) < tol;
                psi.swap(trial);
                e = et;
                eta = std::min(eta * 1.2, 1.0);
                moved = true;
                if (done) return e;
                break;
            }
            eta *= 0.5;
            if (eta < 1e-18) return e;
        }
        if (!moved) return e;
    }
    return e;
}

std::vector<std::vector<double>> initial_guesses(const Box& bx, double a, std::uint64_t seed,
                                                 const std::vector<double>* warm,
                                                 bool warm_only = false) {
    std::vector<std::vector<double>> out;
    if (warm_only && warm && long(warm->size()) == bx.N) {
        out.push_back(*warm);
        std::vector<double> spike(std::size_t(bx.N), 0.0);
        spike[0] = std::sqrt(a);
        out.push_back(spike);
        return out;
    }
    // single spike
    std::vector<double> spike(std::size_t(bx.N), 0.0);
    spike[0] = std::sqrt(a);
    out.push_back(spike);
    // gaussian bumps of three widths around the box center
    std::vector<int> c(std::size_t(bx.d), bx.L / 2);
    for (double w : {1.0, 2.0, 4.0}) {
        std::vector<double> bump(std::size_t(bx.N), 0.0);
        for (long i = 0; i < bx.N; ++i) {
            long r = i;
            double dist2 = 0;
            for (int ax = 0; ax < bx.d; ++ax) {
                long x = r / bx.stride[std::size_t(ax)];
                r -= x * bx.stride[std::size_t(ax)];
                double dx = double(x) - c[std::size_t(ax)];
                if (dx > bx.L / 2.0) dx -= bx.L;
                if (dx < -bx.L / 2.0) dx += bx.L;
                dist2 += dx * dx;
            }
            bump[std::size_t(i)] = std::exp(-dist2 / (2.0 * w * w));
        }
        out.push_back(bump);
    }
    // uniform random positives
    Rng rng(seed, "soliton-init", 0);
    std::vector<double> rnd(std::size_t(bx.N));
    for (double& v : rnd) v = rng.uniform() + 0.01;
    out.push_back(rnd);
    if (warm && long(warm->size()) == bx.N) out.push_back(*warm);
    return out;
}

SolitonResult solve_on_box(double a, double p, int d, int L, const SolitonOpts& opts,
                           bool warm_only = false) {
    Box bx(d, L);
    SolitonResult best;
    best.box = L;
    best.raw_energy = std::numeric_limits<double>::infinity();
    for (auto& start : initial_guesses(bx, a, opts.seed, opts.warm, warm_only)) {
        std::vector<double> psi = start;
        double e = flow(bx, psi, a, p, opts.coeff, opts.max_iters, opts.tol_energy);
        if (e < best.raw_energy) {
            best.raw_energy = e;
            best.field = std::move(psi);
        }
    }
    // boundary tail: max |psi| at linf distance >= L/2 - 1 from the peak
    long peak = 0;
    for (long i = 0; i < bx.N; ++i)
        if (std::abs(best.field[std::size_t(i)]) > std::abs(best.field[std::size_t(peak)])) peak = i;
    double tail = 0;
    for (long i = 0; i < bx.N; ++i) {
        long ri = i, rp_ = peak;
        int dist = 0;
        for (int ax = 0; ax < bx.d; ++ax) {
            long xi = ri / bx.stride[std::size_t(ax)];
            ri -= xi * bx.stride[std::size_t(ax)];
            long xp = rp_ / bx.stride[std::size_t(ax)];
            rp_ -= xp * bx.stride[std::size_t(ax)];
            int dd = int(std::abs(xi - xp));
            dd = std::min(dd, bx.L - dd);
            dist = std::max(dist, dd);
        }
        if (dist >= L / 2 - 1) tail = std::max(tail, std::abs(best.field[std::size_t(i)]));
    }
    best.boundary_tail = tail;
    best.plateau = best.raw_energy > -kPlateauTol;
    best.energy = best.plateau ? 0.0 : best.raw_energy;
    best.box_ok = best.plateau || tail < 1e-10;
    return best;
}

}  // namespace

SolitonResult soliton_energy(double a, double p, int d, const SolitonOpts& opts) {
    if (!(a > 0)) throw std::invalid_argument("soliton_energy: mass must be positive");
    if (!(p > 2)) throw std::invalid_argument("soliton_energy: p must be > 2");
    int L = opts.box;
    SolitonResult res = solve_on_box(a, p, d, L, opts);
    if (!opts.auto_box) return res;
    while (L < opts.max_box) {
        SolitonOpts o2 = opts;
        o2.warm = nullptr;
        SolitonResult res2 = solve_on_box(a, p, d, 2 * L, o2);
        bool close = std::abs(res.energy - res2.energy) < 1e-4;
        if (res.box_ok && close) {
            // keep the smaller box; record that the doubled box agreed
            res.box_ok = true;
            return res;
        }
        res = std::move(res2);
        L *= 2;
    }
    return res;
}

GnsResult gns_threshold(double p, int d, const SolitonOpts& opts) {
    GnsResult out;
    if (p <= 2.0 + 4.0 / d) {
        out.r_p = 0;
        out.r_p_bisect = 0;
        out.consistent = true;
        return out;
    }
    // Weinstein quotient minimization at fixed l2 norm 1
    int L = std::max(opts.box, 16);
    Box bx(d, L);
    double best_q = std::numeric_limits<double>::infinity();
    for (auto& start : initial_guesses(bx, 1.0, opts.seed, nullptr)) {
        std::vector<double> psi = start;
        project_mass(psi, 1.0);
        std::vector<double> g(std::size_t(bx.N)), trial(std::size_t(bx.N));
        auto parts = [&](const std::vector<double>& v, double& grad, double& pp) {
            grad = 0;
            pp = 0;
            for (long i = 0; i < bx.N; ++i) {
                for (int ax = 0; ax < bx.d; ++ax) {
                    double dv = v[std::size_t(i)] - v[std::size_t(bx.nb(i, ax, +1))];
                    grad += dv * dv;
                }
                pp += std::pow(std::abs(v[std::size_t(i)]), p);
            }
        };
        double B, C;
        parts(psi, B, C);
        double q = std::log(B) - std::log(C);
        double eta = 0.05;
        for (long it = 0; it < opts.max_iters; ++it) {
            // gradient of log B - log C at fixed mass
            for (long i = 0; i < bx.N; ++i) {
                double v = psi[std::size_t(i)];
                double lap = 2.0 * bx.d * v;
                for (int ax = 0; ax < bx.d; ++ax)
                    lap -= psi[std::size_t(bx.nb(i, ax, +1))] + psi[std::size_t(bx.nb(i, ax, -1))];
                double av = std::abs(v);
                double ppart = av > 0 ? std::pow(av, p - 2.0) * v : 0.0;
                g[std::size_t(i)] = 2.0 * lap / B - p * ppart / C;
            }
            bool moved = false;
            for (int bt = 0; bt < 50; ++bt) {
                for (long i = 0; i < bx.N; ++i)
                    trial[std::size_t(i)] = psi[std::size_t(i)] - eta * g[std::size_t(i)];
                project_mass(trial, 1.0);
                double Bt, Ct;
                parts(trial, Bt, Ct);
                double qt = std::log(Bt) - std::log(Ct);
                if (qt <= q) {
                    bool done = (q - qt) < 1e-13;
                    psi.swap(trial);
                    q = qt;
                    B = Bt;
                    C = Ct;
                    eta = std::min(eta * 1.2, 2.0);
                    moved = true;
                    if (done) it = opts.max_iters;
                    break;
                }
                eta *= 0.5;
                if (eta < 1e-18) {
                    moved = false;
                    break;
                }
            }
            if (!moved) break;
        }
        best_q = std::min(best_q, q);
    }
    // scale invariance: Q = ||psi||_2^{p-2} ||grad||^2 / ||psi||_p^p; at mass 1
    // the quotient is exp(best_q)
    out.quotient = std::exp(best_q);
    out.r_p = std::pow(p * out.quotient / 2.0, 2.0 / (p - 2.0));

    // independent bisection route: R_p' = sup{ a : I(a) >= -tol }. The finite
    // box carries a spurious spread-state energy -(2/p) a^{p/2} L^{-d(p/2-1)},
    // so the zero test must sit above that floor.
    SolitonOpts so = opts;
    so.auto_box = false;
    so.box = std::max(opts.box, 16);
    auto floor_tol = [&](double a) {
        double spread = (2.0 / p) * std::pow(a, 0.5 * p) * std::pow(double(so.box), -double(d) * (0.5 * p - 1.0));
        return std::max(kPlateauTol, 10.0 * spread);
    };
    double lo = 0.5 * out.r_p, hi = out.r_p;
    while (soliton_energy(hi, p, d, so).raw_energy > -std::max(1e-3, 100.0 * floor_tol(hi))) {
        hi *= 1.3;
        if (hi > 50.0 * out.r_p + 10.0) break;
    }
    for (int it = 0; it < 28; ++it) {
        double mid = 0.5 * (lo + hi);
        if (soliton_energy(mid, p, d, so).raw_energy >= -floor_tol(mid))
            lo = mid;
        else
            hi = mid;
    }
    out.r_p_bisect = 0.5 * (lo + hi);
    out.consistent = std::abs(out.r_p_bisect - out.r_p) <= 0.05 * out.r_p;
    return out;
}

double entropy_w(double b, int d) {
    if (!(b > 0)) throw std::invalid_argument("entropy_w: b must be positive");
    double cd = c_d(d);
    double m = (b >= cd) ? 0.0 : solve_mass(b, d);
    return zd_log_laplacian_integral(d, m) - m * b;
}

double entropy_w_smalln_mc(double b, int d, int n, long draws, std::uint64_t seed) {
    TorusShape s = TorusShape::make(d, n);
    std::vector<double> lam = all_eigenvalues(s);
    double N = double(s.N);
    // finite-N tilt mass: (1/N) sum_{k != 0} 1/(lambda_k + m) = b when solvable
    auto eigensum = [&](double m) {
        double acc = 0;
        for (std::size_t k = 1; k < lam.size(); ++k) acc += 1.0 / (lam[k] + m);
        return acc / N;
    };
    double m = 0;
    if (eigensum(0.0) > b) {
        double lo = 0, hi = 1;
        while (eigensum(hi) > b) hi *= 2;
        for (int it = 0; it < 100; ++it) {
            double mid = 0.5 * (lo + hi);
            (eigensum(mid) > b ? lo : hi) = mid;
        }
        m = 0.5 * (lo + hi);
    }
    // log E_0[pi (bN - S)_+] = sum log(lam/(lam+m)) + m b N
    //                        + log E_m[pi (bN - S) e^{-m (bN - S)} 1{S <= bN}]
    Rng rng(seed, "w-oracle", 0);
    double acc = 0;
    for (long i = 0; i < draws; ++i) {
        double ssum = 0;
        for (std::size_t k = 1; k < lam.size(); ++k) {
            double u = rng.uniform();
            while (u <= 0) u = rng.uniform();
            ssum += -std::log(u) / (lam[k] + m);
        }
        if (ssum <= b * N) {
            double gap = b * N - ssum;
            acc += M_PI * gap * std::exp(-m * gap);
        }
    }
    double log_e = std::log(acc / double(draws));
    double log_ratio = 0;
    for (std::size_t k = 1; k < lam.size(); ++k)
        log_ratio += std::log(lam[k] / (lam[k] + m));
    double log_e0 = log_ratio + m * b * N + log_e;
    double what = 0;  // (1/N) [ sum_{k!=0} log(pi/lambda_k) + log E_0 ]
    for (std::size_t k = 1; k < lam.size(); ++k) what += std::log(M_PI / lam[k]);
    what = (what + log_e0) / N;
    return std::log(M_PI) - what;
}

// ---- Landscape context -----------------------------------------------------

Landscape::Landscape(double p, int d, const SolitonOpts& opts)
    : p_(p), d_(d), opts_(opts) {
    cd_ = c_d(d);
    GnsResult gns = gns_threshold(p, d, opts);
    rp_ = gns.r_p;
    // W grid: log-spaced masses below C_d, exact plateau above
    w_plateau_ = zd_log_laplacian_integral(d, 0.0);
    double bmin = 1e-4, bmax = cd_;
    int npts = 240;
    for (int i = 0; i <= npts; ++i) {
        double t = double(i) / npts;
        double b = bmin * std::pow(bmax / bmin, t);
        w_grid_b_.push_back(b);
        w_grid_v_.push_back(entropy_w(b, d));
    }
    ensure_i_grid(std::max(4.0 * rp_, 2.0));
}

void Landscape::ensure_i_grid(double b_max) const {
    double start = 0.85 * rp_;
    // dense near the threshold kink, coarser beyond
    auto ratio_at = [&](double x) { return x < 1.35 * rp_ ? 1.025 : 1.12; };
    double b = i_grid_b_.empty() ? start : i_grid_b_.back() * ratio_at(i_grid_b_.back());
    if (!i_grid_b_.empty() && i_grid_b_.back() >= b_max) return;
    std::vector<double> warm;
    while (b <= b_max * 1.12) {
        SolitonOpts so = opts_;
        so.auto_box = false;
        so.box = std::max(opts_.box, 16);
        so.max_iters = std::min<long>(so.max_iters, 15000);
        so.warm = warm.empty() ? nullptr : &warm;
        SolitonResult r = solve_on_box(b, p_, d_, so.box, so, !warm.empty());
        // escalate once when a genuine minimizer leaks into the boundary
        if (!r.plateau && r.boundary_tail > 1e-8 && 2 * so.box <= opts_.max_box) {
            SolitonOpts so2 = so;
            so2.warm = nullptr;
            SolitonResult r2 = solve_on_box(b, p_, d_, 2 * so.box, so2, false);
            if (r2.raw_energy < r.raw_energy || r2.boundary_tail < r.boundary_tail) r = std::move(r2);
        }
        i_grid_b_.push_back(b);
        i_grid_v_.push_back(r.energy);
        warm = r.field;
        b *= ratio_at(b);
    }
}

double Landscape::interp_i(double b) const {
    if (b <= i_grid_b_.front()) return 0.0;
    if (b >= i_grid_b_.back()) {
        // beyond the grid the minimizer is a near-spike; extrapolate |I| in
        // log-log with the last grid slope
        std::size_t k = i_grid_b_.size() - 1;
        double b0 = i_grid_b_[k - 1], b1 = i_grid_b_[k];
        double v0 = i_grid_v_[k - 1], v1 = i_grid_v_[k];
        if (v1 >= -kPlateauTol) return 0.0;
        double sl = (std::log(-v1) - std::log(-std::min(v0, -1e-12))) / (std::log(b1) - std::log(b0));
        return -std::exp(std::log(-v1) + sl * (std::log(b) - std::log(b1)));
    }
    auto it = std::upper_bound(i_grid_b_.begin(), i_grid_b_.end(), b);
    std::size_t k = std::size_t(it - i_grid_b_.begin());
    double b0 = i_grid_b_[k - 1], b1 = i_grid_b_[k];
    double t = (b - b0) / (b1 - b0);
    double v = (1 - t) * i_grid_v_[k - 1] + t * i_grid_v_[k];
    return std::min(v, 0.0);
}

double Landscape::w(double b) const {
    if (b >= cd_) return w_plateau_;
    if (b <= w_grid_b_.front()) {
        // W(b) ~ -log b - 1 + o(1) as b -> 0: extend with the exact formula
        return entropy_w(b, d_);
    }
    auto it = std::upper_bound(w_grid_b_.begin(), w_grid_b_.end(), b);
    std::size_t k = std::size_t(it - w_grid_b_.begin());
    if (k >= w_grid_b_.size()) return w_plateau_;
    double b0 = w_grid_b_[k - 1], b1 = w_grid_b_[k];
    double t = (b - b0) / (b1 - b0);
    return (1 - t) * w_grid_v_[k - 1] + t * w_grid_v_[k];
}

double Landscape::free_energy(double a, double theta, double nu) const {
    if (a >= 1.0) return std::numeric_limits<double>::infinity();
    if (a < 0) throw std::invalid_argument("free_energy: a must be in [0,1]");
    double wterm = w(theta * (1.0 - a));
    if (nu <= 0) return wterm;
    return wterm + (theta / nu) * interp_i(nu * a);
}

Landscape::MinimizerSet Landscape::minimizer_set(double theta, double nu, double tol) const {
    const int npts = 601;
    const double amax = 1.0 - 1e-4;
    MinimizerSet out;
    double fmin = std::numeric_limits<double>::infinity();
    std::vector<double> fv(npts);
    for (int i = 0; i < npts; ++i) {
        double a = amax * double(i) / double(npts - 1);
        fv[std::size_t(i)] = free_energy(a, theta, nu);
        fmin = std::min(fmin, fv[std::size_t(i)]);
    }
    out.f_min = fmin;
    bool open = false;
    double lo = 0, hi = 0;
    double min_member = std::numeric_limits<double>::infinity();
    double argmin = 0;
    bool have_arg = false;
    for (int i = 0; i < npts; ++i) {
        double a = amax * double(i) / double(npts - 1);
        bool in = fv[std::size_t(i)] - fmin <= tol;
        if (in) {
            min_member = std::min(min_member, a);
            if (!have_arg && fv[std::size_t(i)] == fmin) {
                argmin = a;
                have_arg = true;
            }
            if (!open) {
                open = true;
                lo = a;
            }
            hi = a;
        } else if (open) {
            out.intervals.emplace_back(lo, hi);
            open = false;
        }
    }
    if (open) out.intervals.emplace_back(lo, hi);
    out.contains_zero = !out.intervals.empty() && out.intervals.front().first <= 1e-12;
    out.away_from_zero = !out.contains_zero;
    out.min_member = min_member;
    if (!have_arg) argmin = min_member;
    out.arg_min = argmin;
    return out;
}

double Landscape::critical_nu(double theta, double tol, double nu_max) const {
    auto supercritical = [&](double nu) {
        const int npts = 801;
        double f0 = free_energy(0.0, theta, nu);
        for (int i = 1; i < npts; ++i) {
            double a = (1.0 - 1e-4) * double(i) / double(npts - 1);
            if (free_energy(a, theta, nu) < f0 - 1e-7) return true;
        }
        return false;
    };
    double lo = rp_;
    if (supercritical(lo))
        throw std::runtime_error("critical_nu: lower bracket unexpectedly supercritical");
    double hi = std::max(2.0 * rp_, 1.0);
    while (!supercritical(hi)) {
        hi *= 1.6;
        if (hi > nu_max) throw std::runtime_error("critical_nu: bracket not found below nu_max");
        ensure_i_grid(hi);
    }
    ensure_i_grid(hi);
    while (hi - lo > tol * std::max(1.0, lo)) {
        double mid = 0.5 * (lo + hi);
        (supercritical(mid) ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

Landscape::Phase Landscape::classify(double theta, double nu, double band) const {
    Phase ph;
    ph.nu_c = critical_nu(theta);
    ph.minimizers = minimizer_set(theta, nu);
    double width = band * std::max(1.0, ph.nu_c);
    if (nu < ph.nu_c - width) {
        ph.label = "dispersive";
        if (theta < cd_) {
            ph.limit_kind = "massive-gff";
            ph.mass = solve_mass(theta, d_);
        } else {
            ph.limit_kind = "massless-gff-shift";
            ph.mass = 0.0;
        }
    } else if (nu > ph.nu_c + width) {
        ph.label = "solitonic";
        ph.limit_kind = "massive-reduced";
        double astar = ph.minimizers.arg_min;
        double b = theta * (1.0 - astar);
        ph.mass = b < cd_ ? solve_mass(b, d_) : 0.0;
    } else {
        ph.label = "critical-band";
        ph.limit_kind = "unresolved";
        ph.mass = 0.0;
    }
    return ph;
}

double Landscape::supercritical_mass(double a, double theta) const {
    double b = theta * (1.0 - a);
    if (!(b < cd_))
        throw std::invalid_argument("supercritical_mass: theta(1-a) must be below C_d");
    return solve_mass(b, d_);
}

LandscapeTable landscape_table(Landscape& ls, double theta, double nu, int a_points) {
    ls.ensure_i_grid(nu);
    LandscapeTable t;
    t.theta = theta;
    t.nu = nu;
    t.p = ls.p();
    t.d = ls.d();
    for (int i = 0; i < a_points; ++i) {
        double a = (1.0 - 1e-4) * double(i) / double(a_points - 1);
        t.a_grid.push_back(a);
        t.f_values.push_back(ls.free_energy(a, theta, nu));
        t.i_arg.push_back(nu * a);
        t.i_values.push_back(ls.interp_i(nu * a));
        t.w_arg.push_back(theta * (1 - a));
        t.w_values.push_back(ls.w(theta * (1 - a)));
    }
    t.minimizers = ls.minimizer_set(theta, nu);
    t.phase_label = ls.classify(theta, nu).label;
    return t;
}

}  // namespace nlstorus
