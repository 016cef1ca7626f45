// 1d transformed quadrature for the Z^d lattice integrals:
//   1/(4 sum sin^2 + m)  integrates to  int_0^inf e^{-mt} [e^{-2t} I0(2t)]^d dt
//   log(4 sum sin^2 + m) integrates to  int_0^inf (e^{-t} - e^{-mt} [e^{-2t} I0(2t)]^d)/t dt
// via 1/A = int e^{-tA} and the Frullani representation of log.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "nlstorus/greens.hpp"

namespace nlstorus {

namespace {

// e^{-x} I0(x), x >= 0
double i0_scaled(double x) {
    if (x < 20.0) {
        // power series of I0, then scale; terms are positive, no cancellation
        double term = 1.0, sum = 1.0;
        double q = 0.25 * x * x;
        for (int k = 1; k < 90; ++k) {
            term *= q / (double(k) * double(k));
            sum += term;
            if (term < 1e-18 * sum) break;
        }
        return sum * std::exp(-x);
    }
    // asymptotic series (2 pi x)^{-1/2} sum_k prod(2j-1)^2 / (k! 8^k x^k)
    double inv = 1.0 / (8.0 * x);
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= 14; ++k) {
        double odd = 2.0 * k - 1.0;
        term *= odd * odd * inv / double(k);
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return sum / std::sqrt(2.0 * M_PI * x);
}

// Gauss-Legendre nodes/weights on [-1,1]
struct GaussRule {
    std::vector<double> x, w;
};

const GaussRule& gauss48() {
    static GaussRule r = [] {
        const int n = 48;
        GaussRule g;
        g.x.resize(n);
        g.w.resize(n);
        for (int i = 0; i < n / 2; ++i) {
            double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double p0, p1;
            for (int it = 0; it < 100; ++it) {
                p0 = 1.0;
                p1 = t;
                for (int k = 2; k <= n; ++k) {
                    double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                double dp = n * (t * p1 - p0) / (t * t - 1.0);
                double dt = p1 / dp;
                t -= dt;
                if (std::abs(dt) < 1e-16) break;
            }
            p0 = 1.0;
            p1 = t;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = n * (t * p1 - p0) / (t * t - 1.0);
            double w = 2.0 / ((1.0 - t * t) * dp * dp);
            g.x[i] = -t;
            g.w[i] = w;
            g.x[n - 1 - i] = t;
            g.w[n - 1 - i] = w;
        }
        return g;
    }();
    return r;
}

template <typename F>
double gauss_panel(F&& f, double a, double b) {
    const GaussRule& g = gauss48();
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0;
    for (std::size_t i = 0; i < g.x.size(); ++i) acc += g.w[i] * f(mid + half * g.x[i]);
    return acc * half;
}

constexpr double kTcut = 400.0;

// int_T^inf e^{-mt} t^{-s} dt via t = T/u^2; the substitution keeps the
// integrand smooth down to u = 0 for every s >= 3/2
double tail_power(double m, double s, double T = kTcut) {
    if (m * T < 1e-30) return std::pow(T, 1.0 - s) / (s - 1.0);
    return 2.0 * std::pow(T, 1.0 - s) *
           gauss_panel([&](double u) { return std::exp(-m * T / (u * u)) * std::pow(u, 2.0 * s - 3.0); },
                       0.0, 1.0);
}

// asymptotic expansion coefficients of [e^{-2t} I0(2t)]^d = (4 pi t)^{-d/2} (1 + c1/t + c2/t^2 + c3/t^3 + ...)
void gd_tail_coeffs(int d, double& c1, double& c2, double& c3) {
    const double a1 = 1.0 / 16.0, a2 = 9.0 / 512.0, a3 = 75.0 / 8192.0;
    double dd = d;
    c1 = dd * a1;
    c2 = dd * a2 + dd * (dd - 1.0) / 2.0 * a1 * a1;
    c3 = dd * a3 + dd * (dd - 1.0) * a1 * a2 + dd * (dd - 1.0) * (dd - 2.0) / 6.0 * a1 * a1 * a1;
}

double gd(double t, int d) {
    double g = i0_scaled(2.0 * t);
    double r = g;
    for (int i = 1; i < d; ++i) r *= g;
    return r;
}

// geometric panel boundaries adapted to the decay scale 1/(1+m)
std::vector<double> panels(double m) {
    std::vector<double> b{0.0};
    double s = 1.0 / (1.0 + m);
    double t = s;
    while (t < kTcut) {
        b.push_back(t);
        t *= 4.0;
    }
    b.push_back(kTcut);
    return b;
}

}  // namespace

double zd_greens_diag(int d, double m) {
    if (d < 1) throw std::invalid_argument("zd_greens_diag: d must be >= 1");
    if (m < 0) throw std::invalid_argument("zd_greens_diag: mass must be >= 0");
    if (m == 0 && d <= 2)
        throw std::invalid_argument("zd_greens_diag: divergent at m = 0 for d <= 2");
    std::vector<double> bs = panels(m);
    double acc = 0;
    for (std::size_t i = 0; i + 1 < bs.size(); ++i)
        acc += gauss_panel([&](double t) { return std::exp(-m * t) * gd(t, d); }, bs[i], bs[i + 1]);
    double c1, c2, c3;
    gd_tail_coeffs(d, c1, c2, c3);
    double h = 0.5 * d;
    double tail = tail_power(m, h) + c1 * tail_power(m, h + 1.0) + c2 * tail_power(m, h + 2.0) +
                  c3 * tail_power(m, h + 3.0);
    acc += tail * std::pow(4.0 * M_PI, -h);
    return acc;
}

double c_d(int d) { return zd_greens_diag(d, 0.0); }

double zd_log_laplacian_integral(int d, double m) {
    if (d < 1) throw std::invalid_argument("zd_log_laplacian_integral: d must be >= 1");
    if (m < 0) throw std::invalid_argument("zd_log_laplacian_integral: mass must be >= 0");
    std::vector<double> bs = panels(m);
    double acc = 0;
    for (std::size_t i = 0; i + 1 < bs.size(); ++i)
        acc += gauss_panel(
            [&](double t) { return (std::exp(-t) - std::exp(-m * t) * gd(t, d)) / t; }, bs[i],
            bs[i + 1]);
    double c1, c2, c3;
    gd_tail_coeffs(d, c1, c2, c3);
    double h = 0.5 * d;
    // tail of -e^{-mt} g^d / t; the e^{-t}/t tail at T=400 is below underflow
    double tail = tail_power(m, h + 1.0) + c1 * tail_power(m, h + 2.0) + c2 * tail_power(m, h + 3.0) +
                  c3 * tail_power(m, h + 4.0);
    acc -= tail * std::pow(4.0 * M_PI, -h);
    return acc;
}

double zd_greens_diag_midpoint(int d, double m, int max_level, double tol) {
    if (m == 0 && d <= 2) throw std::invalid_argument("divergent");
    // midpoint rule on [0,1]^d; for m=0 the singular corner is handled by
    // Richardson extrapolation across grid doublings (leading error ~ 1/M)
    auto level_value = [&](int M) {
        std::vector<double> s(M);
        for (int i = 0; i < M; ++i) {
            double si = std::sin(M_PI * (i + 0.5) / M);
            s[i] = 4.0 * si * si;
        }
        double acc = 0;
        std::vector<int> idx(d, 0);
        // d nested loops, flattened
        long total = 1;
        for (int a = 0; a < d; ++a) total *= M;
        for (long t = 0; t < total; ++t) {
            long r = t;
            double lam = 0;
            for (int a = 0; a < d; ++a) {
                lam += s[r % M];
                r /= M;
            }
            acc += 1.0 / (lam + m);
        }
        return acc / double(total);
    };
    int M = 16;
    double value = level_value(M);
    double extrap = value, prev_extrap = value;
    for (int lvl = 1; lvl <= max_level; ++lvl) {
        M *= 2;
        double next = level_value(M);
        extrap = (m == 0) ? (2.0 * next - value) : next;  // kill O(1/M) corner error
        if (lvl >= 2 && std::abs(extrap - prev_extrap) < tol) return extrap;
        value = next;
        prev_extrap = extrap;
    }
    return extrap;
}

double solve_mass(double theta, int d) {
    if (!(theta > 0)) throw std::invalid_argument("solve_mass: theta must be positive");
    if (d >= 3) {
        double cd = c_d(d);
        if (theta > cd * (1.0 + 1e-12))
            throw std::invalid_argument("solve_mass: theta exceeds C_d (massless phase, no solution)");
        if (theta >= cd) return 0.0;
    }
    double lo = 0.0, hi = std::max(1.0, 2.0 / theta);
    while (zd_greens_diag(d, hi) > theta) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double g = zd_greens_diag(d, mid);
        if (g > theta)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-14 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace nlstorus
