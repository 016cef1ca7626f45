#pragma once

// Numerical free-energy landscape: discrete soliton energy I(a), the GNS
// threshold R_p, the constrained-Gaussian entropy W(b), the free energy
// F(a) = W(theta(1-a)) + (theta/nu) I(nu a), its minimizer set, the phase
// curve nu_c(theta) and the supercritical reduced mass.

#include <optional>
#include <string>
#include <vector>

#include "nlstorus/greens.hpp"

namespace nlstorus {

struct SolitonResult {
    double energy = 0;          // I_L(a), plateau-clipped to 0 above -1e-6
    double raw_energy = 0;      // optimizer value before plateau clipping
    std::vector<double> field;  // minimizer on the box (real, nonnegative)
    int box = 0;                // box side L
    double boundary_tail = 0;   // max |psi| at linf distance >= L/2 - 1 from the peak
    bool box_ok = false;
    bool plateau = false;       // I(a) = 0 regime (spreading minimizing sequence)
};

struct SolitonOpts {
    int box = 16;
    int max_box = 64;
    bool auto_box = true;       // escalate until tail < 1e-10 and |I_L - I_2L| < 1e-4
    double coeff = 1.0;         // multiplier of the (2/p)||psi||_p^p term
    long max_iters = 40000;
    double tol_energy = 1e-10;  // per-step decrease threshold
    std::uint64_t seed = 0;
    const std::vector<double>* warm = nullptr;  // optional warm start (box^d values)
};

// I(a) = inf { ||grad psi||^2 - (2/p) coeff ||psi||_p^p : ||psi||_2^2 = a }
// over the period-L box embedding of Z^d, constraint enforced exactly at
// every iterate, best over multiple initializations.
SolitonResult soliton_energy(double a, double p, int d, const SolitonOpts& opts = {});

struct GnsResult {
    double r_p = 0;             // threshold mass
    double quotient = 0;        // optimal Weinstein quotient value
    double r_p_bisect = 0;      // independent route: sup{a : I(a) >= -tol}
    bool consistent = false;    // |r_p - r_p_bisect| / r_p <= 5%
};

// R_p from the Weinstein quotient, cross-validated by bisection on I.
GnsResult gns_threshold(double p, int d, const SolitonOpts& opts = {});

// W(b) = sup_{m >= 0} [ integral log(4 sum sin^2 + m) - m b ]; constant L(0)
// on [C_d, inf), convex nonincreasing, divergent at 0. W'(b) = -m*(b).
double entropy_w(double b, int d);

// small-N Monte Carlo oracle for W via the zero-mode-radius representation
// (Gaussian modes integrated analytically, the radius term estimated by
// tilted simulation); returns the same convention as entropy_w.
double entropy_w_smalln_mc(double b, int d, int n, long draws, std::uint64_t seed);

// ---- cached landscape context ----------------------------------------------

class Landscape {
public:
    Landscape(double p, int d, const SolitonOpts& opts = {});

    double p() const { return p_; }
    int d() const { return d_; }
    double r_p() const { return rp_; }
    double c_d_value() const { return cd_; }

    double interp_i(double b) const;     // I(b) from the cached grid
    double w(double b) const;            // W(b) from the cached grid (exact plateau)
    double free_energy(double a, double theta, double nu) const;  // +inf at a = 1

    struct MinimizerSet {
        std::vector<std::pair<double, double>> intervals;
        double f_min = 0;
        bool contains_zero = false;
        bool away_from_zero = false;
        double min_member = 0;  // smallest member
        double arg_min = 0;     // grid argmin (left-most)
    };
    MinimizerSet minimizer_set(double theta, double nu, double tol = 1e-4) const;

    // bisection between a subcritical and a supercritical witness
    double critical_nu(double theta, double tol = 1e-4, double nu_max = 1e4) const;

    struct Phase {
        std::string label;       // dispersive | solitonic | critical-band
        std::string limit_kind;  // massive-gff | massless-gff-shift | massive-reduced
        double nu_c = 0;
        double mass = 0;         // m(theta) or M(a*) when massive, else 0
        MinimizerSet minimizers;
    };
    Phase classify(double theta, double nu, double band = 1e-3) const;

    // solve the mass equation with right side theta(1-a); requires it < C_d
    double supercritical_mass(double a, double theta) const;

    void ensure_i_grid(double b_max) const;  // extend the cached I grid

    const std::vector<double>& i_grid() const { return i_grid_b_; }
    const std::vector<double>& i_values() const { return i_grid_v_; }

private:
    double p_, cd_, rp_;
    int d_;
    SolitonOpts opts_;
    mutable std::vector<double> i_grid_b_, i_grid_v_;
    std::vector<double> w_grid_b_, w_grid_v_;
    double w_plateau_;
};

struct LandscapeTable {
    double theta = 0, nu = 0, p = 0;
    int d = 0;
    int box = 0;
    std::vector<double> a_grid, f_values;
    std::vector<double> i_arg, i_values;
    std::vector<double> w_arg, w_values;
    Landscape::MinimizerSet minimizers;
    std::string phase_label;
};

LandscapeTable landscape_table(Landscape& ls, double theta, double nu, int a_points = 321);

}  // namespace nlstorus
