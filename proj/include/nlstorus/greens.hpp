#pragma once

// Lattice Green's functions: the Z^d diagonal integral and the mass
// equation, torus / zero-average / Dirichlet-hole kernels, massive
// harmonic extensions, and the finite-volume mass equation with boundary.

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nlstorus/lattice.hpp"
#include "nlstorus/rng.hpp"

namespace nlstorus {

// integral over [0,1]^d of 1 / (4 sum_i sin^2(pi k_i) + m).
// m = 0 requires d >= 3 (C_d); the value equals the n->infinity torus sum.
double zd_greens_diag(int d, double m);

// C_d = zd_greens_diag(d, 0)
double c_d(int d);

// integral over [0,1]^d of log(4 sum_i sin^2(pi k_i) + m); derivative in m
// is zd_greens_diag. Finite at m = 0 for every d >= 1.
double zd_log_laplacian_integral(int d, double m);

// Slow tensor-product midpoint rule with Richardson refinement; kept as an
// independent oracle for the transformed quadrature above.
double zd_greens_diag_midpoint(int d, double m, int max_level = 8, double tol = 1e-9);

// Solve zd_greens_diag(d, m) = theta for m >= 0. Requires 0 < theta <= C_d.
double solve_mass(double theta, int d);

// ---- torus kernels -------------------------------------------------------

// full-torus massive kernel G^m(x,y) = (1/N) sum_k e^{i 2 pi k(x-y)/n} / (lambda_k + m)
class TorusGreens {
public:
    TorusGreens(const TorusShape& shape, double m);
    double at(long x, long y) const;          // kernel by displacement
    double at_offset(long disp) const { return kernel_[disp]; }
    double diag() const { return kernel_[0]; }
    const TorusShape& shape() const { return shape_; }

private:
    TorusShape shape_;
    double m_;
    std::vector<double> kernel_;
};

// zero-average kernel: k = 0 mode removed; row sums vanish
class ZeroAvgGreens {
public:
    explicit ZeroAvgGreens(const TorusShape& shape);
    double at(long x, long y) const;
    double at_offset(long disp) const { return kernel_[disp]; }
    double diag() const { return kernel_[0]; }

private:
    TorusShape shape_;
    std::vector<double> kernel_;
};

// ---- hole (Dirichlet) machinery ------------------------------------------

struct SiteSet {
    TorusShape shape;
    std::vector<char> mask;   // 1 = in U
    std::vector<long> sites;  // members of U

    static SiteSet empty(const TorusShape& s);
    static SiteSet of(const TorusShape& s, const std::vector<long>& members);
    bool contains(long i) const { return mask[std::size_t(i)] != 0; }
    long size() const { return long(sites.size()); }
    // inner boundary: sites of U with a neighbor outside U
    std::vector<long> inner_boundary() const;
};

// dense spectral data of -Delta_{U^c} (+ index maps); |U^c| <= 4096
struct DirichletSpectrum {
    TorusShape shape;
    std::vector<long> free_sites;          // U^c in site order
    std::vector<long> pos_of_site;         // -1 for sites in U
    Eigen::VectorXd eigenvalues;           // of -Delta_{U^c}, ascending
    Eigen::MatrixXd eigenvectors;          // columns, orthonormal
};

DirichletSpectrum dirichlet_spectrum(const TorusShape& shape, const SiteSet& U);

// G^{m,U^c}: solves (-Delta_{U^c} + m) G(.,y) = delta_y, zero on U.
// Queries with x or y in U return 0 by convention.
class DirichletGreens {
public:
    DirichletGreens(const TorusShape& shape, const SiteSet& U, double m);
    double at(long x, long y) const;
    std::vector<double> column(long y) const;  // full-torus layout, 0 on U
    double trace_free() const;                 // sum over U^c of G(x,x)

private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

// Massive harmonic extension of f from the inner boundary of U onto U^c.
// Returned field: equals f on all of U, solves (-Delta_{U^c}+m)h = 0 on U^c.
Field harmonic_extension(const TorusShape& shape, const SiteSet& U, const Field& f, double m);

// certified pointwise decay bound (m/(m+2d))^dist as killed-walk survival:
// |h(x)| <= l1(f on boundary) * exp(-c(m) d(x, dU)), c(m) = log((m+2d)/(2d))
double harmonic_decay_rate(double m, int d);

// graph distance from every site to the set U (BFS); U empty -> all -1
std::vector<int> distance_to_set(const TorusShape& shape, const SiteSet& U);

// Finite-volume mass equation with boundary data (gamma N on the right):
//   sum_i 1/(lambda_i + m) + theta ||h^m|_{U^c}||_2^2 = theta gamma N
// over the Dirichlet spectrum of -Delta_{U^c}; h^m is the massive harmonic
// extension of f at the same mass. U empty reduces to the finite-N torus
// mass equation. Throws NoMassSolution if no root exists in (0, inf).
struct NoMassSolution : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double solve_mass_with_boundary(const TorusShape& shape, const SiteSet& U, const Field& f,
                                double theta, double gamma = 1.0,
                                const DirichletSpectrum* cached = nullptr);

// residual of the displayed equation at a given m (for verification)
double boundary_mass_residual(const TorusShape& shape, const SiteSet& U, const Field& f,
                              double theta, double gamma, double m,
                              const DirichletSpectrum* cached = nullptr);

// ---- random-walk oracles --------------------------------------------------

// killed-walk estimate of G^{m,U^c}(x,y) per the visit representation;
// returns (estimate, standard error)
std::pair<double, double> killed_walk_green_mc(const TorusShape& shape, const SiteSet& U, double m,
                                               long x, long y, long walks, Rng& rng);

// Z^3 walk estimate of C_3: expected visits to the origin / 6, walk stopped
// at radius R with the asymptotic Green's tail added back. Multi-threaded.
std::pair<double, double> c3_random_walk_mc(long walks, int threads, std::uint64_t seed,
                                            int radius = 16);

}  // namespace nlstorus
