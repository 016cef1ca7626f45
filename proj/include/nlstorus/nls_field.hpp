#pragma once

// Metropolis-Hastings sampler for the focusing NLS invariant measure
//   density  ~  exp(theta (nu_N ||psi||_p^p - ||grad psi||_2^2))
// on the hard-constraint set {||psi||_2^2 <= gamma N}, with optional
// boundary pinning and an optional l-infinity cap.
//
// Move mixture: single-site complex Gaussian step, single-site radial
// rescale, zero-mode shift, and a mass-teleport move that exchanges l2 mass
// between one site and the rescaled bulk (the tunnel between the dispersive
// and solitonic wells).

#include <optional>
#include <vector>

#include "nlstorus/lattice.hpp"
#include "nlstorus/rng.hpp"
#include "nlstorus/spherical.hpp"

namespace nlstorus {

struct NlsParams {
    TorusShape shape;
    double theta = 1.0;
    double nu = 1.0;   // nu = 0 is the spherical control
    double p = 6.0;    // main theory wants p > 4
    double gamma = 1.0;
    std::optional<Boundary> boundary;
    std::optional<double> linf_cap;  // ||psi||_inf <= cap, enforced exactly
};

struct MoveMixture {
    double site_gauss = 0.90;
    double radial = 0.04;
    double zero_shift = 0.03;
    double teleport = 0.03;
};

struct Schedule {
    long sweeps = 20000;        // post burn-in sweeps (1 sweep = N proposals)
    long burnin = 5000;
    long thin_snapshots = 0;    // 0 = auto from the integrated autocorrelation
    long trace_interval = 20;   // sweeps between trace rows
    long max_snapshots = 2000;
    MoveMixture mix;
    double sep_eps = 0.02;      // epsilon for the separating-set trace
    bool adapt = true;          // proposal-scale adaptation during burn-in
};

struct TraceRow {
    long sweep;
    double mass_fraction_total;  // ||psi||_2^2 / N
    double linf_over_sqrtN;
    double tilt;                 // nu_N ||psi||_p^p
    double sep_mass_fraction;    // ||psi|_U||_2^2/N for U = U(psi, eps)
};

struct ChainRecord {
    std::uint64_t seed = 0;
    long sweeps = 0, burnin = 0, thin = 0;
    double accept_site = 0, accept_radial = 0, accept_shift = 0, accept_teleport = 0;
    std::vector<TraceRow> trace;
    std::vector<Field> snapshots;
    Field final_state;
    double iat_tilt = 0;  // integrated autocorrelation of the tilt trace
};

// unnormalized log density; -infinity when a hard constraint is violated
double log_density(const NlsParams& params, const Field& f);

ChainRecord run_mcmc(const NlsParams& params, const Schedule& schedule, std::uint64_t seed,
                     const Field* init = nullptr);

// Self-normalized importance sampling of NLS expectations from a spherical
// batch, with weights exp(theta nu_N ||psi||_p^p).
struct ReweightResult {
    double ess = 0;
    double mean_weight = 1;  // estimate of Z_N / Z_sph,N  (always >= 1 in mean)
    double mass_mean = 0;    // weighted E ||psi||_2^2 / N
    CovarianceTable covariance;
};

ReweightResult importance_reweight_spherical(const SampleBatch& batch, const NlsParams& params,
                                             const std::vector<std::vector<int>>& offsets,
                                             double ess_floor = 16.0);

// ---- internals exposed for the detailed-balance tests ----------------------

namespace mcmc_detail {

struct State {
    NlsParams params;
    NeighborTable* nbr = nullptr;
    std::vector<cplx> psi;
    double S2 = 0;      // ||psi||_2^2
    double Sp = 0;      // ||psi||_p^p
    double Sgrad = 0;   // ||grad psi||_2^2 (over the full stencil)
    cplx total{0, 0};   // sum of psi over movable sites
    std::vector<char> movable;
    std::vector<long> movable_sites;
    double nuN = 0;

    void sync();  // recompute the running sums from psi
    double log_pi() const { return params.theta * (nuN * Sp - Sgrad); }
};

State make_state(const NlsParams& params, const Field& start, NeighborTable& nbr);

// Each proposal returns false when rejected outright (constraint violation or
// out-of-support); otherwise fills log_ratio = log pi(x')/pi(x) + log q-corr.
struct Proposal {
    bool valid = false;
    double log_ratio = 0;
    // apply/revert data
    long site = -1;
    cplx new_value{0, 0};
    double bulk_scale = 1.0;  // teleport only
    cplx shift{0, 0};         // zero-shift only
    int kind = 0;             // 0 site, 1 radial, 2 shift, 3 teleport
    // bookkeeping for the incremental sums
    double dS2 = 0, dSp = 0, dSgrad = 0;
};

Proposal propose_site_gauss(const State& st, long site, cplx delta);
Proposal propose_radial(const State& st, long site, double log_scale);
Proposal propose_zero_shift(const State& st, cplx delta);
Proposal propose_teleport(const State& st, long site, double new_site_mass, double phase);

void apply(State& st, const Proposal& pr);

}  // namespace mcmc_detail

}  // namespace nlstorus
