#pragma once

// Exact samplers for the spherical law and its boundary-condition variant,
// plus the covariance estimator used throughout the verification harness.
//
// Strategy A (theta*gamma >= C_d): zero mode uniform on the allowed disc,
// the other Fourier modes Gaussian, rejection on the l2 ball.
// Strategy B (theta*gamma < C_d): every mode Gaussian at the tilted mass,
// accepted with probability exp(theta m (S - gamma N)) inside the ball.
// Both are exact by construction; a Fourier-mode Metropolis fallback exists
// for large massive systems and is flagged non-exact.

#include <optional>
#include <vector>

#include "nlstorus/greens.hpp"
#include "nlstorus/lattice.hpp"
#include "nlstorus/rng.hpp"

namespace nlstorus {

struct Boundary {
    SiteSet U;
    Field f;  // values on U (only the inner boundary enters the dynamics)
};

struct SphericalParams {
    TorusShape shape;
    double theta = 1.0;
    double gamma = 1.0;  // mass cutoff ||psi||_2^2 <= gamma N
    std::optional<Boundary> boundary;
    double min_accept = 1e-5;  // diagnostic floor on the acceptance rate
};

struct SampleBatch {
    std::uint64_t seed = 0;
    long count = 0;
    long attempts = 0;
    double acceptance = 0;
    bool exact = true;
    double theta = 0, gamma = 1;
    std::vector<Field> fields;
};

struct AcceptanceRateError : std::runtime_error {
    double observed_rate;
    explicit AcceptanceRateError(double rate)
        : std::runtime_error("sampler acceptance rate below configured floor"),
          observed_rate(rate) {}
};

struct EssFloorError : std::runtime_error {
    double ess;
    explicit EssFloorError(double e)
        : std::runtime_error("effective sample size below floor"), ess(e) {}
};

// Exact sampler, no boundary. Threads come from NLS_LATTICE_THREADS (>=1).
SampleBatch sample_spherical(const SphericalParams& params, long count, std::uint64_t seed);

// Exact sampler with boundary data: psi = psi_1 + h with h the massive
// harmonic extension at the finite-volume mass, psi_1 a Dirichlet Gaussian.
SampleBatch sample_spherical_boundary(const SphericalParams& params, long count,
                                      std::uint64_t seed);

// Fourier-mode Metropolis fallback for theta*gamma < C_d at large N where
// the exact rejection rate is impractical; batch is flagged exact = false.
SampleBatch sample_spherical_mcmc(const SphericalParams& params, long count, std::uint64_t seed,
                                  long sweeps_between = 8, long burnin_sweeps = 2000);

// ---- covariance estimation -------------------------------------------------

struct CovarianceEntry {
    std::vector<int> offset;
    cplx mean;       // estimate of E[psi(x+o) conj(psi(x))]
    double se_re;    // batch-means standard errors
    double se_im;
};

struct CovarianceTable {
    std::vector<CovarianceEntry> entries;
    long samples = 0;
};

// Translation-averaged two-point estimator. When `center` is set the spatial
// mean is removed from every sample first. When `allowed` is non-null only
// pairs with both endpoints in the allowed set enter (no translation
// averaging assumption needed). SE from 20 batch means.
CovarianceTable empirical_covariance(const std::vector<Field>& fields,
                                     const std::vector<std::vector<int>>& offsets,
                                     bool center = false,
                                     const std::vector<char>* allowed = nullptr);

// worker-count helper shared by the samplers (env NLS_LATTICE_THREADS)
int worker_threads();

}  // namespace nlstorus
