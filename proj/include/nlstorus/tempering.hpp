#pragma once

// Deterministic separating-set procedure: grow 2-step shells around the
// high-amplitude seed set until a shell carries at most eps*N/10 mass.

#include <vector>

#include "nlstorus/greens.hpp"
#include "nlstorus/lattice.hpp"

namespace nlstorus {

struct SeparatingSet {
    SiteSet U;                         // the separating set itself
    std::vector<long> seed;            // U_0 = sites with |psi|^2 >= eps N
    int i0 = 0;                        // selected shell index (0 when seed empty)
    std::vector<std::vector<long>> shells;  // B_0 .. B_{i0}
    double eps = 0;
    double shell_mass = 0;             // l2 mass on B_{i0}
    bool within_theorem_range = false; // eps < 21^{-d}
    // certified properties (checked on construction)
    bool prop_size = false;            // |U| <= eps^{-d-2}
    bool prop_outside = false;         // |psi|^2 < eps N off U
    bool prop_shell = false;           // shell mass <= eps N / 10
};

// Requires ||f||_2^2 < N and eps in (0,1). The theorem-backed range is
// eps < 21^{-d}; larger eps is accepted and the certificate records whether
// the size bound still holds.
SeparatingSet separating_set(const Field& f, double eps);

// U_1(C) = { x : d(x, U) <= C log^2 N }
SiteSet expanded_set(const SiteSet& U, double C);

// ||f|_U||_2^2 / N
double mass_fraction(const Field& f, const SiteSet& U);

}  // namespace nlstorus
