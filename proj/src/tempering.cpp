#include "nlstorus/tempering.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

namespace nlstorus {

SeparatingSet separating_set(const Field& f, double eps) {
    const TorusShape& s = f.shape;
    if (!(eps > 0 && eps < 1)) throw std::invalid_argument("separating_set: eps must be in (0,1)");
    double total = norm2_sq(f);
    if (!(total < double(s.N)))
        throw std::invalid_argument("separating_set: requires ||f||_2^2 < N");

    SeparatingSet out;
    out.eps = eps;
    out.within_theorem_range = eps < std::pow(21.0, -double(s.d));
    double thresh = eps * double(s.N);

    for (long i = 0; i < s.N; ++i)
        if (std::norm(f.v[std::size_t(i)]) >= thresh) out.seed.push_back(i);

    if (out.seed.empty()) {
        out.U = SiteSet::empty(s);
        out.i0 = 0;
        out.prop_size = out.prop_outside = out.prop_shell = true;
        return out;
    }

    // BFS distances from U_0; U_i = {d <= 2i}, B_i = U_i \ U_{i-1}
    SiteSet seed_set = SiteSet::of(s, out.seed);
    std::vector<int> dist = distance_to_set(s, seed_set);

    out.shells.emplace_back(out.seed);  // B_0 = U_0
    double shell_cap = eps * double(s.N) / 10.0;
    int max_i = int(std::ceil(10.0 / eps));
    // bucket sites by shell index i = ceil(dist/2), so B_i is bucket i
    int max_bucket = 0;
    for (long x = 0; x < s.N; ++x) max_bucket = std::max(max_bucket, (dist[std::size_t(x)] + 1) / 2);
    std::vector<std::vector<long>> bucket(std::size_t(max_bucket) + 1);
    for (long x = 0; x < s.N; ++x) bucket[std::size_t((dist[std::size_t(x)] + 1) / 2)].push_back(x);
    int i0 = -1;
    double i0_mass = 0;
    for (int i = 1; i <= max_i; ++i) {
        std::vector<long> shell = i <= max_bucket ? bucket[std::size_t(i)] : std::vector<long>{};
        double mass = 0;
        for (long x : shell) mass += std::norm(f.v[std::size_t(x)]);
        out.shells.push_back(shell);
        if (mass <= shell_cap) {
            i0 = i;
            i0_mass = mass;
            break;
        }
    }
    if (i0 < 0) throw std::logic_error("separating_set: pigeonhole failed (cannot happen)");
    out.i0 = i0;
    out.shell_mass = i0_mass;

    // U = U_{i0-1} together with its 1-neighborhood
    std::vector<long> members;
    for (long x = 0; x < s.N; ++x)
        if (dist[std::size_t(x)] <= 2 * (i0 - 1) + 1) members.push_back(x);
    out.U = SiteSet::of(s, members);

    out.prop_shell = i0_mass <= shell_cap;
    out.prop_size = double(out.U.size()) <= std::pow(eps, -double(s.d) - 2.0);
    out.prop_outside = true;
    for (long x = 0; x < s.N; ++x)
        if (!out.U.contains(x) && std::norm(f.v[std::size_t(x)]) >= thresh) {
            out.prop_outside = false;
            break;
        }
    return out;
}

SiteSet expanded_set(const SiteSet& U, double C) {
    if (!(C > 0)) throw std::invalid_argument("expanded_set: C must be positive");
    const TorusShape& s = U.shape;
    if (U.sites.empty()) return SiteSet::empty(s);
    double logn = std::log(double(s.N));
    double radius = C * logn * logn;
    std::vector<int> dist = distance_to_set(s, U);
    std::vector<long> members;
    for (long x = 0; x < s.N; ++x)
        if (dist[std::size_t(x)] >= 0 && double(dist[std::size_t(x)]) <= radius) members.push_back(x);
    return SiteSet::of(s, members);
}

double mass_fraction(const Field& f, const SiteSet& U) {
    double acc = 0;
    for (long i : U.sites) acc += std::norm(f.v[std::size_t(i)]);
    return acc / double(f.shape.N);
}

}  // namespace nlstorus
