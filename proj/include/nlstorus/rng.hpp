#pragma once

// Counter-based RNG (Philox4x32-10). Streams are keyed by
// (seed, module tag, stream index), so parallel workers and module-level
// refactorings never perturb each other's randomness.

#include <cstdint>
#include <string_view>

namespace nlstorus {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}
}  // namespace detail

class Rng {
public:
    Rng(std::uint64_t seed, std::string_view tag, std::uint64_t stream);

    std::uint32_t next_u32();
    std::uint64_t next_u64();

    // uniform in [0,1) with 53 random bits
    double uniform();
    // uniform in (lo, hi)
    double uniform(double lo, double hi);
    // standard normal (Box-Muller, deterministic consumption of 2 uniforms)
    double gaussian();
    // index in [0, n)
    std::uint64_t below(std::uint64_t n);

private:
    void refill();

    std::uint32_t key_[2];
    std::uint32_t ctr_[4];
    std::uint32_t buf_[4];
    int have_ = 0;
    bool cached_gauss_ = false;
    double gauss_val_ = 0;
};

}  // namespace nlstorus
