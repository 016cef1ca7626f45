#include "nlstorus/rng.hpp"

#include <cmath>

namespace nlstorus {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::uint32_t c[4], const std::uint32_t k[2]) {
    std::uint64_t p0 = std::uint64_t(kPhiloxM0) * c[0];
    std::uint64_t p1 = std::uint64_t(kPhiloxM1) * c[2];
    std::uint32_t hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
    std::uint32_t hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
    std::uint32_t out[4] = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    c[0] = out[0];
    c[1] = out[1];
    c[2] = out[2];
    c[3] = out[3];
}

inline void philox4x32_10(const std::uint32_t ctr[4], const std::uint32_t key[2], std::uint32_t out[4]) {
    std::uint32_t c[4] = {ctr[0], ctr[1], ctr[2], ctr[3]};
    std::uint32_t k[2] = {key[0], key[1]};
    for (int r = 0; r < 10; ++r) {
        philox_round(c, k);
        k[0] += kPhiloxW0;
        k[1] += kPhiloxW1;
    }
    out[0] = c[0];
    out[1] = c[1];
    out[2] = c[2];
    out[3] = c[3];
}

std::uint64_t hash_tag(std::string_view tag) {
    // FNV-1a
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char ch : tag) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::string_view tag, std::uint64_t stream) {
    std::uint64_t s = seed ^ (hash_tag(tag) * 0x9E3779B97F4A7C15ull);
    std::uint64_t k0 = detail::splitmix64(s);
    s ^= stream * 0xD1B54A32D192ED03ull + 0x8CB92BA72F3D8DD7ull;
    std::uint64_t k1 = detail::splitmix64(s);
    key_[0] = std::uint32_t(k0);
    key_[1] = std::uint32_t(k0 >> 32);
    ctr_[0] = 0;
    ctr_[1] = 0;
    ctr_[2] = std::uint32_t(k1);
    ctr_[3] = std::uint32_t(k1 >> 32);
}

void Rng::refill() {
    philox4x32_10(ctr_, key_, buf_);
    // 64-bit counter in words 0..1; words 2..3 carry the stream nonce
    if (++ctr_[0] == 0) ++ctr_[1];
    have_ = 4;
}

std::uint32_t Rng::next_u32() {
    if (have_ == 0) refill();
    return buf_[4 - have_--];
}

std::uint64_t Rng::next_u64() {
    std::uint64_t lo = next_u32();
    std::uint64_t hi = next_u32();
    return lo | (hi << 32);
}

double Rng::uniform() {
    return double(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double Rng::gaussian() {
    if (cached_gauss_) {
        cached_gauss_ = false;
        return gauss_val_;
    }
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 0) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    gauss_val_ = r * std::sin(a);
    cached_gauss_ = true;
    return r * std::cos(a);
}

std::uint64_t Rng::below(std::uint64_t n) {
    // Lemire-style rejection to avoid modulo bias
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    std::uint64_t l = static_cast<std::uint64_t>(m);
    if (l < n) {
        std::uint64_t t = -n % n;
        while (l < t) {
            x = next_u64();
            m = static_cast<__uint128_t>(x) * n;
            l = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace nlstorus
