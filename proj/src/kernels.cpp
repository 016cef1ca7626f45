#include "nlstorus/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace nlstorus::kernels {

namespace {

std::atomic<const Backend*> g_active{nullptr};

const Backend* pick() {
    const char* env = std::getenv("NLSTORUS_SIMD");
    if (env && std::strcmp(env, "scalar") == 0) return &scalar_backend();
#if defined(__x86_64__) || defined(__i386__)
    bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    if (env && std::strcmp(env, "avx2") == 0 && !ok)
        throw std::runtime_error("NLSTORUS_SIMD=avx2 requested but CPU lacks avx2+fma");
    if (ok && avx2_backend()) return avx2_backend();
#endif
    return &scalar_backend();
}

}  // namespace

const Backend& active() {
    const Backend* b = g_active.load(std::memory_order_acquire);
    if (!b) {
        b = pick();
        g_active.store(b, std::memory_order_release);
    }
    return *b;
}

void force_backend(const char* name) {
    if (std::strcmp(name, "scalar") == 0) {
        g_active.store(&scalar_backend(), std::memory_order_release);
    } else if (std::strcmp(name, "avx2") == 0) {
        const Backend* b = avx2_backend();
#if defined(__x86_64__) || defined(__i386__)
        if (!b || !(__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")))
            throw std::runtime_error("avx2 backend unavailable on this CPU");
#else
        throw std::runtime_error("avx2 backend unavailable on this CPU");
#endif
        g_active.store(b, std::memory_order_release);
    } else {
        throw std::invalid_argument("unknown kernel backend");
    }
}

}  // namespace nlstorus::kernels
