// AVX2+FMA variants of the hot kernels. Compiled with -mavx2 -mfma; only
// reached through the runtime dispatcher after a cpuid check.

#include "nlstorus/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>

#include <cmath>

namespace nlstorus::kernels {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double v_sum_sq(const double* x, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256d a = _mm256_loadu_pd(x + i);
        __m256d b = _mm256_loadu_pd(x + i + 4);
        acc0 = _mm256_fmadd_pd(a, a, acc0);
        acc1 = _mm256_fmadd_pd(b, b, acc1);
    }
    double tail = 0;
    for (; i < n; ++i) tail += x[i] * x[i];
    return hsum(_mm256_add_pd(acc0, acc1)) + tail;
}

// |z_i|^2 for 4 consecutive complex values starting at xy
inline __m256d abs2_4(const double* xy) {
    __m256d v0 = _mm256_loadu_pd(xy);      // r0 i0 r1 i1
    __m256d v1 = _mm256_loadu_pd(xy + 4);  // r2 i2 r3 i3
    __m256d re = _mm256_unpacklo_pd(v0, v1);  // r0 r2 r1 r3
    __m256d im = _mm256_unpackhi_pd(v0, v1);  // i0 i2 i1 i3
    return _mm256_fmadd_pd(re, re, _mm256_mul_pd(im, im));
}

double v_sum_abs_pow(const double* xy, std::size_t ncplx, double p) {
    double h = p * 0.5;
    int k = static_cast<int>(h);
    bool even = (h == static_cast<double>(k) && k >= 1 && k <= 8);
    std::size_t i = 0;
    double acc = 0;
    if (even) {
        __m256d vacc = _mm256_setzero_pd();
        for (; i + 4 <= ncplx; i += 4) {
            __m256d s = abs2_4(xy + 2 * i);
            __m256d r = s;
            for (int j = 1; j < k; ++j) r = _mm256_mul_pd(r, s);
            vacc = _mm256_add_pd(vacc, r);
        }
        acc = hsum(vacc);
        for (; i < ncplx; ++i) {
            double s = xy[2 * i] * xy[2 * i] + xy[2 * i + 1] * xy[2 * i + 1];
            double r = s;
            for (int j = 1; j < k; ++j) r *= s;
            acc += r;
        }
    } else {
        for (; i < ncplx; ++i) {
            double s = xy[2 * i] * xy[2 * i] + xy[2 * i + 1] * xy[2 * i + 1];
            acc += std::pow(s, h);
        }
    }
    return acc;
}

double v_sum_diff_sq(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
        acc0 = _mm256_fmadd_pd(d0, d0, acc0);
        acc1 = _mm256_fmadd_pd(d1, d1, acc1);
    }
    double tail = 0;
    for (; i < n; ++i) {
        double d = a[i] - b[i];
        tail += d * d;
    }
    return hsum(_mm256_add_pd(acc0, acc1)) + tail;
}

void v_scale(double* x, std::size_t n, double s) {
    __m256d vs = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), vs));
    for (; i < n; ++i) x[i] *= s;
}

void v_dot_conj(const double* a, const double* b, std::size_t ncplx, double out[2]) {
    __m256d accre = _mm256_setzero_pd();
    __m256d accim = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= ncplx; i += 4) {
        __m256d a0 = _mm256_loadu_pd(a + 2 * i);
        __m256d a1 = _mm256_loadu_pd(a + 2 * i + 4);
        __m256d b0 = _mm256_loadu_pd(b + 2 * i);
        __m256d b1 = _mm256_loadu_pd(b + 2 * i + 4);
        __m256d ar = _mm256_unpacklo_pd(a0, a1);
        __m256d ai = _mm256_unpackhi_pd(a0, a1);
        __m256d br = _mm256_unpacklo_pd(b0, b1);
        __m256d bi = _mm256_unpackhi_pd(b0, b1);
        accre = _mm256_fmadd_pd(ar, br, accre);
        accre = _mm256_fmadd_pd(ai, bi, accre);
        accim = _mm256_fmadd_pd(ai, br, accim);
        accim = _mm256_fnmadd_pd(ar, bi, accim);
    }
    double re = hsum(accre), im = hsum(accim);
    for (; i < ncplx; ++i) {
        double ar = a[2 * i], ai = a[2 * i + 1];
        double br = b[2 * i], bi = b[2 * i + 1];
        re += ar * br + ai * bi;
        im += ai * br - ar * bi;
    }
    out[0] = re;
    out[1] = im;
}

}  // namespace

const Backend* avx2_backend() {
    static const Backend b{"avx2", v_sum_sq, v_sum_abs_pow, v_sum_diff_sq, v_scale, v_dot_conj};
    return &b;
}

}  // namespace nlstorus::kernels

#else

namespace nlstorus::kernels {
const Backend* avx2_backend() { return nullptr; }
}  // namespace nlstorus::kernels

#endif
