#include "nlstorus/kernels.hpp"

#include <cmath>

namespace nlstorus::kernels {

namespace {

// p/2 as a small positive integer, or 0 when p is not an even integer in [2,16]
inline int half_int_exponent(double p) {
    double h = p * 0.5;
    int k = static_cast<int>(h);
    if (h == static_cast<double>(k) && k >= 1 && k <= 8) return k;
    return 0;
}

inline double ipow(double s, int k) {
    double r = s;
    for (int i = 1; i < k; ++i) r *= s;
    return r;
}

double s_sum_sq(const double* x, std::size_t n) {
    double acc0 = 0, acc1 = 0;
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        acc0 += x[i] * x[i];
        acc1 += x[i + 1] * x[i + 1];
    }
    if (i < n) acc0 += x[i] * x[i];
    return acc0 + acc1;
}

double s_sum_abs_pow(const double* xy, std::size_t ncplx, double p) {
    int k = half_int_exponent(p);
    double acc = 0;
    if (k == 1) {
        return s_sum_sq(xy, 2 * ncplx);
    } else if (k > 1) {
        for (std::size_t i = 0; i < ncplx; ++i) {
            double s = xy[2 * i] * xy[2 * i] + xy[2 * i + 1] * xy[2 * i + 1];
            acc += ipow(s, k);
        }
    } else {
        for (std::size_t i = 0; i < ncplx; ++i) {
            double s = xy[2 * i] * xy[2 * i] + xy[2 * i + 1] * xy[2 * i + 1];
            acc += std::pow(s, 0.5 * p);
        }
    }
    return acc;
}

double s_sum_diff_sq(const double* a, const double* b, std::size_t n) {
    double acc0 = 0, acc1 = 0;
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        double d0 = a[i] - b[i];
        double d1 = a[i + 1] - b[i + 1];
        acc0 += d0 * d0;
        acc1 += d1 * d1;
    }
    if (i < n) {
        double d = a[i] - b[i];
        acc0 += d * d;
    }
    return acc0 + acc1;
}

void s_scale(double* x, std::size_t n, double s) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= s;
}

void s_dot_conj(const double* a, const double* b, std::size_t ncplx, double out[2]) {
    double re = 0, im = 0;
    for (std::size_t i = 0; i < ncplx; ++i) {
        double ar = a[2 * i], ai = a[2 * i + 1];
        double br = b[2 * i], bi = b[2 * i + 1];
        re += ar * br + ai * bi;
        im += ai * br - ar * bi;
    }
    out[0] = re;
    out[1] = im;
}

}  // namespace

const Backend& scalar_backend() {
    static const Backend b{"scalar", s_sum_sq, s_sum_abs_pow, s_sum_diff_sq, s_scale, s_dot_conj};
    return b;
}

double abs_pow(double re, double im, double p) {
    double s = re * re + im * im;
    int k = half_int_exponent(p);
    if (k) return ipow(s, k);
    return std::pow(s, 0.5 * p);
}

}  // namespace nlstorus::kernels
