#pragma once

// Data-parallel inner loops shared by the samplers and estimators.
// Scalar reference implementations always exist; an AVX2+FMA variant is
// selected at runtime when the CPU supports it. Both variants are
// equivalence-tested against each other.

#include <complex>
#include <cstddef>

namespace nlstorus::kernels {

using cplx = std::complex<double>;

struct Backend {
    const char* name;
    // sum of squares of a real array
    double (*sum_sq)(const double* x, std::size_t n);
    // sum of (re^2+im^2)^(p/2) over an interleaved complex array
    double (*sum_abs_pow)(const double* xy, std::size_t ncplx, double p);
    // sum of |a_i - b_i|^2 over real arrays
    double (*sum_diff_sq)(const double* a, const double* b, std::size_t n);
    // x *= s
    void (*scale)(double* x, std::size_t n, double s);
    // sum of a_i * conj(b_i) over interleaved complex arrays -> out[0]+i*out[1]
    void (*dot_conj)(const double* a, const double* b, std::size_t ncplx, double out[2]);
};

// Active backend (runtime-dispatched; NLSTORUS_SIMD=scalar forces scalar).
const Backend& active();
const Backend& scalar_backend();
const Backend* avx2_backend();  // nullptr when unavailable
void force_backend(const char* name);  // "scalar" or "avx2"; tests only

// Convenience wrappers over the active backend.
inline double sum_sq(const double* x, std::size_t n) { return active().sum_sq(x, n); }
inline double sum_abs_pow(const cplx* z, std::size_t n, double p) {
    return active().sum_abs_pow(reinterpret_cast<const double*>(z), n, p);
}
inline double sum_diff_sq(const double* a, const double* b, std::size_t n) {
    return active().sum_diff_sq(a, b, n);
}
inline void scale(double* x, std::size_t n, double s) { active().scale(x, n, s); }
inline cplx dot_conj(const cplx* a, const cplx* b, std::size_t n) {
    double out[2];
    active().dot_conj(reinterpret_cast<const double*>(a), reinterpret_cast<const double*>(b), n, out);
    return {out[0], out[1]};
}

// |z|^p for scalar use; fast path for small even integer p.
double abs_pow(double re, double im, double p);

}  // namespace nlstorus::kernels
