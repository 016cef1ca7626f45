// Mixed-radix complex FFT for the small smooth sizes used on the torus.
// Any n is handled; a large prime factor falls back to an O(p^2) DFT block,
// which is fine at these sizes.

#include "nlstorus/fft_internal.hpp"

#include <cmath>

namespace nlstorus::fftdetail {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void fft_rec(cplx* a, int n, int sign, const int* factors) {
    if (n == 1) return;
    int p = factors[0], m = n / p;
    std::vector<cplx> work(n);
    for (int s = 0; s < p; ++s) {
        for (int j = 0; j < m; ++j) work[std::size_t(s) * m + j] = a[std::size_t(p) * j + s];
        fft_rec(work.data() + std::size_t(s) * m, m, sign, factors + 1);
    }
    for (int q = 0; q < m; ++q) {
        for (int r = 0; r < p; ++r) {
            cplx acc{0, 0};
            for (int s = 0; s < p; ++s) {
                double ang = sign * kTwoPi * (double(s) * (q + double(m) * r)) / double(n);
                acc += work[std::size_t(s) * m + q] * cplx{std::cos(ang), std::sin(ang)};
            }
            a[q + std::size_t(m) * r] = acc;
        }
    }
}

}  // namespace

std::vector<int> factorize(int n) {
    std::vector<int> f;
    for (int p = 2; p * p <= n; ++p)
        while (n % p == 0) {
            f.push_back(p);
            n /= p;
        }
    if (n > 1) f.push_back(n);
    return f;
}

void fft_1d(cplx* a, int n, int sign) {
    if (n == 1) return;
    std::vector<int> factors = factorize(n);
    factors.push_back(1);
    fft_rec(a, n, sign, factors.data());
}

}  // namespace nlstorus::fftdetail
