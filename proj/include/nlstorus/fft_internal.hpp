#pragma once

#include <complex>
#include <vector>

namespace nlstorus::fftdetail {

using cplx = std::complex<double>;

// In-place unnormalized DFT of length n: a[k] = sum_j a[j] e^{sign*2*pi*i*jk/n}
void fft_1d(cplx* a, int n, int sign);

std::vector<int> factorize(int n);

}  // namespace nlstorus::fftdetail
