#pragma once

// Torus geometry, complex fields, norms, graph Laplacian and the unitary
// Fourier transform that diagonalizes it.

#include <complex>
#include <cstdint>
#include <vector>

namespace nlstorus {

using cplx = std::complex<double>;

struct TorusShape {
    int d = 0;       // dimension
    int n = 0;       // side length
    long N = 0;      // site count n^d
    std::vector<long> stride;  // stride[axis], row-major over (x1,...,xd)

    static TorusShape make(int d, int n);

    long index(const std::vector<int>& x) const;
    std::vector<int> coords(long i) const;
    // site shifted by +-1 along axis (dir = +1 or -1)
    long neighbor(long i, int axis, int dir) const;
    // site shifted by an offset vector (componentwise mod n)
    long shifted(long i, const std::vector<int>& off) const;
    bool operator==(const TorusShape& o) const { return d == o.d && n == o.n; }
};

// 2d neighbors per site, built once for solver / MCMC hot paths
struct NeighborTable {
    explicit NeighborTable(const TorusShape& s);
    const std::int32_t* row(long i) const { return nbr.data() + i * deg; }
    int deg;
    std::vector<std::int32_t> nbr;
};

struct Field {
    TorusShape shape;
    std::vector<cplx> v;

    Field() = default;
    explicit Field(const TorusShape& s) : shape(s), v(s.N, cplx{0, 0}) {}
    cplx& operator[](long i) { return v[i]; }
    const cplx& operator[](long i) const { return v[i]; }
};

// lambda_k = 4 sum_i sin^2(pi k_i / n), in [0, 4d]
double eigenvalue(const TorusShape& s, const std::vector<int>& k);
// all eigenvalues by frequency index (same row-major indexing as sites)
std::vector<double> all_eigenvalues(const TorusShape& s);

// (Delta f)(x) = sum_{y~x} f(y) - 2d f(x)   (not divided by the degree)
Field laplacian(const Field& f);

// ||grad f||_2^2 = sum over unordered edges |f(x)-f(y)|^2
double dirichlet_energy(const Field& f);

// ||f||_p^p = sum |f(x)|^p; returns the norm itself. p must be >= 1 or inf.
double norm_p(const Field& f, double p);
double norm2_sq(const Field& f);
double norm_inf(const Field& f);
double norm_pp(const Field& f, double p);  // ||f||_p^p

// nu_N = (2/p) (nu/N)^((p-2)/2)
double nu_n(double nu, double p, long N);

// H_N(f) = ||grad f||^2 - nu_N ||f||_p^p
double nls_hamiltonian(const Field& f, double nu, double p);

// Unitary transforms: fourier(f)_k = N^{-1/2} sum_x f(x) e^{-2 pi i k.x/n},
// so inverse_fourier(fourier(f)) = f and the 2-norm is preserved.
Field fourier(const Field& f);
Field inverse_fourier(const Field& f);

// O(N^2) direct evaluation, used as the oracle for the fast transform
Field fourier_direct(const Field& f);

}  // namespace nlstorus
