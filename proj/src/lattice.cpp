#include "nlstorus/lattice.hpp"

#include <cmath>
#include <stdexcept>

#include "nlstorus/fft_internal.hpp"
#include "nlstorus/kernels.hpp"

namespace nlstorus {

TorusShape TorusShape::make(int d, int n) {
    if (d < 1) throw std::invalid_argument("TorusShape: dimension must be >= 1");
    if (n < 2) throw std::invalid_argument("TorusShape: side length must be >= 2");
    TorusShape s;
    s.d = d;
    s.n = n;
    s.N = 1;
    for (int i = 0; i < d; ++i) {
        s.N *= n;
        if (s.N > (1L << 40)) throw std::invalid_argument("TorusShape: site count too large");
    }
    s.stride.resize(d);
    long acc = 1;
    for (int axis = d - 1; axis >= 0; --axis) {
        s.stride[axis] = acc;
        acc *= n;
    }
    return s;
}

long TorusShape::index(const std::vector<int>& x) const {
    long i = 0;
    for (int a = 0; a < d; ++a) {
        int c = x[a] % n;
        if (c < 0) c += n;
        i += stride[a] * c;
    }
    return i;
}

std::vector<int> TorusShape::coords(long i) const {
    std::vector<int> x(d);
    for (int a = 0; a < d; ++a) {
        x[a] = int(i / stride[a]);
        i -= stride[a] * x[a];
    }
    return x;
}

long TorusShape::neighbor(long i, int axis, int dir) const {
    long s = stride[axis];
    long block = s * n;
    long base = (i / block) * block;
    long off = i - base;
    long c = off / s;
    long rest = off - c * s;
    long cc = c + dir;
    if (cc >= n) cc -= n;
    if (cc < 0) cc += n;
    return base + cc * s + rest;
}

long TorusShape::shifted(long i, const std::vector<int>& off) const {
    std::vector<int> x = coords(i);
    for (int a = 0; a < d; ++a) {
        int c = (x[a] + off[a]) % n;
        if (c < 0) c += n;
        x[a] = c;
    }
    return index(x);
}

NeighborTable::NeighborTable(const TorusShape& s) : deg(2 * s.d), nbr(std::size_t(s.N) * 2 * s.d) {
    for (long i = 0; i < s.N; ++i)
        for (int a = 0; a < s.d; ++a) {
            nbr[std::size_t(i) * deg + 2 * a] = std::int32_t(s.neighbor(i, a, +1));
            nbr[std::size_t(i) * deg + 2 * a + 1] = std::int32_t(s.neighbor(i, a, -1));
        }
}

double eigenvalue(const TorusShape& s, const std::vector<int>& k) {
    double lam = 0;
    for (int a = 0; a < s.d; ++a) {
        double si = std::sin(M_PI * double(((k[a] % s.n) + s.n) % s.n) / double(s.n));
        lam += 4.0 * si * si;
    }
    return lam;
}

std::vector<double> all_eigenvalues(const TorusShape& s) {
    // separable: precompute the 1d profile once
    std::vector<double> one(s.n);
    for (int k = 0; k < s.n; ++k) {
        double si = std::sin(M_PI * k / double(s.n));
        one[k] = 4.0 * si * si;
    }
    std::vector<double> lam(std::size_t(s.N), 0.0);
    for (long i = 0; i < s.N; ++i) {
        long r = i;
        double acc = 0;
        for (int a = 0; a < s.d; ++a) {
            long c = r / s.stride[a];
            r -= c * s.stride[a];
            acc += one[c];
        }
        lam[i] = acc;
    }
    return lam;
}

Field laplacian(const Field& f) {
    const TorusShape& s = f.shape;
    Field g(s);
    double deg = 2.0 * s.d;
    for (int a = 0; a < s.d; ++a) {
        long st = s.stride[a];
        long block = st * s.n;
        for (long base = 0; base < s.N; base += block)
            for (long rest = 0; rest < st; ++rest)
                for (int c = 0; c < s.n; ++c) {
                    long i = base + c * st + rest;
                    long up = base + (c + 1 == s.n ? 0 : c + 1) * st + rest;
                    long dn = base + (c == 0 ? s.n - 1 : c - 1) * st + rest;
                    g.v[i] += f.v[up] + f.v[dn];
                }
    }
    for (long i = 0; i < s.N; ++i) g.v[i] -= deg * f.v[i];
    return g;
}

double dirichlet_energy(const Field& f) {
    const TorusShape& s = f.shape;
    // per axis, compare against the field shifted by +1 along that axis
    std::vector<cplx> shift(std::size_t(s.N));
    const double* base = reinterpret_cast<const double*>(f.v.data());
    double acc = 0;
    for (int a = 0; a < s.d; ++a) {
        long st = s.stride[a];
        long block = st * s.n;
        for (long b = 0; b < s.N; b += block) {
            // shift[i] = f[i + st] cyclically within the block
            std::copy(f.v.begin() + b + st, f.v.begin() + b + block, shift.begin() + b);
            std::copy(f.v.begin() + b, f.v.begin() + b + st, shift.begin() + b + block - st);
        }
        acc += kernels::sum_diff_sq(base, reinterpret_cast<const double*>(shift.data()),
                                    std::size_t(2 * s.N));
    }
    return acc;
}

double norm2_sq(const Field& f) {
    return kernels::sum_sq(reinterpret_cast<const double*>(f.v.data()), std::size_t(2 * f.shape.N));
}

double norm_inf(const Field& f) {
    double m = 0;
    for (const cplx& z : f.v) m = std::max(m, std::norm(z));
    return std::sqrt(m);
}

double norm_pp(const Field& f, double p) {
    if (!(p >= 1)) throw std::invalid_argument("norm_pp: p must be >= 1");
    return kernels::sum_abs_pow(f.v.data(), std::size_t(f.shape.N), p);
}

double norm_p(const Field& f, double p) {
    if (std::isinf(p)) return norm_inf(f);
    return std::pow(norm_pp(f, p), 1.0 / p);
}

double nu_n(double nu, double p, long N) {
    return (2.0 / p) * std::pow(nu / double(N), 0.5 * (p - 2.0));
}

double nls_hamiltonian(const Field& f, double nu, double p) {
    return dirichlet_energy(f) - nu_n(nu, p, f.shape.N) * norm_pp(f, p);
}

namespace {

// apply the 1d transform along every axis; sign=-1 forward, +1 inverse
Field dft_all_axes(const Field& f, int sign) {
    const TorusShape& s = f.shape;
    Field g = f;
    std::vector<cplx> line(std::size_t(s.n));
    for (int a = 0; a < s.d; ++a) {
        long st = s.stride[a];
        long block = st * s.n;
        for (long base = 0; base < s.N; base += block)
            for (long rest = 0; rest < st; ++rest) {
                for (int c = 0; c < s.n; ++c) line[c] = g.v[base + c * st + rest];
                fftdetail::fft_1d(line.data(), s.n, sign);
                for (int c = 0; c < s.n; ++c) g.v[base + c * st + rest] = line[c];
            }
    }
    double scale = 1.0 / std::sqrt(double(s.N));
    for (cplx& z : g.v) z *= scale;
    return g;
}

}  // namespace

Field fourier(const Field& f) { return dft_all_axes(f, -1); }

Field inverse_fourier(const Field& f) { return dft_all_axes(f, +1); }

Field fourier_direct(const Field& f) {
    const TorusShape& s = f.shape;
    Field g(s);
    double scale = 1.0 / std::sqrt(double(s.N));
    for (long k = 0; k < s.N; ++k) {
        std::vector<int> kc = s.coords(k);
        cplx acc{0, 0};
        for (long x = 0; x < s.N; ++x) {
            std::vector<int> xc = s.coords(x);
            long dot = 0;
            for (int a = 0; a < s.d; ++a) dot += long(kc[a]) * xc[a];
            double ang = -2.0 * M_PI * double(dot % s.n) / double(s.n);
            acc += f.v[x] * cplx{std::cos(ang), std::sin(ang)};
        }
        g.v[k] = acc * scale;
    }
    return g;
}

}  // namespace nlstorus
