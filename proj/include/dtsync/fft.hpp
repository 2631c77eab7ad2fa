#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace dtsync::fft {

using cplx = std::complex<double>;

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// In-place iterative radix-2 transform. Inverse applies the 1/N scale.
inline void transform(std::vector<cplx>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("fft: length must be a nonzero power of two");

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const double pi = 3.14159265358979323846;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * pi / double(len) * (inverse ? 1.0 : -1.0);
        const cplx wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                cplx u = a[i + k];
                cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse) {
        for (auto& x : a) x /= double(n);
    }
}

inline std::vector<cplx> forward(std::vector<cplx> a) {
    transform(a, false);
    return a;
}

inline std::vector<cplx> inverse(std::vector<cplx> a) {
    transform(a, true);
    return a;
}

// Signed bin frequency in Hz for bin k of an n-point transform at rate fs.
inline double bin_freq(std::size_t k, std::size_t n, double fs) {
    return k < n / 2 ? double(k) * fs / double(n) : (double(k) - double(n)) * fs / double(n);
}

}  // namespace dtsync::fft
