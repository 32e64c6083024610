#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "afc/errors.hpp"

namespace afc {

using cplx = std::complex<double>;

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// In-place iterative radix-2 FFT. Forward transform uses e^{-2*pi*i*jk/N};
/// the inverse applies the 1/N normalization.
inline void fft_pow2(std::vector<cplx>& a, bool inverse) {
    const std::size_t n = a.size();
    if (!is_pow2(n)) throw InvalidArgumentError("fft length must be a power of two");
    if (n < 2) return;

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? kTwoPi : -kTwoPi) / static_cast<double>(len);
        const cplx wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                // resync the twiddle recurrence to keep rounding from accumulating
                if ((j & 127) == 0 && j != 0)
                    w = cplx(std::cos(ang * static_cast<double>(j)),
                             std::sin(ang * static_cast<double>(j)));
                const cplx u = a[i + j];
                const cplx v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse) {
        const double inv_n = 1.0 / static_cast<double>(n);
        for (auto& x : a) x *= inv_n;
    }
}

/// FFT-bin frequency for bin m of an N-point transform at sample spacing dt:
/// bins [0, N/2) map to [0, N/2)/(N dt), bins [N/2, N) to negative frequencies.
inline double fft_bin_freq(std::size_t m, std::size_t n, double dt) {
    const auto sm = static_cast<long long>(m);
    const auto sn = static_cast<long long>(n);
    const double idx = static_cast<double>(sm < sn / 2 ? sm : sm - sn);
    return idx / (static_cast<double>(n) * dt);
}

}  // namespace afc
