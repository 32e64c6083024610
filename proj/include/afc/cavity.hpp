#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "afc/constants.hpp"
#include "afc/errors.hpp"
#include "afc/grid.hpp"
#include "afc/spectra.hpp"

namespace afc {

using cplx = std::complex<double>;

/// Asymmetric crystal cavity: front/back mirror amplitude reflectivities,
/// host index, crystal length, and the detector normalization divisor s.
///
/// `phi0` is an additive round-trip phase offset. Values of (n, L) quoted to
/// a few digits pin the ~1e5 rad round-trip phase only modulo many cycles, so
/// the absolute positions of the cavity resonances are a convention; phi0
/// carries that convention explicitly (see model.hpp for the
/// resonance-anchoring solve that produces it).
struct CavityParams {
    double r1 = 0.0;      ///< front mirror amplitude reflectivity
    double r2 = 1.0;      ///< back mirror amplitude reflectivity
    double n_host = 1.0;  ///< constant real refractive index of the host
    double length = 0.0;  ///< crystal length, m
    double s = 2.0;       ///< detector normalization divisor (2 = ideal 50/50)
    double phi0 = 0.0;    ///< round-trip phase offset, rad
};

inline void validate(const CavityParams& c) {
    if (!(c.r1 >= 0.0 && c.r1 < c.r2 && c.r2 <= 1.0))
        throw InvalidArgumentError("cavity needs 0 <= r1 < r2 <= 1, got r1 = " +
                                   std::to_string(c.r1) + ", r2 = " + std::to_string(c.r2));
    if (!(c.n_host >= 1.0)) throw InvalidArgumentError("host index must be >= 1");
    if (!(c.length > 0.0)) throw InvalidArgumentError("crystal length must be > 0");
    if (!(c.s > 0.0)) throw InvalidArgumentError("detector divisor s must be > 0");
}

/// Complex amplitude response sampled on a frequency grid.
struct ComplexSpectrum {
    FrequencyGrid grid;
    std::vector<cplx> values;

    /// Linear interpolation (separately in re and im) at an absolute frequency.
    cplx sample(double nu) const {
        const double x = grid.position(nu);
        if (x <= 0.0) return values.front();
        const double last = static_cast<double>(grid.count - 1);
        if (x >= last) return values.back();
        const auto i = static_cast<std::size_t>(x);
        const double t = x - static_cast<double>(i);
        return values[i] * (1.0 - t) + values[i + 1] * t;
    }
};

/// Reflected amplitude at one sample:
///   r = (-r1 + r2 e^{-d} e^{-i Phi}) / (1 - r1 r2 e^{-d} e^{-i Phi})
inline cplx reflection_amplitude_at(const CavityParams& cavity, double depth, double phase) {
    const cplx loop = cavity.r2 * std::exp(cplx(-depth, -phase));
    return (-cavity.r1 + loop) / (1.0 - cavity.r1 * loop);
}

/// Reflected amplitude of the absorbing medium inside the asymmetric cavity,
/// sampled over the grid shared by `depth` and `phase`. The cavity phi0
/// offset must already be folded into `phase`.
inline ComplexSpectrum reflection_amplitude(const CavityParams& cavity,
                                            const OpticalDepthSpectrum& depth,
                                            const std::vector<double>& phase) {
    validate(cavity);
    validate(depth.grid);
    if (depth.values.size() != depth.grid.count || phase.size() != depth.grid.count)
        throw InvalidArgumentError("depth and phase must share the response grid");
    ComplexSpectrum r;
    r.grid = depth.grid;
    r.values.resize(depth.grid.count);
    for (std::size_t i = 0; i < r.values.size(); ++i)
        r.values[i] = reflection_amplitude_at(cavity, depth.values[i], phase[i]);
    return r;
}

/// Detector-normalized reflected power |r(nu)|^2 / s.
inline std::vector<double> reflected_power(const ComplexSpectrum& amp, double s) {
    if (!(s > 0.0)) throw InvalidArgumentError("detector divisor s must be > 0");
    std::vector<double> p(amp.values.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(amp.values[i]) / s;
    return p;
}

/// Free spectral range c / (2 n L), Hz.
inline double free_spectral_range(const CavityParams& cavity) {
    validate(cavity);
    return kSpeedOfLight / (2.0 * cavity.n_host * cavity.length);
}

namespace detail {

/// Golden-section minimizer for a smooth unimodal 1-D function.
template <typename F>
double golden_section_min(F&& f, double a, double b, double tol) {
    constexpr double kInvPhi = 0.6180339887498949;
    double c1 = b - kInvPhi * (b - a);
    double c2 = a + kInvPhi * (b - a);
    double f1 = f(c1), f2 = f(c2);
    while (b - a > tol) {
        if (f1 < f2) {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - kInvPhi * (b - a);
            f1 = f(c1);
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + kInvPhi * (b - a);
            f2 = f(c2);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace detail

}  // namespace afc
