#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "afc/errors.hpp"
#include "afc/grid.hpp"

namespace afc {

/// FWHM / gaussian-width ratio for the comb teeth: gamma = sqrt(8 ln 2) * gamma_tilde.
inline constexpr double kFwhmPerGaussianWidth = 2.3548200450309493;  // sqrt(8 ln 2)

/// Inhomogeneously broadened (Lorentzian) absorption line of the doped crystal.
struct InhomogeneousProfile {
    double nu0 = 0.0;        ///< line center, Hz
    double gamma_in = 0.0;   ///< FWHM, Hz
    double peak_alpha = 0.0; ///< peak absorption coefficient, 1/m

    /// alpha(nu) = peak_alpha * (gamma_in/2)^2 / ((nu-nu0)^2 + (gamma_in/2)^2)
    double alpha(double nu) const {
        const double hw = 0.5 * gamma_in;
        const double d = nu - nu0;
        return peak_alpha * hw * hw / (d * d + hw * hw);
    }
};

inline void validate(const InhomogeneousProfile& p) {
    if (!(p.gamma_in > 0.0))
        throw InvalidArgumentError("profile FWHM must be > 0");
    if (!(p.peak_alpha >= 0.0))
        throw InvalidArgumentError("profile peak absorption must be >= 0");
}

/// Gaussian-tooth comb description: identical teeth of peak depth d_c at
/// spacing delta, width gamma_tilde, over a constant background d0.
struct CombParams {
    double d_c = 0.0;         ///< tooth peak optical depth
    double delta = 0.0;       ///< tooth spacing, Hz
    double gamma_tilde = 0.0; ///< gaussian width parameter, Hz
    double d0 = 0.0;          ///< background optical depth
    int n_teeth = 9;          ///< number of teeth
    double center = 0.0;      ///< absolute frequency of the comb center, Hz

    /// Center of tooth k (1-based); teeth are symmetric about `center`.
    double tooth_center(int k) const {
        return center + (static_cast<double>(k) - 0.5 * (n_teeth + 1)) * delta;
    }
    /// Tooth FWHM gamma = sqrt(8 ln 2) gamma_tilde.
    double gamma_fwhm() const { return kFwhmPerGaussianWidth * gamma_tilde; }
    /// Comb finesse F = delta / gamma.
    double finesse() const { return delta / gamma_fwhm(); }
    /// Re-emission (storage) time 1/delta, s.
    double storage_time() const { return 1.0 / delta; }
    /// Frequency extent of the tooth pattern (first to last tooth center).
    double tooth_span() const { return delta * static_cast<double>(n_teeth - 1); }
};

inline void validate(const CombParams& c) {
    if (!(c.d_c >= 0.0)) throw InvalidArgumentError("comb d_c must be >= 0");
    if (!(c.d0 >= 0.0)) throw InvalidArgumentError("comb d0 must be >= 0");
    if (!(c.delta > 0.0)) throw InvalidArgumentError("comb tooth spacing must be > 0");
    if (!(c.gamma_tilde > 0.0)) throw InvalidArgumentError("comb tooth width must be > 0");
    if (c.n_teeth < 1) throw InvalidArgumentError("comb needs at least one tooth");
}

/// Real optical depth d(nu) = alpha(nu) * L sampled on a frequency grid.
struct OpticalDepthSpectrum {
    FrequencyGrid grid;
    std::vector<double> values;
};

inline void validate(const OpticalDepthSpectrum& s) {
    validate(s.grid);
    if (s.values.size() != s.grid.count)
        throw InvalidArgumentError("optical depth length does not match grid count");
    for (double v : s.values)
        if (!(v >= 0.0)) throw InvalidArgumentError("optical depth must be >= 0 everywhere");
}

/// Lorentzian absorption coefficient alpha(nu), 1/m, sampled on `grid`.
inline std::vector<double> lorentzian_alpha(const InhomogeneousProfile& profile,
                                            const FrequencyGrid& grid) {
    validate(profile);
    validate(grid);
    std::vector<double> a(grid.count);
    for (std::size_t i = 0; i < grid.count; ++i) a[i] = profile.alpha(grid.freq(i));
    return a;
}

namespace detail {

/// Comb optical depth at a single frequency (direct sum over all teeth;
/// teeth farther than 8 gamma_tilde contribute < 2e-14 d_c and are skipped).
inline double comb_depth_at(const CombParams& comb, double nu) {
    double v = comb.d0;
    const double inv2g2 = 1.0 / (2.0 * comb.gamma_tilde * comb.gamma_tilde);
    const double cutoff = 8.0 * comb.gamma_tilde;
    for (int k = 1; k <= comb.n_teeth; ++k) {
        const double x = nu - comb.tooth_center(k);
        if (std::abs(x) > cutoff) continue;
        v += comb.d_c * std::exp(-x * x * inv2g2);
    }
    return v;
}

/// Optical depth of the comb-engineered medium at one frequency: comb inside
/// the window, Lorentzian outside, linear cross-fade over `fade` at the edges.
inline double embedded_depth_at(const InhomogeneousProfile& profile, const CombParams& comb,
                                double length_m, double window_halfwidth, double fade,
                                double nu) {
    const double x = std::abs(nu - comb.center);
    if (x <= window_halfwidth) return comb_depth_at(comb, nu);
    const double lor = profile.alpha(nu) * length_m;
    if (fade > 0.0 && x < window_halfwidth + fade) {
        const double w = 1.0 - (x - window_halfwidth) / fade;
        return w * comb_depth_at(comb, nu) + (1.0 - w) * lor;
    }
    return lor;
}

inline void require_comb_resolved(const CombParams& comb, const FrequencyGrid& grid) {
    const double required = comb.gamma_tilde / 4.0;
    if (grid.spacing > required)
        throw ResolutionError("grid spacing " + std::to_string(grid.spacing) +
                                  " Hz does not resolve comb teeth; need <= " +
                                  std::to_string(required) + " Hz",
                              required);
}

}  // namespace detail

/// d(nu) = sum_k d_c exp(-(nu - b_k)^2 / (2 gamma_tilde^2)) + d0 on `grid`.
/// Requires grid spacing <= gamma_tilde / 4.
inline OpticalDepthSpectrum comb_depth(const CombParams& comb, const FrequencyGrid& grid) {
    validate(comb);
    validate(grid);
    detail::require_comb_resolved(comb, grid);
    OpticalDepthSpectrum s;
    s.grid = grid;
    s.values.resize(grid.count);
    for (std::size_t i = 0; i < grid.count; ++i)
        s.values[i] = detail::comb_depth_at(comb, grid.freq(i));
    return s;
}

/// Options for embedding a comb into the natural absorption profile.
struct EmbedOptions {
    /// Width of the linear cross-fade between comb and Lorentzian at each
    /// window edge. Negative selects the default of one tooth spacing.
    double fade_width = -1.0;
};

/// Optical depth of the comb-engineered medium: comb_depth inside
/// [center - w, center + w], Lorentzian alpha(nu)*L outside, joined by a
/// linear cross-fade of width `fade` just outside each window edge.
inline OpticalDepthSpectrum embed_comb(const InhomogeneousProfile& profile,
                                       const CombParams& comb, double length_m,
                                       double window_halfwidth,
                                       const FrequencyGrid& grid,
                                       const EmbedOptions& opts = {}) {
    validate(profile);
    validate(comb);
    validate(grid);
    if (!(length_m > 0.0)) throw InvalidArgumentError("crystal length must be > 0");
    detail::require_comb_resolved(comb, grid);

    const double min_window =
        0.5 * static_cast<double>(comb.n_teeth) * comb.delta + 4.0 * comb.gamma_tilde;
    if (window_halfwidth < min_window)
        throw InvalidArgumentError("comb window halfwidth " + std::to_string(window_halfwidth) +
                                   " Hz too small; need >= " + std::to_string(min_window) + " Hz");
    const double fade = opts.fade_width < 0.0 ? comb.delta : opts.fade_width;
    if (comb.center - window_halfwidth - fade < grid.start ||
        comb.center + window_halfwidth + fade > grid.back())
        throw InvalidArgumentError("comb window (incl. cross-fade) exceeds the grid");

    OpticalDepthSpectrum s;
    s.grid = grid;
    s.values.resize(grid.count);
    for (std::size_t i = 0; i < grid.count; ++i)
        s.values[i] = detail::embedded_depth_at(profile, comb, length_m, window_halfwidth,
                                                fade, grid.freq(i));
    return s;
}

}  // namespace afc
