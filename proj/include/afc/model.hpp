#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "afc/cavity.hpp"
#include "afc/constants.hpp"
#include "afc/dispersion.hpp"
#include "afc/errors.hpp"
#include "afc/grid.hpp"
#include "afc/spectra.hpp"

namespace afc {

/// Numerical settings for assembling the cavity response.
struct ModelOptions {
    KkMethod kk_method = KkMethod::FftHilbert;
    bool dispersion = true;

    /// Wide grid for the no-comb response (KK of the full Lorentzian line).
    double wide_span = 640e9;
    std::size_t wide_count = 8192;

    /// Fine grid for the comb response, centered on the comb.
    double fine_span = 1.536e9;
    std::size_t fine_count = 8192;

    /// Comb embed window halfwidth as a multiple of half the tooth span.
    double window_factor = 1.5;
    /// Cross-fade width at the embed window edges; < 0 selects one tooth spacing.
    double fade_width = -1.0;
};

/// No-comb forward model: Lorentzian absorption line inside the cavity, with
/// the dispersive index from the numerical Kramers-Kronig transform on a wide
/// grid. Evaluation at arbitrary frequencies interpolates the (slowly
/// varying) index shift and applies the response formula exactly.
class NoCombModel {
  public:
    NoCombModel(const CavityParams& cavity, const InhomogeneousProfile& profile,
                const ModelOptions& opts = {})
        : cavity_(cavity), profile_(profile), opts_(opts) {
        validate(cavity);
        validate(profile);
        shift_.grid = make_grid(profile.nu0, opts.wide_span, opts.wide_count);
        if (opts.dispersion) {
            const auto alpha = lorentzian_alpha(profile, shift_.grid);
            const auto k = extinction_from_alpha(alpha, shift_.grid);
            KkOptions kk;
            kk.method = opts.kk_method;
            auto n = kk_real_index(k, 0.0, kk);
            shift_.values = std::move(n.values);
        } else {
            shift_.values.assign(shift_.grid.count, 0.0);
        }
    }

    const CavityParams& cavity() const { return cavity_; }
    const InhomogeneousProfile& profile() const { return profile_; }
    const FrequencyGrid& grid() const { return shift_.grid; }

    /// Dispersive index shift n(nu) - n_host (0 when dispersion is off).
    double index_shift_at(double nu) const { return interp(shift_, nu); }

    double phase_at(double nu) const {
        constexpr double kFourPi = 12.566370614359172;
        const double n = cavity_.n_host + index_shift_at(nu);
        return kFourPi * n * nu * cavity_.length / kSpeedOfLight + cavity_.phi0;
    }

    cplx amplitude_at(double nu) const {
        return reflection_amplitude_at(cavity_, profile_.alpha(nu) * cavity_.length,
                                       phase_at(nu));
    }

    /// Normalized reflected power |r(nu)|^2 / s.
    double power_at(double nu) const { return std::norm(amplitude_at(nu)) / cavity_.s; }

    /// Complex reflection response sampled on the wide grid.
    ComplexSpectrum response() const {
        ComplexSpectrum r;
        r.grid = shift_.grid;
        r.values.resize(r.grid.count);
        for (std::size_t i = 0; i < r.grid.count; ++i)
            r.values[i] = amplitude_at(r.grid.freq(i));
        return r;
    }

  private:
    static double interp(const IndexSpectrum& s, double nu) {
        const double x = s.grid.position(nu);
        if (x <= 0.0) return s.values.front();
        const double last = static_cast<double>(s.grid.count - 1);
        if (x >= last) return s.values.back();
        const auto i = static_cast<std::size_t>(x);
        const double t = x - static_cast<double>(i);
        return s.values[i] * (1.0 - t) + s.values[i + 1] * t;
    }

    CavityParams cavity_;
    InhomogeneousProfile profile_;
    ModelOptions opts_;
    IndexSpectrum shift_;
};

/// Solve for the cavity phase offset phi0 that places the minimum of the
/// no-comb normalized reflectivity at `match_freq`. The printed cavity
/// parameters pin the round-trip phase only modulo 2 pi, so the absolute
/// resonance location is a stated convention rather than a prediction.
inline double solve_match_phase(const CavityParams& cavity, const InhomogeneousProfile& profile,
                                double match_freq, const ModelOptions& opts = {}) {
    CavityParams c = cavity;
    c.phi0 = 0.0;
    NoCombModel base(c, profile, opts);
    const double fsr = free_spectral_range(cavity);

    double anchor = match_freq;
    double phi0 = 0.0;
    for (int pass = 0; pass < 8; ++pass) {
        // Put a round-trip phase zero at the anchor.
        constexpr double kTwoPi = 6.283185307179586476925286766559;
        const double raw = base.phase_at(anchor);
        phi0 = -std::remainder(raw, kTwoPi);
        auto power = [&](double nu) {
            const double d = profile.alpha(nu) * cavity.length;
            return std::norm(reflection_amplitude_at(cavity, d, base.phase_at(nu) + phi0));
        };
        // Locate the reflectivity minimum in the anchored basin.
        double lo = anchor - 0.45 * fsr, hi = anchor + 0.45 * fsr;
        double best = power(anchor), best_nu = anchor;
        const int scan = 600;
        for (int i = 0; i <= scan; ++i) {
            const double nu = lo + (hi - lo) * i / scan;
            const double p = power(nu);
            if (p < best) {
                best = p;
                best_nu = nu;
            }
        }
        const double step = (hi - lo) / scan;
        const double nu_min =
            detail::golden_section_min(power, best_nu - step, best_nu + step, 1e3);
        if (std::abs(nu_min - match_freq) < 1e5) break;
        anchor += match_freq - nu_min;
    }
    return phi0;
}

/// Frequency of minimum normalized no-comb reflectivity inside the window,
/// refined by golden-section search between the bracketing scan samples.
inline double find_impedance_match(const CavityParams& cavity,
                                   const InhomogeneousProfile& profile, double window_lo,
                                   double window_hi, const ModelOptions& opts = {}) {
    if (!(window_lo < window_hi))
        throw InvalidArgumentError("impedance-match window must have positive width");
    NoCombModel model(cavity, profile, opts);
    auto power = [&](double nu) { return model.power_at(nu); };

    const int scan = 4000;
    const double step = (window_hi - window_lo) / scan;
    double best = power(window_lo), best_nu = window_lo;
    int best_i = 0;
    for (int i = 1; i <= scan; ++i) {
        const double nu = window_lo + step * i;
        const double p = power(nu);
        if (p < best) {
            best = p;
            best_nu = nu;
            best_i = i;
        }
    }
    if (best_i == 0 || best_i == scan)
        throw NoMinimumError("no interior reflectivity minimum inside the search window");
    return detail::golden_section_min(power, best_nu - step, best_nu + step, 1e3);
}

/// Comb forward model: the engineered comb embedded in the Lorentzian line.
/// The broad-line dispersion enters through the closed-form Lorentzian shift;
/// the compactly supported comb deviation is transformed numerically on the
/// fine grid. Both vanish when dispersion is off (constant host index).
class CombModel {
  public:
    CombModel(const CavityParams& cavity, const InhomogeneousProfile& profile,
              const CombParams& comb, const ModelOptions& opts = {})
        : cavity_(cavity), profile_(profile), comb_(comb), opts_(opts) {
        validate(cavity);
        validate(profile);
        validate(comb);
        window_ = opts.window_factor * 0.5 * comb.tooth_span();
        const double min_window =
            0.5 * static_cast<double>(comb.n_teeth) * comb.delta + 4.0 * comb.gamma_tilde;
        window_ = std::max(window_, min_window);
        fade_ = opts.fade_width < 0.0 ? comb.delta : opts.fade_width;

        shift_.grid = make_grid(comb.center, opts.fine_span, opts.fine_count);
        if (shift_.grid.spacing > comb.gamma_tilde / 4.0)
            throw ResolutionError("fine grid does not resolve the comb teeth",
                                  comb.gamma_tilde / 4.0);
        if (comb.center - window_ - fade_ < shift_.grid.start ||
            comb.center + window_ + fade_ > shift_.grid.back())
            throw InvalidArgumentError("comb window does not fit the fine response grid");

        if (opts.dispersion) {
            // Signed deviation of the embedded depth from the broad line.
            std::vector<double> kdev(shift_.grid.count);
            constexpr double kFourPi = 12.566370614359172;
            for (std::size_t i = 0; i < shift_.grid.count; ++i) {
                const double nu = shift_.grid.freq(i);
                const double dev = depth_at(nu) - profile.alpha(nu) * cavity.length;
                kdev[i] = dev * kSpeedOfLight / (kFourPi * nu * cavity.length);
            }
            shift_.values = detail::kk_index_shift(kdev, shift_.grid, opts.kk_method);
        } else {
            shift_.values.assign(shift_.grid.count, 0.0);
        }
    }

    const CavityParams& cavity() const { return cavity_; }
    const CombParams& comb() const { return comb_; }
    const FrequencyGrid& grid() const { return shift_.grid; }
    double window_halfwidth() const { return window_; }

    /// Embedded optical depth at an arbitrary frequency.
    double depth_at(double nu) const {
        return detail::embedded_depth_at(profile_, comb_, cavity_.length, window_, fade_, nu);
    }

    /// Total dispersive index shift: broad line (closed form) + comb deviation.
    double index_shift_at(double nu) const {
        if (!opts_.dispersion) return 0.0;
        double dn = lorentzian_index_shift(profile_, nu);
        const double x = shift_.grid.position(nu);
        if (x > 0.0 && x < static_cast<double>(shift_.grid.count - 1)) {
            const auto i = static_cast<std::size_t>(x);
            const double t = x - static_cast<double>(i);
            dn += shift_.values[i] * (1.0 - t) + shift_.values[i + 1] * t;
        }
        return dn;
    }

    double phase_at(double nu) const {
        constexpr double kFourPi = 12.566370614359172;
        const double n = cavity_.n_host + index_shift_at(nu);
        return kFourPi * n * nu * cavity_.length / kSpeedOfLight + cavity_.phi0;
    }

    cplx amplitude_at(double nu) const {
        return reflection_amplitude_at(cavity_, depth_at(nu), phase_at(nu));
    }

    double power_at(double nu) const { return std::norm(amplitude_at(nu)) / cavity_.s; }

    /// Complex reflection response sampled on the fine grid.
    ComplexSpectrum response() const {
        ComplexSpectrum r;
        r.grid = shift_.grid;
        r.values.resize(r.grid.count);
        for (std::size_t i = 0; i < r.grid.count; ++i)
            r.values[i] = amplitude_at(r.grid.freq(i));
        return r;
    }

  private:
    CavityParams cavity_;
    InhomogeneousProfile profile_;
    CombParams comb_;
    ModelOptions opts_;
    double window_ = 0.0;
    double fade_ = 0.0;
    IndexSpectrum shift_;  ///< comb-deviation shift on the fine grid
};

}  // namespace afc
