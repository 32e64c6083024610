#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "afc/constants.hpp"
#include "afc/errors.hpp"
#include "afc/lsq.hpp"
#include "afc/model.hpp"
#include "afc/random.hpp"

namespace afc {

/// Measured (or synthesized) normalized reflectivity versus frequency.
struct ReflectivityTrace {
    std::vector<double> freq;   ///< absolute Hz, strictly increasing
    std::vector<double> power;  ///< normalized reflected power, >= 0
    std::map<std::string, std::string> meta;
};

inline void validate(const ReflectivityTrace& t) {
    if (t.freq.size() != t.power.size())
        throw InvalidArgumentError("trace frequency/power length mismatch");
    if (t.freq.size() < 2) throw InvalidArgumentError("trace needs at least 2 points");
    for (std::size_t i = 0; i < t.freq.size(); ++i) {
        if (i > 0 && !(t.freq[i] > t.freq[i - 1]))
            throw InvalidArgumentError("trace frequencies must be strictly increasing");
        if (!(t.power[i] >= 0.0))
            throw InvalidArgumentError("trace powers must be >= 0");
    }
}

/// Forward-model a reflectivity trace at the given frequencies, optionally
/// with a comb, times (1 + noise_rel * g) multiplicative gaussian noise.
/// Deterministic for a fixed seed.
inline ReflectivityTrace synthesize_trace(const CavityParams& cavity,
                                          const InhomogeneousProfile& profile,
                                          const CombParams* comb,
                                          const std::vector<double>& freqs, double noise_rel,
                                          std::uint64_t seed, const ModelOptions& opts = {}) {
    if (!(noise_rel >= 0.0)) throw InvalidArgumentError("noise level must be >= 0");
    ReflectivityTrace t;
    t.freq = freqs;
    t.power.resize(freqs.size());
    if (comb) {
        CombModel model(cavity, profile, *comb, opts);
        for (std::size_t i = 0; i < freqs.size(); ++i) t.power[i] = model.power_at(freqs[i]);
    } else {
        NoCombModel model(cavity, profile, opts);
        for (std::size_t i = 0; i < freqs.size(); ++i) t.power[i] = model.power_at(freqs[i]);
    }
    NoiseGenerator rng(seed);
    for (double& p : t.power) {
        p *= 1.0 + noise_rel * rng.next_gaussian();
        p = std::max(p, 0.0);
    }
    validate(t);
    return t;
}

/// Per-parameter box with an initial guess.
struct ParamSpec {
    double init = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

/// Settings for the stage-1 (no comb) cavity fit. Free parameters are the
/// crystal-cavity properties pac, r1, r2, n, L, s, plus the phase-alignment
/// nuisance theta0 (resonance phase at the anchor frequency, see below).
struct CavityFitConfig {
    ParamSpec pac{200.0, 10.0, 500.0};       // peak absorption coefficient, 1/m
    ParamSpec r1{0.63245553, 0.4, 0.85};     // sqrt(40%) coating spec
    ParamSpec r2{0.99498744, 0.99, 1.0};     // sqrt(99%) coating spec
    ParamSpec n{1.8000, 1.7999, 1.8001};     // YAG literature value, tightly bounded
    ParamSpec L{0.00435, 0.003, 0.006};      // m; init replaced by an FSR scan
    ParamSpec s{2.0, 1.0, 3.0};              // ideal 50/50 beam splitter
    double theta0_halfrange = 6.3;           // rad; anchor phase search range
    double nu0 = 377868e9;                   ///< frozen line center, Hz
    double gamma_in = 17e9;                  ///< frozen inhomogeneous FWHM, Hz
    LsqOptions lsq;
    ModelOptions model;
    bool refine_with_pv = true;  ///< re-evaluate the final fit with pv-quadrature

    CavityFitConfig() {
        // The n.L product is pinned by the free spectral range while n alone
        // is boxed to the literature value, leaving a nearly flat valley that
        // the damped steps crawl along; give the fit room to walk it out.
        lsq.max_iterations = 1000;
    }
};

struct CavityFit {
    FitResult fit;
    CavityParams cavity;           ///< fitted parameters with phi0 resolved
    InhomogeneousProfile profile;  ///< frozen nu0/Gamma with fitted peak alpha
    double anchor_freq = 0.0;      ///< data-derived phase anchor, Hz
};

namespace detail {

/// Deepest trace dips for seeding: returns (anchor frequency, FSR estimate).
inline std::pair<double, double> seed_from_dips(const ReflectivityTrace& t) {
    const std::size_t n = t.freq.size();
    std::vector<std::size_t> dips;
    const std::size_t w = std::max<std::size_t>(2, n / 400);
    for (std::size_t i = w; i + w < n; ++i) {
        bool is_min = true;
        for (std::size_t j = i - w; j <= i + w && is_min; ++j)
            if (t.power[j] < t.power[i]) is_min = false;
        if (is_min) {
            if (!dips.empty() && t.freq[i] - t.freq[dips.back()] < 2e9) {
                if (t.power[i] < t.power[dips.back()]) dips.back() = i;
                continue;
            }
            dips.push_back(i);
        }
    }
    std::sort(dips.begin(), dips.end(),
              [&](std::size_t a, std::size_t b) { return t.power[a] < t.power[b]; });
    if (dips.empty()) return {t.freq[n / 2], 19.1e9};
    const double anchor = t.freq[dips[0]];
    double fsr = 19.1e9;
    double best_sep = 0.0;
    for (std::size_t i = 1; i < std::min<std::size_t>(dips.size(), 4); ++i) {
        const double sep = std::abs(t.freq[dips[i]] - anchor);
        if (sep > 8e9 && sep < 30e9 && (best_sep == 0.0 || sep < best_sep)) best_sep = sep;
    }
    if (best_sep > 0.0) fsr = best_sep;
    return {anchor, fsr};
}

}  // namespace detail

/// Stage-1 fit: recover the crystal-cavity properties from a no-comb
/// reflectivity trace. The dispersive index enters through the cached
/// Kramers-Kronig shift of the unit-amplitude Lorentzian line (the transform
/// is linear in the peak absorption), evaluated with the in-loop method; the
/// converged fit is optionally re-evaluated with pv-quadrature and the RMS
/// discrepancy reported in the diagnostics.
inline CavityFit fit_cavity(const ReflectivityTrace& trace,
                            const CavityFitConfig& cfg = {}) {
    validate(trace);
    const std::size_t m = trace.freq.size();
    if (m < 150)
        throw InvalidArgumentError("cavity fit needs at least 150 trace points");

    const auto [anchor, fsr_est] = detail::seed_from_dips(trace);
    const double span = trace.freq.back() - trace.freq.front();
    if (span < 2.0 * fsr_est)
        throw InvalidArgumentError("cavity fit needs a trace spanning >= 2 free spectral ranges");

    InhomogeneousProfile unit_profile{cfg.nu0, cfg.gamma_in, 1.0};

    // Unit-pac dispersive shift and Lorentzian shape cached at the trace points.
    ModelOptions mo = cfg.model;
    const FrequencyGrid wide = make_grid(cfg.nu0, mo.wide_span, mo.wide_count);
    std::vector<double> dn_unit_trace(m, 0.0), dn_pv_trace;
    std::vector<double> lor_unit(m);
    for (std::size_t i = 0; i < m; ++i) lor_unit[i] = unit_profile.alpha(trace.freq[i]);
    if (mo.dispersion) {
        const auto alpha_u = lorentzian_alpha(unit_profile, wide);
        const auto k_u = extinction_from_alpha(alpha_u, wide);
        const auto shift = detail::kk_index_shift(k_u.values, wide, mo.kk_method);
        IndexSpectrum su{wide, shift};
        for (std::size_t i = 0; i < m; ++i) {
            const double x = wide.position(trace.freq[i]);
            const auto j = static_cast<std::size_t>(std::clamp(
                x, 0.0, static_cast<double>(wide.count - 2)));
            const double tt = std::clamp(x - static_cast<double>(j), 0.0, 1.0);
            dn_unit_trace[i] = su.values[j] * (1.0 - tt) + su.values[j + 1] * tt;
        }
    }

    constexpr double kFourPi = 12.566370614359172;
    // p = [pac, r1, r2, n, L, s, theta0]
    auto residuals = [&](const std::vector<double>& p) {
        const double pac = p[0], r1 = p[1], r2 = p[2], nn = p[3], L = p[4], s = p[5];
        const double theta0 = p[6];
        std::vector<double> res(m);
        const double phi0 = theta0 - kFourPi * nn * anchor * L / kSpeedOfLight;
        CavityParams cav{r1, r2, nn, L, s, phi0};
        for (std::size_t i = 0; i < m; ++i) {
            const double nu = trace.freq[i];
            const double depth = pac * lor_unit[i] * L;
            const double phase =
                kFourPi * (nn + pac * dn_unit_trace[i]) * nu * L / kSpeedOfLight + phi0;
            const double pw = std::norm(reflection_amplitude_at(cav, depth, phase)) / s;
            res[i] = pw - trace.power[i];
        }
        return res;
    };

    double L_init = kSpeedOfLight / (2.0 * cfg.n.init * fsr_est);
    L_init = std::clamp(L_init, cfg.L.lo, cfg.L.hi);

    std::vector<double> init = {cfg.pac.init, cfg.r1.init, cfg.r2.init, cfg.n.init,
                                L_init,       cfg.s.init,  0.0};
    std::vector<double> lo = {cfg.pac.lo, cfg.r1.lo, cfg.r2.lo, cfg.n.lo,
                              cfg.L.lo,   cfg.s.lo,  -cfg.theta0_halfrange};
    std::vector<double> hi = {cfg.pac.hi, cfg.r1.hi, cfg.r2.hi, cfg.n.hi,
                              cfg.L.hi,   cfg.s.hi,  cfg.theta0_halfrange};
    std::vector<double> scales = {100.0, 0.1, 0.01, 1.0, cfg.L.init, 1.0, 1.0};

    FitResult fit = least_squares(residuals, init, lo, hi, scales, cfg.lsq);
    fit.names = {"pac", "r1", "r2", "n", "L", "s", "theta0"};

    CavityFit out;
    out.anchor_freq = anchor;
    out.profile = InhomogeneousProfile{cfg.nu0, cfg.gamma_in, fit.params[0]};
    const double phi0_full = fit.params[6] - kFourPi * fit.params[3] * anchor *
                                                 fit.params[4] / kSpeedOfLight;
    out.cavity = CavityParams{fit.params[1], fit.params[2], fit.params[3],
                              fit.params[4], fit.params[5],
                              std::remainder(phi0_full, 2.0 * 3.141592653589793)};

    if (cfg.refine_with_pv && mo.dispersion) {
        // Re-evaluate the converged model with the pv-quadrature dispersion
        // path and report the discrepancy against the in-loop method.
        const auto alpha_u = lorentzian_alpha(unit_profile, wide);
        const auto k_u = extinction_from_alpha(alpha_u, wide);
        const auto shift_pv =
            detail::kk_index_shift(k_u.values, wide, KkMethod::PvQuadrature);
        double acc = 0.0;
        IndexSpectrum spv{wide, shift_pv};
        const auto& p = fit.params;
        const double phi0 = p[6] - kFourPi * p[3] * anchor * p[4] / kSpeedOfLight;
        CavityParams cav{p[1], p[2], p[3], p[4], p[5], phi0};
        const std::vector<double> res_hilbert = residuals(p);
        for (std::size_t i = 0; i < m; ++i) {
            const double nu = trace.freq[i];
            const double x = wide.position(nu);
            const auto j = static_cast<std::size_t>(std::clamp(
                x, 0.0, static_cast<double>(wide.count - 2)));
            const double tt = std::clamp(x - static_cast<double>(j), 0.0, 1.0);
            const double dn_pv = (spv.values[j] * (1.0 - tt) + spv.values[j + 1] * tt) * p[0];
            const double phase = kFourPi * (p[3] + dn_pv) * nu * p[4] / kSpeedOfLight + phi0;
            const double pw =
                std::norm(reflection_amplitude_at(cav, p[0] * lor_unit[i] * p[4], phase)) /
                p[5];
            const double pw_hilbert = res_hilbert[i] + trace.power[i];
            acc += (pw - pw_hilbert) * (pw - pw_hilbert);
        }
        fit.diagnostics["pv_refit_rms_delta"] = std::sqrt(acc / static_cast<double>(m));
    }
    out.fit = fit;
    return out;
}

/// Settings for the stage-2 comb fit (cavity and profile frozen).
struct CombFitConfig {
    ParamSpec d_c{1.0, 0.0, 5.0};
    ParamSpec delta{23.81e6, 15e6, 35e6};        // seeded from the 42 ns storage target
    ParamSpec gamma_tilde{23.81e6 / 6.0, 1e6, 8e6};
    ParamSpec d0{0.1, 0.0, 1.0};
    int n_teeth = 9;
    LsqOptions lsq;
    ModelOptions model;
    bool refine_with_pv = true;
};

struct CombFit {
    FitResult fit;
    CombParams comb;
};

/// Stage-2 fit: recover the comb parameters (d_c, delta, gamma_tilde, d0)
/// from a with-comb reflectivity trace, with the cavity parameters frozen to
/// the stage-1 result. `comb_center` is the absolute frequency the comb was
/// written at. The dispersion flag in cfg.model selects the constant-index
/// comparison mode.
inline CombFit fit_comb(const ReflectivityTrace& trace, const CavityParams& cavity,
                        const InhomogeneousProfile& profile, double comb_center,
                        const CombFitConfig& cfg = {}) {
    validate(trace);
    validate(cavity);
    validate(profile);
    const std::size_t m = trace.freq.size();
    if (m < static_cast<std::size_t>(50 * cfg.n_teeth))
        throw InvalidArgumentError("comb fit needs >= 50 trace points per tooth");
    const double span = trace.freq.back() - trace.freq.front();
    if (span < 0.8 * cfg.delta.init * cfg.n_teeth)
        throw InvalidArgumentError("comb fit trace does not cover the comb bandwidth");

    auto make_comb = [&](const std::vector<double>& p) {
        return CombParams{p[0], p[1], p[2], p[3], cfg.n_teeth, comb_center};
    };
    auto residuals = [&](const std::vector<double>& p) {
        CombModel model(cavity, profile, make_comb(p), cfg.model);
        std::vector<double> res(m);
        for (std::size_t i = 0; i < m; ++i)
            res[i] = model.power_at(trace.freq[i]) - trace.power[i];
        return res;
    };

    std::vector<double> init = {cfg.d_c.init, cfg.delta.init, cfg.gamma_tilde.init,
                                cfg.d0.init};
    std::vector<double> lo = {cfg.d_c.lo, cfg.delta.lo, cfg.gamma_tilde.lo, cfg.d0.lo};
    std::vector<double> hi = {cfg.d_c.hi, cfg.delta.hi, cfg.gamma_tilde.hi, cfg.d0.hi};
    std::vector<double> scales = {1.0, 1e7, 1e6, 0.1};

    FitResult fit = least_squares(residuals, init, lo, hi, scales, cfg.lsq);
    fit.names = {"d_c", "delta", "gamma_tilde", "d0"};

    if (cfg.refine_with_pv && cfg.model.dispersion) {
        ModelOptions pv = cfg.model;
        pv.kk_method = KkMethod::PvQuadrature;
        CombModel model(cavity, profile, make_comb(fit.params), pv);
        const auto res_h = residuals(fit.params);
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double d = model.power_at(trace.freq[i]) - trace.power[i] - res_h[i];
            acc += d * d;
        }
        fit.diagnostics["pv_refit_rms_delta"] = std::sqrt(acc / static_cast<double>(m));
    }

    CombFit out;
    out.comb = make_comb(fit.params);
    out.fit = fit;
    return out;
}

}  // namespace afc
