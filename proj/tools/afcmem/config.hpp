#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"

#include "afc/cavity.hpp"
#include "afc/errors.hpp"
#include "afc/model.hpp"
#include "afc/spectra.hpp"

namespace afccli {

using nlohmann::json;

struct PulseConfig {
    double fwhm = 12e-9;        ///< s
    double dt = 0.0;            ///< s; 0 selects fwhm/12
    double span_periods = 8.0;  ///< simulation window in units of 1/delta
    double lead_periods = 2.5;  ///< input-pulse center offset in units of 1/delta
};

struct RunConfig {
    bool absolute_reference = false;
    std::uint64_t seed = 1;
    afc::InhomogeneousProfile profile;
    afc::CavityParams cavity;
    double match_freq = 0.0;  ///< absolute Hz of the impedance-match anchor
    std::optional<afc::CombParams> comb;
    PulseConfig pulse;
    afc::ModelOptions model;
    int fit_max_iterations = 1000;
    std::string raw_text;  ///< config file bytes (for the output hash)
};

inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hash_hex(const std::string& bytes) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

namespace detail {

inline void check_keys(const json& obj, const std::string& path,
                       const std::set<std::string>& allowed,
                       const std::set<std::string>& required) {
    if (!obj.is_object()) throw afc::ParseError("config: '" + path + "' must be an object");
    for (const auto& item : obj.items()) {
        if (!allowed.count(item.key()))
            throw afc::ParseError("config: unknown key '" + path + "." + item.key() + "'");
    }
    for (const auto& key : required) {
        if (!obj.contains(key))
            throw afc::ParseError("config: missing key '" + path + "." + key + "'");
    }
}

inline double num(const json& obj, const std::string& path, const std::string& key) {
    const json& v = obj.at(key);
    if (!v.is_number())
        throw afc::ParseError("config: '" + path + "." + key + "' must be a number");
    return v.get<double>();
}

inline double num_or(const json& obj, const std::string& path, const std::string& key,
                     double fallback) {
    return obj.contains(key) ? num(obj, path, key) : fallback;
}

}  // namespace detail

/// Parse and validate the run configuration. Unknown keys anywhere are
/// rejected with the offending field path.
inline RunConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw afc::ParseError(std::string("config: ") + e.what());
    }
    detail::check_keys(root, "$",
                       {"reference", "seed", "profile", "cavity", "comb", "dispersion",
                        "pulse", "numerics", "fit"},
                       {"reference", "profile", "cavity"});

    RunConfig cfg;
    cfg.raw_text = text;

    const std::string ref = root.at("reference").get<std::string>();
    if (ref == "absolute")
        cfg.absolute_reference = true;
    else if (ref == "atomic-center")
        cfg.absolute_reference = false;
    else
        throw afc::ParseError("config: reference must be 'atomic-center' or 'absolute'");

    if (root.contains("seed")) {
        if (!root["seed"].is_number_unsigned())
            throw afc::ParseError("config: seed must be a non-negative integer");
        cfg.seed = root["seed"].get<std::uint64_t>();
    }

    const json& prof = root.at("profile");
    detail::check_keys(prof, "profile", {"center_ghz", "fwhm_ghz", "peak_alpha_per_cm"},
                       {"center_ghz", "fwhm_ghz", "peak_alpha_per_cm"});
    cfg.profile.nu0 = detail::num(prof, "profile", "center_ghz") * 1e9;
    cfg.profile.gamma_in = detail::num(prof, "profile", "fwhm_ghz") * 1e9;
    cfg.profile.peak_alpha = detail::num(prof, "profile", "peak_alpha_per_cm") * 100.0;
    afc::validate(cfg.profile);

    auto to_absolute = [&](double value_ghz) {
        return cfg.absolute_reference ? value_ghz * 1e9 : cfg.profile.nu0 + value_ghz * 1e9;
    };

    const json& cav = root.at("cavity");
    detail::check_keys(cav, "cavity",
                       {"r1", "r2", "n", "length_cm", "s", "match_detuning_ghz"},
                       {"r1", "r2", "n", "length_cm", "s", "match_detuning_ghz"});
    cfg.cavity.r1 = detail::num(cav, "cavity", "r1");
    cfg.cavity.r2 = detail::num(cav, "cavity", "r2");
    cfg.cavity.n_host = detail::num(cav, "cavity", "n");
    cfg.cavity.length = detail::num(cav, "cavity", "length_cm") / 100.0;
    cfg.cavity.s = detail::num(cav, "cavity", "s");
    cfg.match_freq = to_absolute(detail::num(cav, "cavity", "match_detuning_ghz"));
    afc::validate(cfg.cavity);

    if (root.contains("comb")) {
        const json& comb = root.at("comb");
        detail::check_keys(comb, "comb",
                           {"d_c", "delta_mhz", "gamma_tilde_mhz", "d0", "n_teeth",
                            "detuning_ghz"},
                           {"d_c", "delta_mhz", "gamma_tilde_mhz", "d0", "detuning_ghz"});
        afc::CombParams c;
        c.d_c = detail::num(comb, "comb", "d_c");
        c.delta = detail::num(comb, "comb", "delta_mhz") * 1e6;
        c.gamma_tilde = detail::num(comb, "comb", "gamma_tilde_mhz") * 1e6;
        c.d0 = detail::num(comb, "comb", "d0");
        c.n_teeth = static_cast<int>(detail::num_or(comb, "comb", "n_teeth", 9));
        c.center = to_absolute(detail::num(comb, "comb", "detuning_ghz"));
        afc::validate(c);
        cfg.comb = c;
    }

    if (root.contains("dispersion")) {
        const std::string d = root.at("dispersion").get<std::string>();
        if (d == "on")
            cfg.model.dispersion = true;
        else if (d == "off")
            cfg.model.dispersion = false;
        else
            throw afc::ParseError("config: dispersion must be 'on' or 'off'");
    }

    if (root.contains("pulse")) {
        const json& p = root.at("pulse");
        detail::check_keys(p, "pulse", {"fwhm_ns", "dt_ns", "span_periods", "lead_periods"},
                           {});
        cfg.pulse.fwhm = detail::num_or(p, "pulse", "fwhm_ns", 12.0) * 1e-9;
        cfg.pulse.dt = detail::num_or(p, "pulse", "dt_ns", 0.0) * 1e-9;
        cfg.pulse.span_periods = detail::num_or(p, "pulse", "span_periods", 8.0);
        cfg.pulse.lead_periods = detail::num_or(p, "pulse", "lead_periods", 2.5);
        if (!(cfg.pulse.fwhm > 0.0)) throw afc::ParseError("config: pulse.fwhm_ns must be > 0");
        if (cfg.pulse.span_periods < 6.0)
            throw afc::ParseError("config: pulse.span_periods must cover >= 6 echo periods");
        if (!(cfg.pulse.lead_periods > 0.0 && cfg.pulse.lead_periods < cfg.pulse.span_periods))
            throw afc::ParseError("config: pulse.lead_periods must lie inside the span");
    }

    if (root.contains("numerics")) {
        const json& nm = root.at("numerics");
        detail::check_keys(nm, "numerics",
                           {"kk_method", "wide_span_ghz", "wide_count", "fine_span_mhz",
                            "fine_count", "window_factor"},
                           {});
        if (nm.contains("kk_method")) {
            const std::string mth = nm.at("kk_method").get<std::string>();
            if (mth == "pv")
                cfg.model.kk_method = afc::KkMethod::PvQuadrature;
            else if (mth == "hilbert")
                cfg.model.kk_method = afc::KkMethod::FftHilbert;
            else
                throw afc::ParseError("config: numerics.kk_method must be 'pv' or 'hilbert'");
        }
        cfg.model.wide_span = detail::num_or(nm, "numerics", "wide_span_ghz", 640.0) * 1e9;
        cfg.model.wide_count = static_cast<std::size_t>(
            detail::num_or(nm, "numerics", "wide_count", 8192));
        cfg.model.fine_span = detail::num_or(nm, "numerics", "fine_span_mhz", 1536.0) * 1e6;
        cfg.model.fine_count = static_cast<std::size_t>(
            detail::num_or(nm, "numerics", "fine_count", 8192));
        cfg.model.window_factor = detail::num_or(nm, "numerics", "window_factor", 1.5);
    }

    if (root.contains("fit")) {
        const json& ft = root.at("fit");
        detail::check_keys(ft, "fit", {"max_iterations"}, {});
        cfg.fit_max_iterations =
            static_cast<int>(detail::num_or(ft, "fit", "max_iterations", 1000));
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw afc::ParseError("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

}  // namespace afccli
