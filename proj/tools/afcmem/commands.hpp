#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "afc/fitting.hpp"
#include "afc/io.hpp"
#include "afc/model.hpp"
#include "afc/timedomain.hpp"
#include "afc/version.hpp"
#include "config.hpp"

namespace afccli {

using nlohmann::json;

inline json result_header(const RunConfig& cfg, const std::string& command) {
    json j;
    j["tool_version"] = afc::kVersion;
    j["config_hash"] = hash_hex(cfg.raw_text);
    j["seed"] = cfg.seed;
    j["command"] = command;
    return j;
}

inline void write_json(const std::string& path, const json& j) {
    std::ofstream f(path);
    if (!f) throw afc::ParseError("cannot open '" + path + "' for writing");
    f << j.dump(2) << "\n";
}

inline void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw afc::ParseError("cannot create output directory '" + dir + "'");
}

// ---------------------------------------------------------------------------
// fit-cavity

inline int cmd_fit_cavity(const std::string& trace_path, const std::string& config_path,
                          const std::string& out_dir) {
    const RunConfig cfg = load_config(config_path);
    const afc::ReflectivityTrace trace = afc::read_trace_csv(trace_path);
    ensure_out_dir(out_dir);

    afc::CavityFitConfig fit_cfg;
    fit_cfg.nu0 = cfg.profile.nu0;
    fit_cfg.gamma_in = cfg.profile.gamma_in;
    fit_cfg.model = cfg.model;
    fit_cfg.lsq.max_iterations = cfg.fit_max_iterations;
    const afc::CavityFit result = afc::fit_cavity(trace, fit_cfg);

    json j = result_header(cfg, "fit-cavity");
    j["converged"] = result.fit.converged;
    j["iterations"] = result.fit.iterations;
    j["residual_norm"] = result.fit.residual_norm;
    j["dispersion"] = cfg.model.dispersion ? "on" : "off";
    json params;
    params["pac_per_m"] = result.profile.peak_alpha;
    params["pac_per_cm"] = result.profile.peak_alpha / 100.0;
    params["r1"] = result.cavity.r1;
    params["r2"] = result.cavity.r2;
    params["n"] = result.cavity.n_host;
    params["L_m"] = result.cavity.length;
    params["L_cm"] = result.cavity.length * 100.0;
    params["s"] = result.cavity.s;
    params["phi0_rad"] = result.cavity.phi0;
    params["anchor_freq_hz"] = result.anchor_freq;
    params["profile_center_ghz"] = cfg.profile.nu0 / 1e9;
    params["profile_fwhm_ghz"] = cfg.profile.gamma_in / 1e9;
    j["params"] = params;
    json unc;
    for (std::size_t i = 0; i < result.fit.names.size(); ++i)
        unc[result.fit.names[i]] = result.fit.uncertainties[i];
    j["uncertainties"] = unc;
    j["diagnostics"] = result.fit.diagnostics;
    j["free_spectral_range_ghz"] = afc::free_spectral_range(result.cavity) / 1e9;
    write_json(out_dir + "/cavity_fit.json", j);

    // Dense model curve for overlay plotting.
    afc::NoCombModel model(result.cavity, result.profile, cfg.model);
    const std::size_t npts = 4001;
    afc::FrequencyGrid curve_grid;
    curve_grid.start = trace.freq.front();
    curve_grid.spacing = (trace.freq.back() - trace.freq.front()) / double(npts - 1);
    curve_grid.count = npts;
    std::vector<double> curve(npts);
    for (std::size_t i = 0; i < npts; ++i) curve[i] = model.power_at(curve_grid.freq(i));
    afc::write_spectrum_csv(out_dir + "/cavity_fit_curve.csv", curve_grid, curve,
                            "normalized_power");
    return result.fit.converged ? 0 : 2;
}

// ---------------------------------------------------------------------------
// fit-comb

inline std::pair<afc::CavityParams, afc::InhomogeneousProfile> load_cavity_fit(
    const std::string& path) {
    std::ifstream f(path);
    if (!f) throw afc::ParseError("cannot open cavity fit '" + path + "'");
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw afc::ParseError("cavity fit '" + path + "': " + e.what());
    }
    if (!j.contains("params"))
        throw afc::ParseError("cavity fit '" + path + "' has no params block");
    const json& p = j["params"];
    afc::CavityParams cavity;
    afc::InhomogeneousProfile profile;
    try {
        cavity.r1 = p.at("r1").get<double>();
        cavity.r2 = p.at("r2").get<double>();
        cavity.n_host = p.at("n").get<double>();
        cavity.length = p.at("L_m").get<double>();
        cavity.s = p.at("s").get<double>();
        cavity.phi0 = p.at("phi0_rad").get<double>();
        profile.peak_alpha = p.at("pac_per_m").get<double>();
        profile.nu0 = p.at("profile_center_ghz").get<double>() * 1e9;
        profile.gamma_in = p.at("profile_fwhm_ghz").get<double>() * 1e9;
    } catch (const json::exception& e) {
        throw afc::ParseError("cavity fit '" + path + "': " + e.what());
    }
    afc::validate(cavity);
    afc::validate(profile);
    return {cavity, profile};
}

inline int cmd_fit_comb(const std::string& trace_path, const std::string& cavity_path,
                        const std::string& config_path, const std::string& out_dir,
                        const std::string& dispersion_flag) {
    const RunConfig cfg = load_config(config_path);
    const auto [cavity, profile] = load_cavity_fit(cavity_path);
    const afc::ReflectivityTrace trace = afc::read_trace_csv(trace_path);
    ensure_out_dir(out_dir);
    if (!cfg.comb)
        throw afc::ParseError("config has no comb block (needed for the comb center)");

    afc::CombFitConfig fit_cfg;
    fit_cfg.model = cfg.model;
    fit_cfg.n_teeth = cfg.comb->n_teeth;
    fit_cfg.lsq.max_iterations = cfg.fit_max_iterations;
    if (dispersion_flag == "on")
        fit_cfg.model.dispersion = true;
    else if (dispersion_flag == "off")
        fit_cfg.model.dispersion = false;
    else if (!dispersion_flag.empty())
        throw afc::ParseError("--dispersion must be 'on' or 'off'");

    const afc::CombFit result = afc::fit_comb(trace, cavity, profile, cfg.comb->center,
                                              fit_cfg);

    json j = result_header(cfg, "fit-comb");
    j["converged"] = result.fit.converged;
    j["iterations"] = result.fit.iterations;
    j["residual_norm"] = result.fit.residual_norm;
    j["dispersion"] = fit_cfg.model.dispersion ? "on" : "off";
    json params;
    params["d_c"] = result.comb.d_c;
    params["delta_hz"] = result.comb.delta;
    params["delta_mhz"] = result.comb.delta / 1e6;
    params["gamma_tilde_hz"] = result.comb.gamma_tilde;
    params["gamma_tilde_mhz"] = result.comb.gamma_tilde / 1e6;
    params["d0"] = result.comb.d0;
    params["n_teeth"] = result.comb.n_teeth;
    params["center_hz"] = result.comb.center;
    params["detuning_ghz"] = (result.comb.center - profile.nu0) / 1e9;
    params["finesse"] = result.comb.finesse();
    params["storage_time_ns"] = result.comb.storage_time() * 1e9;
    j["params"] = params;
    json unc;
    for (std::size_t i = 0; i < result.fit.names.size(); ++i)
        unc[result.fit.names[i]] = result.fit.uncertainties[i];
    j["uncertainties"] = unc;
    j["diagnostics"] = result.fit.diagnostics;
    write_json(out_dir + "/comb_fit.json", j);

    afc::CombModel model(cavity, profile, result.comb, fit_cfg.model);
    const std::size_t npts = 4001;
    afc::FrequencyGrid curve_grid;
    curve_grid.start = trace.freq.front();
    curve_grid.spacing = (trace.freq.back() - trace.freq.front()) / double(npts - 1);
    curve_grid.count = npts;
    std::vector<double> curve(npts);
    for (std::size_t i = 0; i < npts; ++i) curve[i] = model.power_at(curve_grid.freq(i));
    afc::write_spectrum_csv(out_dir + "/comb_fit_curve.csv", curve_grid, curve,
                            "normalized_power");
    return result.fit.converged ? 0 : 2;
}

// ---------------------------------------------------------------------------
// echo simulation

struct EchoOutcome {
    afc::Pulse input;
    afc::Pulse output;
    afc::EchoTrain train;
    double efficiency = 0.0;
    double causality = 0.0;
    bool zero_output = false;
};

inline EchoOutcome run_echo(const RunConfig& cfg, const afc::CombParams& comb,
                            bool dispersion) {
    afc::ModelOptions opts = cfg.model;
    opts.dispersion = dispersion;
    afc::CavityParams cavity = cfg.cavity;
    cavity.phi0 = afc::solve_match_phase(cavity, cfg.profile, cfg.match_freq, opts);
    afc::CombModel model(cavity, cfg.profile, comb, opts);
    const afc::ComplexSpectrum response = model.response();

    const double period = comb.storage_time();
    const double dt = cfg.pulse.dt > 0.0 ? cfg.pulse.dt : cfg.pulse.fwhm / 12.0;
    const afc::Pulse input =
        afc::gaussian_input(comb.center, cfg.pulse.fwhm, cfg.pulse.span_periods * period, dt,
                            comb.center, cfg.pulse.lead_periods * period);
    afc::PropagateOptions prop;
    // The constant-index comparison mode is acausal: pre-input echoes beyond
    // the window start wrap into the padding, which is discarded anyway.
    if (!dispersion) prop.max_wrap_energy = 5e-2;
    EchoOutcome out;
    out.input = input;
    out.output = afc::propagate(input, response, prop);
    out.train = afc::extract_echoes(out.output, input, comb.delta);
    for (const auto& p : out.train.pulses)
        if (p.order == 1) out.efficiency = p.energy;
    out.causality = afc::causality_metric(out.output, input);
    out.zero_output = !(out.train.output_energy > 0.0);
    return out;
}

inline json echo_json(const EchoOutcome& e, const afc::CombParams& comb, bool dispersion) {
    json j;
    j["dispersion"] = dispersion ? "on" : "off";
    j["storage_time_ns"] = comb.storage_time() * 1e9;
    j["efficiency"] = e.efficiency;
    j["causality_metric"] = e.causality;
    j["zero_output"] = e.zero_output;
    j["input_energy"] = e.train.input_energy;
    j["output_energy_fraction"] = e.train.output_energy / e.train.input_energy;
    json echoes = json::array();
    for (const auto& p : e.train.pulses) {
        json pe;
        pe["order"] = p.order;
        pe["center_time_s"] = p.center_time;
        pe["energy_fraction"] = p.energy;
        pe["window_s"] = {p.window_lo, p.window_hi};
        echoes.push_back(pe);
    }
    j["echoes"] = echoes;
    return j;
}

inline int cmd_simulate_echo(const std::string& config_path, const std::string& out_dir) {
    const RunConfig cfg = load_config(config_path);
    if (!cfg.comb) throw afc::ParseError("config: simulate-echo needs a comb block");
    ensure_out_dir(out_dir);

    const EchoOutcome e = run_echo(cfg, *cfg.comb, cfg.model.dispersion);
    json j = result_header(cfg, "simulate-echo");
    j.update(echo_json(e, *cfg.comb, cfg.model.dispersion));
    write_json(out_dir + "/echo_train.json", j);
    afc::write_time_csv(out_dir + "/echo_time.csv", e.output);
    afc::write_time_csv(out_dir + "/input_time.csv", e.input);
    return 0;
}

// ---------------------------------------------------------------------------
// efficiency sweep

inline std::vector<double> parse_detunings_ghz(const std::string& spec) {
    std::vector<double> out;
    if (spec.empty()) return out;
    if (spec.find(':') != std::string::npos) {
        double start = 0, step = 0, stop = 0;
        if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &start, &step, &stop) != 3 ||
            step == 0.0)
            throw afc::ParseError("bad detuning range '" + spec + "' (want start:step:stop)");
        for (double v = start; (step > 0 ? v <= stop + 1e-12 : v >= stop - 1e-12); v += step)
            out.push_back(v);
        return out;
    }
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw afc::ParseError("bad detuning '" + item + "'");
        }
    }
    return out;
}

inline int cmd_efficiency_sweep(const std::string& config_path, const std::string& detunings,
                                const std::string& out_dir) {
    const RunConfig cfg = load_config(config_path);
    if (!cfg.comb) throw afc::ParseError("config: efficiency-sweep needs a comb block");
    const std::vector<double> dets = parse_detunings_ghz(detunings);
    if (dets.empty()) throw afc::ParseError("empty detuning list");
    ensure_out_dir(out_dir);

    struct Row {
        double det_ghz, eff_on, eff_off, causality_on, causality_off;
    };
    std::vector<std::future<Row>> futures;
    for (double det : dets) {
        futures.push_back(std::async(std::launch::async, [&cfg, det]() {
            afc::CombParams comb = *cfg.comb;
            comb.center = cfg.profile.nu0 + det * 1e9;
            const EchoOutcome on = run_echo(cfg, comb, true);
            const EchoOutcome off = run_echo(cfg, comb, false);
            return Row{det, on.efficiency, off.efficiency, on.causality, off.causality};
        }));
    }
    std::ofstream f(out_dir + "/efficiency_sweep.csv");
    if (!f) throw afc::ParseError("cannot open sweep output for writing");
    f << "# tool_version = " << afc::kVersion << "\n";
    f << "# config_hash = " << hash_hex(cfg.raw_text) << "\n";
    f << "# columns: detuning_ghz,efficiency_dispersion_on,efficiency_dispersion_off,"
         "causality_on,causality_off\n";
    for (auto& fut : futures) {
        const Row r = fut.get();
        f << afc::detail::fmt_full(r.det_ghz) << "," << afc::detail::fmt_full(r.eff_on) << ","
          << afc::detail::fmt_full(r.eff_off) << "," << afc::detail::fmt_full(r.causality_on)
          << "," << afc::detail::fmt_full(r.causality_off) << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// kk-transform

inline int cmd_kk_transform(const std::string& input_csv, double n_host,
                            const std::string& method, const std::string& out_csv) {
    const auto [freq, alpha] = afc::read_spectrum_csv(input_csv);
    if (freq.size() < 2) throw afc::ParseError("kk-transform input needs >= 2 samples");
    afc::FrequencyGrid grid;
    grid.start = freq.front();
    grid.count = freq.size();
    grid.spacing = (freq.back() - freq.front()) / double(freq.size() - 1);
    for (std::size_t i = 0; i < freq.size(); ++i) {
        if (std::abs(freq[i] - grid.freq(i)) > 1e-6 * grid.spacing + 1e-9 * std::abs(freq[i]))
            throw afc::ParseError("kk-transform input grid is not uniform near row " +
                                  std::to_string(i + 1));
    }
    afc::KkOptions opts;
    if (method == "pv")
        opts.method = afc::KkMethod::PvQuadrature;
    else if (method == "hilbert")
        opts.method = afc::KkMethod::FftHilbert;
    else
        throw afc::ParseError("--method must be 'pv' or 'hilbert'");

    const auto k = afc::extinction_from_alpha(alpha, grid);
    const auto n = afc::kk_real_index(k, n_host, opts);
    afc::write_spectrum_csv(out_csv, grid, n.values, "refractive_index");
    return 0;
}

// ---------------------------------------------------------------------------
// simulate-reflectivity / synth-trace

inline int cmd_simulate_reflectivity(const std::string& config_path,
                                     const std::string& out_dir) {
    const RunConfig cfg = load_config(config_path);
    ensure_out_dir(out_dir);
    afc::CavityParams cavity = cfg.cavity;
    cavity.phi0 = afc::solve_match_phase(cavity, cfg.profile, cfg.match_freq, cfg.model);

    // reflectivity plus the underlying optical depth and index spectra
    afc::FrequencyGrid grid;
    std::vector<double> power, depth, index;
    if (cfg.comb) {
        afc::CombModel model(cavity, cfg.profile, *cfg.comb, cfg.model);
        const double half = 1.2 * model.window_halfwidth();
        grid = afc::make_grid(cfg.comb->center, 2.0 * half, 4001);
        power.resize(grid.count);
        depth.resize(grid.count);
        index.resize(grid.count);
        for (std::size_t i = 0; i < grid.count; ++i) {
            const double nu = grid.freq(i);
            power[i] = model.power_at(nu);
            depth[i] = model.depth_at(nu);
            index[i] = cavity.n_host + model.index_shift_at(nu);
        }
    } else {
        afc::NoCombModel model(cavity, cfg.profile, cfg.model);
        grid = afc::make_grid(cfg.profile.nu0, 50e9, 4001);
        power.resize(grid.count);
        depth.resize(grid.count);
        index.resize(grid.count);
        for (std::size_t i = 0; i < grid.count; ++i) {
            const double nu = grid.freq(i);
            power[i] = model.power_at(nu);
            depth[i] = cfg.profile.alpha(nu) * cavity.length;
            index[i] = cavity.n_host + model.index_shift_at(nu);
        }
    }
    afc::write_spectrum_csv(out_dir + "/reflectivity.csv", grid, power, "normalized_power");
    afc::write_spectrum_csv(out_dir + "/optical_depth.csv", grid, depth, "optical_depth");
    afc::write_spectrum_csv(out_dir + "/refractive_index.csv", grid, index,
                            "refractive_index");
    return 0;
}

inline int cmd_synth_trace(const std::string& config_path, const std::string& out_path,
                           bool no_comb, double noise_rel, std::size_t points,
                           double span_ghz, long long seed_override = -1) {
    RunConfig cfg = load_config(config_path);
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    afc::CavityParams cavity = cfg.cavity;
    cavity.phi0 = afc::solve_match_phase(cavity, cfg.profile, cfg.match_freq, cfg.model);

    std::vector<double> freqs(points);
    afc::ReflectivityTrace trace;
    if (no_comb || !cfg.comb) {
        const double span = (span_ghz > 0 ? span_ghz : 50.0) * 1e9;
        if (points < 2) throw afc::ParseError("need at least 2 trace points");
        for (std::size_t i = 0; i < points; ++i)
            freqs[i] = cfg.profile.nu0 - span / 2 + span * double(i) / double(points - 1);
        trace = afc::synthesize_trace(cavity, cfg.profile, nullptr, freqs, noise_rel,
                                      cfg.seed, cfg.model);
        trace.meta["kind"] = "no-comb";
    } else {
        const double span = (span_ghz > 0 ? span_ghz : 0.24) * 1e9;
        for (std::size_t i = 0; i < points; ++i)
            freqs[i] = cfg.comb->center - span / 2 + span * double(i) / double(points - 1);
        trace = afc::synthesize_trace(cavity, cfg.profile, &*cfg.comb, freqs, noise_rel,
                                      cfg.seed, cfg.model);
        trace.meta["kind"] = "comb";
        trace.meta["comb_detuning_ghz"] =
            afc::detail::fmt_full((cfg.comb->center - cfg.profile.nu0) / 1e9);
    }
    trace.meta["tool_version"] = afc::kVersion;
    trace.meta["config_hash"] = hash_hex(cfg.raw_text);
    trace.meta["seed"] = std::to_string(cfg.seed);
    trace.meta["noise_rel"] = afc::detail::fmt_full(noise_rel);
    afc::write_trace_csv(out_path, trace);
    return 0;
}

}  // namespace afccli
