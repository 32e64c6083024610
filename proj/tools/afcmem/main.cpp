// afcmem: simulation and parameter extraction for cavity-enhanced
// atomic-frequency-comb optical memories.

#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "afc/errors.hpp"
#include "afc/version.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Cavity-enhanced AFC memory: reflectivity simulation, trace fitting, "
                 "and echo-efficiency prediction"};
    app.set_version_flag("--version", afc::kVersion);
    app.require_subcommand(1);

    std::string trace_path, config_path, cavity_path, out_dir = ".", out_path;
    std::string dispersion_flag, method = "pv", detunings;
    double n_host = 1.8, noise_rel = 0.0, span_ghz = 0.0;
    std::size_t points = 2001;
    bool no_comb = false;

    auto* fit_cavity = app.add_subcommand("fit-cavity",
                                          "Fit cavity parameters to a no-comb trace");
    fit_cavity->add_option("--trace", trace_path, "trace CSV (frequency_hz,power)")
        ->required();
    fit_cavity->add_option("--config", config_path, "run configuration JSON")->required();
    fit_cavity->add_option("--out", out_dir, "output directory");

    auto* fit_comb = app.add_subcommand("fit-comb",
                                        "Fit comb parameters with frozen cavity values");
    fit_comb->add_option("--trace", trace_path, "trace CSV (frequency_hz,power)")
        ->required();
    fit_comb->add_option("--cavity", cavity_path, "stage-1 cavity_fit.json")->required();
    fit_comb->add_option("--config", config_path, "run configuration JSON")->required();
    fit_comb->add_option("--out", out_dir, "output directory");
    fit_comb->add_option("--dispersion", dispersion_flag, "on|off (overrides config)");

    auto* sim_echo = app.add_subcommand("simulate-echo",
                                        "Propagate a pulse and extract the echo train");
    sim_echo->add_option("--config", config_path, "run configuration JSON")->required();
    sim_echo->add_option("--out", out_dir, "output directory");

    auto* sweep = app.add_subcommand("efficiency-sweep",
                                     "Echo efficiency versus comb detuning, "
                                     "dispersion on and off");
    sweep->add_option("--config", config_path, "run configuration JSON")->required();
    sweep->add_option("--detunings", detunings,
                      "comma list or start:step:stop, GHz from the atomic center")
        ->required();
    sweep->add_option("--out", out_dir, "output directory");

    auto* kk = app.add_subcommand("kk-transform",
                                  "Refractive index from an absorption spectrum");
    kk->add_option("--input", trace_path, "CSV (frequency_hz,alpha_per_m)")->required();
    kk->add_option("--n-host", n_host, "constant host refractive index");
    kk->add_option("--method", method, "pv|hilbert");
    kk->add_option("--out", out_path, "output CSV path")->required();

    auto* sim_refl = app.add_subcommand("simulate-reflectivity",
                                        "Model reflectivity spectrum for the config");
    sim_refl->add_option("--config", config_path, "run configuration JSON")->required();
    sim_refl->add_option("--out", out_dir, "output directory");

    auto* synth = app.add_subcommand("synth-trace",
                                     "Synthesize a noisy reflectivity trace");
    synth->add_option("--config", config_path, "run configuration JSON")->required();
    synth->add_option("--out", out_path, "output CSV path")->required();
    synth->add_flag("--no-comb", no_comb, "ignore the comb block");
    synth->add_option("--noise", noise_rel, "relative multiplicative noise");
    synth->add_option("--points", points, "number of trace points");
    synth->add_option("--span-ghz", span_ghz, "trace span in GHz");
    long long seed_override = -1;
    synth->add_option("--seed", seed_override, "noise seed (overrides the config)");

    // exit-code contract: 0 success, 1 input error, 2 non-converged fit
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(fit_cavity))
            return afccli::cmd_fit_cavity(trace_path, config_path, out_dir);
        if (app.got_subcommand(fit_comb))
            return afccli::cmd_fit_comb(trace_path, cavity_path, config_path, out_dir,
                                        dispersion_flag);
        if (app.got_subcommand(sim_echo))
            return afccli::cmd_simulate_echo(config_path, out_dir);
        if (app.got_subcommand(sweep))
            return afccli::cmd_efficiency_sweep(config_path, detunings, out_dir);
        if (app.got_subcommand(kk))
            return afccli::cmd_kk_transform(trace_path, n_host, method, out_path);
        if (app.got_subcommand(sim_refl))
            return afccli::cmd_simulate_reflectivity(config_path, out_dir);
        if (app.got_subcommand(synth))
            return afccli::cmd_synth_trace(config_path, out_path, no_comb, noise_rel, points,
                                           span_ghz, seed_override);
    } catch (const afc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
