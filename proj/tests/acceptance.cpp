// Acceptance suite: one pass/fail line per criterion, exit 0 only if all
// requested criteria pass. Run with no arguments for the full suite or with
// criterion numbers (e.g. "acceptance 1 6 9").

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <set>
#include <string>
#include <vector>

#include "afc/fitting.hpp"
#include "afc/io.hpp"
#include "afc/model.hpp"
#include "afc/random.hpp"
#include "afc/timedomain.hpp"

using namespace afc;

namespace {

const InhomogeneousProfile kTmYag{377868e9, 17e9, 170.0};
const CavityParams kTmYagCavity{0.6927, 0.9999, 1.799972, 0.004350, 1.7142, 0.0};
// Extracted comb parameter sets for three detunings across the cavity profile.
const CombParams kCombA{1.5260, 23.4598e6, 3.6063e6, 0.2008, 9, 377868e9 + 2.2765e9};
const CombParams kCombB{1.4867, 23.8160e6, 2.9755e6, 0.0526, 9, 377868e9 - 2.7720e9};
const CombParams kCombC{1.4261, 24.3382e6, 3.4462e6, 0.0254, 9, 377868e9 - 3.8675e9};

// Regression values produced by this implementation; no independent numeric
// ground truth exists for these efficiencies.
constexpr double kRegressionEffB_DispersionOn = 0.37294;
constexpr double kRegressionEffB_DispersionOff = 0.12036;
constexpr double kRegressionTolerance = 0.003;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

int g_checks_failed = 0;

void expect(bool ok, const char* what) {
    if (!ok) {
        std::printf("    check failed: %s\n", what);
        ++g_checks_failed;
    }
}

CavityParams anchored_cavity(const ModelOptions& opts) {
    CavityParams c = kTmYagCavity;
    c.phi0 = solve_match_phase(c, kTmYag, kTmYag.nu0 - 3.19e9, opts);
    return c;
}

struct EchoSim {
    Pulse input, output;
    EchoTrain train;
    double eff = 0.0, causality = 0.0;
};

EchoSim simulate_comb(const CombParams& comb, bool dispersion) {
    ModelOptions opts;
    opts.dispersion = dispersion;
    const CavityParams cavity = anchored_cavity(opts);
    CombModel model(cavity, kTmYag, comb, opts);
    const double period = comb.storage_time();
    EchoSim sim;
    sim.input = gaussian_input(comb.center, 12e-9, 8.0 * period, 1e-9, comb.center,
                               2.5 * period);
    PropagateOptions prop;
    if (!dispersion) prop.max_wrap_energy = 5e-2;  // acausal mode wraps pre-echoes
    sim.output = propagate(sim.input, model.response(), prop);
    sim.train = extract_echoes(sim.output, sim.input, comb.delta);
    sim.eff = efficiency(sim.output, sim.input, comb.delta);
    sim.causality = causality_metric(sim.output, sim.input);
    return sim;
}

// --------------------------------------------------------------------------

bool criterion_1() {
    Timer timer;
    ModelOptions opts;
    const CavityParams cavity = anchored_cavity(opts);
    const double nu_min =
        find_impedance_match(cavity, kTmYag, kTmYag.nu0 - 10e9, kTmYag.nu0 + 10e9, opts);
    NoCombModel model(cavity, kTmYag, opts);
    const double reflected = std::norm(model.amplitude_at(nu_min));
    const double offset_ghz = (nu_min - kTmYag.nu0) / 1e9;
    const double absorption = 1.0 - reflected;
    const double elapsed = timer.seconds();

    expect(std::abs(offset_ghz - (-3.19)) <= 0.15, "match offset within -3.19 +- 0.15 GHz");
    expect(absorption >= 0.90, "absorption at the minimum >= 90%");
    expect(elapsed < 5.0, "runtime < 5 s");
    std::printf("  offset = %+.4f GHz, absorption = %.1f%%, %.2f s\n", offset_ghz,
                100.0 * absorption, elapsed);
    return std::abs(offset_ghz - (-3.19)) <= 0.15 && absorption >= 0.90 && elapsed < 5.0;
}

bool criterion_2() {
    const double fsr = free_spectral_range(kTmYagCavity);
    const bool in_band = fsr >= 18.5e9 && fsr <= 20.5e9;
    // 19.14 GHz reproduced to 4 significant digits
    const double rounded = std::round(fsr / 1e7) * 1e7;
    const bool four_digits = std::abs(rounded - 19.14e9) <= 5e6;
    expect(in_band, "FSR within [18.5, 20.5] GHz");
    expect(four_digits, "FSR rounds to 19.14 GHz at 4 significant digits");
    std::printf("  FSR = %.6f GHz\n", fsr / 1e9);
    return in_band && four_digits;
}

bool criterion_3() {
    Timer timer;
    const EchoSim sim = simulate_comb(kCombB, true);
    double prompt_center = 0.0, echo_center = 0.0;
    for (const auto& p : sim.train.pulses) {
        if (p.order == 0) prompt_center = p.center_time;
        if (p.order == 1) echo_center = p.center_time;
    }
    const double storage_ns = (echo_center - prompt_center) * 1e9;
    const double elapsed = timer.seconds();
    expect(std::abs(storage_ns - 41.99) <= 2.0, "first echo 41.99 +- 2 ns after the prompt");
    expect(elapsed < 10.0, "runtime < 10 s");
    std::printf("  echo delay = %.2f ns, efficiency = %.4f, %.2f s\n", storage_ns, sim.eff,
                elapsed);
    return std::abs(storage_ns - 41.99) <= 2.0 && elapsed < 10.0;
}

bool criterion_4() {
    const EchoSim on = simulate_comb(kCombB, true);
    const EchoSim off = simulate_comb(kCombB, false);
    expect(on.causality < 1e-4, "dispersion-on pre-input energy < 1e-4");
    expect(off.causality >= 10.0 * on.causality, "dispersion-off >= 10x dispersion-on");
    std::printf("  pre-input fraction: on = %.3e, off = %.3e\n", on.causality,
                off.causality);
    return on.causality < 1e-4 && off.causality >= 10.0 * on.causality;
}

bool criterion_5() {
    const EchoSim a_on = simulate_comb(kCombA, true);
    const EchoSim b_on = simulate_comb(kCombB, true);
    const EchoSim c_on = simulate_comb(kCombC, true);
    const EchoSim a_off = simulate_comb(kCombA, false);
    const EchoSim b_off = simulate_comb(kCombB, false);
    const EchoSim c_off = simulate_comb(kCombC, false);

    const bool peak_at_match = b_on.eff > a_on.eff && b_on.eff > c_on.eff;
    const bool edges_below = a_on.eff < c_on.eff;  // decreasing away from the match point
    const bool off_below = b_off.eff < b_on.eff && c_off.eff < c_on.eff &&
                           a_off.eff < a_on.eff;
    const bool regression =
        std::abs(b_on.eff - kRegressionEffB_DispersionOn) < kRegressionTolerance &&
        std::abs(b_off.eff - kRegressionEffB_DispersionOff) < kRegressionTolerance;

    expect(peak_at_match, "maximum efficiency for the comb nearest the match point");
    expect(edges_below, "efficiency decreases toward the scan edges");
    expect(off_below, "dispersion-off strictly below dispersion-on");
    expect(regression, "frozen regression efficiencies for comb b");
    std::printf("  eff(on):  a = %.4f  b = %.4f  c = %.4f\n", a_on.eff, b_on.eff, c_on.eff);
    std::printf("  eff(off): a = %.4f  b = %.4f  c = %.4f\n", a_off.eff, b_off.eff,
                c_off.eff);
    return peak_at_match && edges_below && off_below && regression;
}

bool criterion_6() {
    Timer timer;
    const double spacing = kTmYag.gamma_in / 32.0;
    const FrequencyGrid grid = make_grid(kTmYag.nu0, spacing * 2048, 2049);
    const auto k = extinction_from_alpha(lorentzian_alpha(kTmYag, grid), grid);
    const double excursion =
        0.5 * kTmYag.peak_alpha * kSpeedOfLight / (4.0 * M_PI * kTmYag.nu0);

    KkOptions pv;
    pv.method = KkMethod::PvQuadrature;
    KkOptions fh;
    fh.method = KkMethod::FftHilbert;
    const auto n_pv = kk_real_index(k, 1.8, pv);
    const auto n_fh = kk_real_index(k, 1.8, fh);
    double err_pv = 0.0, gap = 0.0;
    for (std::size_t i = 0; i < grid.count; ++i) {
        const double ref = 1.8 + lorentzian_index_shift(kTmYag, grid.freq(i));
        err_pv = std::max(err_pv, std::abs(n_pv.values[i] - ref));
        gap = std::max(gap, std::abs(n_pv.values[i] - n_fh.values[i]));
    }
    const double elapsed = timer.seconds();
    expect(err_pv < 1e-6 * excursion, "pv-quadrature within 1e-6 of the closed form");
    expect(gap < 1e-4 * excursion, "pv and fft-hilbert agree within 1e-4");
    expect(elapsed < 2.0, "runtime < 2 s");
    std::printf("  pv error = %.2e, pv-fft gap = %.2e (of peak excursion), %.2f s\n",
                err_pv / excursion, gap / excursion, elapsed);
    return err_pv < 1e-6 * excursion && gap < 1e-4 * excursion && elapsed < 2.0;
}

bool criterion_7() {
    Timer timer;
    ModelOptions opts;
    const CavityParams cavity = anchored_cavity(opts);

    std::vector<double> freqs1(2001);
    for (std::size_t i = 0; i < freqs1.size(); ++i)
        freqs1[i] = kTmYag.nu0 - 25e9 + double(i) * 25e6;
    std::vector<double> freqs2(1601);
    for (std::size_t i = 0; i < freqs2.size(); ++i)
        freqs2[i] = kCombB.center - 120e6 + double(i) * 0.15e6;

    int stage1_ok = 0, stage1_conv = 0, stage2_ok = 0, stage2_conv = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto trace = synthesize_trace(cavity, kTmYag, nullptr, freqs1, 0.01, seed);
        const auto fit = fit_cavity(trace);
        if (fit.fit.converged) ++stage1_conv;
        if (fit.fit.converged &&
            std::abs(fit.cavity.r1 - cavity.r1) / cavity.r1 < 0.02 &&
            std::abs(fit.cavity.length - cavity.length) / cavity.length < 0.02 &&
            std::abs(fit.cavity.s - cavity.s) / cavity.s < 0.02 &&
            std::abs(fit.profile.peak_alpha - kTmYag.peak_alpha) / kTmYag.peak_alpha < 0.05)
            ++stage1_ok;
    }
    for (std::uint64_t seed = 101; seed <= 120; ++seed) {
        const auto trace = synthesize_trace(cavity, kTmYag, &kCombB, freqs2, 0.01, seed);
        const auto fit = fit_comb(trace, cavity, kTmYag, kCombB.center);
        if (fit.fit.converged) ++stage2_conv;
        if (fit.fit.converged &&
            std::abs(fit.comb.d_c - kCombB.d_c) / kCombB.d_c < 0.03 &&
            std::abs(fit.comb.delta - kCombB.delta) / kCombB.delta < 0.03 &&
            std::abs(fit.comb.gamma_tilde - kCombB.gamma_tilde) / kCombB.gamma_tilde < 0.03 &&
            std::abs(fit.comb.d0 - kCombB.d0) < 0.02)
            ++stage2_ok;
    }
    const double elapsed = timer.seconds();
    expect(stage1_conv >= 19, "stage-1 convergence >= 19/20");
    expect(stage1_ok >= 19, "stage-1 recovery (r1, L, s 2%; pac 5%) >= 19/20");
    expect(stage2_conv >= 19, "stage-2 convergence >= 19/20");
    expect(stage2_ok >= 19, "stage-2 recovery (d_c, delta, gamma 3%; d0 0.02) >= 19/20");
    expect(elapsed < 60.0, "runtime < 60 s");
    std::printf("  stage 1: %d/20 recovered, stage 2: %d/20 recovered, %.1f s\n", stage1_ok,
                stage2_ok, elapsed);
    return stage1_conv >= 19 && stage1_ok >= 19 && stage2_conv >= 19 && stage2_ok >= 19 &&
           elapsed < 60.0;
}

// Energy-weighted first moment of the dip residual about each tooth minimum;
// the sign captures the lean direction of the reflectivity dips.
int skewness_sign(const CombParams& comb) {
    ModelOptions opts;
    const CavityParams cavity = anchored_cavity(opts);
    CombModel model(cavity, kTmYag, comb, opts);
    int pos = 0, neg = 0;
    for (int tooth = 2; tooth <= comb.n_teeth - 1; ++tooth) {
        const double b = comb.tooth_center(tooth);
        const double lo = b - comb.delta / 2.0, hi = b + comb.delta / 2.0;
        const int n = 301;
        double min_p = 1e9, min_nu = b;
        std::vector<double> p(n);
        for (int i = 0; i < n; ++i) {
            const double nu = lo + (hi - lo) * i / (n - 1);
            p[i] = model.power_at(nu);
            if (p[i] < min_p) {
                min_p = p[i];
                min_nu = nu;
            }
        }
        const double plateau = std::max(p.front(), p.back());
        double m1 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double nu = lo + (hi - lo) * i / (n - 1);
            m1 += (nu - min_nu) * std::max(0.0, plateau - p[i]);
        }
        if (m1 > 0.0)
            ++pos;
        else
            --neg;
    }
    return pos + neg > 0 ? 1 : -1;  // net sign over the interior teeth
}

bool criterion_8() {
    // combs a and c sit on opposite sides of the cavity resonance
    const int sign_a = skewness_sign(kCombA);
    const int sign_c = skewness_sign(kCombC);
    expect(sign_a * sign_c < 0, "tooth-dip asymmetry flips across the cavity resonance");
    std::printf("  first-moment sign: comb a = %+d, comb c = %+d\n", sign_a, sign_c);
    return sign_a * sign_c < 0;
}

bool criterion_9() {
    NoiseGenerator rng(2024);
    bool ok = true;

    // passivity: |r| <= 1 over random parameters
    for (int i = 0; i < 1000; ++i) {
        CavityParams c;
        c.r2 = 0.2 + 0.8 * rng.next_uniform();
        c.r1 = 0.999 * c.r2 * rng.next_uniform();
        c.n_host = 1.0 + rng.next_uniform();
        c.length = 1e-3 + 5e-3 * rng.next_uniform();
        const double depth = 12.0 * rng.next_uniform();
        const double phi = 30.0 * (rng.next_uniform() - 0.5);
        if (!(std::abs(reflection_amplitude_at(c, depth, phi)) <= 1.0 + 1e-12)) ok = false;
    }
    expect(ok, "passivity |r| <= 1 over 1000 draws");
    bool all_ok = ok;

    // lossless unitarity: d = 0, r2 = 1
    ok = true;
    for (int i = 0; i < 1000; ++i) {
        CavityParams c;
        c.r2 = 1.0;
        c.r1 = 0.999 * rng.next_uniform();
        c.n_host = 1.8;
        c.length = 4e-3;
        const double phi = 30.0 * (rng.next_uniform() - 0.5);
        if (std::abs(std::abs(reflection_amplitude_at(c, 0.0, phi)) - 1.0) > 1e-12)
            ok = false;
    }
    expect(ok, "lossless unitarity |r| = 1 over 1000 draws");
    all_ok = all_ok && ok;

    // Parseval consistency and window-energy budget over random responses
    ok = true;
    bool windows_ok = true;
    const double delta = 23.8160e6;
    const double period = 1.0 / delta;
    const Pulse input = gaussian_input(377868e9, 12e-9, 8.0 * period, 1e-9, 377868e9,
                                       2.5 * period);
    for (int trial = 0; trial < 1000; ++trial) {
        // dense smooth response: coarse piecewise-linear responses shed slow
        // energy tails past the output window and spoil the 1e-9 comparison
        ComplexSpectrum r;
        r.grid = make_grid(377868e9, 1.6e9, 4097);
        r.values.resize(r.grid.count);
        const double a = rng.next_uniform();
        const double b = 8.0 * rng.next_uniform();
        const double c = 2.0 * M_PI * rng.next_uniform();
        // mild phase modulation: the group delay must stay inside the window
        const double d = 1.0 * rng.next_uniform();
        for (std::size_t i = 0; i < r.grid.count; ++i) {
            const double x = double(i) / double(r.grid.count - 1);
            const double mag = a * (0.1 + 0.9 * std::pow(std::sin(b * x + c), 2.0));
            r.values[i] = mag * std::exp(cplx(0.0, d * std::cos(2.0 * b * x + c)));
        }
        const Pulse out = propagate(input, r);

        auto spec = input.samples;
        spec.resize(next_pow2(8 * input.samples.size()), cplx(0.0, 0.0));
        fft_pow2(spec, false);
        double ef = 0.0;
        for (std::size_t m = 0; m < spec.size(); ++m) {
            const double nu = input.ref_freq + fft_bin_freq(m, spec.size(), input.dt);
            ef += std::norm(spec[m] * r.sample(nu));
        }
        ef *= input.dt / double(spec.size());
        if (std::abs(out.energy() - ef) > 1e-9 * std::max(ef, 1e-30)) ok = false;
        if (out.energy() > input.energy() * (1.0 + 1e-9)) ok = false;

        const EchoTrain train = extract_echoes(out, input, delta);
        double sum = 0.0;
        for (const auto& pls : train.pulses) sum += pls.energy;
        if (sum > 1.0 + 1e-9) windows_ok = false;
    }
    expect(ok, "Parseval consistency within 1e-9 over 1000 draws");
    expect(windows_ok, "echo-window energy sum <= 1 + 1e-9");
    return all_ok && ok && windows_ok;
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

    struct Entry {
        int id;
        const char* name;
        bool (*run)();
    };
    const Entry entries[] = {
        {1, "impedance-match location and depth", criterion_1},
        {2, "free spectral range", criterion_2},
        {3, "echo timing", criterion_3},
        {4, "causality split (dispersion on/off)", criterion_4},
        {5, "efficiency trend across the comb positions", criterion_5},
        {6, "Kramers-Kronig oracle", criterion_6},
        {7, "synthesize-then-fit round trips", criterion_7},
        {8, "tooth-dip skewness flip", criterion_8},
        {9, "property suites", criterion_9},
    };

    int failures = 0;
    for (const Entry& e : entries) {
        if (!wanted.empty() && !wanted.count(e.id)) continue;
        std::printf("criterion %d: %s\n", e.id, e.name);
        bool ok = false;
        try {
            ok = e.run();
        } catch (const std::exception& ex) {
            std::printf("    exception: %s\n", ex.what());
        }
        std::printf("%s criterion %d\n", ok ? "PASS" : "FAIL", e.id);
        if (!ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
