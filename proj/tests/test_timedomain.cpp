#include <catch2/catch.hpp>

#include <cmath>
#include <complex>

#include "afc/model.hpp"
#include "afc/random.hpp"
#include "afc/timedomain.hpp"

using namespace afc;

namespace {

const CavityParams kTmYagCavity{0.6927, 0.9999, 1.799972, 0.004350, 1.7142, 0.0};
const InhomogeneousProfile kTmYag{377868e9, 17e9, 170.0};
const CombParams kCombB{1.4867, 23.8160e6, 2.9755e6, 0.0526, 9, 377868e9 - 2.7720e9};

Pulse test_input(double delta = kCombB.delta) {
    const double period = 1.0 / delta;
    return gaussian_input(kCombB.center, 12e-9, 8.0 * period, 1e-9, kCombB.center,
                          2.5 * period);
}

ComplexSpectrum flat_response(cplx value) {
    ComplexSpectrum r;
    r.grid = make_grid(kCombB.center, 1.6e9, 4097);
    r.values.assign(r.grid.count, value);
    return r;
}

}  // namespace

TEST_CASE("gaussian input is unit energy with the stated bandwidth") {
    const Pulse p = test_input();
    CHECK(p.energy() == Approx(1.0).margin(1e-12));
    CHECK(is_pow2(p.samples.size()));
    CHECK(p.intensity_fwhm() == Approx(12e-9).epsilon(2e-3));

    // time-bandwidth product of a gaussian: spectral FWHM = 0.4413 / fwhm_t
    auto spec = p.samples;
    spec.resize(next_pow2(8 * spec.size()), cplx(0.0, 0.0));
    fft_pow2(spec, false);
    double best = 0.0;
    std::size_t pk = 0;
    for (std::size_t i = 0; i < spec.size(); ++i)
        if (std::norm(spec[i]) > best) {
            best = std::norm(spec[i]);
            pk = i;
        }
    std::size_t lo = pk, hi = pk;
    while (std::norm(spec[(lo + spec.size() - 1) % spec.size()]) > best / 2.0) lo--;
    while (std::norm(spec[(hi + 1) % spec.size()]) > best / 2.0) hi++;
    const double df = 1.0 / (double(spec.size()) * p.dt);
    const double fwhm_f = double(hi - lo) * df;
    const double expect = 2.0 * std::log(2.0) / M_PI / 12e-9;  // 0.4413 / fwhm_t
    CHECK(fwhm_f == Approx(expect).epsilon(0.02));
}

TEST_CASE("gaussian input argument validation") {
    CHECK_THROWS_AS(gaussian_input(kCombB.center, 0.0, 300e-9, 1e-9, kCombB.center, 100e-9),
                    InvalidArgumentError);
    CHECK_THROWS_AS(gaussian_input(kCombB.center, 12e-9, 300e-9, 2e-9, kCombB.center, 100e-9),
                    ResolutionError);
    CHECK_THROWS_AS(gaussian_input(kCombB.center, 12e-9, 50e-9, 1e-9, kCombB.center, 100e-9),
                    InvalidArgumentError);
}

TEST_CASE("identity response returns the input") {
    const Pulse in = test_input();
    const Pulse out = propagate(in, flat_response(cplx(1.0, 0.0)));
    double diff = 0.0, peak = 0.0;
    for (std::size_t i = 0; i < in.samples.size(); ++i) {
        diff = std::max(diff, std::abs(out.samples[i] - in.samples[i]));
        peak = std::max(peak, std::abs(in.samples[i]));
    }
    CHECK(diff < 1e-12 * peak);
}

TEST_CASE("global phase response rotates the field, conserving energy") {
    const Pulse in = test_input();
    const cplx phase = std::exp(cplx(0.0, 0.8));
    const Pulse out = propagate(in, flat_response(phase));
    CHECK(out.energy() == Approx(in.energy()).epsilon(1e-12));
    double diff = 0.0, peak = 0.0;
    for (std::size_t i = 0; i < in.samples.size(); ++i) {
        diff = std::max(diff, std::abs(out.samples[i] - phase * in.samples[i]));
        peak = std::max(peak, std::abs(in.samples[i]));
    }
    CHECK(diff < 1e-12 * peak);
}

TEST_CASE("linear phase response delays the pulse") {
    const Pulse in = test_input();
    const double tau = 30e-9;
    ComplexSpectrum r;
    r.grid = make_grid(kCombB.center, 1.6e9, 8193);
    r.values.resize(r.grid.count);
    for (std::size_t i = 0; i < r.grid.count; ++i) {
        const double nu = r.grid.freq(i);
        r.values[i] = std::exp(cplx(0.0, -2.0 * M_PI * nu * tau));
    }
    const Pulse out = propagate(in, r);
    CHECK(out.center_time() - in.center_time() == Approx(tau).margin(0.3e-9));
    // linear interpolation between response samples chords the unit circle,
    // shaving theta^2/8 per bin off the magnitude
    CHECK(out.energy() == Approx(in.energy()).epsilon(1e-3));
}

TEST_CASE("Parseval consistency and passivity of the output energy") {
    NoiseGenerator rng(71);
    const Pulse in = test_input();
    for (int trial = 0; trial < 10; ++trial) {
        // random smooth passive response; the phase modulation is kept mild so
        // its group delay cannot push ring-down energy past the output window
        ComplexSpectrum r;
        r.grid = make_grid(kCombB.center, 1.6e9, 513);
        r.values.resize(r.grid.count);
        const double a = rng.next_uniform(), b = 6.0 * rng.next_uniform();
        const double c = 2.0 * M_PI * rng.next_uniform();
        for (std::size_t i = 0; i < r.grid.count; ++i) {
            const double x = double(i) / double(r.grid.count - 1);
            const double mag = a * (0.2 + 0.8 * std::pow(std::sin(b * x + c), 2.0));
            r.values[i] = mag * std::exp(cplx(0.0, 0.5 * std::cos(3.0 * b * x)));
        }
        const Pulse out = propagate(in, r);
        CHECK(out.energy() <= in.energy() * (1.0 + 1e-9));

        // frequency-domain energy of the filtered spectrum
        auto spec = in.samples;
        spec.resize(next_pow2(8 * in.samples.size()), cplx(0.0, 0.0));
        fft_pow2(spec, false);
        double ef = 0.0;
        for (std::size_t m = 0; m < spec.size(); ++m) {
            const double nu = in.ref_freq + fft_bin_freq(m, spec.size(), in.dt);
            ef += std::norm(spec[m] * r.sample(nu));
        }
        ef *= in.dt / double(spec.size());
        CHECK(out.energy() == Approx(ef).epsilon(1e-9));
    }
}

TEST_CASE("spectral coverage violations are reported") {
    const Pulse in = test_input();
    ComplexSpectrum r;
    r.grid = make_grid(kCombB.center, 10e6, 65);  // 10 MHz: narrower than the pulse
    r.values.assign(r.grid.count, cplx(1.0, 0.0));
    try {
        propagate(in, r);
        FAIL("expected CoverageError");
    } catch (const CoverageError& e) {
        CHECK(e.contained_fraction < 0.999);
        CHECK(e.contained_fraction > 0.0);
    }
}

TEST_CASE("flat background response produces no echoes") {
    ModelOptions opts;
    CavityParams c = kTmYagCavity;
    c.phi0 = solve_match_phase(c, kTmYag, kTmYag.nu0 - 3.19e9, opts);
    CombParams flat = kCombB;
    flat.d_c = 0.0;  // background only
    CombModel model(c, kTmYag, flat, opts);
    const Pulse in = test_input();
    const Pulse out = propagate(in, model.response());
    const EchoTrain train = extract_echoes(out, in, kCombB.delta);
    REQUIRE(train.pulses.size() >= 4);
    for (const auto& p : train.pulses)
        if (p.order >= 1) CHECK(p.energy < 1e-4);
}

TEST_CASE("comb response emits echoes at the storage time, decreasing") {
    ModelOptions opts;
    CavityParams c = kTmYagCavity;
    c.phi0 = solve_match_phase(c, kTmYag, kTmYag.nu0 - 3.19e9, opts);
    CombModel model(c, kTmYag, kCombB, opts);
    const Pulse in = test_input();
    const Pulse out = propagate(in, model.response());
    const EchoTrain train = extract_echoes(out, in, kCombB.delta);
    REQUIRE(train.pulses.size() >= 4);

    const double period = 1.0 / kCombB.delta;
    CHECK(train.pulses[1].center_time - train.pulses[0].center_time ==
          Approx(period).margin(period / 2.0));
    CHECK(train.pulses[1].energy > train.pulses[2].energy);
    CHECK(train.pulses[2].energy > train.pulses[3].energy);

    double sum = 0.0;
    for (const auto& p : train.pulses) {
        CHECK(p.energy >= 0.0);
        sum += p.energy;
    }
    CHECK(sum <= 1.0 + 1e-9);

    // windows are disjoint and time ordered
    for (std::size_t i = 1; i < train.pulses.size(); ++i)
        CHECK(train.pulses[i].window_lo >= train.pulses[i - 1].window_hi - 1e-15);

    CHECK(efficiency(out, in, kCombB.delta) == Approx(train.pulses[1].energy));
}

TEST_CASE("efficiency decreases monotonically with added background") {
    ModelOptions opts;
    CavityParams c = kTmYagCavity;
    c.phi0 = solve_match_phase(c, kTmYag, kTmYag.nu0 - 3.19e9, opts);
    const Pulse in = test_input();
    double prev = 1.0;
    for (double extra : {0.0, 0.15, 0.35}) {
        CombParams comb = kCombB;
        comb.d0 += extra;
        CombModel model(c, kTmYag, comb, opts);
        const double eff = efficiency(propagate(in, model.response()), in, comb.delta);
        CHECK(eff < prev);
        prev = eff;
    }
}

TEST_CASE("halving dt leaves the efficiency unchanged") {
    ModelOptions opts;
    CavityParams c = kTmYagCavity;
    c.phi0 = solve_match_phase(c, kTmYag, kTmYag.nu0 - 3.19e9, opts);
    CombModel model(c, kTmYag, kCombB, opts);
    const ComplexSpectrum resp = model.response();
    const double period = 1.0 / kCombB.delta;

    double eff[2];
    int idx = 0;
    for (double dt : {1e-9, 0.5e-9}) {
        const Pulse in = gaussian_input(kCombB.center, 12e-9, 8.0 * period, dt,
                                        kCombB.center, 2.5 * period);
        eff[idx++] = efficiency(propagate(in, resp), in, kCombB.delta);
    }
    CHECK(std::abs(eff[0] - eff[1]) < 1e-4);
}

TEST_CASE("identity response has zero first-echo efficiency") {
    const Pulse in = test_input();
    const Pulse out = propagate(in, flat_response(cplx(1.0, 0.0)));
    // only the far Gaussian tail of the prompt pulse reaches the echo window
    CHECK(efficiency(out, in, kCombB.delta) < 1e-4);
}

TEST_CASE("causality metric of a dark output is zero") {
    const Pulse in = test_input();
    const Pulse out = propagate(in, flat_response(cplx(0.0, 0.0)));
    CHECK(causality_metric(out, in) == 0.0);
}

TEST_CASE("echo extraction span validation") {
    const Pulse in = test_input();
    Pulse shorty = in;
    shorty.samples.resize(128);  // cuts the span below 3 periods past the center
    CHECK_THROWS_AS(extract_echoes(shorty, in, kCombB.delta), InvalidArgumentError);
}
