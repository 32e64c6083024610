#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "afc/cavity.hpp"
#include "afc/errors.hpp"
#include "afc/fft.hpp"
#include "afc/grid.hpp"

namespace afc {

/// Uniformly sampled complex field envelope. Samples are the baseband
/// representation relative to `ref_freq`: the physical field spectrum at
/// absolute frequency nu corresponds to baseband offset nu - ref_freq.
struct Pulse {
    double t_start = 0.0;  ///< time of sample 0, s
    double dt = 0.0;       ///< sample spacing, s
    double ref_freq = 0.0; ///< absolute frequency of baseband zero, Hz
    std::vector<cplx> samples;

    double time(std::size_t i) const { return t_start + static_cast<double>(i) * dt; }
    double span() const { return dt * static_cast<double>(samples.size() - 1); }

    /// Total energy sum |E|^2 dt.
    double energy() const {
        double e = 0.0;
        for (const cplx& v : samples) e += std::norm(v);
        return e * dt;
    }

    /// Energy-weighted center time.
    double center_time() const {
        double e = 0.0, m = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const double w = std::norm(samples[i]);
            e += w;
            m += w * time(i);
        }
        return e > 0.0 ? m / e : t_start;
    }

    /// Intensity full width at half maximum (linear interpolation at the
    /// half-power crossings around the intensity peak).
    double intensity_fwhm() const {
        std::size_t pk = 0;
        double best = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const double v = std::norm(samples[i]);
            if (v > best) {
                best = v;
                pk = i;
            }
        }
        if (best <= 0.0) return 0.0;
        const double half = 0.5 * best;
        auto cross = [&](long dir) -> double {
            long i = static_cast<long>(pk);
            while (i + dir >= 0 && i + dir < static_cast<long>(samples.size()) &&
                   std::norm(samples[i + dir]) > half)
                i += dir;
            const long j = i + dir;
            if (j < 0 || j >= static_cast<long>(samples.size()))
                return time(static_cast<std::size_t>(i));
            const double a = std::norm(samples[i]), b = std::norm(samples[j]);
            const double t = (a - half) / (a - b);
            return time(static_cast<std::size_t>(i)) + dir * t * dt;
        };
        return cross(+1) - cross(-1);
    }
};

inline void validate(const Pulse& p) {
    if (!(p.dt > 0.0)) throw InvalidArgumentError("pulse dt must be > 0");
    if (p.samples.size() < 2 || !is_pow2(p.samples.size()))
        throw InvalidArgumentError("pulse sample count must be a power of two >= 2");
}

/// Unit-energy Gaussian input pulse with the given intensity FWHM. The
/// envelope is carried at baseband offset (center_freq - ref_freq); the pulse
/// peak sits `lead_time` after t_start = 0 so that echoes and any acausal
/// artifacts fit the window.
inline Pulse gaussian_input(double center_freq, double fwhm_duration, double time_span,
                            double dt, double ref_freq, double lead_time) {
    if (!(fwhm_duration > 0.0)) throw InvalidArgumentError("pulse duration must be > 0");
    if (!(dt > 0.0) || dt > fwhm_duration / 10.0)
        throw ResolutionError("pulse sampling must satisfy dt <= fwhm/10",
                              fwhm_duration / 10.0);
    if (!(time_span > 0.0) || time_span < lead_time + fwhm_duration)
        throw InvalidArgumentError("pulse time span too short");

    Pulse p;
    p.t_start = 0.0;
    p.dt = dt;
    p.ref_freq = ref_freq;
    p.samples.assign(next_pow2(static_cast<std::size_t>(std::ceil(time_span / dt))),
                     cplx(0.0, 0.0));

    // intensity FWHM = 2 sigma sqrt(ln 2) for a field envelope e^{-t^2/(2 sigma^2)}
    const double sigma = fwhm_duration / 1.6651092223153954;
    const double f_off = center_freq - ref_freq;
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    for (std::size_t i = 0; i < p.samples.size(); ++i) {
        const double t = p.time(i) - lead_time;
        const double env = std::exp(-t * t / (2.0 * sigma * sigma));
        // e^{+i 2 pi nu t} analytic-signal convention (e^{-i Phi} is a delay):
        // a carrier above ref_freq rotates with positive baseband phase.
        p.samples[i] = env * std::exp(cplx(0.0, kTwoPi * f_off * t));
    }
    const double e = p.energy();
    for (cplx& v : p.samples) v /= std::sqrt(e);
    return p;
}

namespace detail {

/// Fraction of the input spectral energy covered by the response grid.
inline double spectral_coverage(const std::vector<cplx>& spectrum, std::size_t n, double dt,
                                double ref_freq, const FrequencyGrid& grid) {
    double total = 0.0, inside = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
        const double w = std::norm(spectrum[m]);
        total += w;
        const double nu = ref_freq + fft_bin_freq(m, n, dt);
        if (grid.contains(nu)) inside += w;
    }
    return total > 0.0 ? inside / total : 1.0;
}

}  // namespace detail

struct PropagateOptions {
    /// Zero-padding factor applied before the FFT (wrap-around guard).
    std::size_t pad_factor = 8;
    /// Required fraction of input spectral energy inside the response grid.
    double min_coverage = 0.999;
    /// Maximum tolerated output-energy fraction in the final 5% of the padded
    /// window (circular wrap-around check).
    double max_wrap_energy = 1e-6;
};

/// Propagate a pulse through the cavity: output = IFFT(FFT(input) * r(nu)).
/// The response is interpolated linearly (re and im) onto the FFT bins at
/// absolute frequency ref_freq + bin offset; bins outside the response grid
/// take the nearest-edge response value.
inline Pulse propagate(const Pulse& input, const ComplexSpectrum& response,
                       const PropagateOptions& opts = {}) {
    validate(input);
    validate(response.grid);
    const std::size_t n = input.samples.size();
    const std::size_t total = next_pow2(opts.pad_factor * n);

    std::vector<cplx> buf(total, cplx(0.0, 0.0));
    std::copy(input.samples.begin(), input.samples.end(), buf.begin());
    fft_pow2(buf, false);

    const double cover =
        detail::spectral_coverage(buf, total, input.dt, input.ref_freq, response.grid);
    if (cover < opts.min_coverage)
        throw CoverageError("response grid covers only " + std::to_string(cover) +
                                " of the input spectral energy",
                            cover);

    for (std::size_t m = 0; m < total; ++m) {
        const double nu = input.ref_freq + fft_bin_freq(m, total, input.dt);
        buf[m] *= response.sample(nu);
    }
    fft_pow2(buf, true);

    // Wrap-around check over the final 5% of the padded window.
    double tail = 0.0, total_e = 0.0;
    const std::size_t tail_start = total - total / 20;
    for (std::size_t i = 0; i < total; ++i) {
        const double w = std::norm(buf[i]);
        total_e += w;
        if (i >= tail_start) tail += w;
    }
    if (total_e > 0.0 && tail / total_e > opts.max_wrap_energy)
        throw NumericalFailureError(
            "echo train wraps around the FFT window; enlarge the time span");

    Pulse out;
    out.t_start = input.t_start;
    out.dt = input.dt;
    out.ref_freq = input.ref_freq;
    out.samples.assign(buf.begin(), buf.begin() + static_cast<long>(n));
    return out;
}

/// One detected pulse of the echo train.
struct EchoPulse {
    int order = 0;            ///< m = 0 prompt reflection, m >= 1 echoes
    double center_time = 0.0; ///< energy centroid within the window, s
    double energy = 0.0;      ///< window energy / input energy
    double window_lo = 0.0;
    double window_hi = 0.0;
};

struct EchoTrain {
    std::vector<EchoPulse> pulses;
    double input_energy = 0.0;
    double output_energy = 0.0;
};

/// Split the output into windows of width 1/delta centered at the input pulse
/// center + m/delta and integrate each window's energy.
inline EchoTrain extract_echoes(const Pulse& output, const Pulse& input_ref, double delta) {
    validate(output);
    validate(input_ref);
    if (!(delta > 0.0)) throw InvalidArgumentError("tooth spacing must be > 0");
    const double t0 = input_ref.center_time();
    const double period = 1.0 / delta;
    const double t_end = output.time(output.samples.size() - 1);
    if (t_end - t0 < 3.0 * period)
        throw InvalidArgumentError("output span must reach >= 3/delta past the input center");

    const double e_in = input_ref.energy();
    if (!(e_in > 0.0)) throw InvalidArgumentError("input pulse has no energy");

    EchoTrain train;
    train.input_energy = e_in;
    train.output_energy = output.energy();
    for (int m = 0;; ++m) {
        const double c = t0 + m * period;
        const double lo = c - 0.5 * period, hi = c + 0.5 * period;
        if (hi > t_end) break;
        double e = 0.0, cm = 0.0;
        for (std::size_t i = 0; i < output.samples.size(); ++i) {
            const double t = output.time(i);
            if (t < lo || t >= hi) continue;
            const double w = std::norm(output.samples[i]);
            e += w;
            cm += w * t;
        }
        EchoPulse p;
        p.order = m;
        p.energy = e * output.dt / e_in;
        p.center_time = e > 0.0 ? cm / e : c;
        p.window_lo = lo;
        p.window_hi = hi;
        train.pulses.push_back(p);
    }
    return train;
}

/// Memory efficiency: energy fraction recalled in the first echo window.
inline double efficiency(const Pulse& output, const Pulse& input_ref, double delta) {
    const EchoTrain train = extract_echoes(output, input_ref, delta);
    for (const EchoPulse& p : train.pulses)
        if (p.order == 1) return p.energy;
    return 0.0;
}

/// Energy fraction of the output arriving strictly earlier than
/// (input center - 3 x input FWHM), relative to the total output energy.
/// Returns 0 for a numerically zero output.
inline double causality_metric(const Pulse& output, const Pulse& input_ref) {
    validate(output);
    validate(input_ref);
    const double cutoff = input_ref.center_time() - 3.0 * input_ref.intensity_fwhm();
    double pre = 0.0, total = 0.0;
    for (std::size_t i = 0; i < output.samples.size(); ++i) {
        const double w = std::norm(output.samples[i]);
        total += w;
        if (output.time(i) < cutoff) pre += w;
    }
    if (total <= 0.0) return 0.0;
    return pre / total;
}

}  // namespace afc
