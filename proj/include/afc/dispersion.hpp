#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "afc/constants.hpp"
#include "afc/errors.hpp"
#include "afc/fft.hpp"
#include "afc/grid.hpp"
#include "afc/spectra.hpp"

namespace afc {

/// Real refractive index n(nu) sampled on a frequency grid.
struct IndexSpectrum {
    FrequencyGrid grid;
    std::vector<double> values;
};

/// Imaginary index k(nu) >= 0 sampled on a frequency grid.
struct ExtinctionSpectrum {
    FrequencyGrid grid;
    std::vector<double> values;
};

/// k(nu) = alpha(nu) * c / (4 pi nu). Grid frequencies must be positive.
inline ExtinctionSpectrum extinction_from_alpha(const std::vector<double>& alpha,
                                                const FrequencyGrid& grid) {
    validate(grid);
    if (alpha.size() != grid.count)
        throw InvalidArgumentError("absorption array length does not match grid count");
    if (!(grid.start > 0.0))
        throw InvalidArgumentError("extinction needs positive frequencies");
    ExtinctionSpectrum k;
    k.grid = grid;
    k.values.resize(grid.count);
    constexpr double kFourPi = 12.566370614359172;
    for (std::size_t i = 0; i < grid.count; ++i) {
        if (!(alpha[i] >= 0.0))
            throw InvalidArgumentError("absorption must be >= 0 everywhere");
        k.values[i] = alpha[i] * kSpeedOfLight / (kFourPi * grid.freq(i));
    }
    return k;
}

enum class KkMethod {
    PvQuadrature,  ///< principal-value quadrature with the exact kernel
    FftHilbert,    ///< narrowband Hilbert transform via FFT
};

struct KkOptions {
    KkMethod method = KkMethod::FftHilbert;
    /// Extend k beyond the grid edges with an inverse-square tail anchored at
    /// the edge samples. When false, a violated tail condition is an error.
    bool tail_extension = true;
    /// Edge-to-peak ratio above which the tail condition counts as violated.
    double tail_threshold = 1e-3;
    /// Minimum number of samples across the narrowest feature of k.
    double min_samples_per_feature = 8.0;
};

namespace detail {

/// Integral of C / (x^2 (x - a)) dx, cancellation-safe for small |a/x|.
/// The interval [xa, xb] must not contain 0 or a; xb may be +inf.
inline double inv_square_kernel_integral(double C, double xa, double xb, double a) {
    if (C == 0.0) return 0.0;
    auto anti = [&](double x) -> double {
        if (std::isinf(x)) return 0.0;
        const double q = a / x;
        if (std::abs(q) < 0.5) {
            // G(x) = -C * sum_{m>=0} a^m / ((m+2) x^{m+2})
            double sum = 0.0;
            double pw = 1.0 / (x * x);
            for (int m = 0; m < 60; ++m) {
                const double add = pw / (m + 2);
                sum += add;
                if (std::abs(add) < 1e-18 * std::abs(sum)) break;
                pw *= q;
            }
            return -C * sum;
        }
        return C * (std::log(std::abs((x - a) / x)) / (a * a) + 1.0 / (a * x));
    };
    return anti(xb) - anti(xa);
}

/// Integral of (C/x^2 - kj) / (x - a) dx with C = kj * a^2 (edge-anchored),
/// which collapses to kj * (a/x - ln|x|). Interval must not contain 0.
inline double anchored_subtracted_tail(double kj, double a, double xa, double xb) {
    if (kj == 0.0) return 0.0;
    auto anti = [&](double x) { return kj * (a / x - std::log(std::abs(x))); };
    return anti(xb) - anti(xa);
}

/// First derivative of k at sample j from the widest symmetric stencil that
/// fits, up to 7 points (6th order).
inline double sample_derivative(const std::vector<double>& k, std::size_t j, double h) {
    const std::size_t n = k.size();
    const std::size_t room = std::min(j, n - 1 - j);
    if (room >= 3) {
        return (-k[j - 3] + 9.0 * k[j - 2] - 45.0 * k[j - 1] + 45.0 * k[j + 1] -
                9.0 * k[j + 2] + k[j + 3]) /
               (60.0 * h);
    }
    if (room >= 2)
        return (k[j - 2] - 8.0 * k[j - 1] + 8.0 * k[j + 1] - k[j + 2]) / (12.0 * h);
    if (room >= 1) return (k[j + 1] - k[j - 1]) / (2.0 * h);
    return j == 0 ? (k[1] - k[0]) / h : (k[n - 1] - k[n - 2]) / h;
}

/// Width (in samples) of the narrowest half-maximum feature of |k|, or 0 when
/// k has no local maxima above the prominence floor.
inline double narrowest_feature_samples(const std::vector<double>& k) {
    const std::size_t n = k.size();
    double peak = 0.0;
    for (double v : k) peak = std::max(peak, std::abs(v));
    if (peak <= 0.0) return 0.0;
    double narrowest = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double v = std::abs(k[i]);
        if (!(v >= std::abs(k[i - 1]) && v > std::abs(k[i + 1]) && v > 0.2 * peak)) continue;
        const double half = 0.5 * v;
        std::size_t l = i, r = i;
        while (l > 0 && std::abs(k[l]) > half) --l;
        while (r + 1 < n && std::abs(k[r]) > half) ++r;
        const double w = static_cast<double>(r - l);
        if (narrowest == 0.0 || w < narrowest) narrowest = w;
    }
    return narrowest;
}

struct TailModel {
    double nu_c = 0.0;  ///< reference center (grid center)
    double c_lo = 0.0;  ///< k ~ c_lo / (nu - nu_c)^2 below the grid
    double c_hi = 0.0;  ///< k ~ c_hi / (nu - nu_c)^2 above the grid
    double x_lo = 0.0;  ///< grid start - nu_c (< 0)
    double x_hi = 0.0;  ///< grid end - nu_c (> 0)
};

inline TailModel make_tail_model(const std::vector<double>& k, const FrequencyGrid& g) {
    TailModel t;
    t.nu_c = g.center();
    t.x_lo = g.start - t.nu_c;
    t.x_hi = g.back() - t.nu_c;
    t.c_lo = k.front() * t.x_lo * t.x_lo;
    t.c_hi = k.back() * t.x_hi * t.x_hi;
    return t;
}

/// Index shift from the exact Kramers-Kronig kernel by principal-value
/// quadrature. Accepts signed deviations; see kk_real_index for the scheme.
inline std::vector<double> kk_shift_pv(const std::vector<double>& k, const FrequencyGrid& g,
                                       bool tails) {
    const std::size_t n = g.count;
    const double h = g.spacing;
    constexpr double kPi = 3.141592653589793238462643383279;
    // Boundary samples always use the anchored tail model: truncating k hard
    // at a nonzero edge value makes the principal value there divergent.
    const TailModel tail = make_tail_model(k, g);
    const double inf = std::numeric_limits<double>::infinity();

    std::vector<double> out(n);
    std::vector<double> w(n, 1.0);
    w.front() = w.back() = 0.5;
    for (std::size_t j = 0; j < n; ++j) {
        const double nu_j = g.freq(j);
        const double kj = k[j];
        // Hilbert part over the grid: subtract kj, integrate by trapezoid;
        // the subtracted integrand at the singular sample equals k'(nu_j).
        double hilb = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
            if (m == j) continue;
            const double dmj = (static_cast<double>(m) - static_cast<double>(j)) * h;
            hilb += w[m] * (k[m] - kj) / dmj;
        }
        hilb += (j == 0 || j == n - 1 ? 0.5 : 1.0) * sample_derivative(k, j, h);
        hilb *= h;
        // Smooth 1/(nu'+nu) part over the grid.
        double plus = 0.0;
        for (std::size_t m = 0; m < n; ++m) plus += w[m] * k[m] / (g.freq(m) + nu_j);
        plus *= h;

        const double a = nu_j - tail.nu_c;    // singular-kernel offset
        const double a2 = -nu_j - tail.nu_c;  // smooth-kernel offset
        if (j == 0) {
            // Subtraction window [0, G_hi]: log term plus the lower tail in
            // subtracted form (finite because c_lo is anchored at k[0]).
            hilb += kj * std::log((g.back() - nu_j) / nu_j);
            hilb += anchored_subtracted_tail(kj, tail.x_lo, -tail.nu_c, tail.x_lo);
            if (tails) hilb += inv_square_kernel_integral(tail.c_hi, tail.x_hi, inf, a);
        } else if (j == n - 1) {
            // Subtraction window [G_lo, 2 nu_j - G_lo], symmetric: no log term.
            const double xs = (2.0 * nu_j - g.start) - tail.nu_c;
            hilb += anchored_subtracted_tail(kj, tail.x_hi, tail.x_hi, xs);
            hilb += inv_square_kernel_integral(tail.c_hi, xs, inf, a);
            if (tails) hilb += inv_square_kernel_integral(tail.c_lo, -tail.nu_c, tail.x_lo, a);
        } else {
            hilb += kj * std::log(static_cast<double>(n - 1 - j) / static_cast<double>(j));
            if (tails) {
                hilb += inv_square_kernel_integral(tail.c_lo, -tail.nu_c, tail.x_lo, a);
                hilb += inv_square_kernel_integral(tail.c_hi, tail.x_hi, inf, a);
            }
        }
        if (tails) {
            plus += inv_square_kernel_integral(tail.c_lo, -tail.nu_c, tail.x_lo, a2);
            plus += inv_square_kernel_integral(tail.c_hi, tail.x_hi, inf, a2);
        }
        out[j] = (hilb + plus) / kPi;
    }
    return out;
}

/// Index shift via the narrowband (Hilbert-transform) reduction, computed by
/// FFT over a tail-model-filled padded window. Accepts signed deviations.
inline std::vector<double> kk_shift_fft(const std::vector<double>& k, const FrequencyGrid& g,
                                        bool tails) {
    const std::size_t n = g.count;
    const double h = g.spacing;
    constexpr double kPi = 3.141592653589793238462643383279;
    const TailModel tail = make_tail_model(k, g);

    const std::size_t total = next_pow2(4 * n);
    const std::size_t pad_l = (total - n) / 2;
    const std::size_t pad_r = total - n - pad_l;
    std::vector<cplx> buf(total, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < n; ++i) buf[pad_l + i] = k[i];
    if (tails) {
        // Fill the pads with the anchored tail model, tapering the outer half.
        for (std::size_t i = 0; i < pad_l; ++i) {
            const double x = tail.x_lo - static_cast<double>(pad_l - i) * h;
            double v = tail.c_lo / (x * x);
            const double frac = static_cast<double>(i) / static_cast<double>(pad_l);
            if (frac < 0.5) v *= 0.5 * (1.0 - std::cos(2.0 * kPi * frac));
            buf[i] = v;
        }
        for (std::size_t i = 0; i < pad_r; ++i) {
            const double x = tail.x_hi + static_cast<double>(i + 1) * h;
            double v = tail.c_hi / (x * x);
            const double frac = static_cast<double>(pad_r - 1 - i) / static_cast<double>(pad_r);
            if (frac < 0.5) v *= 0.5 * (1.0 - std::cos(2.0 * kPi * frac));
            buf[pad_l + n + i] = v;
        }
    }
    fft_pow2(buf, false);
    buf[0] = 0.0;
    buf[total / 2] = 0.0;
    for (std::size_t m = 1; m < total / 2; ++m) buf[m] *= cplx(0.0, -1.0);
    for (std::size_t m = total / 2 + 1; m < total; ++m) buf[m] *= cplx(0.0, 1.0);
    fft_pow2(buf, true);

    // Moments of k about the grid center, for two small corrections below.
    const double nu_c = g.center();
    double m0 = 0.0, m1 = 0.0, m2 = 0.0, m3 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double wgt = (i == 0 || i == n - 1) ? 0.5 : 1.0;
        const double u = g.freq(i) - nu_c;
        m0 += wgt * k[i];
        m1 += wgt * k[i] * u;
        m2 += wgt * k[i] * u * u;
        m3 += wgt * k[i] * u * u * u;
    }
    m0 *= h;
    m1 *= h;
    m2 *= h;
    m3 *= h;
    double m0t = m0, m1t = m1;
    if (tails) {
        // int C/x^2 over [0, G_lo] and [G_hi, inf); first moments about nu_c.
        const double lo_mass = tail.c_lo * (1.0 / tail.x_lo - 1.0 / (-tail.nu_c)) * -1.0;
        const double hi_mass = tail.c_hi / tail.x_hi;
        m0t += lo_mass + hi_mass;
        m1t += tail.c_lo * std::log(std::abs(tail.x_lo) / tail.nu_c);
        // The hi-side first moment diverges logarithmically with the model
        // tail; it only feeds the tiny 1/(nu'+nu) series and is dropped.
    }

    // Periodization correction: the FFT computes the circular-convolution
    // (cotangent-kernel) Hilbert transform. Relative to the line kernel,
    //   1/(pi d) - (1/P) cot(pi d / P) = pi d / (3 P^2) + pi^3 d^3 / (45 P^4) + ...
    // which integrates against k to a cubic in nu via grid-center moments.
    const double period = static_cast<double>(total) * h;
    const double p2 = kPi / (3.0 * period * period);
    const double p4 = kPi * kPi * kPi / (45.0 * period * period * period * period);

    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double u = g.freq(j) - nu_c;
        const double wrap =
            p2 * (m0 * u - m1) +
            p4 * (m0 * u * u * u - 3.0 * u * u * m1 + 3.0 * u * m2 - m3);
        // Exact-kernel 1/(nu'+nu) part as a short series about the grid center.
        const double denom = nu_c + g.freq(j);
        const double plus = (m0t / denom - m1t / (denom * denom) + m2 / (denom * denom * denom)) / kPi;
        out[j] = -buf[pad_l + j].real() - wrap + plus;
    }
    return out;
}

/// Signed-deviation Kramers-Kronig shift used by the response pipeline (the
/// comb deviation from the broad line is not a physical extinction and may
/// be negative between teeth).
inline std::vector<double> kk_index_shift(const std::vector<double>& values,
                                          const FrequencyGrid& grid, KkMethod method,
                                          bool tails = true) {
    return method == KkMethod::PvQuadrature ? kk_shift_pv(values, grid, tails)
                                            : kk_shift_fft(values, grid, tails);
}

}  // namespace detail

/// Real refractive index from the Kramers-Kronig relation
///   n(nu) = n_host + (2/pi) PV int_0^inf nu' k(nu') / (nu'^2 - nu^2) dnu'.
///
/// PvQuadrature evaluates the exact kernel: the singular 1/(nu'-nu) part by
/// singularity-subtracted trapezoid quadrature (the subtracted sample takes
/// the value k'(nu) from a high-order stencil) plus a closed-form log term,
/// and the smooth 1/(nu'+nu) part by plain trapezoid. Beyond the grid edges
/// k is continued as C/(nu-center)^2 anchored at the edge samples and
/// integrated in closed form down to nu' = 0 and up to infinity.
///
/// FftHilbert uses the narrowband reduction of the same relation to a Hilbert
/// transform over a tail-model-filled padded window, with moment-based
/// corrections for the periodization and the 1/(nu'+nu) kernel part.
inline IndexSpectrum kk_real_index(const ExtinctionSpectrum& k_spec, double n_host,
                                   const KkOptions& opts = {}) {
    const FrequencyGrid& g = k_spec.grid;
    validate(g);
    const std::vector<double>& k = k_spec.values;
    if (k.size() != g.count)
        throw InvalidArgumentError("extinction length does not match grid count");
    if (!(g.start > 0.0))
        throw InvalidArgumentError("Kramers-Kronig transform needs positive frequencies");
    for (double v : k)
        if (!(v >= 0.0)) throw InvalidArgumentError("extinction must be >= 0 (passive medium)");

    double peak = 0.0;
    for (double v : k) peak = std::max(peak, v);

    IndexSpectrum out;
    out.grid = g;
    if (peak == 0.0) {  // zero absorption: host index everywhere
        out.values.assign(g.count, n_host);
        return out;
    }

    const double edge = std::max(k.front(), k.back());
    if (edge > opts.tail_threshold * peak && !opts.tail_extension)
        throw TailTruncationError(
            "extinction at the grid edges is " + std::to_string(edge / peak) +
                " of its peak; widen the grid or enable the tail extension",
            edge / peak);

    const double feat = detail::narrowest_feature_samples(k);
    if (feat > 0.0 && feat < opts.min_samples_per_feature)
        throw ResolutionError("grid resolves the narrowest feature of k with only " +
                                  std::to_string(feat) + " samples",
                              g.spacing * feat / opts.min_samples_per_feature);

    out.values = detail::kk_index_shift(k, g, opts.method, opts.tail_extension);
    for (double& v : out.values) v += n_host;
    return out;
}

/// Round-trip phase Phi(nu) = 4 pi n(nu) nu L / c, unwrapped.
inline std::vector<double> round_trip_phase(const IndexSpectrum& n_spec, double length_m) {
    validate(n_spec.grid);
    if (n_spec.values.size() != n_spec.grid.count)
        throw InvalidArgumentError("index length does not match grid count");
    if (!(length_m >= 0.0)) throw InvalidArgumentError("length must be >= 0");
    std::vector<double> phi(n_spec.grid.count);
    constexpr double kFourPi = 12.566370614359172;
    for (std::size_t i = 0; i < phi.size(); ++i)
        phi[i] = kFourPi * n_spec.values[i] * n_spec.grid.freq(i) * length_m / kSpeedOfLight;
    return phi;
}

/// Closed-form index shift of a single Lorentzian absorption line under the
/// exact Kramers-Kronig kernel with the integral taken over [0, inf).
/// Serves as the analytic reference for the numerical transform.
inline double lorentzian_index_shift(const InhomogeneousProfile& p, double nu) {
    const double g = 0.5 * p.gamma_in;
    constexpr double kPi = 3.141592653589793238462643383279;
    const double atan_edge = kPi / 2.0 + std::atan(p.nu0 / g);
    const double half_log_ref = 0.5 * std::log(p.nu0 * p.nu0 + g * g);
    auto piece = [&](double q) {
        const double d = q - p.nu0;
        return -((d / g) * atan_edge + std::log(std::abs(q)) - half_log_ref) /
               (d * d + g * g);
    };
    const double K = kSpeedOfLight * p.peak_alpha * g * g / (2.0 * kPi * kPi);
    return K / (2.0 * nu) * (piece(nu) - piece(-nu));
}

}  // namespace afc
