#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "afc/errors.hpp"

namespace afc {

struct LsqOptions {
    double grad_tol = 1e-10;       ///< stop when ||J^T r||_inf drops below this
    double step_tol = 1e-10;       ///< stop when the relative step drops below this
    int max_iterations = 500;
    double fd_rel_step = 1e-6;     ///< forward-difference Jacobian step (scaled space)
    double lambda_init = 1e-3;
    double lambda_up = 10.0;
    double lambda_down = 0.1;
    double lambda_max = 1e14;
    /// Stall detection: consecutive accepted steps with a relative cost
    /// decrease below cost_tol count as stationary.
    double cost_tol = 1e-13;
    int stall_limit = 5;
};

struct FitResult {
    std::vector<std::string> names;
    std::vector<double> params;
    std::vector<double> uncertainties;  ///< standard errors from the Jacobian
    double residual_norm = 0.0;         ///< RMS of residuals at the solution
    int iterations = 0;
    bool converged = false;
    std::map<std::string, double> diagnostics;
};

namespace detail {

/// Solve the symmetric positive-definite system A x = b by Cholesky with a
/// diagonal boost fallback for near-singular (non-identifiable) systems.
inline std::vector<double> solve_spd(std::vector<double> A, std::vector<double> b,
                                     std::size_t n, bool* degenerate = nullptr) {
    for (int attempt = 0; attempt < 12; ++attempt) {
        std::vector<double> L = A;
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                double sum = L[i * n + j];
                for (std::size_t k = 0; k < j; ++k) sum -= L[i * n + k] * L[j * n + k];
                if (i == j) {
                    if (!(sum > 0.0)) {
                        ok = false;
                        break;
                    }
                    L[i * n + i] = std::sqrt(sum);
                } else {
                    L[i * n + j] = sum / L[j * n + j];
                }
            }
        }
        if (ok) {
            std::vector<double> x(b);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t k = 0; k < i; ++k) x[i] -= L[i * n + k] * x[k];
                x[i] /= L[i * n + i];
            }
            for (std::size_t ii = n; ii-- > 0;) {
                for (std::size_t k = ii + 1; k < n; ++k) x[ii] -= L[k * n + ii] * x[k];
                x[ii] /= L[ii * n + ii];
            }
            return x;
        }
        if (degenerate) *degenerate = true;
        double scale = 0.0;
        for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(A[i * n + i]));
        const double boost = std::max(scale, 1.0) * std::pow(10.0, attempt - 12);
        for (std::size_t i = 0; i < n; ++i) A[i * n + i] += boost;
    }
    throw NumericalFailureError("normal equations could not be solved");
}

}  // namespace detail

/// Damped Gauss-Newton (Levenberg-Marquardt) minimization of
/// sum_i residual_i(p)^2 with box bounds enforced by projection.
///
/// `scales` sets the characteristic magnitude per parameter; the solver works
/// in scaled space so tolerances behave uniformly across mixed-unit problems.
/// Empty scales default to max(|init|, 1e-12) per parameter.
inline FitResult least_squares(
    const std::function<std::vector<double>(const std::vector<double>&)>& residual_fn,
    std::vector<double> init, std::vector<double> lo, std::vector<double> hi,
    std::vector<double> scales = {}, const LsqOptions& opts = {}) {
    const std::size_t np = init.size();
    if (np == 0) throw InvalidArgumentError("no parameters to fit");
    if (lo.size() != np || hi.size() != np)
        throw InvalidArgumentError("bounds must match the parameter count");
    for (std::size_t j = 0; j < np; ++j) {
        if (!(lo[j] <= hi[j])) throw InvalidArgumentError("lower bound exceeds upper bound");
        if (init[j] < lo[j] || init[j] > hi[j])
            throw InvalidArgumentError("initial guess outside bounds for parameter " +
                                       std::to_string(j));
    }
    if (scales.empty()) {
        scales.resize(np);
        for (std::size_t j = 0; j < np; ++j) {
            double b = std::max(std::abs(lo[j]), std::abs(hi[j]));
            if (!std::isfinite(b) || b > 1e100) b = 0.0;
            scales[j] = std::max(std::abs(init[j]), 0.1 * b);
            if (scales[j] == 0.0) scales[j] = 1.0;
        }
    }
    if (scales.size() != np)
        throw InvalidArgumentError("scales must match the parameter count");

    auto unscale = [&](const std::vector<double>& x) {
        std::vector<double> p(np);
        for (std::size_t j = 0; j < np; ++j) p[j] = x[j] * scales[j];
        return p;
    };
    auto eval = [&](const std::vector<double>& x, bool* finite) {
        std::vector<double> r = residual_fn(unscale(x));
        *finite = true;
        for (double v : r)
            if (!std::isfinite(v)) {
                *finite = false;
                break;
            }
        return r;
    };

    std::vector<double> x(np), xlo(np), xhi(np);
    for (std::size_t j = 0; j < np; ++j) {
        x[j] = init[j] / scales[j];
        xlo[j] = lo[j] / scales[j];
        xhi[j] = hi[j] / scales[j];
    }

    bool finite = false;
    std::vector<double> r = eval(x, &finite);
    if (!finite) throw NumericalFailureError("residuals not finite at the initial guess");
    const std::size_t m = r.size();
    if (m == 0) throw InvalidArgumentError("residual function returned no residuals");

    auto cost_of = [](const std::vector<double>& res) {
        double c = 0.0;
        for (double v : res) c += v * v;
        return c;
    };
    double cost = cost_of(r);

    FitResult result;
    result.params = unscale(x);
    double lambda = opts.lambda_init;
    bool converged = false;
    bool degenerate = false;
    int iter = 0;
    int stalled = 0;
    std::vector<double> jac(m * np);

    auto compute_jacobian = [&]() {
        for (std::size_t j = 0; j < np; ++j) {
            double h = opts.fd_rel_step * std::max(std::abs(x[j]), 1.0);
            if (xhi[j] == xlo[j]) {
                for (std::size_t i = 0; i < m; ++i) jac[i * np + j] = 0.0;
                continue;
            }
            if (x[j] + h > xhi[j]) h = -h;  // step into the box
            std::vector<double> xs = x;
            xs[j] += h;
            bool ok = false;
            std::vector<double> rs = eval(xs, &ok);
            if (!ok)
                throw NumericalFailureError(
                    "residuals not finite during Jacobian evaluation at parameter " +
                    std::to_string(j));
            for (std::size_t i = 0; i < m; ++i) jac[i * np + j] = (rs[i] - r[i]) / h;
        }
    };

    for (iter = 0; iter < opts.max_iterations; ++iter) {
        compute_jacobian();

        // Normal equations pieces: g = J^T r, H = J^T J.
        std::vector<double> g(np, 0.0), H(np * np, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < np; ++j) {
                const double jij = jac[i * np + j];
                g[j] += jij * r[i];
                for (std::size_t k = 0; k <= j; ++k) H[j * np + k] += jij * jac[i * np + k];
            }
        }
        for (std::size_t j = 0; j < np; ++j)
            for (std::size_t k = j + 1; k < np; ++k) H[j * np + k] = H[k * np + j];

        double gmax = 0.0;
        for (double v : g) gmax = std::max(gmax, std::abs(v));
        if (gmax < opts.grad_tol) {
            converged = true;
            break;
        }

        bool stepped = false;
        while (lambda <= opts.lambda_max) {
            std::vector<double> A = H;
            for (std::size_t j = 0; j < np; ++j) {
                const double d = std::max(H[j * np + j], 1e-30);
                A[j * np + j] = H[j * np + j] + lambda * d;
            }
            std::vector<double> rhs(np);
            for (std::size_t j = 0; j < np; ++j) rhs[j] = -g[j];
            std::vector<double> step = detail::solve_spd(A, rhs, np, &degenerate);

            std::vector<double> xt(np);
            double step_norm = 0.0, x_norm = 0.0;
            for (std::size_t j = 0; j < np; ++j) {
                xt[j] = std::clamp(x[j] + step[j], xlo[j], xhi[j]);
                step_norm += (xt[j] - x[j]) * (xt[j] - x[j]);
                x_norm += x[j] * x[j];
            }
            step_norm = std::sqrt(step_norm);
            x_norm = std::sqrt(x_norm);
            if (step_norm < opts.step_tol * (x_norm + opts.step_tol)) {
                converged = true;
                break;
            }

            bool ok = false;
            std::vector<double> rt = eval(xt, &ok);
            if (ok && cost_of(rt) < cost) {
                const double drop = cost - cost_of(rt);
                stalled = drop < opts.cost_tol * cost ? stalled + 1 : 0;
                x = xt;
                r = std::move(rt);
                cost = cost_of(r);
                lambda = std::max(lambda * opts.lambda_down, 1e-12);
                stepped = true;
                break;
            }
            lambda *= opts.lambda_up;
        }
        if (stalled >= opts.stall_limit) converged = true;  // stationary to noise
        if (converged || !stepped) break;
    }

    result.names.clear();
    result.params = unscale(x);
    result.iterations = iter;
    result.converged = converged;
    result.residual_norm = std::sqrt(cost / static_cast<double>(m));
    if (degenerate) result.diagnostics["degenerate_normal_equations"] = 1.0;

    // Standard errors from the Jacobian at the solution.
    compute_jacobian();
    std::vector<double> H(np * np, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < np; ++j)
            for (std::size_t k = 0; k <= j; ++k)
                H[j * np + k] += jac[i * np + j] * jac[i * np + k];
    for (std::size_t j = 0; j < np; ++j)
        for (std::size_t k = j + 1; k < np; ++k) H[j * np + k] = H[k * np + j];
    const double dof = static_cast<double>(m > np ? m - np : 1);
    const double sigma2 = cost / dof;
    result.uncertainties.assign(np, 0.0);
    try {
        // Columns of H^{-1} via repeated solves.
        for (std::size_t j = 0; j < np; ++j) {
            std::vector<double> e(np, 0.0);
            e[j] = 1.0;
            bool deg = false;
            std::vector<double> col = detail::solve_spd(H, e, np, &deg);
            result.uncertainties[j] = std::sqrt(std::max(0.0, sigma2 * col[j])) * scales[j];
            if (deg) result.diagnostics["degenerate_covariance"] = 1.0;
        }
    } catch (const NumericalFailureError&) {
        result.diagnostics["covariance_failed"] = 1.0;
    }
    return result;
}

}  // namespace afc
