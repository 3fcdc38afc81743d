#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "anharmonic/spectrum.hpp"

namespace anharm {

namespace detail {

// Effective coefficient of index i shifted by delta (through the
// perturbation layer, so the intrinsic description is untouched).
inline OscillatorSpec shift_coefficient(const OscillatorSpec& spec, int i, double delta) {
    OscillatorSpec out = spec;
    out.perturbation_coeffs[i] += delta;
    return out;
}

// Re-solves the stationarity condition and returns the root nearest to
// `dp_ref` in log space, or nothing if no positive root lands within the
// given window (the branch ceased to exist).
inline std::optional<double> nearest_root(const OscillatorSpec& spec, double dp_ref,
                                          double log_window = 0.25) {
    const OscillatorSpec reduced = spec.nondimensionalized();
    const std::vector<double> roots = find_positive_real_roots(build_polynomial(reduced));
    const double pscale = spec.units.momentum_scale();
    std::optional<double> best;
    double best_dist = log_window;
    for (double r : roots) {
        const double dist = std::abs(std::log((r * pscale) / dp_ref));
        if (dist <= best_dist) {
            best_dist = dist;
            best = r * pscale;
        }
    }
    return best;
}

} // namespace detail

/// How one stationary range size responds to a change of one series
/// coefficient, three ways at once: implicit differentiation of the stationarity
/// polynomial, a central finite difference of the re-solved root, and the
/// residual of the first-order differential identity
///     delta a'_i = a'_i * ((i+2) * delta dp/dp + delta a_i/a_i),
/// whose residual must shrink quadratically with the increment.
struct SensitivityReport {
    int branch_j = 0;
    int coeff_index = 0;
    double d_dpmin_d_aprime = 0.0; ///< analytic derivative
    double fd_check = 0.0;         ///< central finite difference
    double identity_residual = 0.0;
    double fd_step = 0.0;          ///< absolute increment used for fd_check
    double identity_step = 0.0;    ///< absolute increment used for the identity
};

struct SensitivityOptions {
    double fd_relative_step = 1e-6;
    double identity_relative_step = 1e-3;
};

inline SensitivityReport sensitivity(const OscillatorSpec& spec, const Branch& branch, int i,
                                     SensitivityOptions opts = {}) {
    if (!branch.accepted) throw std::invalid_argument("sensitivity requires an accepted branch");
    if (i < 2 || i > spec.order)
        throw std::invalid_argument("coefficient index outside 2..order");

    const double dp = branch.dp_min;
    const double m = spec.units.mass;
    const int N = spec.order;

    // P(dp) = dp^{N+2} - m sum_k k a'_k dp^{N-k};  d dp_min / d a'_i = -dP/da'_i / dP/ddp.
    double dP_ddp = (N + 2) * std::pow(dp, N + 1.0);
    double scale = std::abs(dP_ddp);
    for (const auto& [k, ak] : spec.effective_coefficients()) {
        const double term = m * k * (N - k) * ak * std::pow(dp, N - k - 1.0);
        dP_ddp -= term;
        scale += std::abs(term);
    }
    if (std::abs(dP_ddp) <= 1e-6 * scale)
        throw std::runtime_error(
            "degenerate stationary point (fold): sensitivity undefined where dP/ddp vanishes");

    SensitivityReport report;
    report.branch_j = branch.index_j;
    report.coeff_index = i;
    report.d_dpmin_d_aprime = m * i * std::pow(dp, N - i + 0.0) / dP_ddp;

    const double ap = spec.effective_coefficient(i);
    // The difference step must move the root measurably, so it is sized
    // against the coefficient scale at which term i rivals the quadratic
    // term; a step relative to a tiny a'_i itself would drown in the
    // round-off of the re-solved root.
    const double natural_scale =
        std::abs(spec.effective_coefficient(2)) * std::pow(dp, i - 2.0);
    const double h = opts.fd_relative_step * std::max(std::abs(ap), natural_scale);
    report.fd_step = h;
    const auto plus = detail::nearest_root(detail::shift_coefficient(spec, i, +h), dp);
    const auto minus = detail::nearest_root(detail::shift_coefficient(spec, i, -h), dp);
    if (!plus || !minus)
        throw std::runtime_error("finite-difference re-solve lost the branch; too close to a fold");
    report.fd_check = (*plus - *minus) / (2.0 * h);

    if (ap == 0.0) {
        // the identity divides by a_i; undefined for an absent coefficient
        report.identity_step = 0.0;
        report.identity_residual = std::numeric_limits<double>::quiet_NaN();
        return report;
    }
    // the identity describes relative increments of a'_i itself
    const double delta = opts.identity_relative_step * std::abs(ap);
    report.identity_step = delta;
    const auto shifted = detail::nearest_root(detail::shift_coefficient(spec, i, delta), dp);
    if (!shifted)
        throw std::runtime_error("identity re-solve lost the branch; too close to a fold");
    const double a_i = m * ap / std::pow(dp, i + 2.0);
    const double a_i_new = m * (ap + delta) / std::pow(*shifted, i + 2.0);
    report.identity_residual =
        delta - ap * ((i + 2) * (*shifted - dp) / dp + (a_i_new - a_i) / a_i);
    return report;
}

} // namespace anharm
