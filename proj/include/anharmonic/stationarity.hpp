#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "anharmonic/energy.hpp"
#include "anharmonic/spec.hpp"

namespace anharm {

/// Why a stationary point was not retained as a physical oscillation state.
enum class RejectionReason {
    none,
    maximum_or_saddle,          ///< second derivative of dE not positive
    convergence_violation,      ///< series ratio test failed against eta
    imaginary_frequency,        ///< sum_{i>=3} i*a_i >= 1, frequency factor not real
    nonpositive_normalization,  ///< q <= 0
};

inline std::string_view to_string(RejectionReason r) {
    switch (r) {
        case RejectionReason::none: return "";
        case RejectionReason::maximum_or_saddle: return "maximum_or_saddle";
        case RejectionReason::convergence_violation: return "convergence_violation";
        case RejectionReason::imaginary_frequency: return "imaginary_frequency";
        case RejectionReason::nonpositive_normalization: return "nonpositive_normalization";
    }
    return "";
}

/// The stationarity condition dp = m * sum_i i*a'_i * dp^-(i+1), cleared of
/// negative powers: a monic polynomial of degree N+2 whose positive real
/// roots are the candidate dp_min values.
struct StationarityPolynomial {
    std::vector<double> coefficients; ///< descending powers, leading entry 1
    std::uint64_t spec_hash = 0;

    int degree() const { return static_cast<int>(coefficients.size()) - 1; }

    double value_at(double x) const {
        double acc = 0.0;
        for (double c : coefficients) acc = acc * x + c;
        return acc;
    }

    double derivative_at(double x) const {
        const int d = degree();
        double acc = 0.0;
        for (int k = 0; k < d; ++k) acc = acc * x + coefficients[k] * static_cast<double>(d - k);
        return acc;
    }
};

/// dp^{N+2} - m * sum_{i=2..N} i*a'_i * dp^{N-i}, merged coefficients.
inline StationarityPolynomial build_polynomial(const OscillatorSpec& spec) {
    const int n = spec.order;
    StationarityPolynomial poly;
    poly.coefficients.assign(static_cast<std::size_t>(n) + 3, 0.0);
    poly.coefficients[0] = 1.0;
    for (const auto& [i, a] : spec.effective_coefficients()) {
        // descending storage: coefficient of dp^{N-i} sits at index (N+2)-(N-i) = i+2
        poly.coefficients[static_cast<std::size_t>(i) + 2] = -spec.units.mass * i * a;
    }
    poly.spec_hash = spec_hash(spec);
    return poly;
}

namespace detail {

inline Eigen::VectorXcd companion_eigenvalues(const std::vector<double>& monic_desc) {
    const int d = static_cast<int>(monic_desc.size()) - 1;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(d, d);
    for (int r = 1; r < d; ++r) companion(r, r - 1) = 1.0;
    for (int r = 0; r < d; ++r) companion(r, d - 1) = -monic_desc[static_cast<std::size_t>(d - r)];
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("companion-matrix eigenvalue iteration failed to converge");
    return solver.eigenvalues();
}

} // namespace detail

/// All strictly positive real roots, ascending, Newton-polished and
/// de-duplicated. Complex roots and roots at the origin (from trailing zero
/// coefficients of a sparse series) are discarded. Throws when the nonzero
/// coefficient magnitudes of the monic polynomial spread over more than 12
/// orders of magnitude, since double-precision roots would be meaningless;
/// rescale the unit system so that m*hbar*omega_har is O(1) instead.
inline std::vector<double> find_positive_real_roots(const StationarityPolynomial& poly) {
    if (poly.degree() < 2) throw std::invalid_argument("polynomial degree must be >= 2");
    if (poly.coefficients.front() == 0.0)
        throw std::invalid_argument("leading coefficient must be nonzero");

    std::vector<double> coeffs = poly.coefficients;
    if (coeffs.front() != 1.0) {
        const double lead = coeffs.front();
        for (double& c : coeffs) c /= lead;
    }

    // With the leading coefficient pinned to 1, conditioning is governed by
    // how far the largest coefficient strays above it; small trailing
    // coefficients (a nearly harmonic series) are harmless.
    double cmax = 0.0;
    for (double c : coeffs) cmax = std::max(cmax, std::abs(c));
    if (cmax > 1e12)
        throw std::runtime_error(
            "stationarity polynomial is ill-conditioned (coefficient magnitude spread " +
            std::to_string(cmax) +
            " after monic normalization); rescale the problem, e.g. to reduced units with "
            "m = hbar = omega_har = 1");

    // Deflate exact roots at the origin.
    while (coeffs.size() > 1 && coeffs.back() == 0.0) coeffs.pop_back();
    if (coeffs.size() < 2) return {};

    const int deg = static_cast<int>(coeffs.size()) - 1;
    const Eigen::VectorXcd eigen_roots = detail::companion_eigenvalues(coeffs);

    StationarityPolynomial deflated{coeffs, poly.spec_hash};
    std::vector<double> roots;
    for (int k = 0; k < eigen_roots.size(); ++k) {
        const std::complex<double> z = eigen_roots[k];
        if (z.real() <= 0.0) continue;
        if (std::abs(z.imag()) > 1e-8 * std::max(1.0, std::abs(z.real()))) continue;

        double x = z.real();
        for (int it = 0; it < 60; ++it) {
            const double p = deflated.value_at(x);
            const double dp = deflated.derivative_at(x);
            if (dp == 0.0) break;
            const double step = p / dp;
            const double next = x - step;
            if (!(next > 0.0) || !std::isfinite(next)) break;
            x = next;
            if (std::abs(step) <= 1e-16 * std::abs(x)) break;
        }
        if (!(x > 0.0)) continue;
        const double scale = std::max(1.0, std::pow(x, static_cast<double>(deg)));
        if (std::abs(deflated.value_at(x)) > 1e-12 * scale) continue; // spurious candidate
        roots.push_back(x);
    }

    std::sort(roots.begin(), roots.end());
    std::vector<double> unique;
    for (double r : roots) {
        if (!unique.empty() && r - unique.back() <= 1e-9 * std::max(std::abs(r), std::abs(unique.back())))
            continue;
        unique.push_back(r);
    }
    return unique;
}

/// One admissible (or audited-and-rejected) stationary point of the
/// range-energy function.
struct Branch {
    double dp_min = 0.0;
    int index_j = 0;                        ///< 1-based label, ascending dp_min
    double second_derivative = 0.0;         ///< d^2 dE / d dp^2 at dp_min
    std::vector<double> convergence_ratios; ///< successive-term ratio tests
    bool accepted = false;
    RejectionReason rejection_reason = RejectionReason::none;
};

/// d^2 dE / d dp^2 = 1/m + sum_i i*(i+1)*a'_i * dp^-(i+2).
inline double second_derivative_at(const OscillatorSpec& spec, double dp) {
    double acc = 1.0 / spec.units.mass;
    for (const auto& [i, a] : spec.effective_coefficients())
        acc += static_cast<double>(i) * (i + 1) * a / std::pow(dp, static_cast<double>(i) + 2.0);
    return acc;
}

/// Successive-term ratio tests of the restoring series at range size dp. For
/// a dense series this is |a'_{i+1}| / (|a'_i| * dp) for i = 2..N-1. Between
/// consecutive nonzero coefficients separated by a gap the per-step geometric
/// ratio (|a'_k| / |a'_j|)^(1/(k-j)) / dp is used, which reduces to the dense
/// form when k = j+1 and keeps sparse series (for instance a pure quartic
/// correction) meaningfully testable.
inline std::vector<double> convergence_ratios_at(const OscillatorSpec& spec, double dp) {
    std::vector<std::pair<int, double>> present;
    for (const auto& [i, a] : spec.effective_coefficients())
        if (a != 0.0) present.emplace_back(i, a);
    std::vector<double> out;
    for (std::size_t k = 1; k < present.size(); ++k) {
        const auto& [ilo, alo] = present[k - 1];
        const auto& [ihi, ahi] = present[k];
        out.push_back(std::pow(std::abs(ahi) / std::abs(alo), 1.0 / (ihi - ilo)) / dp);
    }
    return out;
}

/// Classifies each candidate root: a branch is accepted iff it is a genuine
/// minimum (second derivative > 0) and every convergence ratio is <= eta.
/// Rejected branches are kept with their reason so the filter can be audited.
inline std::vector<Branch> classify_and_filter(const OscillatorSpec& spec,
                                               const std::vector<double>& roots) {
    std::vector<Branch> out;
    out.reserve(roots.size());
    int label = 1;
    for (double dp : roots) {
        Branch b;
        b.dp_min = dp;
        b.index_j = label++;
        b.second_derivative = second_derivative_at(spec, dp);
        b.convergence_ratios = convergence_ratios_at(spec, dp);
        const double worst = b.convergence_ratios.empty()
                                 ? 0.0
                                 : *std::max_element(b.convergence_ratios.begin(),
                                                     b.convergence_ratios.end());
        if (!(b.second_derivative > 0.0)) {
            b.accepted = false;
            b.rejection_reason = RejectionReason::maximum_or_saddle;
        } else if (worst > spec.eta) {
            b.accepted = false;
            b.rejection_reason = RejectionReason::convergence_violation;
        } else {
            b.accepted = true;
        }
        out.push_back(std::move(b));
    }
    return out;
}

} // namespace anharm
