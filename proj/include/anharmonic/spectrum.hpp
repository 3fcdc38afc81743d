#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "anharmonic/oracle.hpp"
#include "anharmonic/stationarity.hpp"

namespace anharm {

/// Raised when a computed quantity contradicts an identity it must satisfy,
/// which indicates a bad root rather than bad input.
struct ConsistencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when no branch survives classification and filtering.
struct NoAdmissibleState : std::runtime_error {
    NoAdmissibleState() : std::runtime_error("no admissible oscillation state") {}
};

/// Derived dimensionless description of one retained branch.
struct BranchParameters {
    std::map<int, double> a;         ///< a_i = m a'_i / dp_min^{i+2}, i = 2..N
    double q = 0.0;                  ///< normalization factor, dE_min = q dp_min^2 / m
    double w = 0.0;                  ///< momentum-range factor, dp_min = w dp_har
    double omega_an = 0.0;           ///< anharmonic frequency w^2 * omega_har
    std::map<int, double> a_ddprime; ///< a''_i = a_i * w^{i+2}
    double k_an = 0.0;               ///< force constant m * omega_an^2

    double w2() const { return w * w; }
};

/// Outcome of deriving branch parameters: either the parameters or the
/// reason the branch had to be rejected at this stage.
struct BranchParametersOutcome {
    std::optional<BranchParameters> params;
    RejectionReason rejection = RejectionReason::none;
};

/// Dimensionless coefficients a_i = m a'_i / dp_min^{i+2} for i = 2..order.
/// The stationarity condition makes sum_i i*a_i = 1 an exact identity at a
/// genuine root, so a violation beyond 1e-10 is reported as a bad root.
inline std::map<int, double> dimensionless_coefficients(const OscillatorSpec& spec,
                                                        const Branch& branch) {
    std::map<int, double> a;
    const auto merged = spec.effective_coefficients();
    double sum_rule = 0.0;
    for (int i = 2; i <= spec.order; ++i) {
        const auto it = merged.find(i);
        const double ap = it == merged.end() ? 0.0 : it->second;
        const double ai =
            spec.units.mass * ap / std::pow(branch.dp_min, static_cast<double>(i) + 2.0);
        a[i] = ai;
        sum_rule += i * ai;
    }
    if (std::abs(sum_rule - 1.0) > 1e-10)
        throw ConsistencyError("sum rule sum_i i*a_i = 1 violated (" + std::to_string(sum_rule) +
                               "); the root does not satisfy the stationarity condition");
    return a;
}

/// Branch parameters from a dimensionless coefficient map satisfying the sum
/// rule: q = 1 + sum_{i>=3}(1 - i/2) a_i, w^2 = (1 - sum_{i>=3} i*a_i)^{-1/2},
/// omega_an = w^2 omega_har, a''_i = a_i w^{i+2}. Branches whose frequency
/// factor is not real or whose normalization is not positive are rejected
/// with the corresponding reason.
inline BranchParametersOutcome branch_parameters(const UnitSystem& units,
                                                 const std::map<int, double>& a) {
    double sum_rule = 0.0;
    double tail = 0.0;  // sum_{i>=3} i*a_i
    double q_corr = 0.0;
    for (const auto& [i, ai] : a) {
        sum_rule += i * ai;
        if (i >= 3) {
            tail += i * ai;
            q_corr += (1.0 - 0.5 * i) * ai;
        }
    }
    if (std::abs(sum_rule - 1.0) > 1e-10)
        throw std::invalid_argument("coefficient map violates the sum rule sum_i i*a_i = 1");

    if (tail >= 1.0) return {std::nullopt, RejectionReason::imaginary_frequency};
    const double q = 1.0 + q_corr;
    if (!(q > 0.0)) return {std::nullopt, RejectionReason::nonpositive_normalization};

    BranchParameters p;
    p.a = a;
    p.q = q;
    const double w2 = 1.0 / std::sqrt(1.0 - tail);
    p.w = std::sqrt(w2);
    p.omega_an = w2 * units.omega_har;
    p.k_an = units.mass * p.omega_an * p.omega_an;
    for (const auto& [i, ai] : a)
        p.a_ddprime[i] = ai * std::pow(p.w, static_cast<double>(i) + 2.0);
    return {p, RejectionReason::none};
}

/// Full solver output for one spec: every positive stationary point with its
/// classification, the dimensionless coefficients of each, and parameters for
/// those that could be derived. `retained` indexes the branches that are
/// accepted end to end.
struct SolveResult {
    OscillatorSpec spec;
    StationarityPolynomial polynomial;              ///< in the spec's own units
    std::vector<Branch> branches;                   ///< ascending dp_min, labelled 1..
    std::vector<std::map<int, double>> dimensionless; ///< a_i per branch (also for rejected)
    std::vector<std::optional<BranchParameters>> params; ///< parallel to branches
    std::vector<std::size_t> retained;
};

/// Root finding runs on the nondimensionalized problem so the polynomial
/// coefficients stay O(1) whatever unit system the spec uses; results are
/// scaled back afterwards.
inline SolveResult solve_oscillator(const OscillatorSpec& spec) {
    spec.validate();
    SolveResult result;
    result.spec = spec;
    result.polynomial = build_polynomial(spec);

    const OscillatorSpec reduced = spec.nondimensionalized();
    std::vector<double> roots = find_positive_real_roots(build_polynomial(reduced));
    const double pscale = spec.units.momentum_scale();
    for (double& r : roots) r *= pscale;

    result.branches = classify_and_filter(spec, roots);
    for (auto& branch : result.branches) {
        std::map<int, double> a;
        if (branch.accepted) {
            a = dimensionless_coefficients(spec, branch);
            BranchParametersOutcome outcome = branch_parameters(spec.units, a);
            if (outcome.params) {
                result.params.push_back(std::move(outcome.params));
            } else {
                branch.accepted = false;
                branch.rejection_reason = outcome.rejection;
                result.params.emplace_back(std::nullopt);
            }
        } else {
            // raw values for audit output; identities are not enforced here
            for (int i = 2; i <= spec.order; ++i)
                a[i] = spec.units.mass * spec.effective_coefficient(i) /
                       std::pow(branch.dp_min, static_cast<double>(i) + 2.0);
            // parameters of a rejected stationary point are still reported
            // when derivable, so the filter can be audited
            try {
                result.params.push_back(branch_parameters(spec.units, a).params);
            } catch (const std::invalid_argument&) {
                result.params.emplace_back(std::nullopt);
            }
        }
        result.dimensionless.push_back(std::move(a));
    }
    for (std::size_t k = 0; k < result.branches.size(); ++k)
        if (result.branches[k].accepted) result.retained.push_back(k);
    return result;
}

/// Energy ladders and quantized ranges of every retained branch.
///
/// All branches share the zero-point term, which is governed by the branch
/// with the smallest dp_min (index `zero_point_branch`):
///     E_0 = w0^2 / (2 q0) * hbar * omega_har.
/// Per branch j and level n:
///     E(j, n)    = n hbar omega_an(j) + E_0
///     dp_an(j,n) = w(j) sqrt(m n hbar omega_har)          (n >= 1)
///     dx_min(j,n)= sqrt(n hbar / (omega_an(j) m))          (n >= 1)
/// The n = 0 slots hold the zero-point ranges dp_0 = w0 sqrt(m hbar omega_har)
/// and dx_0 = sqrt(hbar / (omega_an0 m)), which are branch-independent.
/// dt(n) = n hbar / (n hbar omega_har) = 1/omega_har for n >= 1.
struct SpectrumTable {
    std::vector<Branch> branches;                 ///< retained, ascending dp_min
    std::vector<BranchParameters> params;         ///< parallel to branches
    std::size_t zero_point_branch = 0;
    double zero_point_energy = 0.0;
    int n_max = 0;
    std::vector<std::vector<double>> levels;      ///< [branch][n], n = 0..n_max
    std::vector<std::vector<double>> dp_an;       ///< [branch][n]; [0] = dp_0
    std::vector<std::vector<double>> dx_min;      ///< [branch][n]; [0] = dx_0
    double dp_0 = 0.0;
    double dx_0 = 0.0;
    std::vector<double> dt;                       ///< [n], n >= 1; [0] is NaN
};

inline SpectrumTable energy_levels(const OscillatorSpec& spec, const std::vector<Branch>& branches,
                                   const std::vector<std::optional<BranchParameters>>& params) {
    SpectrumTable table;
    for (std::size_t k = 0; k < branches.size(); ++k) {
        if (!branches[k].accepted || !params[k]) continue;
        table.branches.push_back(branches[k]);
        table.params.push_back(*params[k]);
    }
    if (table.branches.empty()) throw NoAdmissibleState();

    table.zero_point_branch = 0;
    for (std::size_t k = 1; k < table.branches.size(); ++k) {
        const double best = table.branches[table.zero_point_branch].dp_min;
        const double cand = table.branches[k].dp_min;
        if (cand < best * (1.0 - 1e-9)) {
            table.zero_point_branch = k;
        } else if (std::abs(cand - best) <= 1e-9 * std::max(cand, best) &&
                   table.params[k].omega_an < table.params[table.zero_point_branch].omega_an) {
            table.zero_point_branch = k; // tie: minimum-energy side wins
        }
    }

    const UnitSystem& u = spec.units;
    const BranchParameters& zp = table.params[table.zero_point_branch];
    table.zero_point_energy = zp.w2() / (2.0 * zp.q) * u.energy_scale();
    table.dp_0 = zp.w * u.momentum_scale();
    table.dx_0 = std::sqrt(u.hbar / (zp.omega_an * u.mass));
    table.n_max = spec.n_max;

    table.dt.assign(static_cast<std::size_t>(spec.n_max) + 1,
                    std::numeric_limits<double>::quiet_NaN());
    for (int n = 1; n <= spec.n_max; ++n) table.dt[static_cast<std::size_t>(n)] = 1.0 / u.omega_har;

    for (std::size_t k = 0; k < table.branches.size(); ++k) {
        const BranchParameters& p = table.params[k];
        std::vector<double> lv(static_cast<std::size_t>(spec.n_max) + 1);
        std::vector<double> dp(static_cast<std::size_t>(spec.n_max) + 1);
        std::vector<double> dx(static_cast<std::size_t>(spec.n_max) + 1);
        lv[0] = table.zero_point_energy;
        dp[0] = table.dp_0;
        dx[0] = table.dx_0;
        for (int n = 1; n <= spec.n_max; ++n) {
            const auto idx = static_cast<std::size_t>(n);
            lv[idx] = n * u.hbar * p.omega_an + table.zero_point_energy;
            dp[idx] = p.w * std::sqrt(u.mass * n * u.hbar * u.omega_har);
            dx[idx] = std::sqrt(n * u.hbar / (p.omega_an * u.mass));
        }
        table.levels.push_back(std::move(lv));
        table.dp_an.push_back(std::move(dp));
        table.dx_min.push_back(std::move(dx));
    }
    return table;
}

/// Solve + spectrum in one call.
inline SpectrumTable build_spectrum(const OscillatorSpec& spec) {
    const SolveResult solved = solve_oscillator(spec);
    return energy_levels(spec, solved.branches, solved.params);
}

/// The quadratic-only reference obtained by dropping every a'_{i>=3}: one
/// branch with q = 1, w = 1, omega_an = omega_har, levels (n + 1/2) hbar
/// omega_har. Supplies the denominators of the normalization columns
/// R_E = q dE/dE_har and R_p = dp/dp_har.
inline SpectrumTable harmonic_reference(const OscillatorSpec& spec) {
    OscillatorSpec quad = spec;
    quad.order = 2;
    quad.intrinsic_coeffs = {{2, spec.effective_coefficient(2)}};
    quad.perturbation_coeffs.clear();
    return build_spectrum(quad);
}

/// Harmonic level (n + 1/2) hbar omega_har.
inline double harmonic_level(const UnitSystem& units, int n) {
    return (n + 0.5) * units.energy_scale();
}

} // namespace anharm
