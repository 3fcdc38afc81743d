#pragma once

#include <cmath>
#include <stdexcept>

#include "anharmonic/spec.hpp"

namespace anharm {

/// One evaluation of the range-energy function.
struct EnergySample {
    double dp;    ///< momentum-range size, > 0
    int n;        ///< quantum number the coefficients were scaled to
    double value; ///< dE(dp)
};

/// Kinetic part dp^2 / (2m).
inline double kinetic_term(const OscillatorSpec& spec, double dp) {
    if (!(dp > 0.0)) throw std::domain_error("dp must be strictly positive");
    return dp * dp / (2.0 * spec.units.mass);
}

/// Restoring part sum_i a'_i / dp^i with the merged coefficients.
inline double potential_term(const OscillatorSpec& spec, double dp) {
    if (!(dp > 0.0)) throw std::domain_error("dp must be strictly positive");
    double sum = 0.0;
    for (const auto& [i, a] : spec.effective_coefficients())
        sum += a / std::pow(dp, static_cast<double>(i));
    return sum;
}

/// Range-energy function dE(dp) = dp^2/(2m) + sum_i a'_i / dp^i, evaluated
/// with the spec's own (merged) coefficients, i.e. at n = n_ref.
inline double energy_at(const OscillatorSpec& spec, double dp) {
    return kinetic_term(spec, dp) + potential_term(spec, dp);
}

/// Same, but with the coefficients first rescaled to quantum number n.
inline double energy_at(const OscillatorSpec& spec, double dp, int n) {
    if (n == spec.n_ref) return energy_at(spec, dp);
    return energy_at(apply_n_scaling(spec, n), dp);
}

inline EnergySample sample_energy(const OscillatorSpec& spec, double dp, int n) {
    const double value = energy_at(spec, dp, n);
    if (!std::isfinite(value)) throw std::domain_error("energy overflows at this dp");
    return EnergySample{dp, n, value};
}

} // namespace anharm
