#pragma once

#include <cmath>
#include <stdexcept>

namespace anharm {

/// Unit system for one oscillator problem: hbar, the oscillating mass, and
/// the harmonic reference angular frequency. Default construction gives the
/// reduced system hbar = mass = omega_har = 1, in which all the convenient
/// closed forms (dp_har = sqrt(n), E_har = n + 1/2, ...) hold verbatim.
struct UnitSystem {
    double hbar = 1.0;
    double mass = 1.0;
    double omega_har = 1.0;

    void validate() const {
        if (!(hbar > 0.0) || !std::isfinite(hbar))
            throw std::invalid_argument("units.hbar must be strictly positive");
        if (!(mass > 0.0) || !std::isfinite(mass))
            throw std::invalid_argument("units.mass must be strictly positive");
        if (!(omega_har > 0.0) || !std::isfinite(omega_har))
            throw std::invalid_argument("units.omega_har must be strictly positive");
    }

    /// Harmonic force constant k_har = m * omega_har^2.
    double k_har() const { return mass * omega_har * omega_har; }

    /// Natural momentum-range scale sqrt(m * hbar * omega_har); the harmonic
    /// minimum at quantum number n sits at sqrt(n) times this.
    double momentum_scale() const { return std::sqrt(mass * hbar * omega_har); }

    /// Natural energy scale hbar * omega_har.
    double energy_scale() const { return hbar * omega_har; }

    bool is_reduced() const { return hbar == 1.0 && mass == 1.0 && omega_har == 1.0; }
};

} // namespace anharm
