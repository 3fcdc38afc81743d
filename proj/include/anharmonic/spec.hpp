#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "anharmonic/units.hpp"

namespace anharm {

/// One oscillator problem: the restoring-series coefficients a'_i of the
/// range-energy function
///
///     dE(dp) = dp^2 / (2m) + sum_{i=2..N} a'_i / dp^i
///
/// together with the unit system, the reference quantum number the
/// coefficients are quoted at, the ladder length, and the convergence-filter
/// threshold. a'_i carries units of energy * momentum^i.
///
/// Coefficients come in two additive layers: the intrinsic ones of the
/// isolated oscillator and an optional external-perturbation layer. All
/// physics below acts on their sum (the "effective" coefficients).
struct OscillatorSpec {
    UnitSystem units{};
    int order = 2;                               ///< N, highest power in the series
    std::map<int, double> intrinsic_coeffs;      ///< i -> a'_i for 2 <= i <= order
    std::map<int, double> perturbation_coeffs;   ///< external additive terms, same indexing
    int n_ref = 1;                               ///< quantum number the coefficients refer to
    int n_max = 10;                              ///< ladder length, levels n = 0..n_max
    double eta = 0.1;                            ///< convergence-filter threshold

    /// intrinsic + perturbation at index i; absent keys contribute zero.
    double effective_coefficient(int i) const {
        double v = 0.0;
        if (auto it = intrinsic_coeffs.find(i); it != intrinsic_coeffs.end()) v += it->second;
        if (auto it = perturbation_coeffs.find(i); it != perturbation_coeffs.end()) v += it->second;
        return v;
    }

    /// Merged coefficient map over the union of stored keys.
    std::map<int, double> effective_coefficients() const {
        std::map<int, double> merged = intrinsic_coeffs;
        for (const auto& [i, v] : perturbation_coeffs) merged[i] += v;
        return merged;
    }

    void validate() const {
        units.validate();
        if (order < 2) throw std::invalid_argument("order below quadratic (order must be >= 2)");
        auto check_keys = [this](const std::map<int, double>& m, const char* which) {
            for (const auto& [i, v] : m) {
                if (i < 2 || i > order)
                    throw std::invalid_argument(std::string(which) + "." + std::to_string(i) +
                                                ": coefficient index outside 2..order");
                if (!std::isfinite(v))
                    throw std::invalid_argument(std::string(which) + "." + std::to_string(i) +
                                                ": coefficient must be finite");
            }
        };
        check_keys(intrinsic_coeffs, "coefficients");
        check_keys(perturbation_coeffs, "perturbation");
        if (!(effective_coefficient(2) > 0.0))
            throw std::invalid_argument("quadratic coefficient a'_2 must be positive after merging");
        if (n_ref < 1) throw std::invalid_argument("n_ref must be a positive integer");
        if (n_max < 0) throw std::invalid_argument("n_max must be non-negative");
        if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("eta must be positive");
    }

    /// Same problem expressed in reduced units: momenta divided by
    /// sqrt(m hbar omega_har), energies by hbar omega_har. Used internally so
    /// that root finding always sees O(1) coefficients.
    OscillatorSpec nondimensionalized() const {
        OscillatorSpec out = *this;
        const double pscale = units.momentum_scale();
        const double escale = units.energy_scale();
        auto rescale = [&](std::map<int, double>& m) {
            for (auto& [i, v] : m) v /= escale * std::pow(pscale, static_cast<double>(i));
        };
        rescale(out.intrinsic_coeffs);
        rescale(out.perturbation_coeffs);
        out.units = UnitSystem{};
        return out;
    }
};

/// Rescales all coefficients from the spec's reference quantum number to n
/// following the dimensional law a'_i(n) = a'_i(n_ref) * (n/n_ref)^(i/2 + 1).
/// The returned spec quotes its coefficients at n (n_ref = n), so the
/// operation composes and n == n_ref returns an identical spec.
inline OscillatorSpec apply_n_scaling(const OscillatorSpec& spec, int n) {
    if (n < 1) throw std::invalid_argument("quantum number n must be >= 1");
    OscillatorSpec out = spec;
    const double ratio = static_cast<double>(n) / static_cast<double>(spec.n_ref);
    auto rescale = [&](std::map<int, double>& m) {
        for (auto& [i, v] : m) v *= std::pow(ratio, 0.5 * i + 1.0);
    };
    rescale(out.intrinsic_coeffs);
    rescale(out.perturbation_coeffs);
    out.n_ref = n;
    return out;
}

/// Non-fatal physics advisories. Negative a'_3 / a'_4 express repulsion
/// asymmetry and large-amplitude softening; positive values are accepted but
/// unusual for an isolated lattice oscillator, so they are flagged.
inline std::vector<std::string> spec_warnings(const OscillatorSpec& spec) {
    std::vector<std::string> out;
    for (int i : {3, 4}) {
        if (spec.effective_coefficient(i) > 0.0)
            out.push_back("effective a'_" + std::to_string(i) +
                          " is positive; softening/asymmetry terms are usually negative");
    }
    return out;
}

/// FNV-1a hash of a canonical rendering of the spec; identifies which spec a
/// derived object (e.g. a stationarity polynomial) was built from.
inline std::uint64_t spec_hash(const OscillatorSpec& spec) {
    std::string canon;
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g;", v);
        canon += buf;
    };
    put(spec.units.hbar);
    put(spec.units.mass);
    put(spec.units.omega_har);
    canon += std::to_string(spec.order) + ";" + std::to_string(spec.n_ref) + ";" +
             std::to_string(spec.n_max) + ";";
    put(spec.eta);
    for (const auto& [i, v] : spec.effective_coefficients()) {
        canon += std::to_string(i) + ":";
        put(v);
    }
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace anharm
