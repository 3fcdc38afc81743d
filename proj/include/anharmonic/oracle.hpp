#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "anharmonic/energy.hpp"
#include "anharmonic/spec.hpp"

namespace anharm {

/// Brute-force minima of the range-energy function, found by a dense grid
/// scan and refined without ever touching the stationarity polynomial. This
/// is the independent cross-check for the root-finding path.
struct OracleResult {
    std::vector<std::pair<double, double>> minima; ///< (dp, energy), ascending dp
    double scan_lo = 0.0;
    double scan_hi = 0.0;
    double scan_step = 0.0;
    bool no_minimum_found = false;
};

namespace detail {

// Golden-section refinement of a bracketed minimum of dE.
inline double golden_refine(const OscillatorSpec& spec, double a, double b, double tol) {
    constexpr double inv_phi = 0.6180339887498949;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = energy_at(spec, c);
    double fd = energy_at(spec, d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = energy_at(spec, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = energy_at(spec, d);
        }
    }
    return 0.5 * (a + b);
}

// Bisection on the sign of a central finite difference of dE. Golden section
// alone can only place the argmin to ~sqrt(eps) relative because the energy
// is flat to second order there; the difference sign stays resolvable down
// to ~1e-11, which the downstream 1e-8 comparisons need headroom for.
inline double fd_sign_polish(const OscillatorSpec& spec, double x) {
    const double h = 1e-6 * x;
    auto slope_sign = [&](double y) {
        return energy_at(spec, y + h) - energy_at(spec, y - h);
    };
    double lo = x * (1.0 - 1e-5);
    double hi = x * (1.0 + 1e-5);
    if (!(slope_sign(lo) < 0.0 && slope_sign(hi) > 0.0)) return x;
    for (int it = 0; it < 80 && hi - lo > 1e-13 * x; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (slope_sign(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

/// Scans dE on the grid dp_lo, dp_lo + step, ... <= dp_hi, reports every
/// strict local minimum (both grid neighbours higher), each refined by
/// golden-section search and a finite-difference sign bisection. Uses the
/// spec's coefficients as quoted (n = n_ref).
inline OracleResult oracle_minima(const OscillatorSpec& spec, double dp_lo, double dp_hi,
                                  double step) {
    if (!(dp_lo > 0.0) || !(dp_hi > dp_lo))
        throw std::invalid_argument("oracle window requires 0 < dp_lo < dp_hi");
    if (!(step > 0.0) || step > (dp_hi - dp_lo) / 1000.0)
        throw std::invalid_argument("oracle step must satisfy 0 < step <= (dp_hi - dp_lo)/1000");

    OracleResult result;
    result.scan_lo = dp_lo;
    result.scan_hi = dp_hi;
    result.scan_step = step;

    double x_prev = dp_lo;
    double x_mid = dp_lo + step;
    double e_prev = energy_at(spec, x_prev);
    double e_mid = energy_at(spec, x_mid);
    for (double x_next = dp_lo + 2.0 * step; x_next <= dp_hi; x_next += step) {
        const double e_next = energy_at(spec, x_next);
        if (e_mid < e_prev && e_mid < e_next) {
            const double tol = 1e-10 * std::max(1.0, x_mid);
            double x = detail::golden_refine(spec, x_prev, x_next, tol);
            x = detail::fd_sign_polish(spec, x);
            result.minima.emplace_back(x, energy_at(spec, x));
        }
        x_prev = x_mid;
        e_prev = e_mid;
        x_mid = x_next;
        e_mid = e_next;
    }
    result.no_minimum_found = result.minima.empty();
    return result;
}

/// Default window (0.01, 100] * sqrt(m hbar omega_har) with 1e6 grid points,
/// wide enough to bracket every physically scaled minimum of a series that
/// passes the convergence filter.
inline OracleResult oracle_minima(const OscillatorSpec& spec) {
    const double pscale = spec.units.momentum_scale();
    const double lo = 0.01 * pscale;
    const double hi = 100.0 * pscale;
    return oracle_minima(spec, lo, hi, (hi - lo) / 1e6);
}

} // namespace anharm
