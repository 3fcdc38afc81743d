#pragma once

// Shared fixtures and the randomized-spec generator used across the suite.
//
// The frozen constants below were produced by the brute-force route (dense
// grid scan of the range-energy function plus golden-section refinement,
// cross-checked against companion-matrix roots at 40-digit precision) and are
// deliberately independent of the library code they test.

#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "anharmonic/spec.hpp"

namespace fixtures {

// --- cubic fixture: reduced units, a'_2 = 1/2, a'_3 = -1/50 ----------------
// stationarity polynomial x^5 - x + 0.06
inline anharm::OscillatorSpec cubic() {
    anharm::OscillatorSpec spec;
    spec.order = 3;
    spec.intrinsic_coeffs = {{2, 0.5}, {3, -0.02}};
    spec.n_max = 10;
    return spec;
}

constexpr double kCubicRootSmall = 0.060000777650393052; // local maximum
constexpr double kCubicRootBig = 0.98440110113773765;    // the retained minimum
constexpr double kCubicEnergyAtMin = 0.97952848306618649;
constexpr double kCubicEnergyAt09846 = 0.97952856088852744;
constexpr double kCubicSecondDerivSmall = -77151.493697550415;
constexpr double kCubicSecondDerivBig = 3.9350931106354666;
constexpr double kCubicA2 = 0.53245344468226671;
constexpr double kCubicA3 = -0.021635629788177804;
constexpr double kCubicQ = 1.0108178148940889;
constexpr double kCubicW2 = 0.96904552792119039;
constexpr double kCubicOmegaAn = 0.96904552792119039;
constexpr double kCubicZeroPoint = 0.47933738090217805;
constexpr double kCubicConvergenceRatio = 0.040633843210627606;
constexpr double kCubicSensitivityA3 = 0.81185389475515974; // d dp_min / d a'_3
constexpr double kCubicSensitivityA2 = 0.53279324530662681; // d dp_min / d a'_2
constexpr double kCubicFoldA3 = -0.17833074799371254;       // min and max merge here
constexpr double kCubicFoldDp = 0.66874030497642202;
constexpr double kCubicFilterFlipA3 = -0.048009229470209390; // worst ratio crosses 0.1

// --- two-branch fixture: a'_2 = 1/2, a'_3 = -0.205, a'_5 = 0.0074 ----------
// sparse series (index 4 absent); three stationary points, two minima, and
// with eta = 1 both minima pass the ratio filter.
inline anharm::OscillatorSpec two_branch() {
    anharm::OscillatorSpec spec;
    spec.order = 5;
    spec.intrinsic_coeffs = {{2, 0.5}, {3, -0.205}, {5, 0.0074}};
    spec.eta = 1.0;
    spec.n_max = 6;
    return spec;
}

constexpr double kTwoBranchDpLow = 0.43447951068054110;  // minimum
constexpr double kTwoBranchDpMax = 0.47827584670460968;  // maximum in between
constexpr double kTwoBranchDpHigh = 0.67875124435486862; // minimum
constexpr double kTwoBranchOmega0 = 0.18877244520120243; // branch at dp 0.4345
constexpr double kTwoBranchOmega1 = 0.46070325171328257; // branch at dp 0.6788
constexpr double kTwoBranchQ0 = 3.8224447258184329;
constexpr double kTwoBranchQ1 = 1.5442498503306905;
constexpr double kTwoBranchZeroPoint = 0.024692632430516559;

// --- randomized specs -------------------------------------------------------
// Coefficients are built downward from a'_2 with log-uniform successive-term
// ratios well under eta, so every generated spec passes the convergence
// filter at its harmonic-like minimum.
struct GeneratorOptions {
    int order_lo = 3;
    int order_hi = 8;
    bool negative_tail_only = false; // force a'_{i>=3} < 0
};

inline anharm::OscillatorSpec random_spec(std::mt19937_64& rng, GeneratorOptions opts = {}) {
    std::uniform_int_distribution<int> order_dist(opts.order_lo, opts.order_hi);
    std::uniform_real_distribution<double> log_a2(std::log(0.1), std::log(10.0));
    std::uniform_real_distribution<double> log_ratio(std::log(1e-4), std::log(0.04));
    std::uniform_real_distribution<double> coin(0.0, 1.0);

    anharm::OscillatorSpec spec;
    spec.order = order_dist(rng);
    const double a2 = std::exp(log_a2(rng));
    spec.intrinsic_coeffs[2] = a2;
    const double dp_scale = std::pow(2.0 * a2, 0.25); // harmonic-like root, reduced units
    double prev = a2;
    for (int i = 3; i <= spec.order; ++i) {
        const double ratio = std::exp(log_ratio(rng));
        const double magnitude = ratio * prev * dp_scale;
        const double sign = opts.negative_tail_only ? -1.0 : (coin(rng) < 0.5 ? -1.0 : 1.0);
        spec.intrinsic_coeffs[i] = sign * magnitude;
        prev = magnitude;
    }
    return spec;
}

} // namespace fixtures
