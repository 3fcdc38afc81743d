#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "anharmonic/oracle.hpp"
#include "anharmonic/sensitivity.hpp"
#include "anharmonic/sweep.hpp"
#include "support.hpp"

using namespace anharm;

namespace {

const Branch& first_retained(const SolveResult& solved) {
    REQUIRE(!solved.retained.empty());
    return solved.branches[solved.retained.front()];
}

// Track bookkeeping: every branch at every step is either matched from the
// previous step or announced by exactly one event.
void check_accounting(const SweepTrace& trace) {
    for (std::size_t s = 1; s < trace.steps.size(); ++s) {
        std::set<int> prev, cur;
        for (const auto& b : trace.steps[s - 1].branches) prev.insert(b.track);
        for (const auto& b : trace.steps[s].branches) cur.insert(b.track);
        std::size_t matched = 0;
        for (int t : cur) matched += prev.count(t);
        std::size_t born = 0, gone = 0;
        for (const auto& e : trace.events) {
            if (e.step != static_cast<int>(s)) continue;
            if (cur.count(e.track) && !prev.count(e.track))
                ++born;
            else
                ++gone;
        }
        CHECK(matched + born == cur.size());
        CHECK(matched + gone == prev.size());
    }
}

} // namespace

TEST_CASE("harmonic sensitivity matches the closed form dp/(4 a'_2)") {
    OscillatorSpec spec;
    spec.intrinsic_coeffs = {{2, 0.5}};
    const auto solved = solve_oscillator(spec);
    const auto report = sensitivity(spec, first_retained(solved), 2);
    CHECK(report.d_dpmin_d_aprime == Catch::Approx(0.5).epsilon(1e-12));
    CHECK(report.fd_check == Catch::Approx(0.5).epsilon(1e-7));
    CHECK(report.branch_j == 1);
    CHECK(report.coeff_index == 2);
}

TEST_CASE("cubic sensitivities match the frozen implicit derivatives") {
    const auto spec = fixtures::cubic();
    const auto solved = solve_oscillator(spec);
    const Branch& branch = first_retained(solved);

    const auto d3 = sensitivity(spec, branch, 3);
    CHECK(d3.d_dpmin_d_aprime == Catch::Approx(fixtures::kCubicSensitivityA3).epsilon(1e-10));
    CHECK(d3.fd_check == Catch::Approx(d3.d_dpmin_d_aprime).epsilon(1e-6));

    const auto d2 = sensitivity(spec, branch, 2);
    CHECK(d2.d_dpmin_d_aprime == Catch::Approx(fixtures::kCubicSensitivityA2).epsilon(1e-10));
    CHECK(d2.fd_check == Catch::Approx(d2.d_dpmin_d_aprime).epsilon(1e-6));
}

TEST_CASE("analytic and finite-difference derivatives agree on random branches") {
    std::mt19937_64 rng(107);
    int checked = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const auto spec = fixtures::random_spec(rng);
        const auto solved = solve_oscillator(spec);
        for (std::size_t idx : solved.retained) {
            for (int i = 2; i <= spec.order; ++i) {
                const auto report = sensitivity(spec, solved.branches[idx], i);
                CHECK(std::abs(report.d_dpmin_d_aprime - report.fd_check) /
                          std::max(1.0, std::abs(report.fd_check)) <=
                      1e-6);
                ++checked;
            }
        }
    }
    CHECK(checked > 40);
}

TEST_CASE("sensitivity preconditions") {
    const auto spec = fixtures::cubic();
    const auto solved = solve_oscillator(spec);
    Branch rejected = solved.branches[0]; // the maximum
    CHECK_THROWS_AS(sensitivity(spec, rejected, 3), std::invalid_argument);
    CHECK_THROWS_AS(sensitivity(spec, first_retained(solved), 9), std::invalid_argument);
}

TEST_CASE("sensitivity is undefined at a fold located by bisection") {
    // shrink the bracket [with-two-roots, with-no-roots] on a'_3 until the
    // minimum and maximum collide
    auto spec = fixtures::cubic();
    spec.eta = 1.0; // keep the near-fold branch past the ratio filter
    double lo = -0.17, hi = -0.19;
    auto root_count = [&](double a3) {
        auto probe = spec;
        probe.intrinsic_coeffs[3] = a3;
        return find_positive_real_roots(build_polynomial(probe)).size();
    };
    REQUIRE(root_count(lo) == 2);
    REQUIRE(root_count(hi) == 0);
    while (std::abs(hi - lo) > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        (root_count(mid) == 2 ? lo : hi) = mid;
    }
    CHECK(lo == Catch::Approx(fixtures::kCubicFoldA3).epsilon(1e-10));

    spec.intrinsic_coeffs[3] = lo;
    const auto solved = solve_oscillator(spec);
    REQUIRE(!solved.retained.empty());
    const Branch& near_fold = solved.branches[solved.retained.front()];
    CHECK(near_fold.dp_min == Catch::Approx(fixtures::kCubicFoldDp).margin(1e-4));
    CHECK_THROWS_WITH(sensitivity(spec, near_fold, 3),
                      Catch::Matchers::ContainsSubstring("degenerate stationary point"));
}

TEST_CASE("differential identity residual shrinks quadratically") {
    const auto spec = fixtures::cubic();
    const auto solved = solve_oscillator(spec);
    const Branch& branch = first_retained(solved);

    SensitivityOptions coarse, fine;
    coarse.identity_relative_step = 1e-3;
    fine.identity_relative_step = 5e-4;
    const double r_coarse = std::abs(sensitivity(spec, branch, 3, coarse).identity_residual);
    const double r_fine = std::abs(sensitivity(spec, branch, 3, fine).identity_residual);
    REQUIRE(r_fine > 0.0);
    const double ratio = r_coarse / r_fine;
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
}

TEST_CASE("identity residual is undefined for an absent coefficient") {
    OscillatorSpec spec;
    spec.order = 3;
    spec.intrinsic_coeffs = {{2, 0.5}}; // a'_3 absent
    const auto solved = solve_oscillator(spec);
    const auto report = sensitivity(spec, first_retained(solved), 3);
    CHECK(std::isnan(report.identity_residual));
    CHECK(report.fd_check == Catch::Approx(report.d_dpmin_d_aprime).epsilon(1e-6));
}

TEST_CASE("harmonic sweep follows the closed form with no events") {
    OscillatorSpec spec;
    spec.intrinsic_coeffs = {{2, 0.5}};
    const auto trace = sweep(spec, 2, 0.4, 0.6, 21);
    CHECK(trace.events.empty());
    CHECK(trace.instability_flags.empty());
    REQUIRE(trace.steps.size() == 21);
    for (std::size_t s = 0; s < trace.steps.size(); ++s) {
        REQUIRE(trace.steps[s].branches.size() == 1);
        const auto& b = trace.steps[s].branches.front();
        CHECK(b.track == 1);
        CHECK(b.dp_min ==
              Catch::Approx(std::pow(2.0 * trace.values[s], 0.25)).epsilon(1e-10));
        CHECK(b.omega_an == Catch::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("sweeping past the fold kills the branch and flags instability") {
    auto spec = fixtures::cubic();
    spec.eta = 10.0; // study the genuine fold, not the filter
    const auto trace = sweep(spec, 3, -0.177, -0.17834, 120);
    check_accounting(trace);

    REQUIRE(trace.steps.back().branches.empty());
    REQUIRE(trace.events.size() == 1);
    const auto& death = trace.events.front();
    CHECK(death.kind == SweepEventKind::branch_died);
    CHECK(trace.values[static_cast<std::size_t>(death.step)] < fixtures::kCubicFoldA3);
    CHECK(trace.values[static_cast<std::size_t>(death.step) - 1] > fixtures::kCubicFoldA3);

    // the response amplifies without bound approaching the fold
    REQUIRE(!trace.instability_flags.empty());
    CHECK(trace.instability_flags.back() >= death.step - 3);
}

TEST_CASE("sweeping across the ratio threshold emits a filter_flip") {
    const auto spec = fixtures::cubic(); // eta = 0.1
    const auto trace = sweep(spec, 3, -0.04, -0.06, 21);
    check_accounting(trace);

    REQUIRE(trace.events.size() == 1);
    CHECK(trace.events.front().kind == SweepEventKind::filter_flip);
    const int flip_step = trace.events.front().step;
    CHECK(trace.values[static_cast<std::size_t>(flip_step)] < fixtures::kCubicFilterFlipA3);
    CHECK(trace.values[static_cast<std::size_t>(flip_step) - 1] > fixtures::kCubicFilterFlipA3);
    for (std::size_t s = 0; s < trace.steps.size(); ++s)
        CHECK(trace.steps[s].branches.size() ==
              (static_cast<int>(s) < flip_step ? 1u : 0u));
}

TEST_CASE("matched branches move continuously between events") {
    const auto spec = fixtures::cubic();
    auto max_jump = [&](int steps) {
        const auto trace = sweep(spec, 3, -0.01, -0.03, steps);
        double worst = 0.0;
        for (std::size_t s = 1; s < trace.steps.size(); ++s) {
            REQUIRE(trace.steps[s].branches.size() == 1);
            const double a = trace.steps[s - 1].branches[0].dp_min;
            const double b = trace.steps[s].branches[0].dp_min;
            worst = std::max(worst, std::abs(b - a) / a);
        }
        return worst;
    };
    const double coarse = max_jump(11);
    const double fine = max_jump(21);
    CHECK(fine < coarse);
    CHECK(fine < 0.65 * coarse); // halving the step roughly halves the jump
}

TEST_CASE("sweep rejects bad parameters") {
    const auto spec = fixtures::cubic();
    CHECK_THROWS_AS(sweep(spec, 3, -0.01, -0.02, 1), std::invalid_argument);
    CHECK_THROWS_AS(sweep(spec, 7, -0.01, -0.02, 5), std::invalid_argument);
    CHECK_THROWS_AS(sweep(spec, 2, -0.1, 0.5, 5), std::invalid_argument);
}

TEST_CASE("zero perturbation is bit-identical to the baseline") {
    const auto spec = fixtures::two_branch();
    const auto cmp = perturbed_compare(spec, {{3, 0.0}, {5, 0.0}});
    CHECK_FALSE(cmp.destabilized);
    REQUIRE(cmp.matched.size() == 2);
    CHECK(cmp.baseline_only.empty());
    CHECK(cmp.perturbed_only.empty());
    for (const auto& d : cmp.matched) {
        CHECK(d.dp_min_base == d.dp_min_pert); // bitwise
        CHECK(d.d_dp_min == 0.0);
        CHECK(d.omega_an_base == d.omega_an_pert);
        CHECK(d.omega_shift_sign == 0);
        for (double dl : d.level_delta) CHECK(dl == 0.0);
    }
    CHECK(cmp.zero_point_base == cmp.zero_point_pert);
}

TEST_CASE("a small negative cubic perturbation softens the harmonic oscillator") {
    OscillatorSpec spec;
    spec.order = 3;
    spec.intrinsic_coeffs = {{2, 0.5}};
    const auto cmp = perturbed_compare(spec, {{3, -0.001}});
    REQUIRE(cmp.matched.size() == 1);
    CHECK(cmp.matched[0].omega_shift_sign == -1);
    CHECK(cmp.matched[0].omega_an_pert < spec.units.omega_har);
    CHECK(cmp.matched[0].d_dp_min < 0.0);
}

TEST_CASE("a relatively huge delta on a tiny coefficient moves dp_min at full strength") {
    // |delta a'_3| >> |a'_3| while the energy contribution of the term stays
    // small next to the quadratic one
    OscillatorSpec spec;
    spec.order = 3;
    spec.intrinsic_coeffs = {{2, 0.5}, {3, -1e-6}};
    const std::map<int, double> delta = {{3, -1e-3}};
    const auto cmp = perturbed_compare(spec, delta);
    REQUIRE(cmp.matched.size() == 1);
    const auto& d = cmp.matched[0];

    CHECK(std::abs(delta.at(3)) > 100.0 * std::abs(spec.intrinsic_coeffs.at(3)));
    const double dp = d.dp_min_base;
    const double energy_fraction =
        std::abs(delta.at(3)) / std::pow(dp, 3.0) / energy_at(spec, dp);
    CHECK(energy_fraction < 5e-3);

    // the dimensionless coefficient responds by orders of magnitude while the
    // range shift stays of the order of the energy fraction, not of a'_3
    const double a3_base = spec.intrinsic_coeffs.at(3) / std::pow(d.dp_min_base, 5.0);
    const double a3_pert =
        (spec.intrinsic_coeffs.at(3) + delta.at(3)) / std::pow(d.dp_min_pert, 5.0);
    CHECK(std::abs(a3_pert / a3_base) > 100.0);
    CHECK(std::abs(d.d_dp_min) / dp > 0.25 * energy_fraction);

    // brute-force re-solve confirms the perturbed minimum
    auto perturbed = spec;
    perturbed.perturbation_coeffs[3] = delta.at(3);
    const auto oracle = oracle_minima(perturbed);
    REQUIRE(oracle.minima.size() == 1);
    CHECK(d.dp_min_pert == Catch::Approx(oracle.minima[0].first).epsilon(1e-8));
}

TEST_CASE("a destabilizing perturbation is an outcome, not an error") {
    const auto spec = fixtures::cubic();
    const auto cmp = perturbed_compare(spec, {{3, -0.1}});
    CHECK(cmp.destabilized);
    CHECK(cmp.matched.empty());
    REQUIRE(cmp.baseline_only.size() == 1);
    CHECK(std::isnan(cmp.zero_point_pert));
}

TEST_CASE("perturbed_compare validates its delta") {
    const auto spec = fixtures::cubic();
    CHECK_THROWS_AS(perturbed_compare(spec, {{7, 0.1}}), std::invalid_argument);
    CHECK_THROWS_AS(perturbed_compare(spec, {{2, -0.6}}), std::invalid_argument);
}
