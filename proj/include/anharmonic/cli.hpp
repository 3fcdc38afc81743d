#pragma once

#include <cstdlib>
#include <iostream>
#include <string>

#include "anharmonic/serialize.hpp"

namespace anharm {

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

/// Diagnostic verbosity from ANHARM_LOG (quiet | info | debug), default info.
inline LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("ANHARM_LOG");
        if (!env) return LogLevel::info;
        const std::string v(env);
        if (v == "quiet") return LogLevel::quiet;
        if (v == "debug") return LogLevel::debug;
        return LogLevel::info;
    }();
    return level;
}

inline void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::info) std::cerr << "anharm: " << msg << '\n';
}

inline void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::debug) std::cerr << "anharm[debug]: " << msg << '\n';
}

/// Exit code plus the serialized data bytes. Diagnostics go to stderr as a
/// side effect; the caller decides where the data bytes go.
struct RunResult {
    int exit_code = 0;
    std::string output;
};

namespace cli_detail {

inline OracleCheck run_oracle_check(const RunConfig& config) {
    const OscillatorSpec& spec = config.spec;
    const SolveResult solved = solve_oscillator(spec);

    const double pscale = spec.units.momentum_scale();
    const OracleConfig oc = config.oracle.value_or(OracleConfig{});
    const double lo = oc.dp_lo.value_or(0.01 * pscale);
    const double hi = oc.dp_hi.value_or(100.0 * pscale);
    const double step = oc.step.value_or((hi - lo) / 1e6);
    const OracleResult oracle = oracle_minima(spec, lo, hi, step);

    std::vector<double> poly_dp;
    for (std::size_t idx : solved.retained) poly_dp.push_back(solved.branches[idx].dp_min);

    // The convergence filter is a closed-form test independent of which path
    // produced the candidate, so it applies to the brute-force minima too.
    std::vector<double> oracle_dp;
    for (const auto& [dp, energy] : oracle.minima) {
        const std::vector<double> ratios = convergence_ratios_at(spec, dp);
        const double worst =
            ratios.empty() ? 0.0 : *std::max_element(ratios.begin(), ratios.end());
        if (worst <= spec.eta) oracle_dp.push_back(dp);
    }

    OracleCheck check;
    std::size_t p = 0, o = 0;
    while (p < poly_dp.size() && o < oracle_dp.size()) {
        const double a = poly_dp[p], b = oracle_dp[o];
        const double rel = std::abs(a - b) / std::max(std::abs(a), std::abs(b));
        if (rel <= 1e-6) {
            check.pairs.push_back({a, b, rel, rel <= check.tolerance});
            check.max_discrepancy = std::max(check.max_discrepancy, rel);
            ++p;
            ++o;
        } else if (a < b) {
            check.only_polynomial.push_back(a);
            ++p;
        } else {
            check.only_oracle.push_back(b);
            ++o;
        }
    }
    for (; p < poly_dp.size(); ++p) check.only_polynomial.push_back(poly_dp[p]);
    for (; o < oracle_dp.size(); ++o) check.only_oracle.push_back(oracle_dp[o]);
    check.match = check.only_polynomial.empty() && check.only_oracle.empty();
    for (const auto& pair : check.pairs) check.match = check.match && pair.ok;
    return check;
}

inline std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

} // namespace cli_detail

/// Executes one validated configuration and serializes the result. Exit code
/// 0 on success, 1 when no branch survives ("no admissible oscillation
/// state"), 2 is reserved for configuration errors raised before this point.
inline RunResult run(const RunConfig& config) {
    using cli_detail::dump;
    const bool csv = config.output_format == OutputFormat::csv;

    for (const std::string& w : spec_warnings(config.spec)) log_info("warning: " + w);

    switch (config.command) {
        case Command::solve: {
            const SolveResult solved = solve_oscillator(config.spec);
            log_debug("stationarity polynomial has " + std::to_string(solved.branches.size()) +
                      " positive real roots, " + std::to_string(solved.retained.size()) +
                      " retained");
            const int code = solved.retained.empty() ? 1 : 0;
            if (code == 1) log_info("no admissible oscillation state");
            return {code, csv ? solve_csv(solved) : dump(solve_json(solved))};
        }
        case Command::levels: {
            try {
                const SpectrumTable table = build_spectrum(config.spec);
                return {0, csv ? levels_csv(table) : dump(levels_json(table))};
            } catch (const NoAdmissibleState& e) {
                log_info(e.what());
                if (csv) return {1, "j,n,E,dp_an,dx,R_E,R_p\n"};
                nlohmann::json body{{"branches", nlohmann::json::array()}, {"status", e.what()}};
                return {1, dump(ser_detail::finish("levels", std::move(body)))};
            }
        }
        case Command::sweep: {
            const SweepConfig& sc = *config.sweep;
            SweepOptions opts;
            opts.amplification_threshold = sc.amplification;
            const SweepTrace trace =
                sweep(config.spec, sc.coeff_index, sc.lo, sc.hi, sc.steps, opts);
            log_debug(std::to_string(trace.events.size()) + " events, " +
                      std::to_string(trace.instability_flags.size()) + " unstable steps");
            return {0, csv ? sweep_csv(trace) : dump(sweep_json(trace))};
        }
        case Command::perturb: {
            try {
                const PerturbedComparison cmp =
                    perturbed_compare(config.spec, config.perturb->delta);
                if (cmp.destabilized) log_info("perturbation destabilizes oscillator");
                return {0, csv ? perturb_csv(cmp) : dump(perturb_json(cmp))};
            } catch (const NoAdmissibleState& e) {
                log_info(std::string("baseline: ") + e.what());
                if (csv)
                    return {1, "row_type,track,n,baseline,perturbed,delta,detail\noutcome,,,,,,"
                               "baseline has no admissible oscillation state\n"};
                nlohmann::json body{{"outcome", "baseline has no admissible oscillation state"}};
                return {1, dump(ser_detail::finish("perturb", std::move(body)))};
            }
        }
        case Command::oracle_check: {
            const OracleCheck check = cli_detail::run_oracle_check(config);
            log_debug(std::string("oracle verdict: ") + (check.match ? "match" : "mismatch"));
            return {0, csv ? oracle_check_csv(check) : dump(oracle_check_json(check))};
        }
    }
    throw std::logic_error("unreachable command dispatch");
}

} // namespace anharm
