#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "anharmonic/config.hpp"
#include "anharmonic/oracle.hpp"
#include "anharmonic/spectrum.hpp"
#include "anharmonic/sweep.hpp"

namespace anharm {

/// 12 significant digits, '.' decimal separator; the common currency of all
/// CSV output so golden files stay meaningful at the 1e-10 tolerances.
inline std::string fmt12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

namespace ser_detail {

inline void row(std::string& out, const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
        if (k) out += ',';
        out += cells[k];
    }
    out += '\n';
}

inline nlohmann::json coeff_map_json(const std::map<int, double>& m) {
    nlohmann::json obj = nlohmann::json::object();
    for (const auto& [i, v] : m) obj[std::to_string(i)] = v;
    return obj;
}

inline nlohmann::json branch_json(const Branch& b) {
    return {{"index_j", b.index_j},
            {"dp_min", b.dp_min},
            {"accepted", b.accepted},
            {"rejection_reason", std::string(to_string(b.rejection_reason))},
            {"second_derivative", b.second_derivative},
            {"convergence_ratios", b.convergence_ratios}};
}

inline nlohmann::json params_json(const BranchParameters& p) {
    return {{"a", coeff_map_json(p.a)},
            {"q", p.q},
            {"w", p.w},
            {"w2", p.w2()},
            {"omega_an", p.omega_an},
            {"a_ddprime", coeff_map_json(p.a_ddprime)},
            {"k_an", p.k_an}};
}

inline nlohmann::json finish(const char* command, nlohmann::json body) {
    body["schema_version"] = 1;
    body["command"] = command;
    return body;
}

} // namespace ser_detail

// ---------------------------------------------------------------------------
// solve: branch table
// ---------------------------------------------------------------------------

inline std::string solve_csv(const SolveResult& r) {
    using namespace ser_detail;
    std::string out;
    std::vector<std::string> header = {"j", "dp_min", "accepted", "rejection_reason"};
    for (int i = 2; i <= r.spec.order; ++i) header.push_back("a_" + std::to_string(i));
    header.insert(header.end(), {"q", "w", "omega_an"});
    row(out, header);
    for (std::size_t k = 0; k < r.branches.size(); ++k) {
        const Branch& b = r.branches[k];
        std::vector<std::string> cells = {std::to_string(b.index_j), fmt12(b.dp_min),
                                          b.accepted ? "true" : "false",
                                          std::string(to_string(b.rejection_reason))};
        for (int i = 2; i <= r.spec.order; ++i) {
            const auto it = r.dimensionless[k].find(i);
            cells.push_back(it == r.dimensionless[k].end() ? "" : fmt12(it->second));
        }
        if (r.params[k]) {
            cells.push_back(fmt12(r.params[k]->q));
            cells.push_back(fmt12(r.params[k]->w));
            cells.push_back(fmt12(r.params[k]->omega_an));
        } else {
            cells.insert(cells.end(), {"", "", ""});
        }
        row(out, cells);
    }
    return out;
}

inline nlohmann::json solve_json(const SolveResult& r) {
    using namespace ser_detail;
    nlohmann::json branches = nlohmann::json::array();
    for (std::size_t k = 0; k < r.branches.size(); ++k) {
        nlohmann::json b = branch_json(r.branches[k]);
        b["a"] = coeff_map_json(r.dimensionless[k]);
        if (r.params[k]) b["parameters"] = params_json(*r.params[k]);
        branches.push_back(std::move(b));
    }
    return finish("solve", {{"branches", std::move(branches)},
                            {"retained_count", r.retained.size()},
                            {"polynomial", r.polynomial.coefficients},
                            {"spec_hash", r.polynomial.spec_hash}});
}

// ---------------------------------------------------------------------------
// levels: ladder rows with harmonic-reference normalization columns
//   R_E = q * dE/dE_har = q w^2  and  R_p = dp/dp_har = w, both n-independent
//   at the branch minimum.
// ---------------------------------------------------------------------------

inline std::string levels_csv(const SpectrumTable& t) {
    using namespace ser_detail;
    std::string out;
    row(out, {"j", "n", "E", "dp_an", "dx", "R_E", "R_p"});
    for (std::size_t j = 0; j < t.branches.size(); ++j) {
        const BranchParameters& p = t.params[j];
        for (int n = 0; n <= t.n_max; ++n) {
            const auto idx = static_cast<std::size_t>(n);
            row(out, {std::to_string(t.branches[j].index_j), std::to_string(n),
                      fmt12(t.levels[j][idx]), fmt12(t.dp_an[j][idx]), fmt12(t.dx_min[j][idx]),
                      fmt12(p.q * p.w2()), fmt12(p.w)});
        }
    }
    return out;
}

inline nlohmann::json levels_json(const SpectrumTable& t) {
    using namespace ser_detail;
    nlohmann::json branches = nlohmann::json::array();
    for (std::size_t j = 0; j < t.branches.size(); ++j) {
        nlohmann::json levels = nlohmann::json::array();
        for (int n = 0; n <= t.n_max; ++n) {
            const auto idx = static_cast<std::size_t>(n);
            levels.push_back({{"n", n},
                              {"E", t.levels[j][idx]},
                              {"dp_an", t.dp_an[j][idx]},
                              {"dx", t.dx_min[j][idx]}});
        }
        branches.push_back({{"branch", branch_json(t.branches[j])},
                            {"parameters", params_json(t.params[j])},
                            {"R_E", t.params[j].q * t.params[j].w2()},
                            {"R_p", t.params[j].w},
                            {"levels", std::move(levels)}});
    }
    nlohmann::json dt = nlohmann::json::array();
    for (int n = 1; n <= t.n_max; ++n) dt.push_back(t.dt[static_cast<std::size_t>(n)]);
    return finish("levels", {{"branches", std::move(branches)},
                             {"zero_point_branch", t.zero_point_branch},
                             {"zero_point_energy", t.zero_point_energy},
                             {"dp_0", t.dp_0},
                             {"dx_0", t.dx_0},
                             {"dt", std::move(dt)},
                             {"n_max", t.n_max}});
}

// ---------------------------------------------------------------------------
// sweep: long-format state rows plus event rows, one table
// ---------------------------------------------------------------------------

inline std::string sweep_csv(const SweepTrace& t) {
    using namespace ser_detail;
    std::string out;
    row(out, {"row_type", "step", "coeff_value", "track", "dp_min", "omega_an", "q", "w",
              "instability", "event_kind", "event_detail"});
    std::vector<bool> flagged(t.steps.size(), false);
    for (int s : t.instability_flags) flagged[static_cast<std::size_t>(s)] = true;
    for (std::size_t s = 0; s < t.steps.size(); ++s) {
        for (const SweepBranchState& b : t.steps[s].branches)
            row(out, {"state", std::to_string(s), fmt12(t.steps[s].coeff_value),
                      std::to_string(b.track), fmt12(b.dp_min), fmt12(b.omega_an), fmt12(b.q),
                      fmt12(b.w), flagged[s] ? "1" : "0", "", ""});
        if (t.steps[s].branches.empty())
            row(out, {"state", std::to_string(s), fmt12(t.steps[s].coeff_value), "", "", "", "", "",
                      flagged[s] ? "1" : "0", "", ""});
    }
    for (const SweepEvent& e : t.events) {
        std::string detail = e.detail;
        for (char& c : detail)
            if (c == ',') c = ';';
        row(out, {"event", std::to_string(e.step),
                  fmt12(t.values[static_cast<std::size_t>(e.step)]), std::to_string(e.track), "",
                  "", "", "", "", std::string(to_string(e.kind)), detail});
    }
    return out;
}

inline nlohmann::json sweep_json(const SweepTrace& t) {
    using namespace ser_detail;
    nlohmann::json steps = nlohmann::json::array();
    for (std::size_t s = 0; s < t.steps.size(); ++s) {
        nlohmann::json branches = nlohmann::json::array();
        for (const SweepBranchState& b : t.steps[s].branches)
            branches.push_back({{"track", b.track},
                                {"dp_min", b.dp_min},
                                {"omega_an", b.omega_an},
                                {"q", b.q},
                                {"w", b.w}});
        steps.push_back({{"step", s},
                         {"coeff_value", t.steps[s].coeff_value},
                         {"branches", std::move(branches)}});
    }
    nlohmann::json events = nlohmann::json::array();
    for (const SweepEvent& e : t.events)
        events.push_back({{"step", e.step},
                          {"kind", std::string(to_string(e.kind))},
                          {"track", e.track},
                          {"detail", e.detail}});
    return finish("sweep", {{"coeff_index", t.coeff_index},
                            {"values", t.values},
                            {"steps", std::move(steps)},
                            {"events", std::move(events)},
                            {"instability_flags", t.instability_flags}});
}

// ---------------------------------------------------------------------------
// perturb: matched-pair deltas, unmatched branches, outcome
// ---------------------------------------------------------------------------

inline std::string perturb_csv(const PerturbedComparison& c) {
    using namespace ser_detail;
    std::string out;
    row(out, {"row_type", "track", "n", "baseline", "perturbed", "delta", "detail"});
    row(out, {"outcome", "", "", "", "", "",
              c.destabilized ? "perturbation destabilizes oscillator" : "compared"});
    row(out, {"zero_point", "", "", fmt12(c.zero_point_base),
              c.destabilized ? "" : fmt12(c.zero_point_pert),
              c.destabilized ? "" : fmt12(c.zero_point_pert - c.zero_point_base), ""});
    for (const BranchDelta& d : c.matched) {
        row(out, {"dp_min", std::to_string(d.track), "", fmt12(d.dp_min_base),
                  fmt12(d.dp_min_pert), fmt12(d.d_dp_min), ""});
        row(out, {"omega_an", std::to_string(d.track), "", fmt12(d.omega_an_base),
                  fmt12(d.omega_an_pert), fmt12(d.d_omega_an),
                  d.omega_shift_sign > 0 ? "stiffer" : (d.omega_shift_sign < 0 ? "softer" : "unchanged")});
        for (std::size_t n = 0; n < d.level_delta.size(); ++n)
            row(out, {"level", std::to_string(d.track), std::to_string(n), fmt12(d.level_base[n]),
                      fmt12(d.level_pert[n]), fmt12(d.level_delta[n]), ""});
    }
    for (const Branch& b : c.baseline_only)
        row(out, {"baseline_only", std::to_string(b.index_j), "", fmt12(b.dp_min), "", "", ""});
    for (const Branch& b : c.perturbed_only)
        row(out, {"perturbed_only", std::to_string(b.index_j), "", "", fmt12(b.dp_min), "", ""});
    return out;
}

inline nlohmann::json perturb_json(const PerturbedComparison& c) {
    using namespace ser_detail;
    nlohmann::json matched = nlohmann::json::array();
    for (const BranchDelta& d : c.matched)
        matched.push_back({{"track", d.track},
                           {"baseline_index", d.baseline_index},
                           {"perturbed_index", d.perturbed_index},
                           {"dp_min_base", d.dp_min_base},
                           {"dp_min_pert", d.dp_min_pert},
                           {"d_dp_min", d.d_dp_min},
                           {"omega_an_base", d.omega_an_base},
                           {"omega_an_pert", d.omega_an_pert},
                           {"d_omega_an", d.d_omega_an},
                           {"omega_shift_sign", d.omega_shift_sign},
                           {"level_base", d.level_base},
                           {"level_pert", d.level_pert},
                           {"level_delta", d.level_delta}});
    nlohmann::json base_only = nlohmann::json::array();
    for (const Branch& b : c.baseline_only) base_only.push_back(branch_json(b));
    nlohmann::json pert_only = nlohmann::json::array();
    for (const Branch& b : c.perturbed_only) pert_only.push_back(branch_json(b));
    return finish("perturb",
                  {{"outcome", c.destabilized ? "perturbation destabilizes oscillator" : "compared"},
                   {"matched", std::move(matched)},
                   {"baseline_only", std::move(base_only)},
                   {"perturbed_only", std::move(pert_only)},
                   {"zero_point_base", c.zero_point_base},
                   {"zero_point_pert", c.zero_point_pert}});
}

// ---------------------------------------------------------------------------
// oracle-check: polynomial path vs brute-force path
// ---------------------------------------------------------------------------

/// Pairing of accepted stationary-polynomial roots against brute-force
/// minima that pass the same convergence filter.
struct OracleCheck {
    struct Pair {
        double dp_polynomial = 0.0;
        double dp_oracle = 0.0;
        double rel_discrepancy = 0.0;
        bool ok = false;
    };
    std::vector<Pair> pairs;
    std::vector<double> only_polynomial;
    std::vector<double> only_oracle;
    double max_discrepancy = 0.0;
    bool match = false;
    double tolerance = 1e-8;
};

inline std::string oracle_check_csv(const OracleCheck& c) {
    using namespace ser_detail;
    std::string out;
    row(out, {"row_type", "dp_polynomial", "dp_oracle", "rel_discrepancy", "verdict"});
    for (const auto& p : c.pairs)
        row(out, {"pair", fmt12(p.dp_polynomial), fmt12(p.dp_oracle), fmt12(p.rel_discrepancy),
                  p.ok ? "ok" : "mismatch"});
    for (double v : c.only_polynomial) row(out, {"only_polynomial", fmt12(v), "", "", "mismatch"});
    for (double v : c.only_oracle) row(out, {"only_oracle", "", fmt12(v), "", "mismatch"});
    row(out, {"summary", "", "", fmt12(c.max_discrepancy), c.match ? "match" : "mismatch"});
    return out;
}

inline nlohmann::json oracle_check_json(const OracleCheck& c) {
    using namespace ser_detail;
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : c.pairs)
        pairs.push_back({{"dp_polynomial", p.dp_polynomial},
                         {"dp_oracle", p.dp_oracle},
                         {"rel_discrepancy", p.rel_discrepancy},
                         {"ok", p.ok}});
    return finish("oracle-check", {{"pairs", std::move(pairs)},
                                   {"only_polynomial", c.only_polynomial},
                                   {"only_oracle", c.only_oracle},
                                   {"max_discrepancy", c.max_discrepancy},
                                   {"tolerance", c.tolerance},
                                   {"verdict", c.match ? "match" : "mismatch"}});
}

} // namespace anharm
