#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "anharmonic/sensitivity.hpp"
#include "anharmonic/spectrum.hpp"

namespace anharm {

enum class SweepEventKind { branch_born, branch_died, filter_flip };

inline std::string_view to_string(SweepEventKind k) {
    switch (k) {
        case SweepEventKind::branch_born: return "branch_born";
        case SweepEventKind::branch_died: return "branch_died";
        case SweepEventKind::filter_flip: return "filter_flip";
    }
    return "";
}

/// One retained branch at one sweep step, carrying its persistent track id.
struct SweepBranchState {
    int track = 0;
    double dp_min = 0.0;
    double omega_an = 0.0;
    double q = 0.0;
    double w = 0.0;
};

struct SweepStep {
    double coeff_value = 0.0;
    std::vector<SweepBranchState> branches;
};

struct SweepEvent {
    int step = 0; ///< step at which the change is first visible
    SweepEventKind kind{};
    int track = 0;
    std::string detail;
};

struct SweepOptions {
    /// A step is flagged unstable when some branch's relative dp_min jump
    /// exceeds this factor times the relative coefficient step.
    double amplification_threshold = 10.0;
    /// Branches are the same track when their dp_min values differ by less
    /// than this in log space; beyond it the old track is declared dead.
    double match_log_window = 0.22314355131420976; // log(1.25)
};

/// A coefficient path with branch tracking: retained branches matched step to
/// step by nearest dp_min in log space, births/deaths/filter transitions
/// recorded as events, and steps where the dp_min response amplifies the
/// coefficient step beyond the threshold flagged as unstable.
struct SweepTrace {
    int coeff_index = 0;
    std::vector<double> values;
    std::vector<SweepStep> steps;
    std::vector<SweepEvent> events;
    std::vector<int> instability_flags;
};

namespace detail {

struct TrackedSolve {
    SolveResult solved;
    std::vector<int> tracks; // per retained entry of solved.retained
};

inline std::string short_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Greedy nearest-log-distance matching between two retained branch sets.
// Returns pairs (index into prev retained, index into next retained).
inline std::vector<std::pair<std::size_t, std::size_t>> match_retained(
    const std::vector<double>& prev_dp, const std::vector<double>& next_dp, double window) {
    struct Cand {
        double dist;
        std::size_t p, n;
    };
    std::vector<Cand> cands;
    for (std::size_t p = 0; p < prev_dp.size(); ++p)
        for (std::size_t n = 0; n < next_dp.size(); ++n) {
            const double d = std::abs(std::log(next_dp[n] / prev_dp[p]));
            if (d <= window) cands.push_back({d, p, n});
        }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (a.p != b.p) return a.p < b.p;
        return a.n < b.n;
    });
    std::vector<bool> p_used(prev_dp.size(), false), n_used(next_dp.size(), false);
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const Cand& c : cands) {
        if (p_used[c.p] || n_used[c.n]) continue;
        p_used[c.p] = n_used[c.n] = true;
        out.emplace_back(c.p, c.n);
    }
    return out;
}

// Nearest branch of any classification (accepted or rejected) to dp_ref.
inline const Branch* nearest_any_branch(const SolveResult& solved, double dp_ref, double window) {
    const Branch* best = nullptr;
    double best_dist = window;
    for (const Branch& b : solved.branches) {
        const double d = std::abs(std::log(b.dp_min / dp_ref));
        if (d <= best_dist) {
            best_dist = d;
            best = &b;
        }
    }
    return best;
}

} // namespace detail

inline SweepTrace sweep(const OscillatorSpec& spec, int coeff_index, double lo, double hi,
                        int steps, SweepOptions opts = {}) {
    if (steps < 2) throw std::invalid_argument("sweep needs at least 2 steps");
    if (coeff_index < 2 || coeff_index > spec.order)
        throw std::invalid_argument("sweep coefficient index outside 2..order");
    if (coeff_index == 2 && !(std::min(lo, hi) > 0.0))
        throw std::invalid_argument("sweeping a'_2 requires a strictly positive range");

    SweepTrace trace;
    trace.coeff_index = coeff_index;

    std::vector<detail::TrackedSolve> solves;
    solves.reserve(static_cast<std::size_t>(steps));
    for (int s = 0; s < steps; ++s) {
        const double value = lo + (hi - lo) * s / (steps - 1);
        trace.values.push_back(value);
        OscillatorSpec stepped = spec;
        stepped.intrinsic_coeffs[coeff_index] = value; // swept value replaces the effective one
        stepped.perturbation_coeffs.erase(coeff_index);
        solves.push_back({solve_oscillator(stepped), {}});
    }

    int next_track = 1;
    for (int s = 0; s < steps; ++s) {
        auto& cur = solves[static_cast<std::size_t>(s)];
        cur.tracks.assign(cur.solved.retained.size(), 0);
        auto dp_of = [](const detail::TrackedSolve& ts) {
            std::vector<double> dp;
            for (std::size_t idx : ts.solved.retained)
                dp.push_back(ts.solved.branches[idx].dp_min);
            return dp;
        };

        if (s == 0) {
            for (auto& t : cur.tracks) t = next_track++;
        } else {
            auto& prev = solves[static_cast<std::size_t>(s) - 1];
            const std::vector<double> prev_dp = dp_of(prev);
            const std::vector<double> cur_dp = dp_of(cur);
            const auto pairs = detail::match_retained(prev_dp, cur_dp, opts.match_log_window);

            std::vector<bool> prev_matched(prev_dp.size(), false), cur_matched(cur_dp.size(), false);
            bool flagged = false;
            const double v0 = trace.values[static_cast<std::size_t>(s) - 1];
            const double v1 = trace.values[static_cast<std::size_t>(s)];
            const double rel_coeff_step =
                std::abs(v1 - v0) / std::max({std::abs(v0), std::abs(v1), 1e-300});
            for (const auto& [p, n] : pairs) {
                prev_matched[p] = true;
                cur_matched[n] = true;
                cur.tracks[n] = prev.tracks[p];
                const double rel_jump = std::abs(cur_dp[n] - prev_dp[p]) / prev_dp[p];
                if (!flagged && rel_jump > opts.amplification_threshold * rel_coeff_step) {
                    trace.instability_flags.push_back(s);
                    flagged = true;
                }
            }
            for (std::size_t p = 0; p < prev_dp.size(); ++p) {
                if (prev_matched[p]) continue;
                const int track = prev.tracks[p];
                const Branch* ghost =
                    detail::nearest_any_branch(cur.solved, prev_dp[p], opts.match_log_window);
                if (ghost && ghost->rejection_reason == RejectionReason::convergence_violation) {
                    trace.events.push_back({s, SweepEventKind::filter_flip, track,
                                            "track " + std::to_string(track) + " at dp_min " +
                                                detail::short_num(ghost->dp_min) +
                                                " filtered out (worst ratio above eta)"});
                } else {
                    trace.events.push_back({s, SweepEventKind::branch_died, track,
                                            "track " + std::to_string(track) + " near dp_min " +
                                                detail::short_num(prev_dp[p]) +
                                                " has no successor (fold or classification change)"});
                }
            }
            for (std::size_t n = 0; n < cur_dp.size(); ++n) {
                if (cur_matched[n]) continue;
                cur.tracks[n] = next_track++;
                const Branch* ghost =
                    detail::nearest_any_branch(prev.solved, cur_dp[n], opts.match_log_window);
                if (ghost && ghost->rejection_reason == RejectionReason::convergence_violation) {
                    trace.events.push_back({s, SweepEventKind::filter_flip, cur.tracks[n],
                                            "track " + std::to_string(cur.tracks[n]) + " at dp_min " +
                                                detail::short_num(cur_dp[n]) +
                                                " passes the filter again"});
                } else {
                    trace.events.push_back({s, SweepEventKind::branch_born, cur.tracks[n],
                                            "new branch at dp_min " + detail::short_num(cur_dp[n])});
                }
            }
        }

        SweepStep step_out;
        step_out.coeff_value = trace.values[static_cast<std::size_t>(s)];
        for (std::size_t k = 0; k < cur.solved.retained.size(); ++k) {
            const std::size_t idx = cur.solved.retained[k];
            const Branch& b = cur.solved.branches[idx];
            const BranchParameters& p = *cur.solved.params[idx];
            step_out.branches.push_back({cur.tracks[k], b.dp_min, p.omega_an, p.q, p.w});
        }
        trace.steps.push_back(std::move(step_out));
    }
    return trace;
}

/// Per-branch comparison of a baseline spec against the same spec with
/// additive coefficient deltas merged into the perturbation layer.
struct BranchDelta {
    int track = 0;                ///< 1-based pair label
    int baseline_index = 0;       ///< index_j in the baseline solve
    int perturbed_index = 0;      ///< index_j in the perturbed solve
    double dp_min_base = 0.0, dp_min_pert = 0.0, d_dp_min = 0.0;
    double omega_an_base = 0.0, omega_an_pert = 0.0, d_omega_an = 0.0;
    int omega_shift_sign = 0; ///< sign of omega_an_pert - omega_an_base
    std::vector<double> level_base;  ///< per n = 0..n_max
    std::vector<double> level_pert;
    std::vector<double> level_delta;
};

struct PerturbedComparison {
    bool destabilized = false; ///< the perturbed spec retains no branch
    std::vector<BranchDelta> matched;
    std::vector<Branch> baseline_only; ///< retained baseline branches with no partner
    std::vector<Branch> perturbed_only;
    double zero_point_base = 0.0;
    double zero_point_pert = std::numeric_limits<double>::quiet_NaN();
};

inline PerturbedComparison perturbed_compare(const OscillatorSpec& spec,
                                             const std::map<int, double>& delta) {
    for (const auto& [i, v] : delta) {
        if (i < 2 || i > spec.order)
            throw std::invalid_argument("delta." + std::to_string(i) +
                                        ": coefficient index outside 2..order");
        if (!std::isfinite(v))
            throw std::invalid_argument("delta." + std::to_string(i) + ": must be finite");
    }
    OscillatorSpec perturbed = spec;
    for (const auto& [i, v] : delta) perturbed.perturbation_coeffs[i] += v;
    if (!(perturbed.effective_coefficient(2) > 0.0))
        throw std::invalid_argument("perturbation drives a'_2 nonpositive");

    const SpectrumTable base = build_spectrum(spec); // throws NoAdmissibleState if empty
    PerturbedComparison out;
    out.zero_point_base = base.zero_point_energy;

    SolveResult pert_solved = solve_oscillator(perturbed);
    if (pert_solved.retained.empty()) {
        out.destabilized = true;
        out.baseline_only = base.branches;
        return out;
    }
    const SpectrumTable pert = energy_levels(perturbed, pert_solved.branches, pert_solved.params);
    out.zero_point_pert = pert.zero_point_energy;

    std::vector<double> base_dp, pert_dp;
    for (const Branch& b : base.branches) base_dp.push_back(b.dp_min);
    for (const Branch& b : pert.branches) pert_dp.push_back(b.dp_min);
    const auto pairs = detail::match_retained(base_dp, pert_dp, 0.22314355131420976);

    std::vector<bool> base_used(base_dp.size(), false), pert_used(pert_dp.size(), false);
    int track = 1;
    for (const auto& [p, n] : pairs) {
        base_used[p] = true;
        pert_used[n] = true;
        BranchDelta d;
        d.track = track++;
        d.baseline_index = base.branches[p].index_j;
        d.perturbed_index = pert.branches[n].index_j;
        d.dp_min_base = base_dp[p];
        d.dp_min_pert = pert_dp[n];
        d.d_dp_min = pert_dp[n] - base_dp[p];
        d.omega_an_base = base.params[p].omega_an;
        d.omega_an_pert = pert.params[n].omega_an;
        d.d_omega_an = d.omega_an_pert - d.omega_an_base;
        d.omega_shift_sign = d.d_omega_an > 0.0 ? 1 : (d.d_omega_an < 0.0 ? -1 : 0);
        for (int nn = 0; nn <= std::min(base.n_max, pert.n_max); ++nn) {
            const auto idx = static_cast<std::size_t>(nn);
            d.level_base.push_back(base.levels[p][idx]);
            d.level_pert.push_back(pert.levels[n][idx]);
            d.level_delta.push_back(pert.levels[n][idx] - base.levels[p][idx]);
        }
        out.matched.push_back(std::move(d));
    }
    for (std::size_t p = 0; p < base_dp.size(); ++p)
        if (!base_used[p]) out.baseline_only.push_back(base.branches[p]);
    for (std::size_t n = 0; n < pert_dp.size(); ++n)
        if (!pert_used[n]) out.perturbed_only.push_back(pert.branches[n]);
    return out;
}

} // namespace anharm
