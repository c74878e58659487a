// Copyright 2026 The qmapf Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmapf/grid_world.hpp"
#include "qmapf/penalty_builder.hpp"
#include "qmapf/qubo_model.hpp"

namespace qmapf {

/// Outcome of variable fixing for one window.
struct FixReport {
    std::vector<Variable> fixed_one;   // sorted
    std::vector<Variable> fixed_zero;  // sorted
    std::size_t original_count = 0;
    std::size_t reduced_count = 0;
    double reduction_pct = 0.0;
    bool solved_by_preprocess = false;

    void refresh() {
        reduced_count = original_count - fixed_one.size() - fixed_zero.size();
        reduction_pct = original_count == 0
                            ? 0.0
                            : 100.0 * static_cast<double>(original_count - reduced_count) /
                                  static_cast<double>(original_count);
        solved_by_preprocess = reduced_count == 0;
    }
};

/// The goal cannot be reached inside a late-time window.
class InfeasibleWindow : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct LogicalFixOptions {
    /// Extra steps a robot may lag behind its BFS frontier. Only used when
    /// waiting is allowed.
    int slack = 0;
    bool exclude_visited = true;
    /// Drop cells that cannot reach the goal before the arrival deadline
    /// (late-time windows only).
    bool goal_pruning = true;
};

struct LogicalFix {
    FixReport report;
    std::vector<std::vector<std::vector<Cell>>> admissible;  // [robot][t] -> sorted cells
    std::vector<bool> visited_relaxed;                        // exclusion of visited cells was dropped
};

namespace detail {

inline std::vector<std::vector<Cell>> band_sets(const GridMap& map, const RobotWindow& r, int slack,
                                                const CellSet& blocked, bool late_time, bool goal_pruning,
                                                bool& goal_within_horizon) {
    // Exact BFS shells give each cell's first arrival step.
    CellSet excluded = blocked;
    excluded.erase(r.start);
    excluded.erase(r.goal);
    const ReachabilityTable shells = bfs_layers(map, r.start, r.horizon, false, Exclusion::on, excluded);
    std::vector<int> first(map.cell_count(), kUnreachable);
    for (int t = 0; t <= r.horizon; ++t) {
        for (const Cell& c : shells.layers[static_cast<std::size_t>(t)]) first[map.id(c)] = t;
    }
    const int goal_step = first[map.id(r.goal)];
    goal_within_horizon = goal_step != kUnreachable;
    if (late_time && !goal_within_horizon) return {};

    const int deadline = goal_within_horizon ? std::min(r.horizon, goal_step + slack) : r.horizon;
    std::vector<int> to_goal;
    const bool prune = late_time && goal_pruning;
    if (prune) to_goal = bfs_distances(map, r.goal, excluded);
    const int earliest_goal = manhattan(r.start, r.goal);

    std::vector<std::vector<Cell>> sets(static_cast<std::size_t>(r.horizon) + 1);
    for (int t = 0; t <= r.horizon; ++t) {
        auto& out = sets[static_cast<std::size_t>(t)];
        if (t == 0) {
            out.push_back(r.start);
            continue;
        }
        for (std::size_t k = 0; k < first.size(); ++k) {
            const int f = first[k];
            if (f == kUnreachable || f > t || f < t - slack) continue;
            const Cell c = map.cell(k);
            if (c == r.goal) continue;
            if (prune) {
                if (t >= deadline) continue;
                if (to_goal[k] == kUnreachable || to_goal[k] > deadline - t) continue;
            }
            out.push_back(c);
        }
        if (goal_within_horizon && t >= goal_step && t >= earliest_goal) out.push_back(r.goal);
        std::sort(out.begin(), out.end());
    }
    return sets;
}

}  // namespace detail

/// Logical fixing: start pinned at step 0, cells outside the BFS reach of
/// each step fixed to 0, single-cell steps fixed to 1. Obstacles never get
/// an admissible slot.
inline LogicalFix fix_logical(const WindowSpec& spec, const LogicalFixOptions& opts = {}) {
    spec.validate();
    const VarLayout layout = spec.layout();
    const int slack = spec.allow_wait ? std::max(0, opts.slack) : 0;

    LogicalFix out;
    out.admissible.resize(spec.robots.size());
    out.visited_relaxed.assign(spec.robots.size(), false);
    std::vector<std::int8_t> state(layout.size(), 0);  // 0 fixed zero, 1 fixed one, 2 free

    for (std::size_t r = 0; r < spec.robots.size(); ++r) {
        const RobotWindow& rw = spec.robots[r];
        if (!rw.active) continue;
        const bool late = rw.goal_mode == GoalMode::late_time;
        bool reachable = false;
        auto sets = detail::band_sets(spec.map, rw, slack, opts.exclude_visited ? rw.visited : CellSet{}, late,
                                      opts.goal_pruning, reachable);
        const auto starved = [&] {
            if (sets.empty()) return true;
            return std::any_of(sets.begin(), sets.end(), [](const auto& s) { return s.empty(); });
        };
        if (starved() && opts.exclude_visited && !rw.visited.empty()) {
            sets = detail::band_sets(spec.map, rw, slack, {}, late, opts.goal_pruning, reachable);
            out.visited_relaxed[r] = true;
        }
        if (late && !reachable) {
            throw InfeasibleWindow("goal " + to_string(rw.goal) + " is not reachable within " +
                                   std::to_string(rw.horizon) + " steps");
        }
        for (int t = 0; t <= rw.horizon; ++t) {
            const auto& cells = sets[static_cast<std::size_t>(t)];
            if (cells.empty()) {
                throw InfeasibleWindow("no admissible cell at step " + std::to_string(t));
            }
            for (const Cell& c : cells) {
                state[spec.var(r, t, c)] = cells.size() == 1 ? 1 : 2;
            }
        }
        out.admissible[r] = std::move(sets);
    }

    FixReport& rep = out.report;
    rep.original_count = layout.size();
    for (Variable v = 0; v < state.size(); ++v) {
        if (state[v] == 0) rep.fixed_zero.push_back(v);
        if (state[v] == 1) rep.fixed_one.push_back(v);
    }
    rep.refresh();
    return out;
}

/// A model restricted to its free variables; original[k] is the variable of
/// the source model behind reduced index k.
struct FoldedModel {
    QuboModel model;
    std::vector<Variable> original;
};

/// Substitutes fixed values: zeros delete every incident entry, ones move
/// their diagonal into the constant and their pair weights onto the
/// partner's diagonal. Free variables are renumbered densely.
inline FoldedModel fold(const QuboModel& model, const std::vector<Variable>& fixed_one,
                        const std::vector<Variable>& fixed_zero) {
    constexpr std::int8_t kFree = -1;
    std::vector<std::int8_t> state(model.num_vars(), kFree);
    for (Variable v : fixed_zero) {
        if (v >= model.num_vars()) throw std::out_of_range("fixed variable outside the model");
        state[v] = 0;
    }
    for (Variable v : fixed_one) {
        if (v >= model.num_vars()) throw std::out_of_range("fixed variable outside the model");
        if (state[v] == 0) throw std::invalid_argument("variable fixed to both 0 and 1");
        state[v] = 1;
    }
    FoldedModel out;
    std::vector<Variable> reduced(model.num_vars(), 0);
    for (Variable v = 0; v < model.num_vars(); ++v) {
        if (state[v] == kFree) {
            reduced[v] = out.original.size();
            out.original.push_back(v);
        }
    }
    out.model = QuboModel(out.original.size(), model.constant());
    for (const auto& [key, w] : model.coefficients()) {
        const auto [a, b] = key;
        const std::int8_t sa = state[a];
        const std::int8_t sb = state[b];
        if (sa == 0 || sb == 0) continue;
        if (a == b) {
            if (sa == 1) {
                out.model.add_constant(w);
            } else {
                out.model.accumulate(reduced[a], reduced[a], w);
            }
        } else if (sa == 1 && sb == 1) {
            out.model.add_constant(w);
        } else if (sa == 1) {
            out.model.accumulate(reduced[b], reduced[b], w);
        } else if (sb == 1) {
            out.model.accumulate(reduced[a], reduced[a], w);
        } else {
            out.model.accumulate(reduced[a], reduced[b], w);
        }
    }
    return out;
}

inline FoldedModel fold(const QuboModel& model, const FixReport& report) {
    return fold(model, report.fixed_one, report.fixed_zero);
}

/// Rebuilds a full assignment from a reduced one plus the fixed-to-one set.
inline Assignment expand(const FoldedModel& folded, std::span<const std::uint8_t> reduced,
                         const std::vector<Variable>& fixed_one, std::size_t num_vars) {
    if (reduced.size() != folded.original.size()) {
        throw std::invalid_argument("reduced assignment size does not match the folded model");
    }
    Assignment full(num_vars, 0);
    for (Variable v : fixed_one) full[v] = 1;
    for (std::size_t k = 0; k < reduced.size(); ++k) full[folded.original[k]] = reduced[k];
    return full;
}

struct NumericFixResult {
    std::vector<Variable> fixed_zero;  // indices of the input model, sorted
    FoldedModel reduced;
    int rounds = 0;
};

/// Fixes to 0 every variable whose diagonal is an outlier (above mean +
/// aggressiveness * stddev of the free diagonals) and whose diagonal stays
/// positive even when all its negative couplings fire. Such a variable is 0
/// in every minimizer. Repeats until nothing changes; never fixes to 1.
inline NumericFixResult fix_numeric_diagonal(const QuboModel& model, double aggressiveness) {
    const std::size_t n = model.num_vars();
    std::vector<std::uint8_t> zero(n, 0);
    NumericFixResult out;
    for (;;) {
        std::vector<double> diag(n, 0.0);
        std::vector<double> negative(n, 0.0);
        for (const auto& [key, w] : model.coefficients()) {
            const auto [a, b] = key;
            if (zero[a] || zero[b]) continue;
            if (a == b) {
                diag[a] += w;
            } else if (w < 0.0) {
                negative[a] += w;
                negative[b] += w;
            }
        }
        std::size_t free_count = 0;
        double sum = 0.0;
        for (Variable v = 0; v < n; ++v) {
            if (zero[v]) continue;
            ++free_count;
            sum += diag[v];
        }
        if (free_count == 0) break;
        const double mean = sum / static_cast<double>(free_count);
        double var = 0.0;
        for (Variable v = 0; v < n; ++v) {
            if (!zero[v]) var += (diag[v] - mean) * (diag[v] - mean);
        }
        const double threshold = mean + aggressiveness * std::sqrt(var / static_cast<double>(free_count));
        std::vector<Variable> round;
        for (Variable v = 0; v < n; ++v) {
            if (!zero[v] && diag[v] > threshold && diag[v] + negative[v] > 0.0) round.push_back(v);
        }
        if (round.empty()) break;
        ++out.rounds;
        for (Variable v : round) zero[v] = 1;
    }
    for (Variable v = 0; v < n; ++v) {
        if (zero[v]) out.fixed_zero.push_back(v);
    }
    out.reduced = fold(model, {}, out.fixed_zero);
    return out;
}

}  // namespace qmapf
