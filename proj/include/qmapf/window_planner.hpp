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
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmapf/grid_world.hpp"
#include "qmapf/penalty_builder.hpp"
#include "qmapf/post_processor.hpp"
#include "qmapf/preprocessor.hpp"
#include "qmapf/qubo_model.hpp"
#include "qmapf/solvers.hpp"

namespace qmapf {

struct RobotSpec {
    std::size_t id = 0;
    Cell start;
    Cell goal;
    int release = 0;

    friend bool operator==(const RobotSpec&, const RobotSpec&) = default;
};

struct WindowConfig {
    int window_len = 6;
    int max_windows = 20;
    int max_retries = 5;
    double aggressiveness = 3.0;
    bool numeric_fixing = true;
    int potential_radius = 1;
    GoalRamp goal_ramp = GoalRamp::late;

    friend bool operator==(const WindowConfig&, const WindowConfig&) = default;

    void validate() const {
        if (window_len < 2) throw std::invalid_argument("window length must be at least 2");
        if (max_windows < 1) throw std::invalid_argument("max_windows must be at least 1");
        if (max_retries < 1) throw std::invalid_argument("max_retries must be at least 1");
        if (potential_radius < 0) throw std::invalid_argument("potential radius must be non-negative");
    }
};

enum class PlanStatus { reached_goal, max_windows_exhausted, infeasible, collision_unresolved };

inline std::string to_string(PlanStatus s) {
    switch (s) {
        case PlanStatus::reached_goal: return "reached_goal";
        case PlanStatus::max_windows_exhausted: return "max_windows_exhausted";
        case PlanStatus::infeasible: return "infeasible";
        case PlanStatus::collision_unresolved: return "collision_unresolved";
    }
    return "unknown";
}

struct RobotPlan {
    std::size_t id = 0;
    Cell goal;
    TimedPath path;
    std::vector<int> provenance;  // window that produced each cell; -1 for the start
    PlanStatus status = PlanStatus::max_windows_exhausted;

    std::size_t moves() const { return path.moves(); }
};

/// A repair or retry decision taken while solving a window.
struct RepairEvent {
    int attempt = 0;
    std::size_t robot = 0;
    std::string action;
    int t = -1;
};

struct WindowRecord {
    int index = 0;
    int start_time = 0;
    int length = 0;
    std::vector<std::size_t> robots;
    std::vector<GoalMode> goal_modes;
    FixReport preprocess;
    std::size_t numeric_fixed = 0;
    int attempts = 0;
    int solver_calls = 0;
    int slack = 0;
    double best_energy = 0.0;
    bool accepted = false;
    bool collision_free = true;
    std::vector<RepairEvent> events;
};

struct Plan {
    std::vector<RobotPlan> robots;
    std::vector<WindowRecord> window_log;
    std::vector<Conflict> unresolved;
    int waits_inserted = 0;

    bool all_reached() const {
        return !robots.empty() && std::all_of(robots.begin(), robots.end(), [](const RobotPlan& r) {
            return r.status == PlanStatus::reached_goal;
        });
    }
    std::size_t total_moves() const {
        std::size_t n = 0;
        for (const auto& r : robots) n += r.moves();
        return n;
    }
    std::size_t original_vars() const {
        std::size_t n = 0;
        for (const auto& w : window_log) {
            if (w.accepted) n += w.preprocess.original_count;
        }
        return n;
    }
    std::size_t reduced_vars() const {
        std::size_t n = 0;
        for (const auto& w : window_log) {
            if (w.accepted) n += w.preprocess.reduced_count;
        }
        return n;
    }
    double reduction_pct() const {
        const std::size_t orig = original_vars();
        return orig == 0 ? 0.0 : 100.0 * static_cast<double>(orig - reduced_vars()) / static_cast<double>(orig);
    }
    bool solved_by_preprocess() const {
        bool any = false;
        for (const auto& w : window_log) {
            if (!w.accepted) continue;
            any = true;
            if (!w.preprocess.solved_by_preprocess) return false;
        }
        return any;
    }
};

/// Called before each window; returns the map that window plans on.
using MapUpdate = std::function<GridMap(int window_index, int start_time, const GridMap& current)>;

struct PlannerHooks {
    MapUpdate map_update;
};

/// Appends a window path whose first cell repeats the plan's last cell.
/// Times continue by exactly one per step.
inline RobotPlan stitch(RobotPlan plan, const std::vector<Cell>& window_path, int window_index) {
    if (window_path.empty()) return plan;
    auto& cells = plan.path.cells;
    if (cells.empty()) {
        cells = window_path;
        plan.provenance.assign(window_path.size(), window_index);
        plan.provenance.front() = -1;
        return plan;
    }
    if (window_path.front() != cells.back()) {
        throw std::logic_error("window starts at " + to_string(window_path.front()) + " but the plan ends at " +
                               to_string(cells.back()));
    }
    cells.insert(cells.end(), window_path.begin() + 1, window_path.end());
    plan.provenance.insert(plan.provenance.end(), window_path.size() - 1, window_index);
    return plan;
}

struct PathDiagnosis {
    std::optional<Violation> violation;
    bool valid() const { return !violation; }
};

/// Checks one cell per step, obstacle freedom, step legality and that the
/// goal is not claimed before its Manhattan distance from the first cell.
inline PathDiagnosis validate_path(const GridMap& map, const Occupancy& steps, const Cell& goal,
                                   bool allow_wait = false) {
    std::vector<Cell> path;
    path.reserve(steps.size());
    for (std::size_t t = 0; t < steps.size(); ++t) {
        if (steps[t].size() != 1) return {Violation{ViolationKind::one_hot, static_cast<int>(t)}};
        path.push_back(steps[t].front());
    }
    return {detect_invalid_move(map, path, allow_wait, goal)};
}

inline PathDiagnosis validate_path(const GridMap& map, const std::vector<Cell>& path, const Cell& goal,
                                   bool allow_wait = false) {
    return {detect_invalid_move(map, path, allow_wait, goal)};
}

/// Every robot marked reached_goal must start at its start cell, end on its
/// goal, move legally, and never share a cell with another robot at the
/// same time.
inline std::optional<std::string> validate_plan(const GridMap& map, const Plan& plan,
                                                const std::vector<RobotSpec>& specs) {
    const bool allow_wait = plan.robots.size() > 1;
    std::vector<TimedPath> done;
    for (std::size_t r = 0; r < plan.robots.size(); ++r) {
        const RobotPlan& rp = plan.robots[r];
        if (rp.status != PlanStatus::reached_goal) continue;
        const RobotSpec& spec = specs.at(r);
        if (rp.path.cells.empty()) return "robot " + std::to_string(rp.id) + " has an empty path";
        if (rp.path.cells.front() != spec.start) return "robot " + std::to_string(rp.id) + " does not start at its start";
        if (rp.path.cells.back() != spec.goal) return "robot " + std::to_string(rp.id) + " does not end on its goal";
        if (rp.path.start_time < spec.release) return "robot " + std::to_string(rp.id) + " starts before release";
        if (auto v = detect_invalid_move(map, rp.path.cells, allow_wait, spec.goal)) {
            return "robot " + std::to_string(rp.id) + ": " + to_string(v->kind) + " at step " + std::to_string(v->t);
        }
        done.push_back(rp.path);
    }
    if (auto c = first_vertex_conflict(done)) {
        return "vertex collision at t=" + std::to_string(c->t) + " on " + to_string(c->cell);
    }
    return std::nullopt;
}

namespace detail {

inline void check_robots(const GridMap& map, const std::vector<RobotSpec>& robots) {
    if (robots.empty()) throw std::invalid_argument("at least one robot is required");
    for (std::size_t a = 0; a < robots.size(); ++a) {
        map.require_free(robots[a].start);
        map.require_free(robots[a].goal);
        if (robots[a].release < 0) throw std::invalid_argument("release times must be non-negative");
        for (std::size_t b = a + 1; b < robots.size(); ++b) {
            if (robots[a].goal == robots[b].goal) {
                throw std::invalid_argument("robots " + std::to_string(robots[a].id) + " and " +
                                            std::to_string(robots[b].id) + " share a goal cell");
            }
            if (robots[a].start == robots[b].start && robots[a].release == robots[b].release) {
                throw std::invalid_argument("robots " + std::to_string(robots[a].id) + " and " +
                                            std::to_string(robots[b].id) + " start on the same cell");
            }
        }
    }
}

struct WindowOutcome {
    std::vector<std::vector<Cell>> paths;  // per active robot, clipped at goal arrival
    bool collision_free = true;
};

inline void merge_sorted(std::vector<Variable>& into, const std::vector<Variable>& extra) {
    std::vector<Variable> merged;
    merged.reserve(into.size() + extra.size());
    std::merge(into.begin(), into.end(), extra.begin(), extra.end(), std::back_inserter(merged));
    into = std::move(merged);
}

/// Builds the window spec for `active`, switching a robot to the
/// approximation goal whenever its goal is out of reach for this window.
inline WindowSpec make_window(const GridMap& map, const std::vector<RobotSpec>& robots,
                              const std::vector<std::size_t>& active, const std::vector<Cell>& current,
                              const std::vector<CellSet>& visited, int length, bool allow_wait,
                              const PenaltyWeights& weights, const WindowConfig& cfg, int slack) {
    WindowSpec spec;
    spec.map = map;
    spec.weights = weights;
    spec.allow_wait = allow_wait;
    spec.potential_radius = cfg.potential_radius;
    spec.goal_ramp = cfg.goal_ramp;
    LogicalFixOptions opts;
    opts.slack = slack;
    for (std::size_t r : active) {
        RobotWindow rw;
        rw.start = current[r];
        rw.goal = robots[r].goal;
        rw.horizon = length;
        rw.visited = visited[r];
        rw.goal_mode = manhattan(rw.start, rw.goal) < length ? GoalMode::late_time : GoalMode::approximation;
        spec.robots.push_back(rw);
    }
    for (std::size_t k = 0; k < spec.robots.size(); ++k) {
        WindowSpec single = spec;
        single.robots = {spec.robots[k]};
        try {
            (void)fix_logical(single, opts);
        } catch (const InfeasibleWindow&) {
            if (spec.robots[k].goal_mode != GoalMode::late_time) throw;
            spec.robots[k].goal_mode = GoalMode::approximation;
        }
    }
    return spec;
}

}  // namespace detail

/// Sequential windowed planning for one or more robots on a shared clock.
/// Every window is a fresh QUBO over all robots still travelling: logical
/// fixing, folding, numeric fixing, normalization, solving, continuity
/// repair and validation, with full-window restarts on failure.
inline Plan plan_windows(const GridMap& base_map, const std::vector<RobotSpec>& robots,
                         const PenaltyWeights& weights, const WindowConfig& cfg, const SolverConfig& solver,
                         const PlannerHooks& hooks = {}) {
    cfg.validate();
    weights.validate();
    solver.validate();
    detail::check_robots(base_map, robots);
    const std::size_t n = robots.size();
    const bool allow_wait = n > 1;

    Plan plan;
    plan.robots.resize(n);
    std::vector<Cell> current(n);
    std::vector<CellSet> visited(n);
    std::vector<bool> finished(n, false);
    std::vector<bool> started(n, false);
    int clock = robots.front().release;
    for (std::size_t r = 0; r < n; ++r) {
        plan.robots[r].id = robots[r].id;
        plan.robots[r].goal = robots[r].goal;
        current[r] = robots[r].start;
        clock = std::min(clock, robots[r].release);
        const auto dist = bfs_distances(base_map, robots[r].start);
        if (dist[base_map.id(robots[r].goal)] == kUnreachable) {
            plan.robots[r].status = PlanStatus::infeasible;
            finished[r] = true;
        }
    }

    GridMap map = base_map;
    int length = cfg.window_len;
    bool escalated = false;
    int window = 0;
    while (window < cfg.max_windows) {
        std::vector<std::size_t> active;
        int next_release = -1;
        for (std::size_t r = 0; r < n; ++r) {
            if (finished[r]) continue;
            if (robots[r].release <= clock) {
                active.push_back(r);
            } else if (next_release < 0 || robots[r].release < next_release) {
                next_release = robots[r].release;
            }
        }
        if (active.empty()) {
            if (next_release < 0) break;
            while (clock < next_release) clock += cfg.window_len;
            continue;
        }
        for (std::size_t r : active) {
            if (started[r]) continue;
            started[r] = true;
            plan.robots[r].path.start_time = clock;
            plan.robots[r].path.cells = {robots[r].start};
            plan.robots[r].provenance = {-1};
            visited[r].insert(robots[r].start);
        }

        if (hooks.map_update) map = hooks.map_update(window, clock, map);
        CellSet parked;
        std::vector<TimedPath> parked_paths;
        for (std::size_t r = 0; r < n; ++r) {
            if (finished[r] && plan.robots[r].status == PlanStatus::reached_goal) {
                parked.insert(robots[r].goal);
                parked_paths.push_back({clock, {robots[r].goal}});
            }
        }
        GridMap window_map = map;
        if (!parked.empty()) {
            const GridMap blocked = map.with_obstacles(parked);
            bool keeps_all = true;
            for (std::size_t r : active) {
                const auto d = bfs_distances(blocked, current[r]);
                if (!blocked.is_free(current[r]) || d[blocked.id(robots[r].goal)] == kUnreachable) keeps_all = false;
            }
            if (keeps_all) window_map = blocked;
        }

        WindowRecord record;
        record.index = window;
        record.start_time = clock;
        record.length = length;
        for (std::size_t r : active) record.robots.push_back(robots[r].id);

        std::optional<detail::WindowOutcome> accepted;
        std::optional<detail::WindowOutcome> fallback;
        WindowRecord fallback_record;
        for (int attempt = 0; attempt < cfg.max_retries && !accepted; ++attempt) {
            record.attempts = attempt + 1;
            const int slack = allow_wait ? attempt : 0;
            WindowSpec spec;
            LogicalFix fix;
            try {
                spec = detail::make_window(window_map, robots, active, current, visited, length, allow_wait,
                                           weights, cfg, slack);
                fix = fix_logical(spec, {slack, true, true});
            } catch (const InfeasibleWindow&) {
                record.events.push_back({attempt, 0, "no admissible layout", -1});
                continue;
            }
            for (std::size_t k = 0; k < spec.robots.size(); ++k) {
                spec.robots[k].admissible = fix.admissible[k];
                if (fix.visited_relaxed[k]) {
                    record.events.push_back({attempt, robots[active[k]].id, "visited exclusion relaxed", -1});
                }
            }
            record.goal_modes.clear();
            for (const auto& rw : spec.robots) record.goal_modes.push_back(rw.goal_mode);
            record.slack = slack;

            const QuboModel model = build_window_model(spec);
            FixReport report = fix.report;
            FoldedModel folded = fold(model, report);
            record.numeric_fixed = 0;
            if (cfg.numeric_fixing && folded.model.num_vars() > 0) {
                const NumericFixResult numeric = fix_numeric_diagonal(folded.model, cfg.aggressiveness);
                if (!numeric.fixed_zero.empty()) {
                    std::vector<Variable> extra;
                    for (Variable v : numeric.fixed_zero) extra.push_back(folded.original[v]);
                    std::sort(extra.begin(), extra.end());
                    detail::merge_sorted(report.fixed_zero, extra);
                    report.refresh();
                    folded = fold(model, report);
                    record.numeric_fixed = extra.size();
                }
            }
            record.preprocess = report;

            Assignment full;
            if (folded.model.num_vars() == 0) {
                full = expand(folded, Assignment{}, report.fixed_one, model.num_vars());
            } else {
                const NormalizeResult norm = normalize(folded.model, weights.scale_for(folded.model.num_vars()));
                SolverConfig sc = solver;
                sc.seed = derive_seed(solver.seed, static_cast<std::uint64_t>(window), static_cast<std::uint64_t>(attempt));
                const SampleSet samples = solve(norm.model, sc);
                ++record.solver_calls;
                full = expand(folded, samples.best().bits, report.fixed_one, model.num_vars());
            }
            record.best_energy = model.energy(full);

            const auto occupancy = decode(full, spec.layout());
            detail::WindowOutcome outcome;
            bool valid = true;
            for (std::size_t k = 0; k < active.size() && valid; ++k) {
                const std::size_t r = active[k];
                const Cell goal = robots[r].goal;
                RepairResult repair = fix_one_hot_continuity(window_map, occupancy[k], current[r], allow_wait, goal);
                auto arrival = std::find(repair.path.begin(), repair.path.end(), goal);
                if (!repair.ok() && arrival == repair.path.end()) {
                    record.events.push_back({attempt, robots[r].id, "unrepairable one-hot step", *repair.failed_at});
                    valid = false;
                    break;
                }
                for (std::size_t t = 1; t < occupancy[k].size() && t < repair.path.size(); ++t) {
                    if (occupancy[k][t].size() > 1) {
                        record.events.push_back({attempt, robots[r].id, "continuity repair", static_cast<int>(t)});
                    }
                }
                std::vector<Cell> path(repair.path.begin(),
                                       arrival == repair.path.end() ? repair.path.end() : arrival + 1);
                if (auto bad = detect_invalid_move(window_map, path, allow_wait, goal)) {
                    record.events.push_back({attempt, robots[r].id, "invalid move: " + to_string(bad->kind), bad->t});
                    valid = false;
                    break;
                }
                outcome.paths.push_back(std::move(path));
            }
            if (!valid) continue;

            std::vector<TimedPath> timed = parked_paths;
            for (const auto& p : outcome.paths) timed.push_back({clock, p});
            if (auto c = first_vertex_conflict(timed)) {
                outcome.collision_free = false;
                record.events.push_back({attempt, 0, "vertex collision", c->t - clock});
                if (!fallback) {
                    fallback = outcome;
                    fallback_record = record;
                }
                continue;
            }
            accepted = outcome;
        }

        if (!accepted && fallback) {
            const auto events = record.events;
            const int attempts = record.attempts;
            record = fallback_record;
            record.events = events;
            record.attempts = attempts;
            accepted = fallback;
        }
        record.accepted = accepted.has_value();
        record.collision_free = accepted ? accepted->collision_free : false;
        plan.window_log.push_back(record);
        ++window;

        if (!accepted) {
            if (!escalated) {
                escalated = true;
                length = cfg.window_len * 2;
                continue;
            }
            break;
        }
        for (std::size_t k = 0; k < active.size(); ++k) {
            const std::size_t r = active[k];
            const auto& path = accepted->paths[k];
            plan.robots[r] = stitch(std::move(plan.robots[r]), path, record.index);
            visited[r].insert(path.begin(), path.end());
            current[r] = path.back();
            if (current[r] == robots[r].goal) {
                finished[r] = true;
                plan.robots[r].status = PlanStatus::reached_goal;
            }
        }
        clock += length;
        length = cfg.window_len;
    }
    for (std::size_t r = 0; r < n; ++r) {
        if (!finished[r]) plan.robots[r].status = PlanStatus::max_windows_exhausted;
    }
    return plan;
}

/// Single-robot planning; waiting in place is disabled.
inline Plan plan_single(const GridMap& map, const RobotSpec& robot, const PenaltyWeights& weights,
                        const WindowConfig& cfg, const SolverConfig& solver, const PlannerHooks& hooks = {}) {
    return plan_windows(map, {robot}, weights, cfg, solver, hooks);
}

}  // namespace qmapf
