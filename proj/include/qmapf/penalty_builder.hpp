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
#include <iterator>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmapf/grid_world.hpp"
#include "qmapf/qubo_model.hpp"

namespace qmapf {

/// Penalty weights. Defaults are tuned for the shipped scenarios; none of
/// them is a universal constant.
struct PenaltyWeights {
    double k_hot = 4.0;
    double k_adj = 2.0;
    double k_start = 4.0;
    double k_goal = 2.0;
    double k_lock = 1.0;
    double k_bt = 1.5;
    double k_tel = 3.0;
    double k_approx = 1.0;
    double k_coll = 4.0;
    double k_obs = 4.0;        // explicit obstacle mode only
    double goal_ramp_max = 2.0;
    double visited_softening = 0.5;
    std::optional<double> norm_scale;  // unset: 2.0 below 80 free variables, else 1.0

    void validate() const {
        for (double k : {k_hot, k_adj, k_start, k_goal, k_lock, k_bt, k_tel, k_approx, k_coll, k_obs}) {
            if (!(k > 0.0)) throw std::invalid_argument("penalty weights must be strictly positive");
        }
        if (!(goal_ramp_max >= 1.0)) throw std::invalid_argument("goal_ramp_max must be at least 1");
        if (!(visited_softening > 0.0 && visited_softening < 1.0)) {
            throw std::invalid_argument("visited_softening must lie in (0, 1)");
        }
        if (norm_scale && !(*norm_scale > 0.0)) throw std::invalid_argument("norm_scale must be positive");
    }

    friend bool operator==(const PenaltyWeights&, const PenaltyWeights&) = default;

    double scale_for(std::size_t free_vars) const {
        if (norm_scale) return *norm_scale;
        return free_vars < 80 ? 2.0 : 1.0;
    }
};

enum class GoalMode { late_time, approximation };

/// Shape of the goal reward over time. Only `late` is used for planning; the
/// other two exist for A/B experiments.
enum class GoalRamp { late, constant, early };

/// One robot's share of a planning window. Local step t maps to window-clock
/// step `time_offset + t`.
struct RobotWindow {
    Cell start;
    Cell goal;
    bool active = true;
    int horizon = 1;
    int time_offset = 0;
    GoalMode goal_mode = GoalMode::late_time;
    CellSet visited;
    /// admissible[t] for t in [0, horizon], sorted. Left empty, every free
    /// cell is admissible at every step (no preprocessing).
    std::vector<std::vector<Cell>> admissible;
};

struct WindowSpec {
    GridMap map;
    std::vector<RobotWindow> robots;
    PenaltyWeights weights;
    bool allow_wait = false;
    int potential_radius = 1;
    GoalRamp goal_ramp = GoalRamp::late;
    bool explicit_obstacles = false;  // diagnostic: keep obstacle cells and penalize them

    int clock_horizon() const {
        int h = 0;
        for (const auto& r : robots) h = std::max(h, r.time_offset + r.horizon);
        return h;
    }

    VarLayout layout() const {
        return VarLayout(map.rows(), map.cols(), clock_horizon(), std::max<std::size_t>(robots.size(), 1));
    }

    Variable var(std::size_t robot, int t, const Cell& c) const {
        return layout().index(robot, robots[robot].time_offset + t, c);
    }

    void validate() const {
        weights.validate();
        for (const auto& r : robots) {
            map.require_free(r.start);
            map.require_free(r.goal);
            if (r.horizon < 1) throw std::invalid_argument("window horizon must be at least 1");
            if (r.time_offset < 0) throw std::invalid_argument("time offset must be non-negative");
            if (!r.admissible.empty() && r.admissible.size() != static_cast<std::size_t>(r.horizon) + 1) {
                throw std::invalid_argument("admissible sets must cover steps 0..horizon");
            }
        }
    }
};

namespace detail {

inline std::vector<std::vector<Cell>> admissible_sets(const WindowSpec& spec, std::size_t robot) {
    const RobotWindow& r = spec.robots[robot];
    if (!r.admissible.empty()) return r.admissible;
    std::vector<Cell> every;
    for (int i = 0; i < spec.map.rows(); ++i) {
        for (int j = 0; j < spec.map.cols(); ++j) {
            const Cell c{i, j};
            if (spec.explicit_obstacles || !spec.map.is_obstacle(c)) every.push_back(c);
        }
    }
    return std::vector<std::vector<Cell>>(static_cast<std::size_t>(r.horizon) + 1, every);
}

inline bool member(const std::vector<Cell>& sorted, const Cell& c) {
    return std::binary_search(sorted.begin(), sorted.end(), c);
}

/// Successor cells that keep the path continuous. The goal always admits
/// itself so a parked robot is never charged for staying.
inline std::vector<Cell> successors(const WindowSpec& spec, const RobotWindow& r, const Cell& c) {
    const bool self = spec.allow_wait || c == r.goal;
    if (spec.explicit_obstacles) {
        auto out = spec.map.raw_neighbors(c);
        if (self) {
            out.push_back(c);
            std::sort(out.begin(), out.end());
        }
        return out;
    }
    return spec.map.neighbors(c, self);
}

inline double goal_ramp(GoalRamp ramp, double ramp_max, int t, int horizon) {
    const double frac = static_cast<double>(t) / static_cast<double>(horizon);
    switch (ramp) {
        case GoalRamp::late: return 1.0 + (ramp_max - 1.0) * frac;
        case GoalRamp::constant: return 1.0;
        case GoalRamp::early: return 1.0 + (ramp_max - 1.0) * (1.0 - frac);
    }
    return 1.0;
}

}  // namespace detail

/// K_hot * (1 - sum_c x_{c,t})^2 expanded per step.
inline void apply_one_hot(QuboModel& model, const WindowSpec& spec, std::size_t robot) {
    const auto sets = detail::admissible_sets(spec, robot);
    const double k = spec.weights.k_hot;
    for (int t = 0; t < static_cast<int>(sets.size()); ++t) {
        const auto& cells = sets[static_cast<std::size_t>(t)];
        model.add_constant(k);
        for (std::size_t a = 0; a < cells.size(); ++a) {
            const Variable va = spec.var(robot, t, cells[a]);
            model.accumulate(va, va, -k);
            for (std::size_t b = a + 1; b < cells.size(); ++b) {
                model.accumulate(va, spec.var(robot, t, cells[b]), 2.0 * k);
            }
        }
    }
}

/// K_adj * x_{c,t} * (1 - sum_{n in N(c)} x_{n,t+1}).
inline void apply_adjacency(QuboModel& model, const WindowSpec& spec, std::size_t robot) {
    const RobotWindow& r = spec.robots[robot];
    const auto sets = detail::admissible_sets(spec, robot);
    const double k = spec.weights.k_adj;
    for (int t = 0; t < r.horizon; ++t) {
        const auto& next = sets[static_cast<std::size_t>(t) + 1];
        for (const Cell& c : sets[static_cast<std::size_t>(t)]) {
            const Variable v = spec.var(robot, t, c);
            model.accumulate(v, v, k);
            if (!spec.explicit_obstacles && spec.map.is_obstacle(c)) continue;
            for (const Cell& n : detail::successors(spec, r, c)) {
                if (detail::member(next, n)) model.accumulate(v, spec.var(robot, t + 1, n), -k);
            }
        }
    }
}

inline void apply_start(QuboModel& model, const WindowSpec& spec, std::size_t robot) {
    const RobotWindow& r = spec.robots[robot];
    const auto sets = detail::admissible_sets(spec, robot);
    if (detail::member(sets.front(), r.start)) {
        const Variable v = spec.var(robot, 0, r.start);
        model.accumulate(v, v, -spec.weights.k_start);
    }
}

/// Goal reward at every step after 0, growing linearly to goal_ramp_max * K_goal at the horizon.
inline void apply_goal_late_time(QuboModel& model, const WindowSpec& spec, std::size_t robot) {
    const RobotWindow& r = spec.robots[robot];
    const auto sets = detail::admissible_sets(spec, robot);
    for (int t = 1; t <= r.horizon; ++t) {
        if (!detail::member(sets[static_cast<std::size_t>(t)], r.goal)) continue;
        const Variable v = spec.var(robot, t, r.goal);
        const double ramp = detail::goal_ramp(spec.goal_ramp, spec.weights.goal_ramp_max, t, r.horizon);
        model.accumulate(v, v, -spec.weights.k_goal * ramp);
    }
}

/// K_lock * x_{g,t} * (1 - x_{g,t+1}).
inline void apply_goal_lock(QuboModel& model, const WindowSpec& spec, std::size_t robot) {
    const RobotWindow& r = spec.robots[robot];
    const auto sets = detail::admissible_sets(spec, robot);
    const double k = spec.weights.k_lock;
    for (int t = 0; t < r.horizon; ++t) {
        if (!detail::member(sets[static_cast<std::size_t>(t)], r.goal)) continue;
        const Variable v = spec.var(robot, t, r.goal);
        model.accumulate(v, v, k);
        if (detail::member(sets[static_cast<std::size_t>(t) + 1], r.goal)) {
            model.accumulate(v, spec.var(robot, t + 1, r.goal), -k);
        }
    }
}

/// K_bt for every non-goal cell held at two different steps, plus a softened
/// linear charge on cells carried over from earlier windows (steps >= 1).
inline void apply_backtracking(QuboModel& model, const WindowSpec& spec, std::size_t robot) {
    const RobotWindow& r = spec.robots[robot];
    const auto sets = detail::admissible_sets(spec, robot);
    const double k = spec.weights.k_bt;
    std::map<Cell, std::vector<int>> times;
    for (int t = 0; t <= r.horizon; ++t) {
        for (const Cell& c : sets[static_cast<std::size_t>(t)]) {
            if (c != r.goal) times[c].push_back(t);
        }
    }
    for (const auto& [c, ts] : times) {
        for (std::size_t a = 0; a < ts.size(); ++a) {
            const Variable va = spec.var(robot, ts[a], c);
            for (std::size_t b = a + 1; b < ts.size(); ++b) {
                model.accumulate(va, spec.var(robot, ts[b], c), k);
            }
            if (ts[a] >= 1 && r.visited.contains(c)) {
                model.accumulate(va, va, k * spec.weights.visited_softening);
            }
        }
    }
}

/// Charges the goal at steps earlier than the Manhattan distance allows.
inline void apply_teleportation(QuboModel& model, const WindowSpec& spec, std::size_t robot) {
    const RobotWindow& r = spec.robots[robot];
    const auto sets = detail::admissible_sets(spec, robot);
    const int earliest = manhattan(r.start, r.goal);
    for (int t = 0; t < earliest && t <= r.horizon; ++t) {
        if (!detail::member(sets[static_cast<std::size_t>(t)], r.goal)) continue;
        const Variable v = spec.var(robot, t, r.goal);
        model.accumulate(v, v, spec.weights.k_tel);
    }
}

/// Reward for the cell reached at the last step of the window.
inline double approximation_reward(const WindowSpec& spec, const RobotWindow& r, const Cell& c) {
    if (spec.map.is_obstacle(c)) return 0.0;
    const int span = spec.map.diameter();
    const double closeness = span == 0 ? 1.0 : 1.0 - static_cast<double>(manhattan(c, r.goal)) / span;
    const double openness = 1.0 - obstacle_potential(spec.map, c, spec.potential_radius);
    return spec.weights.k_approx * closeness * openness;
}

/// Window-final pull towards the goal, used instead of the late-time goal
/// reward when the goal is out of reach for this window.
inline void apply_approximation(QuboModel& model, const WindowSpec& spec, std::size_t robot) {
    const RobotWindow& r = spec.robots[robot];
    const auto sets = detail::admissible_sets(spec, robot);
    for (const Cell& c : sets[static_cast<std::size_t>(r.horizon)]) {
        const Variable v = spec.var(robot, r.horizon, c);
        model.accumulate(v, v, -approximation_reward(spec, r, c));
    }
}

/// Explicit obstacle charge; only meaningful with explicit_obstacles set.
inline void apply_obstacles(QuboModel& model, const WindowSpec& spec, std::size_t robot) {
    const auto sets = detail::admissible_sets(spec, robot);
    for (int t = 0; t < static_cast<int>(sets.size()); ++t) {
        for (const Cell& c : sets[static_cast<std::size_t>(t)]) {
            if (!spec.map.is_obstacle(c)) continue;
            const Variable v = spec.var(robot, t, c);
            model.accumulate(v, v, spec.weights.k_obs);
        }
    }
}

/// K_coll between two robots holding the same cell at the same window-clock
/// step; only emitted where both robots are active and the cell is admissible
/// to both.
inline void apply_vertex_collision(QuboModel& model, const WindowSpec& spec) {
    std::vector<std::vector<std::vector<Cell>>> sets;
    sets.reserve(spec.robots.size());
    for (std::size_t r = 0; r < spec.robots.size(); ++r) sets.push_back(detail::admissible_sets(spec, r));
    for (std::size_t a = 0; a < spec.robots.size(); ++a) {
        const RobotWindow& ra = spec.robots[a];
        if (!ra.active) continue;
        for (std::size_t b = a + 1; b < spec.robots.size(); ++b) {
            const RobotWindow& rb = spec.robots[b];
            if (!rb.active) continue;
            const int lo = std::max(ra.time_offset, rb.time_offset);
            const int hi = std::min(ra.time_offset + ra.horizon, rb.time_offset + rb.horizon);
            for (int clock = lo; clock <= hi; ++clock) {
                const int ta = clock - ra.time_offset;
                const int tb = clock - rb.time_offset;
                const auto& ca = sets[a][static_cast<std::size_t>(ta)];
                const auto& cb = sets[b][static_cast<std::size_t>(tb)];
                std::vector<Cell> shared;
                std::set_intersection(ca.begin(), ca.end(), cb.begin(), cb.end(), std::back_inserter(shared));
                for (const Cell& c : shared) {
                    if (spec.map.is_obstacle(c)) continue;
                    model.accumulate(spec.var(a, ta, c), spec.var(b, tb, c), spec.weights.k_coll);
                }
            }
        }
    }
}

/// Emits every penalty for the active robots of a window.
inline QuboModel build_window_model(const WindowSpec& spec) {
    spec.validate();
    QuboModel model(spec.layout().size());
    for (std::size_t r = 0; r < spec.robots.size(); ++r) {
        const RobotWindow& rw = spec.robots[r];
        if (!rw.active) continue;
        apply_one_hot(model, spec, r);
        apply_adjacency(model, spec, r);
        apply_start(model, spec, r);
        if (rw.goal_mode == GoalMode::late_time) {
            apply_goal_late_time(model, spec, r);
        } else {
            apply_approximation(model, spec, r);
        }
        apply_goal_lock(model, spec, r);
        apply_backtracking(model, spec, r);
        apply_teleportation(model, spec, r);
        if (spec.explicit_obstacles) apply_obstacles(model, spec, r);
    }
    apply_vertex_collision(model, spec);
    return model;
}

}  // namespace qmapf
