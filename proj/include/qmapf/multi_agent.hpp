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
#include <stdexcept>
#include <vector>

#include "qmapf/grid_world.hpp"
#include "qmapf/post_processor.hpp"
#include "qmapf/qubo_model.hpp"
#include "qmapf/window_planner.hpp"

namespace qmapf {

/// Active interval of one robot on the global clock.
struct ActiveInterval {
    int begin = 0;
    int end = 0;
};

/// Shared timeline: time 0 is the release of the earliest robots; every
/// robot's local steps map onto [release, release + local horizon].
struct GlobalClock {
    int horizon = 0;
    std::vector<ActiveInterval> intervals;

    /// Local horizon per robot is estimated as twice its Manhattan distance
    /// (at least one step).
    static GlobalClock estimate(const std::vector<RobotSpec>& robots) {
        if (robots.empty()) throw std::invalid_argument("at least one robot is required");
        int origin = robots.front().release;
        for (const auto& r : robots) origin = std::min(origin, r.release);
        GlobalClock clock;
        for (const auto& r : robots) {
            const int local = std::max(1, 2 * manhattan(r.start, r.goal));
            const ActiveInterval iv{r.release - origin, r.release - origin + local};
            clock.intervals.push_back(iv);
            clock.horizon = std::max(clock.horizon, iv.end);
        }
        return clock;
    }

    bool overlap(std::size_t a, std::size_t b) const {
        return intervals[a].begin <= intervals[b].end && intervals[b].begin <= intervals[a].end;
    }
};

/// First variable of each robot's block: r * rows * cols * (T_global + 1).
inline std::vector<Variable> allocate_offsets(std::size_t robots, int rows, int cols, int global_horizon) {
    if (robots == 0) throw std::invalid_argument("at least one robot is required");
    const VarLayout layout(rows, cols, global_horizon, robots);
    std::vector<Variable> out(robots);
    for (std::size_t r = 0; r < robots; ++r) out[r] = layout.offset(r);
    return out;
}

/// Joint planning of all robots: lockstep windows on the global clock with
/// vertex-collision coupling, followed by wait insertion for any conflict
/// that survived. With one robot this is exactly plan_single.
inline Plan plan_multi(const GridMap& map, const std::vector<RobotSpec>& robots, const PenaltyWeights& weights,
                       const WindowConfig& cfg, const SolverConfig& solver, const PlannerHooks& hooks = {}) {
    Plan plan = plan_windows(map, robots, weights, cfg, solver, hooks);
    if (robots.size() < 2) return plan;

    std::vector<std::size_t> index;
    std::vector<TimedPath> paths;
    for (std::size_t r = 0; r < plan.robots.size(); ++r) {
        if (plan.robots[r].path.cells.empty()) continue;
        index.push_back(r);
        paths.push_back(plan.robots[r].path);
    }
    ClashResult clash = resolve_clash_wait(paths, default_wait_budget(robots.size(), map));
    plan.waits_inserted = clash.waits_inserted;
    for (std::size_t k = 0; k < index.size(); ++k) {
        RobotPlan& rp = plan.robots[index[k]];
        const std::size_t added = clash.plans[k].cells.size() - rp.path.cells.size();
        if (added > 0) {
            // Inserted waits inherit the provenance of the step they repeat.
            std::vector<int> prov;
            std::size_t src = 0;
            const auto& before = rp.path.cells;
            const auto& after = clash.plans[k].cells;
            for (std::size_t t = 0; t < after.size(); ++t) {
                if (src < before.size() && after[t] == before[src]) {
                    prov.push_back(rp.provenance[src++]);
                } else {
                    prov.push_back(prov.empty() ? -1 : prov.back());
                }
            }
            rp.provenance = std::move(prov);
        }
        rp.path = clash.plans[k];
    }
    plan.unresolved.clear();
    for (const Conflict& c : clash.unresolved) {
        plan.unresolved.push_back({c.kind, c.t, index[c.first], index[c.second], c.cell});
        if (c.kind == ViolationKind::vertex_collision) {
            RobotPlan& loser = plan.robots[index[c.second]];
            if (loser.status == PlanStatus::reached_goal) loser.status = PlanStatus::collision_unresolved;
        }
    }
    return plan;
}

}  // namespace qmapf
