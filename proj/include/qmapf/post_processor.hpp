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
#include <optional>
#include <string>
#include <vector>

#include "qmapf/grid_world.hpp"
#include "qmapf/qubo_model.hpp"

namespace qmapf {

enum class ViolationKind { one_hot, off_grid, obstacle, adjacency, early_goal, vertex_collision, swap_collision };

inline std::string to_string(ViolationKind k) {
    switch (k) {
        case ViolationKind::one_hot: return "one_hot";
        case ViolationKind::off_grid: return "off_grid";
        case ViolationKind::obstacle: return "obstacle";
        case ViolationKind::adjacency: return "adjacency";
        case ViolationKind::early_goal: return "early_goal";
        case ViolationKind::vertex_collision: return "vertex_collision";
        case ViolationKind::swap_collision: return "swap_collision";
    }
    return "unknown";
}

struct Violation {
    ViolationKind kind;
    int t = 0;

    friend bool operator==(const Violation&, const Violation&) = default;
};

/// Cell-level move rule shared by repair, validation and the baselines:
/// neighbors, plus staying put when waiting is allowed or when parked on
/// the goal.
inline bool legal_step(const GridMap& map, const Cell& from, const Cell& to, bool allow_wait,
                       const std::optional<Cell>& goal) {
    if (from == to) return allow_wait || (goal && *goal == to);
    return map.adjacent(from, to);
}

struct RepairResult {
    std::vector<Cell> path;         // repaired prefix; complete when `failed_at` is empty
    std::optional<int> failed_at;   // first step that could not be made one-hot
    bool ok() const { return !failed_at; }
};

/// Keeps, at every step holding several cells, the single one that continues
/// from the previously kept cell. `start` must be among the cells of step 0.
/// Zero candidates or an ambiguous choice makes the step unrepairable.
inline RepairResult fix_one_hot_continuity(const GridMap& map, const Occupancy& occupancy, const Cell& start,
                                           bool allow_wait = false, std::optional<Cell> goal = std::nullopt) {
    RepairResult out;
    if (occupancy.empty()) return out;
    const auto& first = occupancy.front();
    if (std::find(first.begin(), first.end(), start) == first.end()) {
        out.failed_at = 0;
        return out;
    }
    out.path.push_back(start);
    for (std::size_t t = 1; t < occupancy.size(); ++t) {
        const auto& cells = occupancy[t];
        if (cells.size() == 1) {
            out.path.push_back(cells.front());
            continue;
        }
        std::optional<Cell> pick;
        int matches = 0;
        for (const Cell& c : cells) {
            if (map.in_grid(c) && legal_step(map, out.path.back(), c, allow_wait, goal)) {
                pick = c;
                ++matches;
            }
        }
        if (matches != 1) {
            out.failed_at = static_cast<int>(t);
            return out;
        }
        out.path.push_back(*pick);
    }
    return out;
}

/// Earliest step that leaves the grid, enters an obstacle, breaks adjacency,
/// or claims the goal sooner than its Manhattan distance allows.
inline std::optional<Violation> detect_invalid_move(const GridMap& map, const std::vector<Cell>& path,
                                                    bool allow_wait = false,
                                                    std::optional<Cell> goal = std::nullopt) {
    for (std::size_t t = 0; t < path.size(); ++t) {
        const Cell& c = path[t];
        const int step = static_cast<int>(t);
        if (!map.in_grid(c)) return Violation{ViolationKind::off_grid, step};
        if (map.is_obstacle(c)) return Violation{ViolationKind::obstacle, step};
        if (t > 0 && !legal_step(map, path[t - 1], c, allow_wait, goal)) {
            return Violation{ViolationKind::adjacency, step};
        }
        if (goal && c == *goal && step < manhattan(path.front(), *goal)) {
            return Violation{ViolationKind::early_goal, step};
        }
    }
    return std::nullopt;
}

/// Robot path on the global clock: cells[k] is held at time start_time + k.
/// After its last step the robot stays parked on its final cell.
struct TimedPath {
    int start_time = 0;
    std::vector<Cell> cells;

    int end_time() const { return start_time + static_cast<int>(cells.size()) - 1; }
    std::size_t moves() const { return cells.empty() ? 0 : cells.size() - 1; }
    bool present(int t) const { return !cells.empty() && t >= start_time; }
    Cell at(int t) const {
        if (t >= end_time()) return cells.back();
        return cells[static_cast<std::size_t>(t - start_time)];
    }

    friend bool operator==(const TimedPath&, const TimedPath&) = default;
};

struct Conflict {
    ViolationKind kind = ViolationKind::vertex_collision;
    int t = 0;
    std::size_t first = 0;
    std::size_t second = 0;
    Cell cell;

    friend bool operator==(const Conflict&, const Conflict&) = default;
};

inline int last_time(const std::vector<TimedPath>& plans) {
    int end = 0;
    for (const auto& p : plans) {
        if (!p.cells.empty()) end = std::max(end, p.end_time());
    }
    return end;
}

/// Earliest vertex conflict, scanning pairs in index order; parked robots
/// keep occupying their final cell.
inline std::optional<Conflict> first_vertex_conflict(const std::vector<TimedPath>& plans) {
    const int end = last_time(plans);
    int begin = end;
    for (const auto& p : plans) {
        if (!p.cells.empty()) begin = std::min(begin, p.start_time);
    }
    for (int t = begin; t <= end; ++t) {
        for (std::size_t a = 0; a < plans.size(); ++a) {
            if (!plans[a].present(t)) continue;
            for (std::size_t b = a + 1; b < plans.size(); ++b) {
                if (!plans[b].present(t)) continue;
                if (plans[a].at(t) == plans[b].at(t)) {
                    return Conflict{ViolationKind::vertex_collision, t, a, b, plans[a].at(t)};
                }
            }
        }
    }
    return std::nullopt;
}

inline std::vector<Conflict> swap_conflicts(const std::vector<TimedPath>& plans) {
    std::vector<Conflict> out;
    const int end = last_time(plans);
    for (std::size_t a = 0; a < plans.size(); ++a) {
        for (std::size_t b = a + 1; b < plans.size(); ++b) {
            const int begin = std::max(plans[a].start_time, plans[b].start_time);
            for (int t = begin + 1; t <= end; ++t) {
                const Cell a0 = plans[a].at(t - 1);
                const Cell a1 = plans[a].at(t);
                const Cell b0 = plans[b].at(t - 1);
                const Cell b1 = plans[b].at(t);
                if (a0 != a1 && a0 == b1 && a1 == b0) {
                    out.push_back({ViolationKind::swap_collision, t, a, b, a1});
                }
            }
        }
    }
    return out;
}

struct ClashResult {
    std::vector<TimedPath> plans;
    std::vector<Conflict> unresolved;
    int waits_inserted = 0;
    bool resolved() const { return unresolved.empty(); }
};

inline int default_wait_budget(std::size_t robots, const GridMap& map) {
    return 2 * static_cast<int>(robots) * map.diameter();
}

/// Clears vertex conflicts by making the higher-index robot wait on its
/// previous cell until the conflict cell is free. Only timing changes; the
/// cell sequence of every robot is kept. Swap conflicts cannot be fixed this
/// way and are reported.
inline ClashResult resolve_clash_wait(std::vector<TimedPath> plans, int wait_budget) {
    ClashResult out;
    const auto delay = [&](std::size_t robot, int t) {
        TimedPath& p = plans[robot];
        const int k = std::min(t - p.start_time, static_cast<int>(p.cells.size()) - 1);
        if (k <= 0) return false;
        p.cells.insert(p.cells.begin() + k, p.cells[static_cast<std::size_t>(k) - 1]);
        return true;
    };
    while (auto conflict = first_vertex_conflict(plans)) {
        if (out.waits_inserted >= wait_budget) {
            out.unresolved.push_back(*conflict);
            break;
        }
        if (!delay(conflict->second, conflict->t) && !delay(conflict->first, conflict->t)) {
            out.unresolved.push_back(*conflict);
            break;
        }
        ++out.waits_inserted;
    }
    auto swaps = swap_conflicts(plans);
    out.unresolved.insert(out.unresolved.end(), swaps.begin(), swaps.end());
    out.plans = std::move(plans);
    return out;
}

}  // namespace qmapf
