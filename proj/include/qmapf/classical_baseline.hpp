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
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <tuple>
#include <vector>

#include "qmapf/grid_world.hpp"
#include "qmapf/post_processor.hpp"
#include "qmapf/window_planner.hpp"

namespace qmapf {

namespace detail {

inline std::optional<std::vector<Cell>> best_first(const GridMap& map, const Cell& start, const Cell& goal,
                                                   bool use_heuristic) {
    map.require_free(start);
    map.require_free(goal);
    const std::size_t cells = map.cell_count();
    constexpr int kInf = std::numeric_limits<int>::max();
    std::vector<int> g(cells, kInf);
    std::vector<std::size_t> parent(cells, cells);
    std::vector<std::uint8_t> closed(cells, 0);
    // (f, cell id): ties resolve towards the smaller variable index.
    using Entry = std::pair<int, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    const auto h = [&](const Cell& c) { return use_heuristic ? manhattan(c, goal) : 0; };
    g[map.id(start)] = 0;
    open.emplace(h(start), map.id(start));
    while (!open.empty()) {
        const auto [f, k] = open.top();
        open.pop();
        if (closed[k]) continue;
        closed[k] = 1;
        const Cell c = map.cell(k);
        if (c == goal) {
            std::vector<Cell> path;
            for (std::size_t at = k; at != cells; at = parent[at]) path.push_back(map.cell(at));
            std::reverse(path.begin(), path.end());
            return path;
        }
        for (const Cell& n : map.neighbors(c)) {
            const std::size_t nk = map.id(n);
            if (closed[nk] || g[k] + 1 >= g[nk]) continue;
            g[nk] = g[k] + 1;
            parent[nk] = k;
            open.emplace(g[nk] + h(n), nk);
        }
    }
    return std::nullopt;
}

}  // namespace detail

/// Optimal 4/8-connected path with unit steps and the Manhattan heuristic.
/// The returned path includes both endpoints; nullopt when disconnected.
inline std::optional<std::vector<Cell>> astar(const GridMap& map, const Cell& start, const Cell& goal) {
    return detail::best_first(map, start, goal, true);
}

inline std::optional<std::vector<Cell>> dijkstra(const GridMap& map, const Cell& start, const Cell& goal) {
    return detail::best_first(map, start, goal, false);
}

/// Space-time occupancy of already planned robots.
class ReservationTable {
public:
    explicit ReservationTable(const GridMap& map) : map_(&map), parked_from_(map.cell_count(), kNever) {}

    void reserve(const TimedPath& path) {
        for (int t = path.start_time; t < path.end_time(); ++t) {
            const std::size_t k = map_->id(path.at(t));
            if (slots_.size() <= static_cast<std::size_t>(t)) slots_.resize(static_cast<std::size_t>(t) + 1);
            slots_[static_cast<std::size_t>(t)].push_back(k);
            last_ = std::max(last_, t);
        }
        const std::size_t park = map_->id(path.cells.back());
        parked_from_[park] = std::min(parked_from_[park], path.end_time());
        last_ = std::max(last_, path.end_time());
    }

    bool blocked(const Cell& c, int t) const {
        const std::size_t k = map_->id(c);
        if (t >= parked_from_[k]) return true;
        if (t < 0 || static_cast<std::size_t>(t) >= slots_.size()) return false;
        const auto& s = slots_[static_cast<std::size_t>(t)];
        return std::find(s.begin(), s.end(), k) != s.end();
    }

    /// True when nobody passes over `c` at any time >= t.
    bool free_from(const Cell& c, int t) const {
        if (parked_from_[map_->id(c)] != kNever) return false;
        for (int u = t; u <= last_; ++u) {
            if (blocked(c, u)) return false;
        }
        return true;
    }

    int last_time() const { return last_; }

private:
    static constexpr int kNever = std::numeric_limits<int>::max();
    const GridMap* map_;
    std::vector<std::vector<std::size_t>> slots_;
    std::vector<int> parked_from_;
    int last_ = 0;
};

/// Space-time A* with wait moves against a reservation table. The robot
/// parks on the goal, so arrival requires the goal to stay free afterwards.
inline std::optional<TimedPath> space_time_astar(const GridMap& map, const RobotSpec& robot,
                                                 const ReservationTable& reserved) {
    map.require_free(robot.start);
    map.require_free(robot.goal);
    if (reserved.blocked(robot.start, robot.release)) return std::nullopt;
    const auto to_goal = bfs_distances(map, robot.goal);
    if (to_goal[map.id(robot.start)] == kUnreachable) return std::nullopt;
    const std::size_t cells = map.cell_count();
    const int horizon = reserved.last_time() + static_cast<int>(cells) + 1;
    const int span = horizon - robot.release + 1;
    if (span <= 0) return std::nullopt;
    const auto state = [&](std::size_t k, int t) { return static_cast<std::size_t>(t - robot.release) * cells + k; };
    std::vector<std::uint8_t> closed(cells * static_cast<std::size_t>(span), 0);
    std::vector<std::size_t> parent(cells * static_cast<std::size_t>(span), SIZE_MAX);
    // (f, -t, cell id): among equal f prefer deeper states, then smaller index.
    using Entry = std::tuple<int, int, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    const std::size_t s0 = map.id(robot.start);
    open.emplace(robot.release + to_goal[s0], -robot.release, s0);
    while (!open.empty()) {
        const auto [f, neg_t, k] = open.top();
        open.pop();
        const int t = -neg_t;
        const std::size_t sk = state(k, t);
        if (closed[sk]) continue;
        closed[sk] = 1;
        const Cell c = map.cell(k);
        if (c == robot.goal && reserved.free_from(c, t)) {
            TimedPath path;
            path.start_time = robot.release;
            for (std::size_t at = sk; at != SIZE_MAX; at = parent[at]) path.cells.push_back(map.cell(at % cells));
            std::reverse(path.cells.begin(), path.cells.end());
            return path;
        }
        if (t + 1 > horizon) continue;
        for (const Cell& n : map.neighbors(c, true)) {
            if (reserved.blocked(n, t + 1)) continue;
            const std::size_t nk = map.id(n);
            const std::size_t ns = state(nk, t + 1);
            if (closed[ns]) continue;
            if (parent[ns] == SIZE_MAX) parent[ns] = sk;
            open.emplace(t + 1 + to_goal[nk], -(t + 1), nk);
        }
    }
    return std::nullopt;
}

struct PrioritizedResult {
    std::vector<std::optional<TimedPath>> paths;

    bool all_found() const {
        return std::all_of(paths.begin(), paths.end(), [](const auto& p) { return p.has_value(); });
    }
    std::size_t total_moves() const {
        std::size_t n = 0;
        for (const auto& p : paths) {
            if (p) n += p->moves();
        }
        return n;
    }
};

/// Plans robots in index order, each avoiding the space-time cells of the
/// ones before it. Only vertex conflicts are prevented.
inline PrioritizedResult prioritized_plan(const GridMap& map, const std::vector<RobotSpec>& robots) {
    PrioritizedResult out;
    ReservationTable table(map);
    for (const RobotSpec& r : robots) {
        auto path = space_time_astar(map, r, table);
        if (path) table.reserve(*path);
        out.paths.push_back(std::move(path));
    }
    return out;
}

}  // namespace qmapf
