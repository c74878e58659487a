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
#include <compare>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <deque>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmapf {

/// Grid cell addressed by row `i` and column `j`.
struct Cell {
    int i = 0;
    int j = 0;

    friend constexpr auto operator<=>(const Cell&, const Cell&) = default;
};

using CellSet = std::set<Cell>;

inline std::string to_string(const Cell& c) {
    return "(" + std::to_string(c.i) + "," + std::to_string(c.j) + ")";
}

enum class Connectivity { four, eight };

/// Rectangular occupancy map. Neighbor tables are built once at construction
/// and never contain obstacles or off-grid cells.
class GridMap {
public:
    GridMap() = default;

    GridMap(int rows, int cols, const CellSet& obstacles = {},
            Connectivity connectivity = Connectivity::four)
        : rows_(rows), cols_(cols), connectivity_(connectivity) {
        if (rows <= 0 || cols <= 0) {
            throw std::invalid_argument("grid dimensions must be positive");
        }
        blocked_.assign(cell_count(), 0);
        for (const Cell& c : obstacles) {
            if (!in_grid(c)) {
                throw std::invalid_argument("obstacle " + to_string(c) + " lies outside the grid");
            }
            blocked_[id(c)] = 1;
        }
        build_neighbor_tables();
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    Connectivity connectivity() const { return connectivity_; }
    std::size_t cell_count() const { return static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_); }

    bool in_grid(const Cell& c) const { return c.i >= 0 && c.j >= 0 && c.i < rows_ && c.j < cols_; }
    bool is_obstacle(const Cell& c) const { return blocked_[id(c)] != 0; }
    bool is_free(const Cell& c) const { return in_grid(c) && !is_obstacle(c); }

    std::size_t id(const Cell& c) const {
        return static_cast<std::size_t>(c.i) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(c.j);
    }
    Cell cell(std::size_t id) const {
        return {static_cast<int>(id / static_cast<std::size_t>(cols_)), static_cast<int>(id % static_cast<std::size_t>(cols_))};
    }

    CellSet obstacles() const {
        CellSet out;
        for (std::size_t k = 0; k < blocked_.size(); ++k) {
            if (blocked_[k]) out.insert(cell(k));
        }
        return out;
    }

    std::vector<Cell> free_cells() const {
        std::vector<Cell> out;
        for (std::size_t k = 0; k < blocked_.size(); ++k) {
            if (!blocked_[k]) out.push_back(cell(k));
        }
        return out;
    }

    /// Largest Manhattan distance between two cells of the grid.
    int diameter() const { return rows_ - 1 + cols_ - 1; }

    /// Copy of this map with extra obstacles; cells already blocked are ignored.
    GridMap with_obstacles(const CellSet& extra) const {
        CellSet all = obstacles();
        all.insert(extra.begin(), extra.end());
        return GridMap(rows_, cols_, all, connectivity_);
    }

    /// Free in-grid neighbors of `c` in row-major order; `c` itself is added
    /// when `allow_wait` is set.
    std::vector<Cell> neighbors(const Cell& c, bool allow_wait = false) const {
        require_free(c);
        std::vector<Cell> out;
        const auto& ids = table_[id(c)];
        out.reserve(ids.size() + 1);
        bool placed_self = !allow_wait;
        const std::size_t self = id(c);
        for (std::size_t n : ids) {
            if (!placed_self && self < n) {
                out.push_back(c);
                placed_self = true;
            }
            out.push_back(cell(n));
        }
        if (!placed_self) out.push_back(c);
        return out;
    }

    bool adjacent(const Cell& a, const Cell& b) const {
        if (!is_free(a) || !is_free(b)) return false;
        const auto& ids = table_[id(a)];
        return std::binary_search(ids.begin(), ids.end(), id(b));
    }

    /// In-grid neighbors ignoring obstacles. Only the explicit obstacle
    /// penalty mode uses this.
    std::vector<Cell> raw_neighbors(const Cell& c) const {
        std::vector<Cell> out;
        for (const auto& [di, dj] : offsets()) {
            const Cell n{c.i + di, c.j + dj};
            if (in_grid(n)) out.push_back(n);
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    void require_free(const Cell& c) const {
        if (!in_grid(c)) throw std::invalid_argument("cell " + to_string(c) + " is outside the grid");
        if (is_obstacle(c)) throw std::invalid_argument("cell " + to_string(c) + " is an obstacle");
    }

private:
    std::vector<std::pair<int, int>> offsets() const {
        std::vector<std::pair<int, int>> d{{-1, 0}, {0, -1}, {0, 1}, {1, 0}};
        if (connectivity_ == Connectivity::eight) {
            d.insert(d.end(), {{-1, -1}, {-1, 1}, {1, -1}, {1, 1}});
        }
        return d;
    }

    void build_neighbor_tables() {
        table_.assign(cell_count(), {});
        const auto d = offsets();
        for (std::size_t k = 0; k < cell_count(); ++k) {
            if (blocked_[k]) continue;
            const Cell c = cell(k);
            for (const auto& [di, dj] : d) {
                const Cell n{c.i + di, c.j + dj};
                if (is_free(n)) table_[k].push_back(id(n));
            }
            std::sort(table_[k].begin(), table_[k].end());
        }
    }

    int rows_ = 0;
    int cols_ = 0;
    Connectivity connectivity_ = Connectivity::four;
    std::vector<std::uint8_t> blocked_;
    std::vector<std::vector<std::size_t>> table_;
};

inline int manhattan(const Cell& a, const Cell& b) {
    return std::abs(a.i - b.i) + std::abs(a.j - b.j);
}

inline double euclidean(const Cell& a, const Cell& b) {
    return std::hypot(static_cast<double>(a.i - b.i), static_cast<double>(a.j - b.j));
}

/// Cells admissible at each time step of a horizon, as produced by BFS.
struct ReachabilityTable {
    std::vector<std::vector<Cell>> layers;  // layers[t], sorted row-major
    int horizon = 0;

    bool contains(int t, const Cell& c) const {
        if (t < 0 || t >= static_cast<int>(layers.size())) return false;
        return std::binary_search(layers[t].begin(), layers[t].end(), c);
    }
};

enum class Exclusion { off, on };

/// Time-layered BFS from `start`.
///
/// With exclusion on, layer t holds the cells first reached at step t; cells
/// of earlier layers and cells in `visited` never reappear (the start is kept
/// in layer 0 even if listed in `visited`). With exclusion off, layer t is
/// every cell reachable by a walk of exactly t steps. `allow_wait` makes each
/// layer retain the previous one.
inline ReachabilityTable bfs_layers(const GridMap& map, const Cell& start, int horizon, bool allow_wait,
                                    Exclusion exclusion = Exclusion::on, const CellSet& visited = {}) {
    map.require_free(start);
    if (horizon < 0) throw std::invalid_argument("horizon must be non-negative");
    ReachabilityTable table;
    table.horizon = horizon;
    table.layers.reserve(static_cast<std::size_t>(horizon) + 1);
    table.layers.push_back({start});

    std::vector<std::uint8_t> seen(map.cell_count(), 0);
    seen[map.id(start)] = 1;
    if (exclusion == Exclusion::on) {
        for (const Cell& v : visited) {
            if (map.in_grid(v)) seen[map.id(v)] = 1;
        }
    }

    std::vector<Cell> frontier{start};
    for (int t = 1; t <= horizon; ++t) {
        std::vector<std::uint8_t> mark(map.cell_count(), 0);
        std::vector<Cell> next;
        for (const Cell& c : frontier) {
            for (const Cell& n : map.neighbors(c, false)) {
                const std::size_t k = map.id(n);
                if (mark[k]) continue;
                if (exclusion == Exclusion::on && seen[k]) continue;
                mark[k] = 1;
                next.push_back(n);
            }
        }
        if (exclusion == Exclusion::on) {
            for (const Cell& n : next) seen[map.id(n)] = 1;
        }
        std::vector<Cell> layer = next;
        if (allow_wait) {
            for (const Cell& p : table.layers.back()) {
                if (!mark[map.id(p)]) {
                    mark[map.id(p)] = 1;
                    layer.push_back(p);
                }
            }
        }
        std::sort(layer.begin(), layer.end());
        // Exclusion keeps only the newest ring as the expansion frontier.
        frontier = (exclusion == Exclusion::on) ? next : layer;
        std::sort(frontier.begin(), frontier.end());
        table.layers.push_back(std::move(layer));
    }
    return table;
}

inline constexpr int kUnreachable = -1;

/// Shortest step counts from `source` to every cell, avoiding obstacles and
/// `blocked`. Unreachable cells hold kUnreachable.
inline std::vector<int> bfs_distances(const GridMap& map, const Cell& source, const CellSet& blocked = {}) {
    std::vector<int> dist(map.cell_count(), kUnreachable);
    if (!map.is_free(source)) return dist;
    std::vector<std::uint8_t> closed(map.cell_count(), 0);
    for (const Cell& b : blocked) {
        if (map.in_grid(b)) closed[map.id(b)] = 1;
    }
    closed[map.id(source)] = 0;
    std::deque<Cell> queue{source};
    dist[map.id(source)] = 0;
    while (!queue.empty()) {
        const Cell c = queue.front();
        queue.pop_front();
        for (const Cell& n : map.neighbors(c, false)) {
            const std::size_t k = map.id(n);
            if (closed[k] || dist[k] != kUnreachable) continue;
            dist[k] = dist[map.id(c)] + 1;
            queue.push_back(n);
        }
    }
    return dist;
}

/// Fraction of the cells within Chebyshev `radius` of `c` (excluding `c`)
/// that are obstacles or off-grid.
inline double obstacle_potential(const GridMap& map, const Cell& c, int radius) {
    map.require_free(c);
    if (radius <= 0) return 0.0;
    int total = 0;
    int blocked = 0;
    for (int di = -radius; di <= radius; ++di) {
        for (int dj = -radius; dj <= radius; ++dj) {
            if (di == 0 && dj == 0) continue;
            ++total;
            const Cell n{c.i + di, c.j + dj};
            if (!map.is_free(n)) ++blocked;
        }
    }
    return static_cast<double>(blocked) / static_cast<double>(total);
}

}  // namespace qmapf
