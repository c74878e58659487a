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

#include <catch_amalgamated.hpp>

#include <functional>
#include <random>

#include "oracles.hpp"
#include "qmapf/preprocessor.hpp"

using namespace qmapf;

namespace {

WindowSpec single(GridMap map, Cell start, Cell goal, int horizon, GoalMode mode = GoalMode::late_time) {
    WindowSpec s;
    s.map = std::move(map);
    RobotWindow r;
    r.start = start;
    r.goal = goal;
    r.horizon = horizon;
    r.goal_mode = mode;
    s.robots.push_back(r);
    return s;
}

QuboModel example_model() {
    QuboModel m(4);
    m.accumulate(0, 0, -5);
    m.accumulate(1, 1, -3);
    m.accumulate(2, 2, -8);
    m.accumulate(3, 3, -6);
    m.accumulate(0, 1, 4);
    m.accumulate(0, 2, 8);
    m.accumulate(1, 2, 2);
    m.accumulate(2, 3, 10);
    return m;
}

// Every walk of `len` steps over 4-neighbours from `start`, by brute force.
void walks(const GridMap& map, std::vector<Cell>& path, int len, const std::function<void(const std::vector<Cell>&)>& f) {
    if (static_cast<int>(path.size()) == len + 1) {
        f(path);
        return;
    }
    const Cell c = path.back();
    for (const Cell& n : {Cell{c.i - 1, c.j}, Cell{c.i + 1, c.j}, Cell{c.i, c.j - 1}, Cell{c.i, c.j + 1}}) {
        if (!map.is_free(n)) continue;
        path.push_back(n);
        walks(map, path, len, f);
        path.pop_back();
    }
}

}  // namespace

TEST_CASE("logical fixing on a 2x2 grid leaves two free variables") {
    const auto fix = fix_logical(single(GridMap(2, 2), {0, 0}, {1, 1}, 2));
    CHECK(fix.report.original_count == 12);
    CHECK(fix.report.reduced_count == 2);
    CHECK(fix.report.fixed_one.size() == 2);
    CHECK(fix.report.reduction_pct == Catch::Approx(100.0 * 10 / 12));
    CHECK_FALSE(fix.report.solved_by_preprocess);
}

TEST_CASE("logical fixing solves a forced move outright") {
    const auto fix = fix_logical(single(GridMap(1, 2), {0, 0}, {0, 1}, 1));
    CHECK(fix.report.reduced_count == 0);
    CHECK(fix.report.solved_by_preprocess);
    CHECK(fix.report.fixed_one.size() == 2);
}

TEST_CASE("logical fixing pins the start and clears the rest of step 0") {
    const auto s = single(GridMap(3, 3), {1, 1}, {0, 0}, 3);
    const auto fix = fix_logical(s);
    const auto& one = fix.report.fixed_one;
    CHECK(std::binary_search(one.begin(), one.end(), s.var(0, 0, {1, 1})));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (Cell{i, j} != Cell{1, 1}) {
                CHECK(std::binary_search(fix.report.fixed_zero.begin(), fix.report.fixed_zero.end(),
                                         s.var(0, 0, {i, j})));
            }
}

TEST_CASE("logical fixing never admits obstacles or early goals") {
    const auto s = single(GridMap(3, 3, {{1, 1}}), {0, 0}, {2, 2}, 6);
    const auto fix = fix_logical(s);
    for (int t = 0; t <= 6; ++t) {
        for (const Cell& c : fix.admissible[0][t]) {
            CHECK(c != Cell{1, 1});
            if (c == Cell{2, 2}) CHECK(t >= 4);
        }
    }
}

TEST_CASE("late-time window without a reachable goal is infeasible") {
    CHECK_THROWS_AS(fix_logical(single(GridMap(3, 3), {0, 0}, {2, 2}, 3)), InfeasibleWindow);
    CHECK_THROWS_AS(fix_logical(single(GridMap(1, 3, {{0, 1}}), {0, 0}, {0, 2}, 5)), InfeasibleWindow);
    CHECK_NOTHROW(fix_logical(single(GridMap(3, 3), {0, 0}, {2, 2}, 3, GoalMode::approximation)));
}

TEST_CASE("visited exclusion is relaxed when it starves a layer") {
    auto s = single(GridMap(1, 4), {0, 0}, {0, 3}, 3, GoalMode::late_time);
    s.robots[0].visited = {{0, 1}};
    const auto fix = fix_logical(s);
    CHECK(fix.visited_relaxed[0]);
    CHECK(fix.admissible[0][1] == std::vector<Cell>{{0, 1}});
}

TEST_CASE("every shortest path survives logical fixing") {
    std::mt19937_64 rng(5);
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int rows = 1 + static_cast<int>(rng() % 3), cols = 1 + static_cast<int>(rng() % 3);
        if (rows * cols < 2) continue;
        CellSet obstacles;
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j)
                if (rng() % 5 == 0) obstacles.insert({i, j});
        const GridMap map(rows, cols, obstacles);
        const auto free = map.free_cells();
        if (free.size() < 2) continue;
        const Cell start = free[rng() % free.size()];
        Cell goal = free[rng() % free.size()];
        if (goal == start) continue;
        const int horizon = 1 + static_cast<int>(rng() % 4);
        const auto dist = bfs_distances(map, start);
        const int d = dist[map.id(goal)];
        const GoalMode mode = d != kUnreachable && d <= horizon ? GoalMode::late_time : GoalMode::approximation;
        const auto s = single(map, start, goal, horizon, mode);
        LogicalFix fix;
        try {
            fix = fix_logical(s);
        } catch (const InfeasibleWindow&) {
            // Only possible when no walk of this length exists at all.
            continue;
        }
        std::vector<Cell> path{start};
        walks(map, path, horizon, [&](const std::vector<Cell>& p) {
            bool keep = true;
            if (mode == GoalMode::late_time) {
                // Shortest route to the goal, then parked there.
                for (int t = 0; t <= horizon; ++t) {
                    if (t <= d && dist[map.id(p[t])] != t) keep = false;
                }
                if (keep) {
                    // Walks cannot stay put, so only horizon == d qualifies.
                    keep = horizon == d && p[d] == goal;
                }
            } else {
                for (int t = 0; t <= horizon; ++t) keep = keep && dist[map.id(p[t])] == t;
            }
            if (!keep) return;
            ++checked;
            for (int t = 0; t <= horizon; ++t) {
                const auto& layer = fix.admissible[0][t];
                INFO("trial " << trial << " " << rows << "x" << cols << " obstacles " << obstacles.size() << " start "
                              << to_string(start) << " goal " << to_string(goal) << " d " << d << " horizon "
                              << horizon << " t " << t << " cell " << to_string(p[t]));
                CHECK(std::binary_search(layer.begin(), layer.end(), p[t]));
            }
        });
        if (mode == GoalMode::late_time && d < horizon) {
            // Shortest route padded by parking on the goal.
            const auto& layers = fix.admissible[0];
            CHECK(std::binary_search(layers[horizon].begin(), layers[horizon].end(), goal));
        }
    }
    CHECK(checked > 50);
}

TEST_CASE("fold substitutes a variable fixed to one") {
    const auto f = fold(example_model(), {0}, {});
    CHECK(f.original == std::vector<Variable>{1, 2, 3});
    CHECK(f.model.constant() == -5);
    CHECK(f.model.coefficient(0, 0) == 1);   // x2: -3 + 4
    CHECK(f.model.coefficients().count({1, 1}) == 0);  // x3: -8 + 8
    CHECK(f.model.coefficient(2, 2) == -6);  // x4
    CHECK(f.model.coefficient(0, 1) == 2);
    CHECK(f.model.coefficient(1, 2) == 10);
}

TEST_CASE("fold deletes a variable fixed to zero") {
    const auto f = fold(example_model(), {}, {2});
    CHECK(f.original == std::vector<Variable>{0, 1, 3});
    CHECK(f.model.coefficients().size() == 4);
    CHECK(f.model.coefficient(0, 1) == 4);
}

TEST_CASE("fold without fixes is the identity") {
    const auto f = fold(example_model(), {}, {});
    CHECK(f.model == example_model());
    CHECK_THROWS_AS(fold(example_model(), {1}, {1}), std::invalid_argument);
    CHECK_THROWS_AS(fold(example_model(), {4}, {}), std::out_of_range);
}

TEST_CASE("fold preserves energy on extended assignments") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng() % 12;
        const QuboModel m = oracle::random_model(rng, n);
        std::vector<Variable> one, zero;
        for (Variable v = 0; v < n; ++v) {
            const auto r = rng() % 3;
            if (r == 0) one.push_back(v);
            if (r == 1) zero.push_back(v);
        }
        const auto f = fold(m, one, zero);
        for (int k = 0; k < 8; ++k) {
            const Assignment reduced = oracle::random_bits(rng, f.model.num_vars(), 0.5);
            const Assignment full = expand(f, reduced, one, n);
            for (Variable v : one) REQUIRE(full[v] == 1);
            for (Variable v : zero) REQUIRE(full[v] == 0);
            CHECK(std::abs(f.model.energy(reduced) - oracle::direct_energy(m, full)) < 1e-9);
        }
    }
}

TEST_CASE("numeric fixing removes an uncompensated outlier") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> small(-2.0, 2.0);
    QuboModel m(16);
    for (Variable a = 0; a < 16; ++a) {
        m.accumulate(a, a, a == 5 ? 100.0 : small(rng));
        for (Variable b = a + 1; b < 16; ++b)
            if (rng() % 3 == 0) m.accumulate(a, b, small(rng));
    }
    const auto r = fix_numeric_diagonal(m, 3.0);
    CHECK(r.fixed_zero == std::vector<Variable>{5});
    CHECK(r.reduced.model.num_vars() == 15);
}

TEST_CASE("numeric fixing leaves negative diagonals alone") {
    QuboModel m(4);
    for (Variable v = 0; v < 4; ++v) m.accumulate(v, v, -1.0 - static_cast<double>(v));
    m.accumulate(0, 3, 5.0);
    const auto r = fix_numeric_diagonal(m, 0.0);
    CHECK(r.fixed_zero.empty());
    CHECK(r.rounds == 0);
}

TEST_CASE("numeric fixing cascades along a chain") {
    // a is an outlier; once it is gone, b loses its only negative coupling.
    QuboModel m(3);
    m.accumulate(0, 0, 10.0);
    m.accumulate(1, 1, 1.0);
    m.accumulate(2, 2, -3.0);
    m.accumulate(0, 1, -2.0);
    const auto r = fix_numeric_diagonal(m, 0.5);
    CHECK(r.fixed_zero == std::vector<Variable>{0, 1});
    CHECK(r.rounds == 2);
    const auto want = oracle::argmin_masks(m);
    REQUIRE(want.size() == 1);
    CHECK(want.front() == 0b100);
    CHECK(oracle::min_energy(r.reduced.model) == Catch::Approx(oracle::min_energy(m)));
}

TEST_CASE("numeric fixing preserves the argmin") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 150; ++trial) {
        const std::size_t n = 2 + rng() % 13;
        QuboModel m = oracle::random_model(rng, n, 0.3, 3.0);
        // Plant large positive diagonals so the rule has work to do.
        for (int k = 0; k < 2; ++k) {
            const Variable v = rng() % n;
            m.accumulate(v, v, 20.0);
        }
        const double aggressiveness = trial % 3 == 0 ? 0.0 : 1.0;
        const auto r = fix_numeric_diagonal(m, aggressiveness);
        const auto before = oracle::argmin_masks(m);
        const auto after = oracle::argmin_masks(r.reduced.model);
        std::vector<std::uint64_t> lifted;
        for (std::uint64_t mask : after) {
            const Assignment full = expand(r.reduced, oracle::bits_of(mask, r.reduced.model.num_vars()), {}, n);
            std::uint64_t x = 0;
            for (std::size_t k = 0; k < n; ++k) x |= std::uint64_t{full[k]} << k;
            lifted.push_back(x);
        }
        std::sort(lifted.begin(), lifted.end());
        CHECK(lifted == before);
    }
}
