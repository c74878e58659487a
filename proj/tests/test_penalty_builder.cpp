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

#include <random>

#include "oracles.hpp"
#include "qmapf/penalty_builder.hpp"

using namespace qmapf;

namespace {

WindowSpec single(GridMap map, Cell start, Cell goal, int horizon) {
    WindowSpec s;
    s.map = std::move(map);
    RobotWindow r;
    r.start = start;
    r.goal = goal;
    r.horizon = horizon;
    s.robots.push_back(r);
    return s;
}

// Energy contribution of one penalty on a given set of (t, cell) bits.
template <class Apply>
double term(const WindowSpec& s, Apply apply, std::vector<std::pair<int, Cell>> on, std::size_t robot = 0) {
    QuboModel m(s.layout().size());
    apply(m);
    Assignment x(m.num_vars(), 0);
    for (const auto& [t, c] : on) x[s.var(robot, t, c)] = 1;
    return m.energy(x);
}

}  // namespace

TEST_CASE("one-hot expansion") {
    auto s = single(GridMap(1, 2), {0, 0}, {0, 1}, 1);
    s.robots[0].admissible = {{{0, 0}}, {{0, 0}, {0, 1}}};
    const auto hot = [&](QuboModel& m) { apply_one_hot(m, s, 0); };
    const double k = s.weights.k_hot;
    // Step 0 satisfied; step 1 varies.
    CHECK(term(s, hot, {{0, {0, 0}}, {1, {0, 1}}}) == 0.0);
    CHECK(term(s, hot, {{0, {0, 0}}, {1, {0, 0}}, {1, {0, 1}}}) == k);
    CHECK(term(s, hot, {{0, {0, 0}}}) == k);
}

TEST_CASE("adjacency penalties") {
    auto s = single(GridMap(1, 2), {0, 0}, {0, 1}, 1);
    const auto adj = [&](QuboModel& m) { apply_adjacency(m, s, 0); };
    CHECK(term(s, adj, {{0, {0, 0}}, {1, {0, 1}}}) == 0.0);
    CHECK(term(s, adj, {{0, {0, 0}}}) == s.weights.k_adj);

    auto d = single(GridMap(2, 2), {0, 0}, {1, 1}, 1);
    const auto adj2 = [&](QuboModel& m) { apply_adjacency(m, d, 0); };
    CHECK(term(d, adj2, {{0, {0, 0}}, {1, {1, 1}}}) == d.weights.k_adj);
}

TEST_CASE("adjacency never links through obstacles") {
    auto s = single(GridMap(1, 3, {{0, 1}}), {0, 0}, {0, 2}, 2);
    QuboModel m(s.layout().size());
    apply_adjacency(m, s, 0);
    for (const auto& [key, w] : m.coefficients()) {
        const auto a = s.layout().locate(key.first);
        const auto b = s.layout().locate(key.second);
        CHECK(a.cell != Cell{0, 1});
        CHECK(b.cell != Cell{0, 1});
    }
}

TEST_CASE("start reward") {
    auto s = single(GridMap(2, 2), {0, 0}, {1, 1}, 2);
    const auto start = [&](QuboModel& m) { apply_start(m, s, 0); };
    CHECK(term(s, start, {{0, {0, 0}}}) == -s.weights.k_start);
    CHECK(term(s, start, {{0, {0, 1}}}) == 0.0);
}

TEST_CASE("late-time goal ramp") {
    auto s = single(GridMap(3, 3), {0, 0}, {2, 2}, 4);
    s.weights.k_goal = 1.0;
    QuboModel m(s.layout().size());
    apply_goal_late_time(m, s, 0);
    const Cell g{2, 2};
    CHECK(m.coefficient(s.var(0, 0, g), s.var(0, 0, g)) == 0.0);
    CHECK(m.coefficient(s.var(0, 2, g), s.var(0, 2, g)) == -1.5);
    CHECK(m.coefficient(s.var(0, 4, g), s.var(0, 4, g)) == -2.0);
}

TEST_CASE("goal lock") {
    auto s = single(GridMap(2, 2), {0, 0}, {0, 1}, 3);
    const auto lock = [&](QuboModel& m) { apply_goal_lock(m, s, 0); };
    CHECK(term(s, lock, {{1, {0, 1}}, {2, {0, 1}}, {3, {0, 1}}}) == 0.0);
    CHECK(term(s, lock, {{1, {0, 1}}}) == s.weights.k_lock);
    CHECK(term(s, lock, {}) == 0.0);
}

TEST_CASE("backtracking") {
    auto s = single(GridMap(3, 3), {0, 0}, {2, 2}, 4);
    const auto bt = [&](QuboModel& m) { apply_backtracking(m, s, 0); };
    CHECK(term(s, bt, {{1, {1, 1}}, {3, {1, 1}}}) == s.weights.k_bt);
    CHECK(term(s, bt, {{2, {2, 2}}, {3, {2, 2}}}) == 0.0);
    s.robots[0].visited = {{1, 0}};
    CHECK(term(s, bt, {{2, {1, 0}}}) == s.weights.k_bt * s.weights.visited_softening);
    // The carried-over start at step 0 is not charged.
    s.robots[0].visited = {{0, 0}};
    CHECK(term(s, bt, {{0, {0, 0}}}) == 0.0);
}

TEST_CASE("teleportation") {
    auto s = single(GridMap(3, 3), {0, 0}, {2, 2}, 5);
    const auto tel = [&](QuboModel& m) { apply_teleportation(m, s, 0); };
    CHECK(term(s, tel, {{2, {2, 2}}}) == s.weights.k_tel);
    CHECK(term(s, tel, {{4, {2, 2}}}) == 0.0);
    auto same = single(GridMap(3, 3), {1, 1}, {1, 1}, 3);
    QuboModel m(same.layout().size());
    apply_teleportation(m, same, 0);
    CHECK_FALSE(m.has_terms());
}

TEST_CASE("approximation reward") {
    auto s = single(GridMap(5, 5), {0, 0}, {4, 4}, 3);
    s.robots[0].goal_mode = GoalMode::approximation;
    const auto& r = s.robots[0];
    // Interior cells have no blocked neighbours at radius 1.
    CHECK(approximation_reward(s, r, {2, 2}) == Catch::Approx(0.5 * s.weights.k_approx));
    CHECK(approximation_reward(s, r, {3, 3}) == Catch::Approx(0.75 * s.weights.k_approx));
    s.potential_radius = 0;
    CHECK(approximation_reward(s, r, {4, 4}) == s.weights.k_approx);
    CHECK(approximation_reward(s, r, {0, 0}) == 0.0);
    QuboModel m(s.layout().size());
    apply_approximation(m, s, 0);
    for (const auto& [key, w] : m.coefficients()) CHECK(s.layout().locate(key.first).t == 3);
}

TEST_CASE("vertex collision") {
    WindowSpec s;
    s.map = GridMap(5, 5);
    s.allow_wait = true;
    RobotWindow a;
    a.start = {0, 0};
    a.goal = {4, 4};
    a.horizon = 6;
    RobotWindow b;
    b.start = {4, 4};
    b.goal = {0, 0};
    b.horizon = 6;
    s.robots = {a, b};
    const auto coll = [&](QuboModel& m) { apply_vertex_collision(m, s); };
    QuboModel m(s.layout().size());
    coll(m);
    Assignment x(m.num_vars(), 0);
    x[s.var(0, 5, {2, 2})] = 1;
    x[s.var(1, 5, {2, 2})] = 1;
    CHECK(m.energy(x) == s.weights.k_coll);
    x[s.var(1, 5, {2, 2})] = 0;
    x[s.var(1, 5, {2, 3})] = 1;
    CHECK(m.energy(x) == 0.0);

    // Robot b only starts after robot a's window ends.
    s.robots[1].time_offset = 7;
    QuboModel apart(s.layout().size());
    apply_vertex_collision(apart, s);
    CHECK_FALSE(apart.has_terms());
}

TEST_CASE("vertex collision is symmetric in robot order") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        WindowSpec s = oracle::random_window(rng, 3);
        if (s.robots.size() < 2) continue;
        WindowSpec swapped = s;
        std::swap(swapped.robots[0], swapped.robots[1]);
        QuboModel m(s.layout().size()), n(swapped.layout().size());
        apply_vertex_collision(m, s);
        apply_vertex_collision(n, swapped);
        for (int k = 0; k < 5; ++k) {
            Assignment x = oracle::random_bits(rng, m.num_vars(), 0.3);
            Assignment y(x.size());
            const std::size_t block = s.layout().block_size();
            for (std::size_t v = 0; v < x.size(); ++v) {
                const std::size_t r = v / block;
                const std::size_t to = r == 0 ? v + block : r == 1 ? v - block : v;
                y[to] = x[v];
            }
            CHECK(m.energy(x) == Catch::Approx(n.energy(y)).margin(1e-12));
        }
    }
}

TEST_CASE("built model matches the penalty formulas") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const WindowSpec s = oracle::random_window(rng, 4);
        const QuboModel m = build_window_model(s);
        const Assignment x = oracle::random_bits(rng, m.num_vars(), trial % 2 ? 0.1 : 0.4);
        CHECK(std::abs(m.energy(x) - oracle::penalty_energy(s, x)) < 1e-9);
    }
}

TEST_CASE("a valid path pays nothing for hot, adjacency, backtracking and teleportation") {
    auto s = single(GridMap(3, 3), {0, 0}, {2, 2}, 4);
    const std::vector<Cell> path{{0, 0}, {0, 1}, {1, 1}, {1, 2}, {2, 2}};
    QuboModel m(s.layout().size());
    apply_one_hot(m, s, 0);
    apply_adjacency(m, s, 0);
    apply_backtracking(m, s, 0);
    apply_teleportation(m, s, 0);
    Assignment x(m.num_vars(), 0);
    for (int t = 0; t <= 4; ++t) x[s.var(0, t, path[t])] = 1;
    CHECK(m.energy(x) == 0.0);

    QuboModel goal(s.layout().size());
    apply_goal_late_time(goal, s, 0);
    CHECK(goal.energy(x) == -s.weights.k_goal * s.weights.goal_ramp_max);
}

TEST_CASE("no zero coefficient is ever stored") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const QuboModel m = build_window_model(oracle::random_window(rng, 4));
        for (const auto& [key, w] : m.coefficients()) CHECK(w != 0.0);
    }
}

TEST_CASE("obstacles contribute no variables") {
    auto s = single(GridMap(3, 3, {{1, 1}}), {0, 0}, {2, 2}, 4);
    const QuboModel m = build_window_model(s);
    for (const auto& [key, w] : m.coefficients()) {
        CHECK(s.layout().locate(key.first).cell != Cell{1, 1});
        CHECK(s.layout().locate(key.second).cell != Cell{1, 1});
    }
}

TEST_CASE("weights validation") {
    PenaltyWeights w;
    CHECK_NOTHROW(w.validate());
    w.k_adj = 0;
    CHECK_THROWS_AS(w.validate(), std::invalid_argument);
    w = {};
    w.goal_ramp_max = 0.5;
    CHECK_THROWS_AS(w.validate(), std::invalid_argument);
    w = {};
    CHECK(w.scale_for(79) == 2.0);
    CHECK(w.scale_for(80) == 1.0);
    w.norm_scale = 5.0;
    CHECK(w.scale_for(10) == 5.0);
}
