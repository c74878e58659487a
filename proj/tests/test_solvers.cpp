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

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qmapf/preprocessor.hpp"
#include "qmapf/solvers.hpp"

using namespace qmapf;

namespace {

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

std::uint64_t mask_of(const Assignment& x) {
    std::uint64_t m = 0;
    for (std::size_t k = 0; k < x.size(); ++k) m |= std::uint64_t{x[k]} << k;
    return m;
}

// Folded window models from random small scenarios, as the planner builds them.
std::vector<QuboModel> pipeline_models(std::size_t count, std::size_t max_free) {
    std::mt19937_64 rng(606);
    std::vector<QuboModel> out;
    while (out.size() < count) {
        const int side = 3 + static_cast<int>(rng() % 2);
        CellSet obstacles;
        for (int i = 0; i < side; ++i)
            for (int j = 0; j < side; ++j)
                if (rng() % 6 == 0) obstacles.insert({i, j});
        const GridMap map(side, side, obstacles);
        const auto free = map.free_cells();
        if (free.size() < 3) continue;
        WindowSpec s;
        s.map = map;
        s.allow_wait = rng() % 2;
        const std::size_t robots = s.allow_wait ? 2 : 1;
        for (std::size_t r = 0; r < robots; ++r) {
            RobotWindow rw;
            rw.start = free[rng() % free.size()];
            rw.goal = free[rng() % free.size()];
            rw.horizon = 2 + static_cast<int>(rng() % 3);
            rw.goal_mode = manhattan(rw.start, rw.goal) < rw.horizon ? GoalMode::late_time : GoalMode::approximation;
            s.robots.push_back(rw);
        }
        LogicalFix fix;
        try {
            fix = fix_logical(s, {static_cast<int>(rng() % 2), true, true});
        } catch (const InfeasibleWindow&) {
            continue;
        }
        for (std::size_t r = 0; r < robots; ++r) s.robots[r].admissible = fix.admissible[r];
        const auto folded = fold(build_window_model(s), fix.report);
        const std::size_t n = folded.model.num_vars();
        if (n < 2 || n > max_free) continue;
        out.push_back(normalize(folded.model, s.weights.scale_for(n)).model);
    }
    return out;
}

}  // namespace

TEST_CASE("exhaustive solver finds the example minimum") {
    const auto set = solve_exhaustive(example_model());
    REQUIRE(set.samples.size() == 1);
    CHECK(set.best().energy == -11);
    CHECK(set.best().bits == Assignment{1, 0, 0, 1});
}

TEST_CASE("exhaustive solver on an empty model") {
    const auto set = solve_exhaustive(QuboModel(0, 2.5));
    REQUIRE(set.samples.size() == 1);
    CHECK(set.best().energy == 2.5);
    CHECK(set.best().bits.empty());
}

TEST_CASE("exhaustive solver with nonnegative coefficients includes the zero state") {
    QuboModel m(5);
    m.accumulate(0, 1, 1.0);
    m.accumulate(2, 2, 3.0);
    m.accumulate(3, 4, 0.5);
    const auto set = solve_exhaustive(m);
    bool zero = false;
    for (const auto& s : set.samples) {
        CHECK(s.energy == 0.0);
        zero = zero || mask_of(s.bits) == 0;
    }
    CHECK(zero);
}

TEST_CASE("exhaustive solver returns every tie") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 60; ++trial) {
        // Integer weights make ties common.
        const std::size_t n = 1 + rng() % 10;
        QuboModel m(n);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a; b < n; ++b)
                if (rng() % 2) m.accumulate(a, b, static_cast<double>(static_cast<int>(rng() % 5) - 2));
        const auto want = oracle::argmin_masks(m);
        const auto set = solve_exhaustive(m);
        std::vector<std::uint64_t> got;
        for (const auto& s : set.samples) {
            got.push_back(mask_of(s.bits));
            CHECK(s.energy == m.energy(s.bits));
        }
        std::sort(got.begin(), got.end());
        CHECK(got == want);
    }
}

TEST_CASE("exhaustive solver refuses large models") {
    CHECK_THROWS_AS(solve_exhaustive(QuboModel(kExhaustiveLimit + 1)), TooManyVariables);
}

TEST_CASE("annealer finds the example minimum") {
    SolverConfig cfg;
    cfg.num_reads = 50;
    const auto set = solve_annealing(example_model(), cfg);
    CHECK(set.best().energy == -11);
    CHECK(set.total_occurrences() == 50);
}

TEST_CASE("annealer on an empty model does not sample") {
    SolverConfig cfg;
    cfg.num_reads = 7;
    const auto set = solve_annealing(QuboModel(0, -1.0), cfg);
    REQUIRE(set.samples.size() == 1);
    CHECK(set.best().energy == -1.0);
}

TEST_CASE("annealer is deterministic for a fixed seed") {
    std::mt19937_64 rng(3);
    const QuboModel m = oracle::random_model(rng, 18);
    SolverConfig cfg;
    cfg.num_reads = 20;
    cfg.sweeps = 200;
    cfg.seed = 99;
    const auto a = solve_annealing(m, cfg);
    const auto b = solve_annealing(m, cfg);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t k = 0; k < a.samples.size(); ++k) {
        CHECK(a.samples[k].bits == b.samples[k].bits);
        CHECK(a.samples[k].energy == b.samples[k].energy);
        CHECK(a.samples[k].occurrences == b.samples[k].occurrences);
    }
}

TEST_CASE("sample energies re-verify and are sorted") {
    std::mt19937_64 rng(4);
    const QuboModel m = oracle::random_model(rng, 14);
    SolverConfig cfg;
    cfg.num_reads = 30;
    cfg.sweeps = 50;
    const auto set = solve_annealing(m, cfg);
    for (std::size_t k = 0; k < set.samples.size(); ++k) {
        CHECK(set.samples[k].energy == m.energy(set.samples[k].bits));
        CHECK(std::abs(set.samples[k].energy - oracle::direct_energy(m, set.samples[k].bits)) < 1e-9);
        if (k) CHECK(set.samples[k - 1].energy <= set.samples[k].energy);
    }
}

TEST_CASE("incremental flip energy matches full evaluation") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 30; ++trial) {
        const QuboModel m = oracle::random_model(rng, 2 + rng() % 12);
        const detail::FlipTable table(m);
        Assignment x = oracle::random_bits(rng, m.num_vars(), 0.5);
        for (std::size_t v = 0; v < m.num_vars(); ++v) {
            double field = 0;
            for (const auto& [u, w] : table.couplings[v]) field += w * x[u];
            const double delta = (x[v] ? -1.0 : 1.0) * (table.linear[v] + field);
            Assignment y = x;
            y[v] ^= 1;
            CHECK(std::abs(delta - (m.energy(y) - m.energy(x))) < 1e-9);
        }
    }
}

TEST_CASE("metropolis rule") {
    CHECK(metropolis_accept(-1.0, 5.0, 0.999));
    CHECK(metropolis_accept(0.0, 5.0, 0.999));
    CHECK_FALSE(metropolis_accept(1.0, 1e6, 0.0001));
    // Acceptance frequency of an uphill move at fixed beta.
    std::mt19937_64 rng(8);
    const int draws = 200000;
    for (double delta : {0.25, 1.0, 2.0}) {
        const double beta = 1.3;
        int hits = 0;
        for (int k = 0; k < draws; ++k) hits += metropolis_accept(delta, beta, detail::unit(rng));
        const double p = std::exp(-beta * delta);
        const double sigma = std::sqrt(p * (1 - p) / draws);
        CHECK(std::abs(static_cast<double>(hits) / draws - p) < 5 * sigma);
    }
}

TEST_CASE("read seeds do not depend on scheduling") {
    CHECK(read_seed(1, 0) != read_seed(1, 1));
    CHECK(read_seed(1, 5) == read_seed(1, 5));
    CHECK(derive_seed(7, 1, 2) != derive_seed(7, 2, 1));
}

TEST_CASE("config validation") {
    SolverConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.num_reads = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.beta_initial = 10.0;
    cfg.beta_final = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("annealer matches the exhaustive oracle on pipeline instances") {
    const auto models = pipeline_models(12, 20);
    for (std::size_t k = 0; k < models.size(); ++k) {
        const double ground = solve_exhaustive(models[k]).best().energy;
        CHECK(std::abs(ground - oracle::min_energy(models[k])) < 1e-9);
        int hits = 0;
        const int runs = 100;
        for (int seed = 0; seed < runs; ++seed) {
            SolverConfig cfg;
            cfg.seed = static_cast<std::uint64_t>(seed) + 1000 * k;
            hits += std::abs(solve_annealing(models[k], cfg).best().energy - ground) < 1e-9;
        }
        INFO("model " << k << " with " << models[k].num_vars() << " variables");
        CHECK(hits >= 95);
    }
}
