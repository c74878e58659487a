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
#include <chrono>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmapf/classical_baseline.hpp"
#include "qmapf/multi_agent.hpp"
#include "qmapf/report.hpp"
#include "qmapf/scenario.hpp"

namespace qmapf {

struct BenchRun {
    std::uint64_t seed = 0;
    bool success = false;
    std::string failure;
    std::size_t moves = 0;
    std::size_t original = 0;
    std::size_t reduced = 0;
    double reduction_pct = 0.0;
    bool solved_by_preprocess = false;
    double seconds = 0.0;
};

struct BenchReport {
    std::string name;
    std::size_t robots = 0;
    bool classical_found = false;
    std::size_t classical_moves = 0;
    double classical_seconds = 0.0;
    std::vector<BenchRun> runs;

    std::vector<std::size_t> successful_moves() const {
        std::vector<std::size_t> m;
        for (const auto& r : runs) {
            if (r.success) m.push_back(r.moves);
        }
        std::sort(m.begin(), m.end());
        return m;
    }
    double success_rate() const {
        if (runs.empty()) return 0.0;
        return static_cast<double>(successful_moves().size()) / static_cast<double>(runs.size());
    }
    std::optional<std::size_t> best_moves() const {
        const auto m = successful_moves();
        if (m.empty()) return std::nullopt;
        return m.front();
    }
    std::optional<double> median_moves() const {
        const auto m = successful_moves();
        if (m.empty()) return std::nullopt;
        const std::size_t h = m.size() / 2;
        return m.size() % 2 ? static_cast<double>(m[h]) : 0.5 * static_cast<double>(m[h - 1] + m[h]);
    }
    // Best QUBO length over classical length; only when both sides succeed.
    std::optional<double> ratio() const {
        const auto best = best_moves();
        if (!classical_found || !best || classical_moves == 0) return std::nullopt;
        return static_cast<double>(*best) / static_cast<double>(classical_moves);
    }
    // Fraction of runs whose length matches the classical one.
    double match_rate() const {
        if (runs.empty() || !classical_found) return 0.0;
        std::size_t n = 0;
        for (const auto& r : runs) n += r.success && r.moves == classical_moves;
        return static_cast<double>(n) / static_cast<double>(runs.size());
    }
    std::optional<double> min_reduction_pct() const {
        std::optional<double> out;
        for (const auto& r : runs) {
            if (r.original > 0) out = out ? std::min(*out, r.reduction_pct) : r.reduction_pct;
        }
        return out;
    }
};

/// Seed of the k-th repeat; repeat 0 uses the scenario seed unchanged.
inline std::uint64_t repeat_seed(std::uint64_t seed, std::size_t k) { return k == 0 ? seed : read_seed(seed, k); }

/// Classical reference: A* for one robot, prioritized planning otherwise.
inline std::optional<std::size_t> classical_moves(const GridMap& map, const std::vector<RobotSpec>& robots) {
    if (robots.size() == 1) {
        const auto p = astar(map, robots.front().start, robots.front().goal);
        if (!p) return std::nullopt;
        return p->size() - 1;
    }
    const auto res = prioritized_plan(map, robots);
    if (!res.all_found()) return std::nullopt;
    return res.total_moves();
}

inline BenchRun run_once(const ScenarioSpec& spec, std::uint64_t seed, Plan* keep = nullptr) {
    BenchRun run;
    run.seed = seed;
    SolverConfig solver = spec.solver;
    solver.seed = seed;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        Plan plan = plan_multi(spec.map, spec.robots, spec.weights, spec.window, solver);
        run.moves = plan.total_moves();
        run.original = plan.original_vars();
        run.reduced = plan.reduced_vars();
        run.reduction_pct = plan.reduction_pct();
        run.solved_by_preprocess = plan.solved_by_preprocess();
        if (!plan.all_reached()) {
            run.failure = "not all robots reached their goals";
        } else if (auto err = validate_plan(spec.map, plan, spec.robots)) {
            run.failure = *err;
        } else {
            run.success = true;
        }
        if (keep) *keep = std::move(plan);
    } catch (const std::exception& e) {
        run.failure = e.what();
    }
    run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return run;
}

/// Runs the classical baseline once and the QUBO pipeline `repeats` times.
/// Repeats run one after another; results do not depend on their order.
inline BenchReport run_benchmark(const ScenarioSpec& spec, int repeats) {
    BenchReport report;
    report.name = spec.name;
    report.robots = spec.robots.size();
    const auto t0 = std::chrono::steady_clock::now();
    if (auto c = classical_moves(spec.map, spec.robots)) {
        report.classical_found = true;
        report.classical_moves = *c;
    }
    report.classical_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (int k = 0; k < repeats; ++k) {
        report.runs.push_back(run_once(spec, repeat_seed(spec.solver.seed, static_cast<std::size_t>(k))));
    }
    return report;
}

inline nlohmann::json to_json(const BenchReport& r, bool timings = false) {
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& run : r.runs) {
        nlohmann::json j = {{"seed", run.seed},
                            {"success", run.success},
                            {"moves", run.moves},
                            {"original", run.original},
                            {"reduced", run.reduced},
                            {"reduction_pct", run.reduction_pct},
                            {"solved_by_preprocess", run.solved_by_preprocess}};
        if (!run.failure.empty()) j["failure"] = run.failure;
        if (timings) j["seconds"] = run.seconds;
        runs.push_back(j);
    }
    nlohmann::json out = {{"schema", kSchemaVersion},
                          {"name", r.name},
                          {"robots", r.robots},
                          {"classical", {{"found", r.classical_found}}},
                          {"success_rate", r.success_rate()},
                          {"match_rate", r.match_rate()},
                          {"runs", runs}};
    if (r.classical_found) out["classical"]["moves"] = r.classical_moves;
    if (timings) out["classical"]["seconds"] = r.classical_seconds;
    if (auto b = r.best_moves()) out["best_moves"] = *b;
    if (auto m = r.median_moves()) out["median_moves"] = *m;
    if (auto q = r.ratio()) out["ratio"] = *q;
    if (auto red = r.min_reduction_pct()) out["min_reduction_pct"] = *red;
    return out;
}

/// Aligned plain-text table, one row per report.
inline std::string format_table(const std::vector<BenchReport>& reports) {
    const std::vector<std::string> head{"scenario", "robots", "moves C/Q", "ratio", "vars orig/red", "reduction %",
                                        "success"};
    std::vector<std::vector<std::string>> rows{head};
    for (const auto& r : reports) {
        const auto best = r.best_moves();
        const auto ratio = r.ratio();
        std::size_t orig = 0, red = 0;
        for (const auto& run : r.runs) {
            if (run.success && best && run.moves == *best) {
                orig = run.original;
                red = run.reduced;
                break;
            }
        }
        std::ostringstream q, pct, succ;
        q << std::fixed << std::setprecision(3);
        if (ratio) q << *ratio; else q << "-";
        pct << std::fixed << std::setprecision(1);
        if (orig) pct << 100.0 * static_cast<double>(orig - red) / static_cast<double>(orig); else pct << "-";
        succ << std::fixed << std::setprecision(0) << 100.0 * r.success_rate() << "% of " << r.runs.size();
        rows.push_back({r.name, std::to_string(r.robots),
                        (r.classical_found ? std::to_string(r.classical_moves) : std::string("inf")) + "/" +
                            (best ? std::to_string(*best) : std::string("inf")),
                        q.str(), std::to_string(orig) + "/" + std::to_string(red), pct.str(), succ.str()});
    }
    std::vector<std::size_t> width(head.size(), 0);
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
    std::ostringstream os;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        for (std::size_t c = 0; c < rows[k].size(); ++c) {
            os << (c ? "  " : "");
            if (c + 1 < rows[k].size()) {
                os << std::left << std::setw(static_cast<int>(width[c])) << rows[k][c];
            } else {
                os << rows[k][c];
            }
        }
        os << '\n';
        if (k == 0) {
            for (std::size_t c = 0; c < width.size(); ++c) os << (c ? "  " : "") << std::string(width[c], '-');
            os << '\n';
        }
    }
    return os.str();
}

}  // namespace qmapf
