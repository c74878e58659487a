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

#include <string>

#include <json.hpp>

#include "qmapf/penalty_builder.hpp"
#include "qmapf/post_processor.hpp"
#include "qmapf/solvers.hpp"
#include "qmapf/window_planner.hpp"

namespace qmapf {

inline constexpr int kSchemaVersion = 1;

inline nlohmann::json cell_json(const Cell& c) { return nlohmann::json::array({c.i, c.j}); }

inline nlohmann::json to_json(const TimedPath& p) {
    auto out = nlohmann::json::array();
    for (std::size_t k = 0; k < p.cells.size(); ++k) {
        out.push_back({p.start_time + static_cast<int>(k), p.cells[k].i, p.cells[k].j});
    }
    return out;
}

inline nlohmann::json to_json(const Conflict& c) {
    return {{"kind", to_string(c.kind)}, {"t", c.t}, {"robots", {c.first, c.second}}, {"cell", cell_json(c.cell)}};
}

inline nlohmann::json to_json(const WindowRecord& w) {
    nlohmann::json modes = nlohmann::json::array();
    for (GoalMode m : w.goal_modes) modes.push_back(m == GoalMode::late_time ? "late_time" : "approximation");
    nlohmann::json events = nlohmann::json::array();
    for (const auto& e : w.events) {
        events.push_back({{"attempt", e.attempt}, {"robot", e.robot}, {"action", e.action}, {"t", e.t}});
    }
    return {
        {"index", w.index},
        {"start_time", w.start_time},
        {"length", w.length},
        {"robots", w.robots},
        {"goal_modes", modes},
        {"preprocess",
         {{"original", w.preprocess.original_count},
          {"reduced", w.preprocess.reduced_count},
          {"fixed_one", w.preprocess.fixed_one.size()},
          {"fixed_zero", w.preprocess.fixed_zero.size()},
          {"numeric_fixed", w.numeric_fixed},
          {"reduction_pct", w.preprocess.reduction_pct},
          {"solved_by_preprocess", w.preprocess.solved_by_preprocess}}},
        {"attempts", w.attempts},
        {"solver_calls", w.solver_calls},
        {"slack", w.slack},
        {"best_energy", w.best_energy},
        {"accepted", w.accepted},
        {"collision_free", w.collision_free},
        {"events", events},
    };
}

/// Plan report. Contains nothing that varies between identical runs.
inline nlohmann::json to_json(const Plan& plan) {
    nlohmann::json robots = nlohmann::json::array();
    for (const auto& r : plan.robots) {
        robots.push_back({{"id", r.id},
                          {"goal", cell_json(r.goal)},
                          {"status", to_string(r.status)},
                          {"moves", r.moves()},
                          {"path", to_json(r.path)},
                          {"provenance", r.provenance}});
    }
    nlohmann::json windows = nlohmann::json::array();
    for (const auto& w : plan.window_log) windows.push_back(to_json(w));
    nlohmann::json unresolved = nlohmann::json::array();
    for (const auto& c : plan.unresolved) unresolved.push_back(to_json(c));
    return {
        {"schema", kSchemaVersion},
        {"all_reached", plan.all_reached()},
        {"total_moves", plan.total_moves()},
        {"waits_inserted", plan.waits_inserted},
        {"preprocess",
         {{"original", plan.original_vars()},
          {"reduced", plan.reduced_vars()},
          {"reduction_pct", plan.reduction_pct()},
          {"solved_by_preprocess", plan.solved_by_preprocess()}}},
        {"robots", robots},
        {"unresolved", unresolved},
        {"window_log", windows},
    };
}

/// Sample set summary: lowest energy plus an energy histogram of reads.
inline nlohmann::json to_json(const SampleSet& set) {
    nlohmann::json histogram = nlohmann::json::array();
    for (const auto& s : set.samples) histogram.push_back({{"energy", s.energy}, {"occurrences", s.occurrences}});
    nlohmann::json out = {{"schema", kSchemaVersion}, {"samples", set.samples.size()}, {"reads", set.total_occurrences()}};
    if (!set.samples.empty()) out["best_energy"] = set.best().energy;
    out["histogram"] = histogram;
    return out;
}

}  // namespace qmapf
