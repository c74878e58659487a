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

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qmapf/grid_world.hpp"
#include "qmapf/penalty_builder.hpp"
#include "qmapf/solvers.hpp"
#include "qmapf/window_planner.hpp"

namespace qmapf {

/// Everything needed to plan and benchmark one instance.
struct ScenarioSpec {
    std::string name = "scenario";
    GridMap map;
    std::vector<RobotSpec> robots;
    PenaltyWeights weights;
    WindowConfig window;
    SolverConfig solver;
    int repeats = 1;

    friend bool operator==(const ScenarioSpec& a, const ScenarioSpec& b) {
        return a.name == b.name && a.map.rows() == b.map.rows() && a.map.cols() == b.map.cols() &&
               a.map.connectivity() == b.map.connectivity() && a.map.obstacles() == b.map.obstacles() &&
               a.robots == b.robots && a.weights == b.weights && a.window == b.window && a.solver == b.solver &&
               a.repeats == b.repeats;
    }
};

/// Parse failure with a 1-based source position.
class ScenarioError : public std::runtime_error {
public:
    ScenarioError(int line, int column, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
          line_(line),
          column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline int column_of(std::string_view line, std::string_view part) {
    return static_cast<int>(part.data() - line.data()) + 1;
}

template <class T>
T parse_number(std::string_view text, int line, int column, std::string_view key) {
    T value{};
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw ScenarioError(line, column, "invalid value '" + std::string(text) + "' for " + std::string(key));
    }
    return value;
}

inline double parse_real(std::string_view text, int line, int column, std::string_view key) {
    // from_chars for double is missing on older toolchains; strtod is locale-bound but fine for "C".
    std::string s(text);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) {
        throw ScenarioError(line, column, "invalid value '" + s + "' for " + std::string(key));
    }
    return v;
}

inline bool parse_flag(std::string_view text, int line, int column, std::string_view key) {
    if (text == "true" || text == "1" || text == "on") return true;
    if (text == "false" || text == "0" || text == "off") return false;
    throw ScenarioError(line, column, "invalid flag '" + std::string(text) + "' for " + std::string(key));
}

inline std::string format_real(double v) {
    std::ostringstream os;
    os.precision(std::numeric_limits<double>::max_digits10);
    os << v;
    return os.str();
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        const std::size_t b = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
        if (i > b) out.push_back(s.substr(b, i - b));
    }
    return out;
}

}  // namespace detail

/// Parses the sectioned scenario format:
///
///   [map]      rows of '.' (free) and '#' (obstacle)
///   [robots]   "[id] start_i start_j goal_i goal_j release" per line
///   [weights]  key = value overrides of PenaltyWeights
///   [window]   window and preprocessing settings
///   [solver]   backend and annealing settings
///   [bench]    name and repeat count
///
/// Outside [map], lines starting with '#' are comments.
inline ScenarioSpec parse_scenario(std::string_view text) {
    ScenarioSpec spec;
    std::string section;
    std::set<std::string> seen_sections;
    std::vector<std::string> rows;
    int map_line = 0;
    struct RobotLine {
        RobotSpec robot;
        int line;
    };
    std::vector<RobotLine> robot_lines;
    Connectivity connectivity = Connectivity::four;

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const std::string_view line = detail::trim(raw);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ScenarioError(line_no, 1, "unterminated section header");
            section = std::string(line.substr(1, line.size() - 2));
            static const std::set<std::string> known{"map", "robots", "weights", "window", "solver", "bench"};
            if (!known.contains(section)) throw ScenarioError(line_no, 2, "unknown section [" + section + "]");
            if (!seen_sections.insert(section).second) throw ScenarioError(line_no, 2, "duplicate section [" + section + "]");
            if (section == "map") map_line = line_no + 1;
            continue;
        }
        if (section != "map" && line.front() == '#') continue;
        if (section.empty()) throw ScenarioError(line_no, 1, "content before the first section");

        if (section == "map") {
            for (std::size_t k = 0; k < line.size(); ++k) {
                if (line[k] != '.' && line[k] != '#') {
                    throw ScenarioError(line_no, detail::column_of(raw, line) + static_cast<int>(k),
                                        std::string("invalid map character '") + line[k] + "'");
                }
            }
            if (!rows.empty() && line.size() != rows.front().size()) {
                throw ScenarioError(line_no, detail::column_of(raw, line),
                                    "inconsistent row length (expected " + std::to_string(rows.front().size()) +
                                        ", got " + std::to_string(line.size()) + ")");
            }
            rows.emplace_back(line);
            continue;
        }

        if (section == "robots") {
            const auto fields = detail::split_ws(line);
            if (fields.size() != 5 && fields.size() != 6) {
                throw ScenarioError(line_no, detail::column_of(raw, line),
                                    "robot line needs 'start_i start_j goal_i goal_j release' (optionally prefixed by an id)");
            }
            const std::size_t base = fields.size() - 5;
            std::vector<int> v;
            for (std::size_t k = 0; k < fields.size(); ++k) {
                v.push_back(detail::parse_number<int>(fields[k], line_no, detail::column_of(raw, fields[k]), "robot"));
            }
            RobotSpec r;
            r.id = base ? static_cast<std::size_t>(v[0]) : robot_lines.size();
            if (base && v[0] < 0) throw ScenarioError(line_no, detail::column_of(raw, fields[0]), "negative robot id");
            r.start = {v[base], v[base + 1]};
            r.goal = {v[base + 2], v[base + 3]};
            r.release = v[base + 4];
            if (r.release < 0) throw ScenarioError(line_no, detail::column_of(raw, fields[base + 4]), "negative release time");
            robot_lines.push_back({r, line_no});
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ScenarioError(line_no, detail::column_of(raw, line), "expected key = value");
        const std::string key(detail::trim(line.substr(0, eq)));
        const std::string_view value = detail::trim(line.substr(eq + 1));
        const int col = detail::column_of(raw, value.empty() ? line : value);
        const auto real = [&] { return detail::parse_real(value, line_no, col, key); };
        const auto integer = [&] { return detail::parse_number<int>(value, line_no, col, key); };
        const auto count = [&] { return detail::parse_number<std::size_t>(value, line_no, col, key); };
        const auto unknown = [&] {
            throw ScenarioError(line_no, detail::column_of(raw, line), "unknown key '" + key + "' in [" + section + "]");
        };

        if (section == "weights") {
            PenaltyWeights& w = spec.weights;
            static const std::map<std::string, double PenaltyWeights::*> fields{
                {"k_hot", &PenaltyWeights::k_hot},     {"k_adj", &PenaltyWeights::k_adj},
                {"k_start", &PenaltyWeights::k_start}, {"k_goal", &PenaltyWeights::k_goal},
                {"k_lock", &PenaltyWeights::k_lock},   {"k_bt", &PenaltyWeights::k_bt},
                {"k_tel", &PenaltyWeights::k_tel},     {"k_approx", &PenaltyWeights::k_approx},
                {"k_coll", &PenaltyWeights::k_coll},   {"k_obs", &PenaltyWeights::k_obs},
                {"goal_ramp_max", &PenaltyWeights::goal_ramp_max},
                {"visited_softening", &PenaltyWeights::visited_softening},
            };
            if (key == "norm_scale") {
                if (value == "auto") {
                    w.norm_scale.reset();
                } else {
                    w.norm_scale = real();
                }
            } else if (auto it = fields.find(key); it != fields.end()) {
                w.*(it->second) = real();
            } else {
                unknown();
            }
        } else if (section == "window") {
            WindowConfig& c = spec.window;
            if (key == "length") c.window_len = integer();
            else if (key == "max_windows") c.max_windows = integer();
            else if (key == "max_retries") c.max_retries = integer();
            else if (key == "aggressiveness") c.aggressiveness = real();
            else if (key == "numeric_fixing") c.numeric_fixing = detail::parse_flag(value, line_no, col, key);
            else if (key == "potential_radius") c.potential_radius = integer();
            else if (key == "goal_ramp") {
                if (value == "late") c.goal_ramp = GoalRamp::late;
                else if (value == "constant") c.goal_ramp = GoalRamp::constant;
                else if (value == "early") c.goal_ramp = GoalRamp::early;
                else throw ScenarioError(line_no, col, "goal_ramp must be late, constant or early");
            } else if (key == "connectivity") {
                const int k = integer();
                if (k != 4 && k != 8) throw ScenarioError(line_no, col, "connectivity must be 4 or 8");
                connectivity = k == 4 ? Connectivity::four : Connectivity::eight;
            } else {
                unknown();
            }
        } else if (section == "solver") {
            SolverConfig& s = spec.solver;
            if (key == "backend") {
                if (value == "annealer") s.backend = Backend::annealer;
                else if (value == "exhaustive") s.backend = Backend::exhaustive;
                else throw ScenarioError(line_no, col, "backend must be annealer or exhaustive");
            } else if (key == "reads") s.num_reads = count();
            else if (key == "sweeps") s.sweeps = count();
            else if (key == "beta_initial") s.beta_initial = real();
            else if (key == "beta_final") s.beta_final = real();
            else if (key == "seed") s.seed = detail::parse_number<std::uint64_t>(value, line_no, col, key);
            else unknown();
        } else if (section == "bench") {
            if (key == "name") spec.name = std::string(value);
            else if (key == "repeats") spec.repeats = integer();
            else unknown();
        }
    }

    if (rows.empty()) throw ScenarioError(line_no, 1, "missing or empty [map] section");
    if (robot_lines.empty()) throw ScenarioError(line_no, 1, "missing or empty [robots] section");
    CellSet obstacles;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            if (rows[i][j] == '#') obstacles.insert({static_cast<int>(i), static_cast<int>(j)});
        }
    }
    spec.map = GridMap(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()), obstacles, connectivity);

    std::set<std::size_t> ids;
    std::set<Cell> goals;
    for (const auto& [r, line] : robot_lines) {
        if (!ids.insert(r.id).second) throw ScenarioError(line, 1, "duplicate robot id " + std::to_string(r.id));
        for (const auto& [what, c] : {std::pair{"start", r.start}, std::pair{"goal", r.goal}}) {
            if (!spec.map.in_grid(c)) throw ScenarioError(line, 1, std::string("robot ") + what + " " + to_string(c) + " is outside the map");
            if (spec.map.is_obstacle(c)) throw ScenarioError(line, 1, std::string("robot ") + what + " " + to_string(c) + " is on an obstacle");
        }
        if (!goals.insert(r.goal).second) throw ScenarioError(line, 1, "goal " + to_string(r.goal) + " is shared by two robots");
        spec.robots.push_back(r);
    }
    (void)map_line;
    try {
        spec.weights.validate();
        spec.window.validate();
        spec.solver.validate();
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(line_no, 1, e.what());
    }
    if (spec.repeats < 1) throw ScenarioError(line_no, 1, "repeats must be at least 1");
    return spec;
}

inline std::string serialize_scenario(const ScenarioSpec& spec) {
    using detail::format_real;
    std::ostringstream os;
    os << "[bench]\nname = " << spec.name << "\nrepeats = " << spec.repeats << "\n\n[map]\n";
    for (int i = 0; i < spec.map.rows(); ++i) {
        for (int j = 0; j < spec.map.cols(); ++j) os << (spec.map.is_obstacle({i, j}) ? '#' : '.');
        os << '\n';
    }
    os << "\n[robots]\n";
    for (const auto& r : spec.robots) {
        os << r.id << ' ' << r.start.i << ' ' << r.start.j << ' ' << r.goal.i << ' ' << r.goal.j << ' ' << r.release << '\n';
    }
    const PenaltyWeights& w = spec.weights;
    os << "\n[weights]\n"
       << "k_hot = " << format_real(w.k_hot) << "\nk_adj = " << format_real(w.k_adj)
       << "\nk_start = " << format_real(w.k_start) << "\nk_goal = " << format_real(w.k_goal)
       << "\nk_lock = " << format_real(w.k_lock) << "\nk_bt = " << format_real(w.k_bt)
       << "\nk_tel = " << format_real(w.k_tel) << "\nk_approx = " << format_real(w.k_approx)
       << "\nk_coll = " << format_real(w.k_coll) << "\nk_obs = " << format_real(w.k_obs)
       << "\ngoal_ramp_max = " << format_real(w.goal_ramp_max)
       << "\nvisited_softening = " << format_real(w.visited_softening)
       << "\nnorm_scale = " << (w.norm_scale ? format_real(*w.norm_scale) : std::string("auto")) << '\n';
    const WindowConfig& c = spec.window;
    const char* ramp = c.goal_ramp == GoalRamp::late ? "late" : c.goal_ramp == GoalRamp::constant ? "constant" : "early";
    os << "\n[window]\nlength = " << c.window_len << "\nmax_windows = " << c.max_windows
       << "\nmax_retries = " << c.max_retries << "\naggressiveness = " << format_real(c.aggressiveness)
       << "\nnumeric_fixing = " << (c.numeric_fixing ? "true" : "false")
       << "\npotential_radius = " << c.potential_radius << "\ngoal_ramp = " << ramp
       << "\nconnectivity = " << (spec.map.connectivity() == Connectivity::four ? 4 : 8) << '\n';
    const SolverConfig& s = spec.solver;
    os << "\n[solver]\nbackend = " << to_string(s.backend) << "\nreads = " << s.num_reads << "\nsweeps = " << s.sweeps
       << "\nbeta_initial = " << format_real(s.beta_initial) << "\nbeta_final = " << format_real(s.beta_final)
       << "\nseed = " << s.seed << '\n';
    return os.str();
}

}  // namespace qmapf
