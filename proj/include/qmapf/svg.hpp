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

#include <array>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmapf/grid_world.hpp"
#include "qmapf/window_planner.hpp"

namespace qmapf {

struct SvgPath {
    std::vector<Cell> cells;
    Cell goal;
};

inline constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                      "#9467bd", "#8c564b", "#e377c2", "#17becf"};

/// Renders the grid with one colored polyline per path. Output depends only
/// on the arguments.
inline void render_svg(const GridMap& map, const std::vector<SvgPath>& paths, std::ostream& os, int cell_px = 40) {
    const int w = map.cols() * cell_px;
    const int h = map.rows() * cell_px;
    const auto cx = [&](const Cell& c) { return c.j * cell_px + cell_px / 2; };
    const auto cy = [&](const Cell& c) { return c.i * cell_px + cell_px / 2; };

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 "
       << w << ' ' << h << "\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h << "\" fill=\"#ffffff\"/>\n";
    for (const Cell& c : map.obstacles()) {
        os << "<rect x=\"" << c.j * cell_px << "\" y=\"" << c.i * cell_px << "\" width=\"" << cell_px
           << "\" height=\"" << cell_px << "\" fill=\"#404040\"/>\n";
    }
    os << "<g stroke=\"#b0b0b0\" stroke-width=\"1\">\n";
    for (int i = 0; i <= map.rows(); ++i) {
        os << "<line x1=\"0\" y1=\"" << i * cell_px << "\" x2=\"" << w << "\" y2=\"" << i * cell_px << "\"/>\n";
    }
    for (int j = 0; j <= map.cols(); ++j) {
        os << "<line x1=\"" << j * cell_px << "\" y1=\"0\" x2=\"" << j * cell_px << "\" y2=\"" << h << "\"/>\n";
    }
    os << "</g>\n";

    for (std::size_t r = 0; r < paths.size(); ++r) {
        const auto& p = paths[r];
        const char* color = kPalette[r % kPalette.size()];
        os << "<g id=\"robot" << r << "\">\n";
        if (!p.cells.empty()) {
            os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"3\" points=\"";
            for (std::size_t k = 0; k < p.cells.size(); ++k) {
                os << (k ? " " : "") << cx(p.cells[k]) << ',' << cy(p.cells[k]);
            }
            os << "\"/>\n";
            const Cell& s = p.cells.front();
            os << "<circle cx=\"" << cx(s) << "\" cy=\"" << cy(s) << "\" r=\"" << cell_px / 5 << "\" fill=\"" << color
               << "\"/>\n";
            for (std::size_t k = 0; k < p.cells.size(); ++k) {
                os << "<text x=\"" << cx(p.cells[k]) + cell_px / 4 << "\" y=\"" << cy(p.cells[k]) - cell_px / 8
                   << "\" font-size=\"" << cell_px / 4 << "\" fill=\"" << color << "\">" << k << "</text>\n";
            }
        }
        const int half = cell_px / 4;
        os << "<rect x=\"" << cx(p.goal) - half << "\" y=\"" << cy(p.goal) - half << "\" width=\"" << 2 * half
           << "\" height=\"" << 2 * half << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        os << "</g>\n";
    }
    os << "</svg>\n";
}

inline std::vector<SvgPath> svg_paths(const Plan& plan) {
    std::vector<SvgPath> out;
    for (const auto& r : plan.robots) out.push_back({r.path.cells, r.goal});
    return out;
}

inline std::string render_svg(const GridMap& map, const std::vector<SvgPath>& paths) {
    std::ostringstream os;
    render_svg(map, paths, os);
    return os.str();
}

inline void write_svg(const GridMap& map, const std::vector<SvgPath>& paths, const std::string& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file);
    render_svg(map, paths, out);
    if (!out) throw std::runtime_error("error while writing " + file);
}

}  // namespace qmapf
