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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qmapf/grid_world.hpp"

namespace qmapf {

using Variable = std::size_t;

/// Dense 0/1 vector over a model's variables.
using Assignment = std::vector<std::uint8_t>;

/// Sparse QUBO stored as an upper-triangular coefficient map plus a constant.
/// Diagonal keys (a, a) hold the linear terms.
class QuboModel {
public:
    using Key = std::pair<Variable, Variable>;
    using Coefficients = std::map<Key, double>;

    explicit QuboModel(std::size_t num_vars = 0, double constant = 0.0)
        : num_vars_(num_vars), constant_(constant) {}

    std::size_t num_vars() const { return num_vars_; }
    double constant() const { return constant_; }
    const Coefficients& coefficients() const { return coeffs_; }
    bool has_terms() const { return !coeffs_.empty(); }

    void add_constant(double w) { constant_ += w; }

    /// Adds `w` onto the (min, max) entry; an entry that cancels to exactly
    /// zero is erased.
    void accumulate(Variable a, Variable b, double w) {
        if (a >= num_vars_ || b >= num_vars_) {
            throw std::out_of_range("variable index outside the model");
        }
        if (w == 0.0) return;
        const Key key = a <= b ? Key{a, b} : Key{b, a};
        auto [it, inserted] = coeffs_.try_emplace(key, w);
        if (!inserted) {
            it->second += w;
            if (it->second == 0.0) coeffs_.erase(it);
        }
    }

    double coefficient(Variable a, Variable b) const {
        const Key key = a <= b ? Key{a, b} : Key{b, a};
        auto it = coeffs_.find(key);
        return it == coeffs_.end() ? 0.0 : it->second;
    }

    double energy(std::span<const std::uint8_t> x) const {
        if (x.size() != num_vars_) {
            throw std::invalid_argument("assignment size does not match the model");
        }
        double e = constant_;
        for (const auto& [key, w] : coeffs_) {
            if (x[key.first] && x[key.second]) e += w;
        }
        return e;
    }

    double max_abs_coefficient() const {
        double m = 0.0;
        for (const auto& [key, w] : coeffs_) m = std::max(m, std::abs(w));
        return m;
    }

    friend bool operator==(const QuboModel&, const QuboModel&) = default;

private:
    std::size_t num_vars_ = 0;
    double constant_ = 0.0;
    Coefficients coeffs_;
};

struct NormalizeResult {
    QuboModel model;
    double factor = 1.0;
    std::optional<std::string> warning;
};

/// Rescales so the largest coefficient magnitude equals `scale`. The constant
/// is scaled by the same factor, so argmin is preserved.
inline NormalizeResult normalize(const QuboModel& model, double scale) {
    if (!(scale > 0.0)) throw std::invalid_argument("normalization scale must be positive");
    NormalizeResult out{model, 1.0, std::nullopt};
    const double peak = model.max_abs_coefficient();
    if (peak == 0.0) {
        out.warning = "model has no nonzero coefficients; normalization skipped";
        return out;
    }
    out.factor = scale / peak;
    QuboModel scaled(model.num_vars(), model.constant() * out.factor);
    for (const auto& [key, w] : model.coefficients()) {
        // The peak maps to exactly `scale` regardless of rounding in the division.
        const double v = std::abs(w) == peak ? std::copysign(scale, w) : w * out.factor;
        scaled.accumulate(key.first, key.second, v);
    }
    out.model = std::move(scaled);
    return out;
}

/// (robot, time, cell) coordinates of one path variable.
struct VarSlot {
    std::size_t robot = 0;
    int t = 0;
    Cell cell;

    friend auto operator<=>(const VarSlot&, const VarSlot&) = default;
};

/// Linear indexing of path variables: n = i*cols + j + rows*cols*t plus a
/// per-robot block of rows*cols*(horizon+1).
class VarLayout {
public:
    VarLayout() = default;
    VarLayout(int rows, int cols, int horizon, std::size_t robots)
        : rows_(rows), cols_(cols), horizon_(horizon), robots_(robots) {
        if (rows <= 0 || cols <= 0) throw std::invalid_argument("layout dimensions must be positive");
        if (horizon < 0) throw std::invalid_argument("layout horizon must be non-negative");
        if (robots == 0) throw std::invalid_argument("layout needs at least one robot");
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int horizon() const { return horizon_; }
    std::size_t robots() const { return robots_; }

    std::size_t cells_per_step() const { return static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_); }
    std::size_t block_size() const { return cells_per_step() * static_cast<std::size_t>(horizon_ + 1); }
    std::size_t size() const { return block_size() * robots_; }
    Variable offset(std::size_t robot) const { return robot * block_size(); }

    Variable index(std::size_t robot, int t, const Cell& c) const {
        if (robot >= robots_) throw std::out_of_range("robot index outside the layout");
        if (t < 0 || t > horizon_) throw std::out_of_range("time step outside the layout horizon");
        if (c.i < 0 || c.j < 0 || c.i >= rows_ || c.j >= cols_) throw std::out_of_range("cell outside the layout grid");
        return static_cast<Variable>(c.i) * static_cast<Variable>(cols_) + static_cast<Variable>(c.j) +
               cells_per_step() * static_cast<Variable>(t) + offset(robot);
    }

    VarSlot locate(Variable n) const {
        if (n >= size()) throw std::out_of_range("variable outside the layout");
        VarSlot s;
        s.robot = n / block_size();
        const Variable local = n % block_size();
        s.t = static_cast<int>(local / cells_per_step());
        const Variable k = local % cells_per_step();
        s.cell = {static_cast<int>(k / static_cast<Variable>(cols_)), static_cast<int>(k % static_cast<Variable>(cols_))};
        return s;
    }

private:
    int rows_ = 1;
    int cols_ = 1;
    int horizon_ = 0;
    std::size_t robots_ = 1;
};

/// occupancy[t] is the sorted list of cells whose bit is set at step t.
using Occupancy = std::vector<std::vector<Cell>>;

/// Groups set bits by robot and time step.
inline std::vector<Occupancy> decode(std::span<const std::uint8_t> x, const VarLayout& layout) {
    if (x.size() > layout.size()) throw std::invalid_argument("assignment larger than the layout");
    std::vector<Occupancy> out(layout.robots(), Occupancy(static_cast<std::size_t>(layout.horizon()) + 1));
    for (Variable n = 0; n < x.size(); ++n) {
        if (!x[n]) continue;
        const VarSlot s = layout.locate(n);
        out[s.robot][static_cast<std::size_t>(s.t)].push_back(s.cell);
    }
    return out;
}

/// Writes "num_vars constant" then one "a b w" line per stored entry.
inline void write_qubo_text(std::ostream& os, const QuboModel& model) {
    std::ostringstream buf;
    buf.precision(std::numeric_limits<double>::max_digits10);
    buf << model.num_vars() << ' ' << model.constant() << '\n';
    for (const auto& [key, w] : model.coefficients()) {
        buf << key.first << ' ' << key.second << ' ' << w << '\n';
    }
    os << buf.str();
}

inline QuboModel read_qubo_text(std::istream& is) {
    std::size_t n = 0;
    double constant = 0.0;
    if (!(is >> n >> constant)) throw std::runtime_error("missing QUBO header line");
    QuboModel model(n, constant);
    Variable a = 0;
    Variable b = 0;
    double w = 0.0;
    while (is >> a >> b >> w) model.accumulate(a, b, w);
    if (!is.eof()) throw std::runtime_error("malformed QUBO entry");
    return model;
}

}  // namespace qmapf
