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
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmapf/qubo_model.hpp"

namespace qmapf {

enum class Backend { exhaustive, annealer };

inline constexpr std::size_t kExhaustiveLimit = 24;

struct SolverConfig {
    Backend backend = Backend::annealer;
    std::size_t num_reads = 100;
    std::size_t sweeps = 1000;
    double beta_initial = 0.1;
    double beta_final = 10.0;
    std::uint64_t seed = 0;

    friend bool operator==(const SolverConfig&, const SolverConfig&) = default;

    void validate() const {
        if (num_reads < 1) throw std::invalid_argument("num_reads must be at least 1");
        if (!(beta_initial > 0.0 && beta_initial < beta_final)) {
            throw std::invalid_argument("beta range must satisfy 0 < initial < final");
        }
    }
};

struct Sample {
    Assignment bits;
    double energy = 0.0;
    std::size_t occurrences = 0;
};

/// Distinct samples sorted by ascending energy, ties broken by the bit
/// pattern.
struct SampleSet {
    std::vector<Sample> samples;

    const Sample& best() const {
        if (samples.empty()) throw std::logic_error("empty sample set");
        return samples.front();
    }
    std::size_t total_occurrences() const {
        std::size_t n = 0;
        for (const auto& s : samples) n += s.occurrences;
        return n;
    }
};

class TooManyVariables : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

namespace detail {

/// Adjacency-list view of a model for O(degree) flip updates.
struct FlipTable {
    std::vector<double> linear;
    std::vector<std::vector<std::pair<std::size_t, double>>> couplings;

    explicit FlipTable(const QuboModel& model)
        : linear(model.num_vars(), 0.0), couplings(model.num_vars()) {
        for (const auto& [key, w] : model.coefficients()) {
            if (key.first == key.second) {
                linear[key.first] += w;
            } else {
                couplings[key.first].emplace_back(key.second, w);
                couplings[key.second].emplace_back(key.first, w);
            }
        }
    }
};

inline SampleSet collect(const QuboModel& model, const std::map<Assignment, std::size_t>& counts) {
    SampleSet out;
    out.samples.reserve(counts.size());
    for (const auto& [bits, n] : counts) out.samples.push_back({bits, model.energy(bits), n});
    std::stable_sort(out.samples.begin(), out.samples.end(),
                     [](const Sample& a, const Sample& b) { return a.energy < b.energy; });
    return out;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline double unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Seed of read `index`; reads are independent of how they are scheduled.
inline std::uint64_t read_seed(std::uint64_t seed, std::size_t index) {
    return detail::splitmix64(seed ^ detail::splitmix64(static_cast<std::uint64_t>(index) + 1));
}

/// Derives a child seed for a labelled sub-task (window, retry, repeat).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return detail::splitmix64(detail::splitmix64(seed + 0x632be59bd9b4e019ULL * (a + 1)) ^ (b + 0x12345));
}

/// Metropolis rule: downhill or flat moves always pass, uphill ones with
/// probability exp(-beta * delta). `u` is a uniform draw in [0, 1).
inline bool metropolis_accept(double delta, double beta, double u) {
    return delta <= 0.0 || u < std::exp(-beta * delta);
}

/// Enumerates all 2^n assignments in Gray-code order and returns every
/// ground state.
inline SampleSet solve_exhaustive(const QuboModel& model) {
    const std::size_t n = model.num_vars();
    if (n > kExhaustiveLimit) {
        throw TooManyVariables("exhaustive backend handles at most " + std::to_string(kExhaustiveLimit) +
                               " variables, got " + std::to_string(n));
    }
    std::map<Assignment, std::size_t> counts;
    if (n == 0) {
        counts[Assignment{}] = 1;
        return detail::collect(model, counts);
    }
    const detail::FlipTable table(model);
    Assignment x(n, 0);
    std::vector<double> field(n, 0.0);  // sum_j Q_ij x_j over couplings
    double energy = model.constant();
    double best = energy;
    std::vector<Assignment> ties{x};
    const double tol = 1e-9 * std::max(1.0, model.max_abs_coefficient());
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t step = 1; step < total; ++step) {
        const auto v = static_cast<std::size_t>(std::countr_zero(step));
        const double delta = (x[v] ? -1.0 : 1.0) * (table.linear[v] + field[v]);
        energy += delta;
        x[v] ^= 1;
        const double sign = x[v] ? 1.0 : -1.0;
        for (const auto& [u, w] : table.couplings[v]) field[u] += sign * w;
        if (energy < best - tol) {
            best = energy;
            ties.assign(1, x);
        } else if (energy <= best + tol) {
            ties.push_back(x);
        }
    }
    // Incremental sums drift; settle ties on exact energies.
    double exact_best = std::numeric_limits<double>::infinity();
    for (const auto& t : ties) exact_best = std::min(exact_best, model.energy(t));
    for (const auto& t : ties) {
        if (model.energy(t) <= exact_best + tol) counts[t] = 1;
    }
    return detail::collect(model, counts);
}

/// Single-bit-flip simulated annealing with a geometric beta schedule.
/// Each read restarts from a random state with its own derived seed, so the
/// result only depends on (model, config).
inline SampleSet solve_annealing(const QuboModel& model, const SolverConfig& cfg) {
    cfg.validate();
    const std::size_t n = model.num_vars();
    std::map<Assignment, std::size_t> counts;
    if (n == 0) {
        counts[Assignment{}] = cfg.num_reads;
        return detail::collect(model, counts);
    }
    const detail::FlipTable table(model);
    const std::size_t sweeps = std::max<std::size_t>(cfg.sweeps, 1);
    std::vector<double> betas(sweeps);
    const double ratio = sweeps > 1 ? std::pow(cfg.beta_final / cfg.beta_initial, 1.0 / static_cast<double>(sweeps - 1)) : 1.0;
    double beta = sweeps > 1 ? cfg.beta_initial : cfg.beta_final;
    for (auto& b : betas) {
        b = beta;
        beta *= ratio;
    }

    Assignment x(n);
    std::vector<double> field(n);
    for (std::size_t read = 0; read < cfg.num_reads; ++read) {
        std::mt19937_64 rng(read_seed(cfg.seed, read));
        for (auto& bit : x) bit = static_cast<std::uint8_t>(rng() & 1U);
        std::fill(field.begin(), field.end(), 0.0);
        for (std::size_t v = 0; v < n; ++v) {
            if (!x[v]) continue;
            for (const auto& [u, w] : table.couplings[v]) field[u] += w;
        }
        for (double b : betas) {
            for (std::size_t v = 0; v < n; ++v) {
                const double delta = (x[v] ? -1.0 : 1.0) * (table.linear[v] + field[v]);
                if (!metropolis_accept(delta, b, detail::unit(rng))) continue;
                x[v] ^= 1;
                const double sign = x[v] ? 1.0 : -1.0;
                for (const auto& [u, w] : table.couplings[v]) field[u] += sign * w;
            }
        }
        ++counts[x];
    }
    return detail::collect(model, counts);
}

inline SampleSet solve(const QuboModel& model, const SolverConfig& cfg) {
    switch (cfg.backend) {
        case Backend::exhaustive: return solve_exhaustive(model);
        case Backend::annealer: return solve_annealing(model, cfg);
    }
    throw std::invalid_argument("unknown backend");
}

inline std::string to_string(Backend b) { return b == Backend::exhaustive ? "exhaustive" : "annealer"; }

}  // namespace qmapf
