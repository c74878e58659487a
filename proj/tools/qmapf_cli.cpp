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

// Command line front end: plan, bench, render, oracle-check, export-qubo.
// Exit codes: 0 success, 1 planning failure, 2 input error.

#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qmapf.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kPlanFailure = 1;
constexpr int kInputError = 2;

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolverOverrides {
    std::string backend;
    std::size_t reads = 0;
    std::size_t sweeps = 0;
    std::optional<std::uint64_t> seed;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

qmapf::ScenarioSpec load(const std::string& path, const SolverOverrides& o) {
    qmapf::ScenarioSpec spec;
    try {
        spec = qmapf::parse_scenario(read_file(path));
    } catch (const qmapf::ScenarioError& e) {
        throw InputError(path + ": " + e.what());
    }
    if (o.backend == "annealer") spec.solver.backend = qmapf::Backend::annealer;
    if (o.backend == "exhaustive") spec.solver.backend = qmapf::Backend::exhaustive;
    if (o.reads) spec.solver.num_reads = o.reads;
    if (o.sweeps) spec.solver.sweeps = o.sweeps;
    if (o.seed) spec.solver.seed = *o.seed;
    return spec;
}

void emit(const std::string& text, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw InputError("cannot write " + out);
    f << text;
}

int cmd_plan(const std::string& file, const SolverOverrides& o, const std::string& out, const std::string& svg,
             bool verbose) {
    const auto spec = load(file, o);
    qmapf::Plan plan;
    const auto run = qmapf::run_once(spec, spec.solver.seed, &plan);
    emit(qmapf::to_json(plan).dump(2) + "\n", out);
    if (!svg.empty()) qmapf::write_svg(spec.map, qmapf::svg_paths(plan), svg);
    if (verbose) {
        std::cerr << spec.name << ": " << (run.success ? "ok" : "failed") << ", " << run.moves << " moves, "
                  << run.original << " -> " << run.reduced << " variables\n";
        if (!run.failure.empty()) std::cerr << "  " << run.failure << '\n';
    }
    return run.success ? kOk : kPlanFailure;
}

int cmd_bench(const std::vector<std::string>& files, const SolverOverrides& o, int repeats, const std::string& out,
              bool timings) {
    std::vector<qmapf::BenchReport> reports;
    nlohmann::json all = nlohmann::json::array();
    bool ok = true;
    for (const auto& f : files) {
        const auto spec = load(f, o);
        auto report = qmapf::run_benchmark(spec, repeats > 0 ? repeats : spec.repeats);
        ok = ok && report.success_rate() > 0.0;
        all.push_back(qmapf::to_json(report, timings));
        reports.push_back(std::move(report));
    }
    std::cout << qmapf::format_table(reports);
    if (!out.empty()) emit(nlohmann::json{{"schema", qmapf::kSchemaVersion}, {"scenarios", all}}.dump(2) + "\n", out);
    return ok ? kOk : kPlanFailure;
}

int cmd_render(const std::string& file, const SolverOverrides& o, const std::string& out) {
    const auto spec = load(file, o);
    qmapf::Plan plan;
    const auto run = qmapf::run_once(spec, spec.solver.seed, &plan);
    if (out.empty() || out == "-") {
        qmapf::render_svg(spec.map, qmapf::svg_paths(plan), std::cout);
    } else {
        try {
            qmapf::write_svg(spec.map, qmapf::svg_paths(plan), out);
        } catch (const std::runtime_error& e) {
            throw InputError(e.what());
        }
    }
    return run.success ? kOk : kPlanFailure;
}

// Random sparse models small enough to enumerate; the annealer's best energy
// must match the exhaustive ground state.
int cmd_oracle_check(const SolverOverrides& o, int count, int max_vars, bool verbose) {
    std::mt19937_64 rng(o.seed.value_or(0));
    std::uniform_int_distribution<int> size(2, max_vars);
    std::uniform_real_distribution<double> coeff(-2.0, 2.0);
    std::bernoulli_distribution edge(0.3);
    int mismatches = 0;
    for (int k = 0; k < count; ++k) {
        const auto n = static_cast<std::size_t>(size(rng));
        qmapf::QuboModel model(n);
        for (std::size_t a = 0; a < n; ++a) {
            model.accumulate(a, a, coeff(rng));
            for (std::size_t b = a + 1; b < n; ++b) {
                if (edge(rng)) model.accumulate(a, b, coeff(rng));
            }
        }
        const auto exact = qmapf::solve_exhaustive(model);
        qmapf::SolverConfig cfg;
        cfg.num_reads = o.reads ? o.reads : 50;
        cfg.sweeps = o.sweeps ? o.sweeps : 500;
        cfg.seed = qmapf::read_seed(o.seed.value_or(0), static_cast<std::size_t>(k));
        const auto sa = qmapf::solve_annealing(model, cfg);
        const double gap = sa.best().energy - exact.best().energy;
        if (gap > 1e-9) {
            ++mismatches;
            if (verbose) std::cerr << "model " << k << " (" << n << " vars): annealer above ground state by " << gap << '\n';
        }
    }
    std::cout << "oracle-check: " << count - mismatches << "/" << count << " models matched the exhaustive ground state\n";
    return mismatches == 0 ? kOk : kPlanFailure;
}

// First window of the scenario as a QUBO, before or after preprocessing.
int cmd_export_qubo(const std::string& file, const SolverOverrides& o, bool reduced, const std::string& out) {
    const auto spec = load(file, o);
    int clock = spec.robots.front().release;
    for (const auto& r : spec.robots) clock = std::min(clock, r.release);
    std::vector<std::size_t> active;
    std::vector<qmapf::Cell> current;
    for (std::size_t r = 0; r < spec.robots.size(); ++r) {
        current.push_back(spec.robots[r].start);
        if (spec.robots[r].release <= clock) active.push_back(r);
    }
    std::vector<qmapf::CellSet> visited(spec.robots.size());
    for (std::size_t r = 0; r < spec.robots.size(); ++r) visited[r] = {spec.robots[r].start};
    const bool allow_wait = spec.robots.size() > 1;
    auto window = qmapf::detail::make_window(spec.map, spec.robots, active, current, visited, spec.window.window_len,
                                             allow_wait, spec.weights, spec.window, 0);
    const auto fix = qmapf::fix_logical(window);
    for (std::size_t k = 0; k < window.robots.size(); ++k) window.robots[k].admissible = fix.admissible[k];
    const auto model = qmapf::build_window_model(window);
    std::ostringstream os;
    if (reduced) {
        qmapf::write_qubo_text(os, qmapf::fold(model, fix.report).model);
    } else {
        qmapf::write_qubo_text(os, model);
    }
    emit(os.str(), out);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Windowed QUBO path planning for grid robots"};
    app.require_subcommand(1);
    app.fallthrough();
    SolverOverrides o;
    std::uint64_t seed = 0;
    bool verbose = false;
    bool timings = false;
    auto* seed_opt = app.add_option("--seed", seed, "Master seed; overrides the scenario");
    app.add_option("--backend", o.backend, "Solver backend")->check(CLI::IsMember({"annealer", "exhaustive"}));
    app.add_option("--reads", o.reads, "Annealer reads");
    app.add_option("--sweeps", o.sweeps, "Annealer sweeps per read");
    app.add_flag("-v,--verbose", verbose, "Progress on stderr");
    app.add_flag("--timings", timings, "Include wall-clock times in benchmark JSON");

    std::string file, out, svg;
    std::vector<std::string> files;
    int repeats = 0, count = 200, max_vars = 12;
    bool reduced = false;

    auto* plan = app.add_subcommand("plan", "Plan a scenario and print the JSON report");
    plan->add_option("scenario", file)->required();
    plan->add_option("-o,--out", out, "JSON output file");
    plan->add_option("--svg", svg, "Also render the plan to this SVG file");

    auto* bench = app.add_subcommand("bench", "Compare against the classical baseline");
    bench->add_option("scenarios", files)->required();
    bench->add_option("--repeats", repeats, "Seeded repeats per scenario; defaults to the scenario's");
    bench->add_option("-o,--json", out, "JSON output file");

    auto* render = app.add_subcommand("render", "Plan a scenario and write an SVG");
    render->add_option("scenario", file)->required();
    render->add_option("-o,--out", out, "SVG output file");

    auto* oracle = app.add_subcommand("oracle-check", "Annealer against exhaustive search on random models");
    oracle->add_option("--count", count, "Number of models")->check(CLI::PositiveNumber);
    oracle->add_option("--max-vars", max_vars, "Largest model size")->check(CLI::Range(2, 20));

    auto* export_qubo = app.add_subcommand("export-qubo", "Write the first window's QUBO as text");
    export_qubo->add_option("scenario", file)->required();
    export_qubo->add_option("-o,--out", out, "Output file");
    export_qubo->add_flag("--reduced", reduced, "Write the model after logical fixing");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return e.get_exit_code() == 0 ? code : kInputError;
    }
    if (seed_opt->count()) o.seed = seed;

    try {
        if (*plan) return cmd_plan(file, o, out, svg, verbose);
        if (*bench) return cmd_bench(files, o, repeats, out, timings);
        if (*render) return cmd_render(file, o, out);
        if (*oracle) return cmd_oracle_check(o, count, max_vars, verbose);
        if (*export_qubo) return cmd_export_qubo(file, o, reduced, out);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const qmapf::InfeasibleWindow& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kPlanFailure;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kPlanFailure;
    }
    return kOk;
}
