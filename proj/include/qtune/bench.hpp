#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "qtune/io.hpp"
#include "qtune/pareto.hpp"
#include "qtune/runtime.hpp"
#include "qtune/solver.hpp"
#include "qtune/workload.hpp"

namespace qtune {

// ---------------------------------------------------------------------------
// Method names
// ---------------------------------------------------------------------------

struct MethodSpec {
    enum class Kind { Hmooc, MoWs, SoFw } kind = Kind::Hmooc;
    Method hmooc = Method::HMOOC1;
    std::string name;
};

inline MethodSpec parse_method(const std::string& name) {
    MethodSpec m;
    m.name = name;
    if (name == "HMOOC1") m.hmooc = Method::HMOOC1;
    else if (name == "HMOOC2") m.hmooc = Method::HMOOC2;
    else if (name == "HMOOC3") m.hmooc = Method::HMOOC3;
    else if (name == "MO-WS") m.kind = MethodSpec::Kind::MoWs;
    else if (name == "SO-FW") m.kind = MethodSpec::Kind::SoFw;
    else throw ConfigError("unknown method: " + name);
    return m;
}

// ---------------------------------------------------------------------------
// Benchmark configuration
// ---------------------------------------------------------------------------

struct BenchConfig {
    std::vector<MethodSpec> methods;
    std::vector<WorkloadSpec> instances;
    std::vector<WeightVector> weights{{{0.9, 0.1}}, {{0.5, 0.5}}, {{0.1, 0.9}}};
    std::size_t ws_samples = 10000;
    std::size_t ws_weights = 11;  // MO-WS weight vectors
    SolverConfig solver{};
    bool runtime_enabled = true;
    bool runtime_prune = true;
    unsigned threads = 0;  // 0 = hardware concurrency
    Json echo;             // original config, embedded in the report
};

inline BenchConfig bench_config_from_json(const Json& j) {
    BenchConfig cfg;
    cfg.echo = j;
    detail::require(j.contains("methods"), "bench config: missing methods");
    for (const auto& name : j.at("methods"))
        cfg.methods.push_back(parse_method(name.get<std::string>()));

    if (j.contains("instances") && j.at("instances").is_array()) {
        for (const auto& inst : j.at("instances"))
            cfg.instances.push_back(workload_spec_from_json(inst));
    } else if (j.contains("instances")) {
        const Json& gen = j.at("instances");
        WorkloadSpec base =
            gen.contains("base") ? workload_spec_from_json(gen.at("base")) : WorkloadSpec{};
        const std::size_t count = gen.value("count", std::size_t{1});
        const std::uint64_t seed_start = gen.value("seed_start", base.seed);
        for (std::size_t i = 0; i < count; ++i) {
            WorkloadSpec spec = base;
            spec.seed = seed_start + i;
            cfg.instances.push_back(spec);
        }
    } else {
        throw ConfigError("bench config: missing instances");
    }

    if (j.contains("weights")) {
        cfg.weights.clear();
        for (const auto& w : j.at("weights")) {
            WeightVector wv{w.get<std::vector<double>>()};
            wv.validate();
            cfg.weights.push_back(wv);
        }
    }
    cfg.ws_samples = j.value("ws_samples", cfg.ws_samples);
    cfg.ws_weights = j.value("ws_weights", cfg.ws_weights);
    if (j.contains("solver")) cfg.solver = solver_config_from_json(j.at("solver"));
    if (j.contains("runtime")) {
        cfg.runtime_enabled = j.at("runtime").value("enabled", cfg.runtime_enabled);
        cfg.runtime_prune = j.at("runtime").value("prune", cfg.runtime_prune);
    }
    cfg.threads = j.value("threads", cfg.threads);
    return cfg;
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

struct BenchRow {
    std::size_t instance = 0;
    std::uint64_t seed = 0;
    std::string method;
    std::size_t front_size = 0;
    std::size_t distinct_solutions = 0;
    double hypervolume = 0.0;
    double solve_ms = 0.0;  // wall clock; the one nondeterministic field
    ObjectiveVector ref_point{0.0, 0.0};
    std::vector<ObjectiveVector> recommended;  // one (latency, cost) per tested weight
    bool has_runtime = false;
    Trace runtime;
};

struct BenchmarkReport {
    int schema_version = 1;
    Json config;
    std::vector<BenchRow> rows;
};

namespace detail {

inline std::vector<PairSample> reopt_pairs(const Workload& w, const SolverConfig& cfg) {
    const ConfigSpace joint = join_plan_stage(w.plan, w.stage);
    auto joint_samples = run_sampler(cfg.sampler, joint, uniform_fis(joint), full_mask(joint),
                                     cfg.budget.n_p, derive_seed(cfg.seed, 4));
    return split_pairs(joint_samples, w.plan, w.stage);
}

}  // namespace detail

/// Runs every configured method on every instance. Cells execute in a
/// parallel work pool; rows are assembled in (instance, method) order, and
/// the per-instance hypervolume reference point is the componentwise max
/// over the union of all methods' fronts, scaled by 1.1.
inline BenchmarkReport run_benchmark(const BenchConfig& cfg) {
    detail::require(!cfg.methods.empty(), "bench: no methods");
    detail::require(!cfg.instances.empty(), "bench: no instances");
    detail::require(!cfg.weights.empty(), "bench: no weights");

    std::vector<Workload> workloads;
    workloads.reserve(cfg.instances.size());
    for (const auto& spec : cfg.instances) workloads.push_back(gen_workload(spec));

    struct Cell {
        ParetoSet front;
        std::size_t distinct = 0;
        double solve_ms = 0.0;
    };
    const std::size_t n_cells = cfg.instances.size() * cfg.methods.size();
    std::vector<Cell> cells(n_cells);

    auto run_cell = [&](std::size_t idx) {
        const std::size_t inst = idx / cfg.methods.size();
        const std::size_t meth = idx % cfg.methods.size();
        const Workload& w = workloads[inst];
        const MethodSpec& method = cfg.methods[meth];
        Cell& cell = cells[idx];

        const auto t0 = std::chrono::steady_clock::now();
        if (method.kind == MethodSpec::Kind::Hmooc) {
            cell.front = solve(w.dag, w.model, w.estimated, method.hmooc, w.context, w.plan,
                               w.stage, cfg.solver);
            cell.distinct = cell.front.size();
        } else {
            auto weights = method.kind == MethodSpec::Kind::SoFw
                               ? std::vector<WeightVector>{cfg.weights.front()}
                               : evenly_spaced_weights(cfg.ws_weights);
            WsBaselineResult ws = baseline_ws(w.dag, w.model, w.estimated, weights, cfg.ws_samples,
                                              w.context, w.plan, w.stage, cfg.solver.seed);
            cell.front = pareto_filter(ws.picks);
            cell.distinct = ws.distinct_count;
        }
        const auto t1 = std::chrono::steady_clock::now();
        cell.solve_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    };

    unsigned pool = cfg.threads != 0 ? cfg.threads : std::thread::hardware_concurrency();
    pool = std::max(1u, std::min<unsigned>(pool, static_cast<unsigned>(n_cells)));
    if (pool == 1) {
        for (std::size_t i = 0; i < n_cells; ++i) run_cell(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        for (unsigned t = 0; t < pool; ++t)
            workers.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < n_cells; i = next.fetch_add(1))
                    run_cell(i);
            });
        for (auto& worker : workers) worker.join();
    }

    BenchmarkReport report;
    report.config = cfg.echo;
    for (std::size_t inst = 0; inst < cfg.instances.size(); ++inst) {
        ObjectiveVector ref{0.0, 0.0};
        for (std::size_t meth = 0; meth < cfg.methods.size(); ++meth) {
            const Cell& cell = cells[inst * cfg.methods.size() + meth];
            for (const auto& s : cell.front.entries)
                for (std::size_t v = 0; v < 2; ++v) ref[v] = std::max(ref[v], s.objectives[v]);
        }
        for (std::size_t v = 0; v < 2; ++v) ref[v] *= 1.1;

        for (std::size_t meth = 0; meth < cfg.methods.size(); ++meth) {
            const Cell& cell = cells[inst * cfg.methods.size() + meth];
            const Workload& w = workloads[inst];
            BenchRow row;
            row.instance = inst;
            row.seed = cfg.instances[inst].seed;
            row.method = cfg.methods[meth].name;
            row.front_size = cell.front.size();
            row.distinct_solutions = cell.distinct;
            row.ref_point = ref;
            row.hypervolume = cell.front.empty() ? 0.0 : hypervolume(cell.front, ref);
            row.solve_ms = cell.solve_ms;
            for (const auto& weight : cfg.weights)
                row.recommended.push_back(wun_recommend(cell.front, weight).objectives);
            if (cfg.runtime_enabled) {
                RuntimePolicy policy;
                policy.prune_rules_enabled = cfg.runtime_prune;
                policy.reoptimize_weights = cfg.weights.front();
                policy.solver = cfg.solver;
                const Solution rec = wun_recommend(cell.front, cfg.weights.front());
                row.runtime = replay_runtime(rec, detail::reopt_pairs(w, cfg.solver), w.dag,
                                             w.model, w.truth, w.estimated, policy, w.plan);
                row.has_runtime = true;
            }
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

inline Json report_to_json(const BenchmarkReport& report) {
    Json j;
    j["schema_version"] = report.schema_version;
    j["config"] = report.config;
    Json rows = Json::array();
    for (const auto& r : report.rows) {
        Json row;
        row["instance"] = r.instance;
        row["seed"] = r.seed;
        row["method"] = r.method;
        row["front_size"] = r.front_size;
        row["distinct_solutions"] = r.distinct_solutions;
        row["hypervolume"] = round9(r.hypervolume);
        row["solve_ms"] = round9(r.solve_ms);
        row["ref_point"] = {round9(r.ref_point[0]), round9(r.ref_point[1])};
        Json recs = Json::array();
        for (const auto& rec : r.recommended)
            recs.push_back({round9(rec[0]), round9(rec[1])});
        row["recommended"] = recs;
        if (r.has_runtime) {
            row["runtime"] = {{"final_latency_s", round9(r.runtime.final_latency_s)},
                              {"final_cost", round9(r.runtime.final_cost)},
                              {"requests_sent", r.runtime.requests_sent},
                              {"requests_pruned", r.runtime.requests_pruned},
                              {"plan_changes", r.runtime.plan_changes}};
        }
        rows.push_back(std::move(row));
    }
    j["rows"] = rows;
    return j;
}

/// CSV column order (fixed; also documented in the CLI manual):
/// instance,seed,method,front_size,distinct_solutions,hypervolume,solve_ms,
/// ref_latency,ref_cost,rec{i}_latency,rec{i}_cost...,rt_latency,rt_cost,
/// rt_requests_sent,rt_requests_pruned,rt_plan_changes
inline std::string report_to_csv(const BenchmarkReport& report) {
    std::size_t n_weights = 0;
    for (const auto& r : report.rows) n_weights = std::max(n_weights, r.recommended.size());

    std::ostringstream out;
    out << "instance,seed,method,front_size,distinct_solutions,hypervolume,solve_ms,"
           "ref_latency,ref_cost";
    for (std::size_t i = 0; i < n_weights; ++i)
        out << ",rec" << i << "_latency,rec" << i << "_cost";
    out << ",rt_latency,rt_cost,rt_requests_sent,rt_requests_pruned,rt_plan_changes\n";

    char buf[40];
    auto num = [&](double x) {
        std::snprintf(buf, sizeof(buf), "%.9g", x);
        return std::string(buf);
    };
    for (const auto& r : report.rows) {
        out << r.instance << ',' << r.seed << ',' << r.method << ',' << r.front_size << ','
            << r.distinct_solutions << ',' << num(r.hypervolume) << ',' << num(r.solve_ms) << ','
            << num(r.ref_point[0]) << ',' << num(r.ref_point[1]);
        for (std::size_t i = 0; i < n_weights; ++i) {
            if (i < r.recommended.size())
                out << ',' << num(r.recommended[i][0]) << ',' << num(r.recommended[i][1]);
            else
                out << ",,";
        }
        if (r.has_runtime)
            out << ',' << num(r.runtime.final_latency_s) << ',' << num(r.runtime.final_cost) << ','
                << r.runtime.requests_sent << ',' << r.runtime.requests_pruned << ','
                << r.runtime.plan_changes;
        else
            out << ",,,,,";
        out << '\n';
    }
    return out.str();
}

enum class ReportFormat { Json, Csv };

inline void write_report(const BenchmarkReport& report, const std::string& path,
                         ReportFormat format) {
    if (format == ReportFormat::Json)
        write_text_file(path, report_to_json(report).dump(2) + "\n");
    else
        write_text_file(path, report_to_csv(report));
}

}  // namespace qtune
