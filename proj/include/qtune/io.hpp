#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qtune/errors.hpp"
#include "qtune/runtime.hpp"
#include "qtune/solver.hpp"
#include "qtune/workload.hpp"

namespace qtune {

using Json = nlohmann::json;

/// Rounds a double through its 9-significant-digit decimal representation.
/// All numbers in emitted reports pass through this, which keeps report
/// files byte-stable and readable.
inline double round9(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", x);
    return std::strtod(buf, nullptr);
}

inline Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Workload specs
// ---------------------------------------------------------------------------

namespace detail {

inline ValueRange range_from_json(const Json& j, const char* key, ValueRange fallback) {
    if (!j.contains(key)) return fallback;
    const Json& r = j.at(key);
    return {r.at("min").get<double>(), r.at("max").get<double>()};
}

inline void apply_space_overrides(ConfigSpace& space, const Json& overrides) {
    for (auto it = overrides.begin(); it != overrides.end(); ++it) {
        bool found = false;
        for (auto& dim : space.dims) {
            if (dim.name != it.key()) continue;
            found = true;
            if (it.value().contains("values"))
                dim.values = it.value().at("values").get<std::vector<double>>();
            if (it.value().contains("default"))
                dim.default_value = it.value().at("default").get<double>();
            if (it.value().contains("important"))
                dim.important = it.value().at("important").get<bool>();
        }
        if (!found) throw ConfigError("space override names unknown dim: " + it.key());
    }
    space.validate();
}

}  // namespace detail

inline WorkloadSpec workload_spec_from_json(const Json& j) {
    WorkloadSpec spec;
    spec.seed = j.value("seed", spec.seed);
    spec.subq_count = j.value("subq_count", spec.subq_count);
    spec.join_fraction = j.value("join_fraction", spec.join_fraction);
    spec.cardinality_rows = detail::range_from_json(j, "cardinality_rows", spec.cardinality_rows);
    spec.work_per_row_s = detail::range_from_json(j, "work_per_row_s", spec.work_per_row_s);
    spec.shuffle_bytes_per_row =
        detail::range_from_json(j, "shuffle_bytes_per_row", spec.shuffle_bytes_per_row);
    spec.base_overhead_s = detail::range_from_json(j, "base_overhead_s", spec.base_overhead_s);
    spec.estimation_error_exponent =
        j.value("estimation_error_exponent", spec.estimation_error_exponent);
    if (j.contains("price")) {
        const Json& p = j.at("price");
        spec.price.cpu_rate = p.value("cpu_rate", spec.price.cpu_rate);
        spec.price.mem_rate = p.value("mem_rate", spec.price.mem_rate);
        spec.price.shuffle_rate = p.value("shuffle_rate", spec.price.shuffle_rate);
    }
    if (j.contains("model")) {
        const Json& m = j.at("model");
        spec.model.bandwidth_gbps = m.value("bandwidth_gbps", spec.model.bandwidth_gbps);
        spec.model.gp_curvature = m.value("gp_curvature", spec.model.gp_curvature);
        spec.model.partition_penalty = m.value("partition_penalty", spec.model.partition_penalty);
        spec.model.ideal_partition_mb = m.value("ideal_partition_mb", spec.model.ideal_partition_mb);
        spec.model.advisory_cap_mb = m.value("advisory_cap_mb", spec.model.advisory_cap_mb);
    }
    spec.true_gamma = j.value("true_gamma", spec.true_gamma);
    spec.true_skew_ratio = j.value("true_skew_ratio", spec.true_skew_ratio);
    if (j.contains("objective_bounds")) {
        for (const auto& b : j.at("objective_bounds"))
            spec.objective_bounds.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
    }
    spec.validate();
    return spec;
}

inline Json workload_spec_to_json(const WorkloadSpec& s) {
    Json j;
    j["seed"] = s.seed;
    j["subq_count"] = s.subq_count;
    j["join_fraction"] = round9(s.join_fraction);
    j["cardinality_rows"] = {{"min", round9(s.cardinality_rows.min)},
                             {"max", round9(s.cardinality_rows.max)}};
    j["work_per_row_s"] = {{"min", round9(s.work_per_row_s.min)},
                           {"max", round9(s.work_per_row_s.max)}};
    j["shuffle_bytes_per_row"] = {{"min", round9(s.shuffle_bytes_per_row.min)},
                                  {"max", round9(s.shuffle_bytes_per_row.max)}};
    j["base_overhead_s"] = {{"min", round9(s.base_overhead_s.min)},
                            {"max", round9(s.base_overhead_s.max)}};
    j["estimation_error_exponent"] = round9(s.estimation_error_exponent);
    j["price"] = {{"cpu_rate", round9(s.price.cpu_rate)},
                  {"mem_rate", round9(s.price.mem_rate)},
                  {"shuffle_rate", round9(s.price.shuffle_rate)}};
    j["model"] = {{"bandwidth_gbps", round9(s.model.bandwidth_gbps)},
                  {"gp_curvature", round9(s.model.gp_curvature)},
                  {"partition_penalty", round9(s.model.partition_penalty)},
                  {"ideal_partition_mb", round9(s.model.ideal_partition_mb)},
                  {"advisory_cap_mb", round9(s.model.advisory_cap_mb)}};
    j["true_gamma"] = round9(s.true_gamma);
    j["true_skew_ratio"] = round9(s.true_skew_ratio);
    return j;
}

/// Builds the workload described by a spec file, honoring optional
/// "space_overrides": {"context"|"plan"|"stage": {dim: {values, default}}}.
inline Workload workload_from_json(const Json& j) {
    WorkloadSpec spec = workload_spec_from_json(j);
    ConfigSpace context = default_context_space();
    ConfigSpace plan = default_plan_space();
    ConfigSpace stage = default_stage_space();
    if (j.contains("space_overrides")) {
        const Json& o = j.at("space_overrides");
        if (o.contains("context")) detail::apply_space_overrides(context, o.at("context"));
        if (o.contains("plan")) detail::apply_space_overrides(plan, o.at("plan"));
        if (o.contains("stage")) detail::apply_space_overrides(stage, o.at("stage"));
    }
    return gen_workload(spec, std::move(context), std::move(plan), std::move(stage));
}

// ---------------------------------------------------------------------------
// Solver configs
// ---------------------------------------------------------------------------

inline SamplerKind sampler_from_name(const std::string& name) {
    if (name == "random") return SamplerKind::Random;
    if (name == "lhs") return SamplerKind::Lhs;
    if (name == "adaptive_grid") return SamplerKind::AdaptiveGrid;
    throw ConfigError("unknown sampler: " + name);
}

inline SolverConfig solver_config_from_json(const Json& j) {
    SolverConfig cfg;
    if (j.contains("sampler")) cfg.sampler = sampler_from_name(j.at("sampler").get<std::string>());
    cfg.auto_budget = j.value("auto_budget", cfg.auto_budget);
    if (j.contains("budget")) {
        cfg.budget.n_c = j.at("budget").at(0).get<std::size_t>();
        cfg.budget.n_p = j.at("budget").at(1).get<std::size_t>();
    }
    cfg.cluster_count = j.value("cluster_count", cfg.cluster_count);
    cfg.crossover = j.value("crossover", cfg.crossover);
    cfg.crossover_location = j.value("crossover_location", cfg.crossover_location);
    cfg.weight_count = j.value("weight_count", cfg.weight_count);
    cfg.fis.enabled = j.value("fis_enabled", cfg.fis.enabled);
    cfg.fis.n_samples = j.value("fis_samples", cfg.fis.n_samples);
    cfg.fis.threshold = j.value("fis_threshold", cfg.fis.threshold);
    cfg.seed = j.value("solver_seed", cfg.seed);
    return cfg;
}

// ---------------------------------------------------------------------------
// Runtime scenarios
// ---------------------------------------------------------------------------

/// Scenario files override the generated cardinality views so that runs with
/// known estimation error can be scripted:
///   {"weights": [0.9, 0.1], "prune": true, "adaptive": true,
///    "alpha_overrides": [{"subq": 0, "true_rows": 1e7, "estimated_rows": 1e6}]}
struct Scenario {
    RuntimePolicy policy;
    struct AlphaOverride {
        std::size_t subq;
        double true_rows;
        double estimated_rows;
    };
    std::vector<AlphaOverride> alpha_overrides;
};

inline Scenario scenario_from_json(const Json& j) {
    Scenario s;
    if (j.contains("weights")) {
        s.policy.reoptimize_weights.w = j.at("weights").get<std::vector<double>>();
        s.policy.reoptimize_weights.validate();
    }
    s.policy.prune_rules_enabled = j.value("prune", s.policy.prune_rules_enabled);
    s.policy.adaptive = j.value("adaptive", s.policy.adaptive);
    if (j.contains("solver")) s.policy.solver = solver_config_from_json(j.at("solver"));
    if (j.contains("alpha_overrides"))
        for (const auto& o : j.at("alpha_overrides"))
            s.alpha_overrides.push_back({o.at("subq").get<std::size_t>(),
                                         o.at("true_rows").get<double>(),
                                         o.at("estimated_rows").get<double>()});
    return s;
}

inline void apply_scenario(const Scenario& s, Workload& w) {
    for (const auto& o : s.alpha_overrides) {
        detail::require(o.subq < w.dag.size(), "scenario: subq index out of range");
        w.truth.alpha[o.subq] = o.true_rows;
        w.estimated.alpha[o.subq] = o.estimated_rows;
    }
}

// ---------------------------------------------------------------------------
// Solve/trace output helpers
// ---------------------------------------------------------------------------

inline Json config_vector_to_json(const ConfigVector& v) {
    Json j;
    j["space"] = v.space_id;
    Json coords = Json::array();
    for (double c : v.coords) coords.push_back(round9(c));
    j["coords"] = coords;
    return j;
}

inline Json solution_to_json(const Solution& s) {
    Json j;
    j["objectives"] = {round9(s.objectives[0]), round9(s.objectives[1])};
    j["theta_c"] = config_vector_to_json(s.theta_c);
    Json tp = Json::array(), ts = Json::array();
    for (const auto& p : s.theta_p) tp.push_back(config_vector_to_json(p));
    for (const auto& p : s.theta_s) ts.push_back(config_vector_to_json(p));
    j["theta_p"] = tp;
    j["theta_s"] = ts;
    return j;
}

inline Json front_to_json(const ParetoSet& front) {
    Json rows = Json::array();
    for (const auto& s : front.entries) rows.push_back(solution_to_json(s));
    return rows;
}

inline Json trace_to_json(const Trace& t) {
    Json j;
    j["final_latency_s"] = round9(t.final_latency_s);
    j["final_cost"] = round9(t.final_cost);
    j["requests_sent"] = t.requests_sent;
    j["requests_pruned"] = t.requests_pruned;
    j["plan_changes"] = t.plan_changes;
    Json steps = Json::array();
    for (const auto& s : t.steps) {
        Json e;
        e["subq"] = s.completed_subq;
        e["clock_s"] = round9(s.clock_s);
        Json algos = Json::array();
        for (JoinAlgo a : s.join_algo) {
            switch (a) {
                case JoinAlgo::None: algos.push_back("none"); break;
                case JoinAlgo::SMJ: algos.push_back("SMJ"); break;
                case JoinAlgo::SHJ: algos.push_back("SHJ"); break;
                case JoinAlgo::BHJ: algos.push_back("BHJ"); break;
            }
        }
        e["join_algos"] = algos;
        steps.push_back(e);
    }
    j["steps"] = steps;
    return j;
}

}  // namespace qtune
