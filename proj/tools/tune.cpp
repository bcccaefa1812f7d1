// Command-line front end: compile-time tuning, benchmarking, runtime
// simulation, and the brute-force reference front.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qtune/bench.hpp"
#include "qtune/io.hpp"
#include "qtune/oracle.hpp"
#include "qtune/runtime.hpp"
#include "qtune/solver.hpp"
#include "qtune/workload.hpp"

namespace {

qtune::WeightVector parse_weights(const std::string& csv) {
    qtune::WeightVector wv;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        std::size_t comma = csv.find(',', pos);
        if (comma == std::string::npos) comma = csv.size();
        wv.w.push_back(std::stod(csv.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    wv.validate();
    return wv;
}

void emit(const qtune::Json& j, const std::string& out_path) {
    if (out_path.empty())
        std::cout << j.dump(2) << "\n";
    else
        qtune::write_text_file(out_path, j.dump(2) + "\n");
}

int run_solve(const std::string& workload_path, const std::string& method_name,
              const std::string& weights_csv, const std::string& out_path,
              const qtune::Json& solver_json) {
    qtune::Workload w = qtune::workload_from_json(qtune::load_json_file(workload_path));
    qtune::MethodSpec method = qtune::parse_method(method_name);
    qtune::WeightVector weights = parse_weights(weights_csv);
    qtune::SolverConfig cfg = qtune::solver_config_from_json(solver_json);

    qtune::ParetoSet front;
    std::size_t distinct = 0;
    if (method.kind == qtune::MethodSpec::Kind::Hmooc) {
        front = qtune::solve(w.dag, w.model, w.estimated, method.hmooc, w.context, w.plan, w.stage,
                             cfg);
        distinct = front.size();
    } else {
        auto ws_weights = method.kind == qtune::MethodSpec::Kind::SoFw
                              ? std::vector<qtune::WeightVector>{weights}
                              : qtune::evenly_spaced_weights(11);
        auto ws = qtune::baseline_ws(w.dag, w.model, w.estimated, ws_weights, 10000, w.context,
                                     w.plan, w.stage, cfg.seed);
        front = qtune::pareto_filter(ws.picks);
        distinct = ws.distinct_count;
    }

    qtune::Json out;
    out["method"] = method.name;
    out["workload_seed"] = w.spec.seed;
    out["subq_count"] = w.dag.size();
    out["front_size"] = front.size();
    out["distinct_solutions"] = distinct;
    out["front"] = qtune::front_to_json(front);
    out["recommended"] = qtune::solution_to_json(qtune::wun_recommend(front, weights));
    emit(out, out_path);
    return 0;
}

int run_bench(const std::string& config_path, std::string out_dir) {
    qtune::BenchConfig cfg = qtune::bench_config_from_json(qtune::load_json_file(config_path));
    if (const char* env = std::getenv("TUNE_OUT_DIR"); env && *env) out_dir = env;
    if (out_dir.empty()) throw qtune::ConfigError("bench: no output directory");
    std::filesystem::create_directories(out_dir);

    qtune::BenchmarkReport report = qtune::run_benchmark(cfg);
    qtune::write_report(report, out_dir + "/report.json", qtune::ReportFormat::Json);
    qtune::write_report(report, out_dir + "/report.csv", qtune::ReportFormat::Csv);
    std::cout << "wrote " << report.rows.size() << " rows to " << out_dir << "/report.{json,csv}"
              << "\n";
    return 0;
}

int run_simulate(const std::string& workload_path, const std::string& scenario_path,
                 const std::string& out_path) {
    qtune::Workload w = qtune::workload_from_json(qtune::load_json_file(workload_path));
    qtune::Scenario scenario;
    if (!scenario_path.empty())
        scenario = qtune::scenario_from_json(qtune::load_json_file(scenario_path));
    qtune::apply_scenario(scenario, w);

    qtune::Trace trace = qtune::simulate(w.dag, w.model, w.truth, w.estimated, scenario.policy,
                                         w.context, w.plan, w.stage);
    emit(qtune::trace_to_json(trace), out_path);
    return 0;
}

int run_oracle(const std::string& workload_path, const std::string& out_path,
               const qtune::Json& solver_json) {
    qtune::Workload w = qtune::workload_from_json(qtune::load_json_file(workload_path));
    qtune::SolverConfig cfg = qtune::solver_config_from_json(solver_json);
    qtune::SolveInputs inputs = qtune::prepare_solve_inputs(w.dag, w.model, w.estimated, w.context,
                                                            w.plan, w.stage, cfg);
    const double combos = qtune::brute_force_size(inputs.theta_c_candidates.size(),
                                                  inputs.pairs->size(), w.dag.size());
    if (combos > 5e6)
        throw qtune::ConfigError(
            "oracle: candidate universe has " + std::to_string(combos) +
            " combinations; reduce the budget or subquery count (limit 5e6)");

    qtune::ParetoSet front = qtune::brute_force_front(w.dag, w.model, w.estimated,
                                                      inputs.theta_c_candidates, *inputs.pairs);
    qtune::Json out;
    out["workload_seed"] = w.spec.seed;
    out["combinations"] = combos;
    out["front_size"] = front.size();
    out["front"] = qtune::front_to_json(front);
    emit(out, out_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-objective parameter tuning for DAG-structured workloads"};
    app.require_subcommand(1);

    std::string workload_path, scenario_path, config_path, out_path, method_name = "HMOOC3";
    std::string weights_csv = "0.5,0.5";
    std::string solver_json_text = "{}";

    auto* solve_cmd = app.add_subcommand("solve", "Compute a Pareto front and a recommendation");
    solve_cmd->add_option("--workload", workload_path, "workload spec file")->required();
    solve_cmd->add_option("--method", method_name,
                          "HMOOC1 | HMOOC2 | HMOOC3 | MO-WS | SO-FW");
    solve_cmd->add_option("--weights", weights_csv, "WUN weights, e.g. 0.9,0.1");
    solve_cmd->add_option("--out", out_path, "output JSON file (default: stdout)");
    solve_cmd->add_option("--solver", solver_json_text, "inline solver config JSON");

    auto* bench_cmd = app.add_subcommand("bench", "Run the benchmark matrix");
    bench_cmd->add_option("--config", config_path, "benchmark config file")->required();
    bench_cmd->add_option("--out", out_path, "output directory (TUNE_OUT_DIR overrides)");

    auto* sim_cmd = app.add_subcommand("simulate", "Replay the runtime adaptive loop");
    sim_cmd->add_option("--workload", workload_path, "workload spec file")->required();
    sim_cmd->add_option("--scenario", scenario_path, "scenario file");
    sim_cmd->add_option("--out", out_path, "output JSON file (default: stdout)");

    auto* oracle_cmd = app.add_subcommand("oracle", "Brute-force front over the sampled sets");
    oracle_cmd->add_option("--workload", workload_path, "workload spec file")->required();
    oracle_cmd->add_option("--out", out_path, "output JSON file (default: stdout)");
    oracle_cmd->add_option("--solver", solver_json_text, "inline solver config JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        qtune::Json solver_json;
        try {
            solver_json = qtune::Json::parse(solver_json_text);
        } catch (const std::exception& e) {
            throw qtune::ConfigError(std::string("bad --solver JSON: ") + e.what());
        }
        if (solve_cmd->parsed())
            return run_solve(workload_path, method_name, weights_csv, out_path, solver_json);
        if (bench_cmd->parsed()) return run_bench(config_path, out_path);
        if (sim_cmd->parsed()) return run_simulate(workload_path, scenario_path, out_path);
        if (oracle_cmd->parsed()) return run_oracle(workload_path, out_path, solver_json);
    } catch (const qtune::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
