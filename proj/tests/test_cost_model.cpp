#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "qtune/cost_model.hpp"
#include "qtune/pareto.hpp"
#include "qtune/workload.hpp"

using namespace qtune;
using namespace testing_oracles;

namespace {

// Reference single-subquery setup with hand-checkable numbers:
//   alpha = 2^20 rows, work = 2^-20 s/row (total work exactly 1 core-second),
//   64 B/row shuffled (2^26 bytes = 1/16 GB), base overhead 0.25 s.
struct GoldenSetup {
    ConfigSpace context = default_context_space();
    ConfigSpace plan = default_plan_space();
    ConfigSpace stage = default_stage_space();
    CostModel model;
    NonDecision nd;
    ConfigVector theta_c, theta_p, theta_s;

    GoldenSetup() {
        Price price{0.002, 0.0002, 0.01};
        ModelConstants constants;
        constants.bandwidth_gbps = 1.0;
        constants.gp_curvature = 0.05;
        constants.partition_penalty = 0.01;
        model = CostModel({{0x1.0p-20, 64.0, 0.25}}, price, constants, context, plan, stage);
        nd.alpha = {1048576.0};
        nd.beta = {SkewDescriptor{}};
        nd.gamma = 0.0;
        theta_c = default_config(context);
        theta_c.coords[0] = 4;  // executor_cores
        theta_c.coords[1] = 4;  // executor_memory_gb
        theta_c.coords[2] = 1;  // executor_count -> 4 cores, 4 GB total
        theta_c.coords[6] = 0;  // shuffle_compress off
        theta_p = default_config(plan);   // advisory 64 MB, 128 partitions
        theta_s = default_config(stage);
    }

    ObjectiveVector predict() const { return model.predict_subq(0, theta_c, theta_p, theta_s, nd); }
};

}  // namespace

TEST_CASE("golden value of the closed form") {
    GoldenSetup g;
    auto o = g.predict();
    // By hand: work 1.0/4, shuffle (1/16)/1, partition 0.01*|log2(128/1)| = 0.07,
    // base 0.25 -> latency 0.6325; rate 0.002*4 + 0.0002*4 = 0.0088;
    // cost 0.6325*0.0088 + 0.01/16 = 0.006191.
    CHECK(o[0] == Catch::Approx(0.6325).epsilon(1e-9));
    CHECK(o[1] == Catch::Approx(0.006191).epsilon(1e-9));
}

TEST_CASE("doubling total cores halves the work term") {
    GoldenSetup g;
    auto lat4 = g.predict()[0];
    g.theta_c.coords[0] = 8;  // 8 cores total
    auto lat8 = g.predict()[0];
    const double fixed_terms = 0.0625 + 0.07 + 0.25;
    CHECK(lat4 - fixed_terms == Catch::Approx(0.25).epsilon(1e-12));
    CHECK(lat8 - fixed_terms == Catch::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("contention multiplies latency by 1 + gamma") {
    GoldenSetup g;
    auto base = g.predict();
    g.nd.gamma = 1.0;
    auto contended = g.predict();
    CHECK(contended[0] == 2.0 * base[0]);
}

TEST_CASE("predict_query is the exact subquery sum") {
    GoldenSetup g;
    std::vector<ConfigVector> tp{g.theta_p}, ts{g.theta_s};
    CHECK(g.model.predict_query(g.theta_c, tp, ts, g.nd) == g.predict());

    // Two identical subqueries with identical configs: exactly twice one.
    CostModel two({{0x1.0p-20, 64.0, 0.25}, {0x1.0p-20, 64.0, 0.25}}, g.model.price(),
                  g.model.constants(), g.context, g.plan, g.stage);
    NonDecision nd2;
    nd2.alpha = {1048576.0, 1048576.0};
    nd2.beta = {SkewDescriptor{}, SkewDescriptor{}};
    auto single = two.predict_subq(0, g.theta_c, g.theta_p, g.theta_s, nd2);
    auto query = two.predict_query(g.theta_c, {g.theta_p, g.theta_p}, {g.theta_s, g.theta_s}, nd2);
    CHECK(query[0] == 2.0 * single[0]);
    CHECK(query[1] == 2.0 * single[1]);

    CHECK_THROWS_AS(two.predict_query(g.theta_c, tp, ts, nd2), ContractViolation);
}

TEST_CASE("predict_query equals an independent three-subquery summation") {
    Workload w = gen_workload({.seed = 99, .subq_count = 3, .join_fraction = 0.5});
    auto theta_c = default_config(w.context);
    std::vector<ConfigVector> tp(3, default_config(w.plan));
    std::vector<ConfigVector> ts(3, default_config(w.stage));
    ObjectiveVector acc(2, 0.0);
    for (std::size_t q = 0; q < 3; ++q) {
        auto o = w.model.predict_subq(q, theta_c, tp[q], ts[q], w.estimated);
        acc[0] += o[0];
        acc[1] += o[1];
    }
    CHECK(w.model.predict_query(theta_c, tp, ts, w.estimated) == acc);
}

TEST_CASE("config from the wrong space is rejected") {
    GoldenSetup g;
    ConfigVector bad = g.theta_p;
    CHECK_THROWS_AS(g.model.predict_subq(0, bad, g.theta_p, g.theta_s, g.nd), ContractViolation);
}

TEST_CASE("latency/cost tradeoff exists on every random workload") {
    // Increasing total cores strictly decreases latency while the cost rate
    // strictly increases, so theta_c grids always yield at least two
    // nondominated points.
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        Workload w = gen_workload(
            {.seed = seed, .subq_count = 1 + static_cast<std::size_t>(seed % 3)});
        auto theta_p = default_config(w.plan);
        auto theta_s = default_config(w.stage);
        std::vector<ConfigVector> tp(w.dag.size(), theta_p), ts(w.dag.size(), theta_s);

        std::vector<ObjectiveVector> objs;
        ConfigVector theta_c = default_config(w.context);
        for (double cores : w.context.dims[0].values)
            for (double count : w.context.dims[2].values) {
                theta_c.coords[0] = cores;
                theta_c.coords[2] = count;
                objs.push_back(w.model.predict_query(theta_c, tp, ts, w.estimated));
            }
        CHECK(naive_front(objs).size() >= 2);
    }
}

TEST_CASE("permutation importance") {
    Workload w = gen_workload({.seed = 5, .subq_count = 2});
    auto report = permutation_fis(w.model, w.context, w.context, w.plan, w.stage, 200, 7,
                                  w.estimated);

    SECTION("deterministic per seed") {
        auto again = permutation_fis(w.model, w.context, w.context, w.plan, w.stage, 200, 7,
                                     w.estimated);
        CHECK(report.scores == again.scores);
    }

    SECTION("ignored parameters score zero, used ones do not") {
        std::size_t parallelism = 3, cores = 0;  // dim order of the default space
        CHECK(report.scores[parallelism] < 1e-9);
        CHECK(report.scores[cores] > 0.0);
        double total = 0.0;
        for (double s : report.normalized) {
            CHECK(s >= 0.0);
            CHECK(s <= 1.0);
            total += s;
        }
        CHECK(total == Catch::Approx(1.0));
    }

    SECTION("precondition on sample count") {
        CHECK_THROWS_AS(
            permutation_fis(w.model, w.context, w.context, w.plan, w.stage, 10, 7, w.estimated),
            ContractViolation);
    }
}

TEST_CASE("parameters with identical roles score alike") {
    // cores and executor count enter only through their product once the
    // memory rate is zeroed, so their importance must match.
    ConfigSpace context;
    context.group = ParamGroup::Context;
    context.id = "context";
    context.dims = {
        {"executor_cores", ParamKind::IntGrid, {1, 2, 4, 8}, 4, false, ParamRole::ExecutorCores},
        {"executor_memory_gb", ParamKind::IntGrid, {4}, 4, false, ParamRole::ExecutorMemoryGb},
        {"executor_count", ParamKind::IntGrid, {1, 2, 4, 8}, 4, false, ParamRole::ExecutorCount},
    };
    context.validate();
    ConfigSpace plan = default_plan_space();
    ConfigSpace stage = default_stage_space();
    CostModel model({{1e-6, 64.0, 0.1}}, Price{0.002, 0.0, 0.01}, ModelConstants{}, context, plan,
                    stage);
    NonDecision nd;
    nd.alpha = {1e6};
    nd.beta = {SkewDescriptor{}};

    auto report = permutation_fis(model, context, context, plan, stage, 10000, 3, nd);
    const double cores = report.scores[0], count = report.scores[2];
    CHECK(std::fabs(cores - count) / std::max(cores, count) < 0.10);
}

TEST_CASE("fis_filter cumulative tail rule") {
    FisReport report;
    report.names = {"a", "b", "c", "d"};
    report.important = {false, false, false, false};
    report.scores = {0.6, 0.3, 0.07, 0.03};
    report.normalized = report.scores;

    auto keep = fis_filter(report, 0.05);
    CHECK(keep == std::vector<bool>{true, true, true, false});

    CHECK(fis_filter(report, 0.0) == std::vector<bool>(4, true));

    FisReport equal;
    equal.names = report.names;
    equal.important = report.important;
    equal.scores = {0.25, 0.25, 0.25, 0.25};
    equal.normalized = equal.scores;
    CHECK(fis_filter(equal, 0.05) == std::vector<bool>(4, true));

    report.important[3] = true;  // structural parameters survive the tail
    CHECK(fis_filter(report, 0.05) == std::vector<bool>(4, true));

    CHECK_THROWS_AS(fis_filter(report, 1.0), ContractViolation);
}
