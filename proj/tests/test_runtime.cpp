#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "qtune/io.hpp"
#include "qtune/runtime.hpp"
#include "qtune/workload.hpp"

using namespace qtune;

namespace {

ConfigSpace plan_with_bcast(std::vector<double> bcast_values, double def) {
    ConfigSpace plan = default_plan_space();
    plan.dims[1].values = std::move(bcast_values);
    plan.dims[1].default_value = def;
    plan.validate();
    return plan;
}

QueryDAG scan_join_dag() {
    QueryDAG dag;
    dag.subqs = {{0, SubqRole::Scan, {}}, {1, SubqRole::Join, {0}}};
    return dag;
}

ConfigVector plan_point(const ConfigSpace& plan, double advisory, double bcast, double shash,
                        double partitions) {
    ConfigVector v = default_config(plan);
    v.coords[0] = advisory;
    v.coords[1] = bcast;
    v.coords[2] = shash;
    v.coords[3] = partitions;
    return v;
}

// Two-subquery setup with a 16x cardinality underestimate on the scan that
// feeds the join.
struct UnderestimateSetup {
    ConfigSpace context = default_context_space();
    ConfigSpace plan = plan_with_bcast({5, 10, 25, 50, 100}, 10);
    ConfigSpace stage = default_stage_space();
    QueryDAG dag = scan_join_dag();
    CostModel model;
    NonDecision truth, estimated;
    Solution submitted;
    std::vector<PairSample> pairs;

    UnderestimateSetup() {
        model = CostModel({{0x1.0p-20, 64.0, 0.1}, {0x1.0p-20, 512.0, 0.1}},
                          Price{0.002, 0.0002, 0.01}, ModelConstants{}, context, plan, stage);
        truth.alpha = {16777216.0, 16777216.0};  // 2^24 rows: a 1 GiB join build side
        truth.beta = {SkewDescriptor{}, SkewDescriptor{}};
        estimated = truth;
        estimated.alpha = {1048576.0, 1048576.0};  // 2^20: 16x under, 64 MiB build estimate

        // Submission plan scripted with a high broadcast threshold and the
        // shuffle-partition count tuned for the estimate.
        submitted.theta_c = default_config(context);
        submitted.theta_p = {plan_point(plan, 128, 100, 0, 32), plan_point(plan, 128, 100, 0, 32)};
        submitted.theta_s = {default_config(stage), default_config(stage)};
        submitted.objectives = {0, 0};

        for (double partitions : plan.dims[3].values)
            pairs.push_back({plan_point(plan, 128, 100, 0, partitions), default_config(stage)});
    }
};

}  // namespace

TEST_CASE("theta_p aggregation at submission") {
    SECTION("join thresholds take the floored minimum") {
        ConfigSpace plan = plan_with_bcast({5, 10, 25, 30, 100}, 10);
        QueryDAG dag;
        dag.subqs = {{0, SubqRole::Join, {}}, {1, SubqRole::Join, {0}}, {2, SubqRole::Join, {0}}};
        std::vector<ConfigVector> per_subq{plan_point(plan, 64, 5, 0, 128),
                                           plan_point(plan, 64, 30, 0, 128),
                                           plan_point(plan, 64, 100, 0, 128)};
        auto out = aggregate_theta_p(per_subq, dag, plan);
        CHECK(out.coords[1] == 25.0);  // min 5, floored at 25
    }

    SECTION("a minimum above the floor is kept") {
        ConfigSpace plan = plan_with_bcast({10, 25, 40, 60}, 10);
        QueryDAG dag;
        dag.subqs = {{0, SubqRole::Join, {}}, {1, SubqRole::Join, {0}}};
        std::vector<ConfigVector> per_subq{plan_point(plan, 64, 40, 0, 128),
                                           plan_point(plan, 64, 60, 0, 128)};
        CHECK(aggregate_theta_p(per_subq, dag, plan).coords[1] == 40.0);
    }

    SECTION("no joins fall back to the space default") {
        ConfigSpace plan = default_plan_space();
        QueryDAG dag;
        dag.subqs = {{0, SubqRole::Scan, {}}, {1, SubqRole::Other, {0}}};
        std::vector<ConfigVector> per_subq{plan_point(plan, 64, 100, 0, 128),
                                           plan_point(plan, 64, 100, 0, 128)};
        CHECK(aggregate_theta_p(per_subq, dag, plan).coords[1] == 10.0);
    }

    SECTION("non-threshold dims copy the first subquery") {
        ConfigSpace plan = default_plan_space();
        QueryDAG dag;
        dag.subqs = {{0, SubqRole::Scan, {}}, {1, SubqRole::Join, {0}}};
        std::vector<ConfigVector> per_subq{plan_point(plan, 16, 10, 0, 512),
                                           plan_point(plan, 256, 10, 0, 64)};
        auto out = aggregate_theta_p(per_subq, dag, plan);
        CHECK(out.coords[0] == 16.0);
        CHECK(out.coords[3] == 512.0);
    }
}

TEST_CASE("join selection") {
    const double mb = CostModel::kMiB;
    CHECK(join_select(8 * mb, 10 * mb, 0, JoinAlgo::None) == JoinAlgo::BHJ);
    CHECK(join_select(4.5 * 1024 * mb, 10 * mb, 0, JoinAlgo::BHJ) == JoinAlgo::BHJ);
    CHECK(join_select(50 * mb, 25 * mb, 0, JoinAlgo::SMJ) == JoinAlgo::SMJ);
    CHECK(join_select(50 * mb, 25 * mb, 64 * mb, JoinAlgo::None) == JoinAlgo::SHJ);
    CHECK(join_select(50 * mb, 25 * mb, 64 * mb, JoinAlgo::BHJ) == JoinAlgo::BHJ);
    CHECK_THROWS_AS(join_select(-1, 10, 0, JoinAlgo::None), ContractViolation);
}

TEST_CASE("join upgrades are monotone under any event sequence") {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        JoinAlgo algo = JoinAlgo::None;
        int last_rank = -1;
        for (int event = 0; event < 20; ++event) {
            algo = join_select(rng.uniform(0, 1e9), rng.uniform(0, 5e8), rng.uniform(0, 5e8),
                               algo);
            CHECK(static_cast<int>(algo) >= last_rank);
            last_rank = static_cast<int>(algo);
        }
    }
}

TEST_CASE("request pruning rules") {
    OptEvent plan_no_join;
    plan_no_join.kind = EventKind::CollapsedPlan;
    CHECK_FALSE(should_send_request(plan_no_join));

    OptEvent plan_join;
    plan_join.kind = EventKind::CollapsedPlan;
    plan_join.has_join = true;
    plan_join.all_join_inputs_known = false;
    CHECK_FALSE(should_send_request(plan_join));
    plan_join.all_join_inputs_known = true;
    CHECK(should_send_request(plan_join));

    OptEvent scan_stage;
    scan_stage.kind = EventKind::QueryStage;
    scan_stage.is_scan_based = true;
    scan_stage.input_bytes = 1e9;
    scan_stage.s1_target_bytes = 64 * CostModel::kMiB;
    CHECK_FALSE(should_send_request(scan_stage));

    OptEvent shuffle_stage;
    shuffle_stage.kind = EventKind::QueryStage;
    shuffle_stage.input_bytes = 128 * CostModel::kMiB;
    shuffle_stage.s1_target_bytes = 64 * CostModel::kMiB;
    CHECK(should_send_request(shuffle_stage));
    shuffle_stage.input_bytes = 32 * CostModel::kMiB;
    CHECK_FALSE(should_send_request(shuffle_stage));
}

TEST_CASE("step bookkeeping") {
    UnderestimateSetup s;
    RuntimePolicy policy;
    RuntimeState state = make_initial_state(s.dag, s.model, s.estimated, s.submitted.theta_c,
                                            aggregate_theta_p(s.submitted.theta_p, s.dag, s.plan),
                                            s.submitted.theta_s[0], s.plan);

    step(state, 0, s.truth.alpha[0], s.truth, s.estimated, policy, s.model, s.dag, s.pairs,
         s.plan);
    CHECK(state.completed[0]);
    CHECK(state.clock_s > 0.0);
    const int sent_after_first = state.requests_sent;

    // Completing the final subquery is bookkeeping only: no further events.
    step(state, 1, s.truth.alpha[1], s.truth, s.estimated, policy, s.model, s.dag, s.pairs,
         s.plan);
    CHECK(state.requests_sent == sent_after_first);
    CHECK(state.requests_pruned == 0);

    CHECK_THROWS_AS(step(state, 1, s.truth.alpha[1], s.truth, s.estimated, policy, s.model, s.dag,
                         s.pairs, s.plan),
                    ContractViolation);
    CHECK_THROWS_AS(step(state, 9, 1.0, s.truth, s.estimated, policy, s.model, s.dag, s.pairs,
                         s.plan),
                    ContractViolation);
}

TEST_CASE("a 16x underestimate makes the frozen plan strictly slower") {
    UnderestimateSetup s;

    RuntimePolicy adaptive;
    adaptive.adaptive = true;
    RuntimePolicy frozen;
    frozen.adaptive = false;

    Trace t_adaptive =
        replay_runtime(s.submitted, s.pairs, s.dag, s.model, s.truth, s.estimated, adaptive,
                       s.plan);
    Trace t_frozen =
        replay_runtime(s.submitted, s.pairs, s.dag, s.model, s.truth, s.estimated, frozen,
                       s.plan);

    CHECK(t_adaptive.final_latency_s < t_frozen.final_latency_s);
    CHECK(t_adaptive.plan_changes > 0);

    // The high compile-time broadcast threshold converted the join on the
    // estimated 64 MiB build side; the true 1 GiB build cannot revert it.
    REQUIRE(!t_adaptive.steps.empty());
    CHECK(t_adaptive.steps.front().join_algo[1] == JoinAlgo::BHJ);
    CHECK(t_adaptive.steps.back().join_algo[1] == JoinAlgo::BHJ);
}

TEST_CASE("perfect estimates are a fixed point of runtime re-optimization") {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        Workload w = gen_workload({.seed = seed,
                                   .subq_count = 5,
                                   .join_fraction = 0.6,
                                   .estimation_error_exponent = 0.0});
        REQUIRE(w.estimated.alpha == w.truth.alpha);
        RuntimePolicy policy;
        policy.solver.budget = {4, 8};
        policy.solver.fis.enabled = false;
        Trace t = simulate(w.dag, w.model, w.truth, w.estimated, policy, w.context, w.plan,
                           w.stage);
        CHECK(t.plan_changes == 0);
    }
}

TEST_CASE("single scan queries send no requests") {
    Workload w = gen_workload({.seed = 9, .subq_count = 1});
    RuntimePolicy policy;
    policy.solver.budget = {2, 4};
    policy.solver.fis.enabled = false;
    Trace t = simulate(w.dag, w.model, w.truth, w.estimated, policy, w.context, w.plan, w.stage);
    CHECK(t.requests_sent == 0);
    CHECK(t.requests_pruned == 0);
}

TEST_CASE("pruning reduces requests and preserves no-op plans") {
    // Scan feeding a chain of joins, exact estimates, and a single-point
    // re-optimization grid equal to the submission: every pruned request is
    // provably a no-op, so only the request counters may differ.
    ConfigSpace context = default_context_space();
    ConfigSpace plan = default_plan_space();
    ConfigSpace stage = default_stage_space();
    QueryDAG dag;
    dag.subqs.push_back({0, SubqRole::Scan, {}});
    for (std::size_t i = 1; i < 10; ++i) dag.subqs.push_back({i, SubqRole::Join, {i - 1}});

    std::vector<SubqConstants> constants(10, SubqConstants{1e-6, 64.0, 0.1});
    CostModel model(constants, Price{0.002, 0.0002, 0.01}, ModelConstants{}, context, plan, stage);
    NonDecision nd;
    nd.alpha.assign(10, 4.0e6);
    nd.beta.assign(10, SkewDescriptor{});

    std::vector<PairSample> pairs{{default_config(plan), default_config(stage)}};
    Solution submitted;
    submitted.theta_c = default_config(context);
    submitted.theta_p.assign(10, pairs[0].theta_p);
    submitted.theta_s.assign(10, pairs[0].theta_s);
    submitted.objectives = {0, 0};

    RuntimePolicy on, off;
    on.prune_rules_enabled = true;
    off.prune_rules_enabled = false;

    Trace t_on = replay_runtime(submitted, pairs, dag, model, nd, nd, on, plan);
    Trace t_off = replay_runtime(submitted, pairs, dag, model, nd, nd, off, plan);

    CHECK(t_on.requests_sent <= t_off.requests_sent);
    CHECK(t_on.requests_pruned > 0);
    CHECK(t_off.requests_pruned == 0);
    CHECK(t_on.final_latency_s == t_off.final_latency_s);
    CHECK(t_on.final_cost == t_off.final_cost);
    REQUIRE(!t_on.steps.empty());
    CHECK(t_on.steps.back().join_algo == t_off.steps.back().join_algo);
    CHECK(t_on.steps.back().plan_theta_p.coords == t_off.steps.back().plan_theta_p.coords);
}

TEST_CASE("clock adds up over realized subquery latencies") {
    UnderestimateSetup s;
    s.estimated = s.truth;
    RuntimePolicy policy;
    policy.adaptive = false;  // every stage runs under the submitted plan

    Trace t = replay_runtime(s.submitted, s.pairs, s.dag, s.model, s.truth, s.estimated, policy,
                             s.plan);

    REQUIRE(t.steps.size() == s.dag.size());
    CHECK(t.final_latency_s == t.steps.back().clock_s);
    double previous = 0.0;
    for (const auto& snap : t.steps) {
        CHECK(snap.clock_s > previous);
        previous = snap.clock_s;
    }

    const ConfigVector submit_p = aggregate_theta_p(s.submitted.theta_p, s.dag, s.plan);
    double recomputed = 0.0;
    for (std::size_t q = 0; q < s.dag.size(); ++q)
        recomputed +=
            s.model.predict_subq(q, s.submitted.theta_c, submit_p, s.submitted.theta_s[0],
                                 s.truth)[0];
    CHECK(t.final_latency_s == recomputed);
}

TEST_CASE("scenario files override cardinalities") {
    Workload w = gen_workload({.seed = 3, .subq_count = 2, .join_fraction = 1.0});
    Scenario s = scenario_from_json(Json::parse(R"({
        "weights": [0.9, 0.1],
        "prune": true,
        "adaptive": true,
        "alpha_overrides": [{"subq": 0, "true_rows": 5e7, "estimated_rows": 3e6}]
    })"));
    apply_scenario(s, w);
    CHECK(w.truth.alpha[0] == 5e7);
    CHECK(w.estimated.alpha[0] == 3e6);
    CHECK(s.policy.reoptimize_weights.w == std::vector<double>{0.9, 0.1});
}
