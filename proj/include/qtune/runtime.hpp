#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "qtune/cost_model.hpp"
#include "qtune/dag.hpp"
#include "qtune/errors.hpp"
#include "qtune/solver.hpp"
#include "qtune/types.hpp"

namespace qtune {

// ---------------------------------------------------------------------------
// Join algorithms
// ---------------------------------------------------------------------------

/// Ordered by upgrade direction: the runtime can convert a sort-merge join
/// to a shuffled-hash or broadcast-hash join, but never backward.
enum class JoinAlgo : int { None = -1, SMJ = 0, SHJ = 1, BHJ = 2 };

/// Size-based join selection with monotone upgrades: the candidate from the
/// thresholds is BHJ if the build side fits under the broadcast threshold,
/// else SHJ under the shuffle-hash threshold, else SMJ; the result never
/// downgrades the current algorithm.
inline JoinAlgo join_select(double build_side_bytes, double broadcast_threshold_bytes,
                            double shuffle_hash_threshold_bytes, JoinAlgo current) {
    detail::require(build_side_bytes >= 0.0, "join_select: negative build side size");
    JoinAlgo candidate = JoinAlgo::SMJ;
    if (build_side_bytes <= broadcast_threshold_bytes)
        candidate = JoinAlgo::BHJ;
    else if (build_side_bytes <= shuffle_hash_threshold_bytes)
        candidate = JoinAlgo::SHJ;
    if (current == JoinAlgo::None) return candidate;
    return static_cast<int>(candidate) > static_cast<int>(current) ? candidate : current;
}

// ---------------------------------------------------------------------------
// Optimization-request pruning
// ---------------------------------------------------------------------------

enum class EventKind { CollapsedPlan, QueryStage };

struct OptEvent {
    EventKind kind = EventKind::CollapsedPlan;
    bool has_join = false;
    bool all_join_inputs_known = false;
    bool is_scan_based = false;
    double input_bytes = 0.0;
    double s1_target_bytes = 0.0;
};

/// Request-pruning rules: collapsed-plan requests are sent only for plans
/// with joins whose input statistics are all available; query-stage requests
/// skip scan-based stages and stages whose input is no larger than the
/// target partition size.
inline bool should_send_request(const OptEvent& event) {
    if (event.kind == EventKind::CollapsedPlan)
        return event.has_join && event.all_join_inputs_known;
    return !event.is_scan_based && event.input_bytes > event.s1_target_bytes;
}

// ---------------------------------------------------------------------------
// theta_p aggregation at submission
// ---------------------------------------------------------------------------

struct ThresholdFloors {
    double broadcast_mb = 25.0;
    double shuffle_hash_mb = 0.0;
};

namespace detail {

// Snap to the smallest grid value >= x (largest value if none).
inline double snap_up(const ParamDef& dim, double x) {
    for (double v : dim.values)
        if (v >= x) return v;
    return dim.values.back();
}

}  // namespace detail

/// Collapses the compile-time per-subquery theta_p list into the single copy
/// accepted at submission. Join thresholds take the smallest value among
/// join-based subqueries, floored so that broadcast joins of small inputs
/// are not missed; all other dims are copied from the first subquery's
/// theta_p. Without any join subqueries the thresholds stay at the space
/// defaults.
inline ConfigVector aggregate_theta_p(const std::vector<ConfigVector>& per_subq_theta_p,
                                      const QueryDAG& dag, const ConfigSpace& plan,
                                      const ThresholdFloors& floors = {}) {
    detail::require(per_subq_theta_p.size() == dag.size(),
                    "aggregate_theta_p: per-subquery list length mismatch");
    ConfigVector out = per_subq_theta_p.front();

    const std::size_t idx_bcast = plan.find_role(ParamRole::BroadcastThresholdMb);
    const std::size_t idx_shash = plan.find_role(ParamRole::ShuffleHashThresholdMb);

    auto aggregate_threshold = [&](std::size_t idx, double floor_mb) {
        if (idx == ConfigSpace::npos) return;
        double lowest = std::numeric_limits<double>::infinity();
        for (std::size_t q = 0; q < dag.size(); ++q)
            if (dag.subqs[q].role == SubqRole::Join)
                lowest = std::min(lowest, per_subq_theta_p[q].coords[idx]);
        if (!std::isfinite(lowest)) {
            out.coords[idx] = plan.dims[idx].default_value;
            return;
        }
        out.coords[idx] = detail::snap_up(plan.dims[idx], std::max(lowest, floor_mb));
    };
    aggregate_threshold(idx_bcast, floors.broadcast_mb);
    aggregate_threshold(idx_shash, floors.shuffle_hash_mb);
    return out;
}

// ---------------------------------------------------------------------------
// Runtime state and policy
// ---------------------------------------------------------------------------

struct RuntimePolicy {
    bool prune_rules_enabled = true;
    bool adaptive = true;  // false replays the submission-time plan unchanged
    WeightVector reoptimize_weights{{0.5, 0.5}};
    ThresholdFloors floors{};
    SolverConfig solver{};  // compile-time budget rules used by simulate()
};

/// Mutable execution state of one simulated query run. theta_c is fixed at
/// submission; join algorithms only ever upgrade; the completed set only
/// grows.
struct RuntimeState {
    ConfigVector theta_c;
    ConfigVector plan_theta_p;  // current single-copy plan parameters
    ConfigVector plan_theta_s;
    std::vector<JoinAlgo> join_algo;   // per subquery, None for non-joins
    std::vector<bool> completed;
    std::vector<double> revealed_alpha;  // NaN until the subquery finishes
    int requests_sent = 0;
    int requests_pruned = 0;
    int plan_changes = 0;  // decisions that differ from the estimated-stats replay
    double clock_s = 0.0;
    double cost_units = 0.0;
};

struct StepSnapshot {
    std::size_t completed_subq = 0;
    double clock_s = 0.0;
    std::vector<JoinAlgo> join_algo;
    ConfigVector plan_theta_p;
};

struct Trace {
    double final_latency_s = 0.0;
    double final_cost = 0.0;
    int requests_sent = 0;
    int requests_pruned = 0;
    int plan_changes = 0;
    std::vector<StepSnapshot> steps;
};

namespace detail {

inline double revealed_or_estimated(const RuntimeState& state, const NonDecision& estimated,
                                    std::size_t q) {
    double a = state.revealed_alpha[q];
    return std::isnan(a) ? estimated.alpha[q] : a;
}

inline double build_side_bytes(const RuntimeState& state, const NonDecision& estimated,
                               const CostModel& model, const QueryDAG& dag, std::size_t join) {
    const auto& children = dag.subqs[join].children;
    if (children.empty()) return 0.0;
    const std::size_t build = children.front();
    return revealed_or_estimated(state, estimated, build) *
           model.subq_constants()[build].shuffle_bytes_per_row;
}

/// Picks the (theta_p, theta_s) pair minimizing the policy-weighted
/// normalized sum of predicted objectives over the remaining subqueries.
/// Ties go to the lowest pair index.
inline std::size_t reoptimize_plan(const RuntimeState& state, const NonDecision& nd_view,
                                   const CostModel& model, const QueryDAG& dag,
                                   const std::vector<PairSample>& pairs,
                                   const WeightVector& weights) {
    std::vector<ObjectiveVector> sums;
    sums.reserve(pairs.size());
    for (const auto& pair : pairs) {
        ObjectiveVector total(2, 0.0);
        for (std::size_t q = 0; q < dag.size(); ++q) {
            if (state.completed[q]) continue;
            ObjectiveVector o =
                model.predict_subq(q, state.theta_c, pair.theta_p, pair.theta_s, nd_view);
            total[0] += o[0];
            total[1] += o[1];
        }
        sums.push_back(std::move(total));
    }
    auto norm = normalize_objectives(sums);
    std::size_t best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < norm.size(); ++i) {
        double value = 0.0;
        for (std::size_t v = 0; v < weights.w.size(); ++v) value += weights.w[v] * norm[i][v];
        if (value < best_value) {
            best_value = value;
            best = i;
        }
    }
    return best;
}

/// Statistics visible to the runtime optimizer: a subquery's input
/// cardinality is exact once it has completed, or once every child feeding
/// it has completed (its input has then materialized); everything else stays
/// at the compile-time estimate.
inline NonDecision runtime_view(const RuntimeState& state, const NonDecision& estimated,
                                const NonDecision& truth, const QueryDAG& dag) {
    NonDecision view = estimated;
    view.gamma = truth.gamma;
    for (std::size_t q = 0; q < dag.size(); ++q) {
        bool known = !std::isnan(state.revealed_alpha[q]);
        if (!known && !dag.subqs[q].children.empty()) {
            known = true;
            for (std::size_t child : dag.subqs[q].children)
                if (!state.completed[child]) known = false;
        }
        if (known) {
            view.alpha[q] =
                !std::isnan(state.revealed_alpha[q]) ? state.revealed_alpha[q] : truth.alpha[q];
            view.beta[q] = truth.beta[q];
        }
    }
    return view;
}

}  // namespace detail

inline RuntimeState make_initial_state(const QueryDAG& dag, const CostModel& model,
                                       const NonDecision& estimated, const ConfigVector& theta_c,
                                       const ConfigVector& plan_theta_p,
                                       const ConfigVector& plan_theta_s, const ConfigSpace& plan) {
    RuntimeState state;
    state.theta_c = theta_c;
    state.plan_theta_p = plan_theta_p;
    state.plan_theta_s = plan_theta_s;
    state.completed.assign(dag.size(), false);
    state.revealed_alpha.assign(dag.size(), std::numeric_limits<double>::quiet_NaN());
    state.join_algo.assign(dag.size(), JoinAlgo::None);

    const std::size_t idx_bcast = plan.find_role(ParamRole::BroadcastThresholdMb);
    const std::size_t idx_shash = plan.find_role(ParamRole::ShuffleHashThresholdMb);
    const double bcast = idx_bcast == ConfigSpace::npos
                             ? 0.0
                             : plan_theta_p.coords[idx_bcast] * CostModel::kMiB;
    const double shash = idx_shash == ConfigSpace::npos
                             ? 0.0
                             : plan_theta_p.coords[idx_shash] * CostModel::kMiB;
    for (std::size_t q = 0; q < dag.size(); ++q)
        if (dag.subqs[q].role == SubqRole::Join)
            state.join_algo[q] = join_select(
                detail::build_side_bytes(state, estimated, model, dag, q), bcast, shash,
                JoinAlgo::None);
    return state;
}

/// One stage-completion event: reveal the finished subquery's true
/// cardinality, advance the clock by its realized latency, and, when the
/// collapsed remaining plan warrants a request, re-optimize theta_p for it
/// and re-select join algorithms. `plan_changes` counts decisions that
/// differ from what the same optimizer would do on estimated statistics, so
/// perfect estimates imply zero changes.
inline void step(RuntimeState& state, std::size_t completed_subq, double true_alpha,
                 const NonDecision& truth, const NonDecision& estimated,
                 const RuntimePolicy& policy, const CostModel& model, const QueryDAG& dag,
                 const std::vector<PairSample>& pairs, const ConfigSpace& plan,
                 std::vector<StepSnapshot>* snapshots = nullptr) {
    detail::require(completed_subq < dag.size(), "step: unknown subquery id");
    detail::require(!state.completed[completed_subq], "step: subquery already completed");

    // Realized objectives under the configuration the stage actually ran with.
    NonDecision realized = detail::runtime_view(state, estimated, truth, dag);
    realized.alpha[completed_subq] = true_alpha;
    realized.beta[completed_subq] = truth.beta[completed_subq];
    ObjectiveVector o = model.predict_subq(completed_subq, state.theta_c, state.plan_theta_p,
                                           state.plan_theta_s, realized);
    state.clock_s += o[0];
    state.cost_units += o[1];

    state.completed[completed_subq] = true;
    state.revealed_alpha[completed_subq] = true_alpha;

    bool any_remaining = false;
    for (bool c : state.completed) any_remaining |= !c;

    if (any_remaining) {
        OptEvent plan_event;
        plan_event.kind = EventKind::CollapsedPlan;
        bool all_inputs_known = true;
        for (std::size_t q = 0; q < dag.size(); ++q) {
            if (state.completed[q] || dag.subqs[q].role != SubqRole::Join) continue;
            plan_event.has_join = true;
            for (std::size_t child : dag.subqs[q].children)
                if (!state.completed[child]) all_inputs_known = false;
        }
        plan_event.all_join_inputs_known = plan_event.has_join && all_inputs_known;

        const bool send = !policy.prune_rules_enabled || should_send_request(plan_event);
        if (send)
            ++state.requests_sent;
        else
            ++state.requests_pruned;

        if (send && policy.adaptive) {
            NonDecision revealed_view = detail::runtime_view(state, estimated, truth, dag);
            std::size_t pick = detail::reoptimize_plan(state, revealed_view, model, dag, pairs,
                                                       policy.reoptimize_weights);
            std::size_t est_pick = detail::reoptimize_plan(state, estimated, model, dag, pairs,
                                                           policy.reoptimize_weights);
            if (pairs[pick].theta_p.coords != pairs[est_pick].theta_p.coords ||
                pairs[pick].theta_s.coords != pairs[est_pick].theta_s.coords)
                ++state.plan_changes;
            state.plan_theta_p = pairs[pick].theta_p;
            state.plan_theta_s = pairs[pick].theta_s;

            const std::size_t idx_bcast = plan.find_role(ParamRole::BroadcastThresholdMb);
            const std::size_t idx_shash = plan.find_role(ParamRole::ShuffleHashThresholdMb);
            const double bcast = idx_bcast == ConfigSpace::npos
                                     ? 0.0
                                     : state.plan_theta_p.coords[idx_bcast] * CostModel::kMiB;
            const double shash = idx_shash == ConfigSpace::npos
                                     ? 0.0
                                     : state.plan_theta_p.coords[idx_shash] * CostModel::kMiB;
            for (std::size_t q = 0; q < dag.size(); ++q) {
                if (state.completed[q] || dag.subqs[q].role != SubqRole::Join) continue;
                JoinAlgo previous = state.join_algo[q];
                JoinAlgo updated = join_select(
                    detail::build_side_bytes(state, revealed_view, model, dag, q), bcast, shash,
                    previous);
                JoinAlgo est_updated = join_select(
                    detail::build_side_bytes(state, estimated, model, dag, q), bcast, shash,
                    previous);
                if (updated != est_updated) ++state.plan_changes;
                state.join_algo[q] = updated;
            }
        }

        // Query-stage events for stages that just became ready.
        const std::size_t idx_advisory = plan.find_role(ParamRole::AdvisoryPartitionMb);
        const double target_bytes = idx_advisory == ConfigSpace::npos
                                        ? 0.0
                                        : state.plan_theta_p.coords[idx_advisory] * CostModel::kMiB;
        for (std::size_t q = 0; q < dag.size(); ++q) {
            if (state.completed[q]) continue;
            bool ready = true, feeds_from_completed = false;
            for (std::size_t child : dag.subqs[q].children) {
                if (!state.completed[child]) ready = false;
                if (child == completed_subq) feeds_from_completed = true;
            }
            if (!ready || !feeds_from_completed) continue;
            OptEvent qs;
            qs.kind = EventKind::QueryStage;
            qs.is_scan_based = dag.subqs[q].role == SubqRole::Scan;
            qs.s1_target_bytes = target_bytes;
            for (std::size_t child : dag.subqs[q].children)
                qs.input_bytes += state.revealed_alpha[child] *
                                  model.subq_constants()[child].shuffle_bytes_per_row;
            if (!policy.prune_rules_enabled || should_send_request(qs))
                ++state.requests_sent;
            else
                ++state.requests_pruned;
        }
    }

    if (snapshots)
        snapshots->push_back(
            {completed_subq, state.clock_s, state.join_algo, state.plan_theta_p});
}

/// Event replay for an already-recommended compile-time solution: aggregate
/// its theta_p for submission, then fire stage-completion events in
/// topological order with true statistics revealed as stages finish.
inline Trace replay_runtime(const Solution& recommended, const std::vector<PairSample>& pairs,
                            const QueryDAG& dag, const CostModel& model, const NonDecision& truth,
                            const NonDecision& estimated, const RuntimePolicy& policy,
                            const ConfigSpace& plan) {
    ConfigVector submit_p = aggregate_theta_p(recommended.theta_p, dag, plan, policy.floors);
    RuntimeState state = make_initial_state(dag, model, estimated, recommended.theta_c, submit_p,
                                            recommended.theta_s.front(), plan);
    Trace trace;
    for (std::size_t q = 0; q < dag.size(); ++q)
        step(state, q, truth.alpha[q], truth, estimated, policy, model, dag, pairs, plan,
             &trace.steps);
    trace.final_latency_s = state.clock_s;
    trace.final_cost = state.cost_units;
    trace.requests_sent = state.requests_sent;
    trace.requests_pruned = state.requests_pruned;
    trace.plan_changes = state.plan_changes;
    return trace;
}

/// Deterministic replay of the full hybrid loop: compile-time optimization
/// on estimated statistics, WUN recommendation with the policy weights,
/// theta_p aggregation at submission, then runtime re-optimization as true
/// statistics are revealed.
inline Trace simulate(const QueryDAG& dag, const CostModel& model, const NonDecision& truth,
                      const NonDecision& estimated, const RuntimePolicy& policy,
                      const ConfigSpace& context, const ConfigSpace& plan,
                      const ConfigSpace& stage) {
    dag.validate();
    truth.validate(dag.size());
    estimated.validate(dag.size());

    SolveInputs inputs =
        prepare_solve_inputs(dag, model, estimated, context, plan, stage, policy.solver);
    ParetoSet front = solve_from_inputs(inputs, dag, Method::HMOOC3, policy.solver.weight_count);
    const Solution recommended = wun_recommend(front, policy.reoptimize_weights);
    return replay_runtime(recommended, *inputs.pairs, dag, model, truth, estimated, policy, plan);
}

}  // namespace qtune
