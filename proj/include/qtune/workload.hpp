#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qtune/cost_model.hpp"
#include "qtune/dag.hpp"
#include "qtune/errors.hpp"
#include "qtune/rng.hpp"
#include "qtune/types.hpp"

namespace qtune {

// ---------------------------------------------------------------------------
// Default parameter spaces
// ---------------------------------------------------------------------------

inline ConfigSpace default_context_space() {
    ConfigSpace s;
    s.group = ParamGroup::Context;
    s.id = "context";
    s.dims = {
        {"executor_cores", ParamKind::IntGrid, {1, 2, 4, 8}, 4, false, ParamRole::ExecutorCores},
        {"executor_memory_gb", ParamKind::IntGrid, {2, 4, 8, 16}, 4, false,
         ParamRole::ExecutorMemoryGb},
        {"executor_count", ParamKind::IntGrid, {1, 2, 4, 8}, 2, false, ParamRole::ExecutorCount},
        {"default_parallelism", ParamKind::IntGrid, {32, 64, 128}, 64, false, ParamRole::None},
        {"shuffle_buffer_mb", ParamKind::IntGrid, {24, 48, 96}, 48, false, ParamRole::None},
        {"sort_spill_threshold", ParamKind::IntGrid, {100, 200, 400}, 200, false,
         ParamRole::None},
        {"shuffle_compress", ParamKind::Bool, {0, 1}, 1, false, ParamRole::ShuffleCompress},
        {"memory_fraction", ParamKind::FloatGrid, {0.25, 0.5, 0.75}, 0.5, false,
         ParamRole::None},
    };
    s.validate();
    return s;
}

inline ConfigSpace default_plan_space() {
    ConfigSpace s;
    s.group = ParamGroup::Plan;
    s.id = "plan";
    s.dims = {
        {"advisory_partition_mb", ParamKind::IntGrid, {16, 32, 64, 128, 256}, 64, false,
         ParamRole::AdvisoryPartitionMb},
        // Join thresholds decide the physical plan; importance filtering
        // must never drop them.
        {"broadcast_threshold_mb", ParamKind::IntGrid, {5, 10, 25, 50, 100}, 10, true,
         ParamRole::BroadcastThresholdMb},
        {"shuffle_hash_threshold_mb", ParamKind::IntGrid, {0, 16, 64, 256}, 0, true,
         ParamRole::ShuffleHashThresholdMb},
        {"shuffle_partitions", ParamKind::IntGrid, {32, 64, 128, 256, 512, 1024}, 128, false,
         ParamRole::ShufflePartitions},
        {"scan_partition_mb", ParamKind::IntGrid, {64, 128, 256}, 128, false, ParamRole::None},
    };
    s.validate();
    return s;
}

inline ConfigSpace default_stage_space() {
    ConfigSpace s;
    s.group = ParamGroup::Stage;
    s.id = "stage";
    s.dims = {
        {"rebalance_factor", ParamKind::FloatGrid, {0.2, 0.5}, 0.2, false, ParamRole::None},
        {"min_partition_mb", ParamKind::IntGrid, {1, 4, 16}, 1, false, ParamRole::None},
    };
    s.validate();
    return s;
}

// ---------------------------------------------------------------------------
// Workload specification
// ---------------------------------------------------------------------------

struct ValueRange {
    double min = 0.0;
    double max = 0.0;
};

/// Everything needed to generate one synthetic instance deterministically.
struct WorkloadSpec {
    std::uint64_t seed = 42;
    std::size_t subq_count = 1;
    double join_fraction = 0.5;
    ValueRange cardinality_rows{1e5, 5e7};
    ValueRange work_per_row_s{2e-7, 4e-6};
    ValueRange shuffle_bytes_per_row{16, 512};
    ValueRange base_overhead_s{0.05, 0.4};
    double estimation_error_exponent = 2.0;  // estimated alpha = alpha * 2^U(-E, E)
    Price price{0.002, 0.0002, 0.01};
    ModelConstants model{};
    double true_gamma = 0.0;
    double true_skew_ratio = 0.0;
    // Objective bounds are accepted by the schema but not used by any solver.
    std::vector<std::array<double, 2>> objective_bounds;

    void validate() const {
        detail::require(subq_count >= 1, "WorkloadSpec: subq_count must be >= 1");
        detail::require(join_fraction >= 0.0 && join_fraction <= 1.0,
                        "WorkloadSpec: join_fraction must be in [0, 1]");
        detail::require(estimation_error_exponent >= 0.0,
                        "WorkloadSpec: estimation error must be >= 0");
    }
};

/// One generated instance: the workload DAG, its cost model, both views of
/// the non-decision inputs, and the parameter spaces in effect.
struct Workload {
    QueryDAG dag;
    CostModel model;
    NonDecision truth;
    NonDecision estimated;
    ConfigSpace context;
    ConfigSpace plan;
    ConfigSpace stage;
    WorkloadSpec spec;
};

/// Deterministic instance generation. The topological list order of the DAG
/// defines the subquery order; join subqueries derive their build-side size
/// from the first child's cardinality.
inline Workload gen_workload(const WorkloadSpec& spec, ConfigSpace context = default_context_space(),
                             ConfigSpace plan = default_plan_space(),
                             ConfigSpace stage = default_stage_space()) {
    spec.validate();
    Rng rng(derive_seed(spec.seed, 0x301AD));

    Workload w;
    w.spec = spec;
    w.context = std::move(context);
    w.plan = std::move(plan);
    w.stage = std::move(stage);

    const std::size_t m = spec.subq_count;
    w.dag.subqs.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        SubQ& s = w.dag.subqs[i];
        s.id = i;
        if (i == 0) {
            s.role = SubqRole::Scan;
            continue;
        }
        const double u = rng.next_double();
        if (u < spec.join_fraction) {
            s.role = SubqRole::Join;
            std::size_t build = rng.next_index(i);
            s.children.push_back(build);
            if (i >= 2) {
                std::size_t probe = rng.next_index(i);
                if (probe == build) probe = (probe + 1) % i;
                s.children.push_back(probe);
            }
        } else if (u < spec.join_fraction + (1.0 - spec.join_fraction) * 0.4) {
            s.role = SubqRole::Scan;  // independent source branch
        } else {
            s.role = SubqRole::Other;
            s.children.push_back(rng.next_index(i));
        }
    }
    w.dag.validate();

    std::vector<SubqConstants> constants(m);
    w.truth.alpha.resize(m);
    w.truth.beta.assign(m, SkewDescriptor{0.0, spec.true_skew_ratio, 0.0});
    w.truth.gamma = spec.true_gamma;
    w.estimated.alpha.resize(m);
    w.estimated.beta.assign(m, SkewDescriptor{});
    w.estimated.gamma = 0.0;

    for (std::size_t i = 0; i < m; ++i) {
        const double log_lo = std::log(spec.cardinality_rows.min);
        const double log_hi = std::log(spec.cardinality_rows.max);
        w.truth.alpha[i] = std::exp(rng.uniform(log_lo, log_hi));
        constants[i].work_per_row_s = rng.uniform(spec.work_per_row_s.min, spec.work_per_row_s.max);
        constants[i].shuffle_bytes_per_row =
            rng.uniform(spec.shuffle_bytes_per_row.min, spec.shuffle_bytes_per_row.max);
        constants[i].base_overhead_s =
            rng.uniform(spec.base_overhead_s.min, spec.base_overhead_s.max);
        const double err = rng.uniform(-spec.estimation_error_exponent,
                                       spec.estimation_error_exponent);
        w.estimated.alpha[i] = w.truth.alpha[i] * std::exp2(err);
    }

    w.model = CostModel(std::move(constants), spec.price, spec.model, w.context, w.plan, w.stage,
                        spec.seed);
    return w;
}

}  // namespace qtune
