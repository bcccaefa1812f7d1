#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include "qtune/errors.hpp"
#include "qtune/pareto.hpp"
#include "qtune/rng.hpp"
#include "qtune/types.hpp"

namespace qtune {

// ---------------------------------------------------------------------------
// Non-decision variables
// ---------------------------------------------------------------------------

/// Partition-size distribution descriptor. A uniform distribution encodes
/// as the zero vector.
struct SkewDescriptor {
    double std_avg_ratio = 0.0;
    double skew_ratio = 0.0;   // (max - mean) / mean
    double range_ratio = 0.0;  // (max - min) / mean
};

/// Inputs the optimizer cannot tune: per-subquery cardinalities, skew, and
/// a resource-contention scalar. Compile time works with estimated
/// cardinalities; the runtime simulator reveals the true ones.
struct NonDecision {
    std::vector<double> alpha;        // rows per subquery, > 0
    std::vector<SkewDescriptor> beta; // per subquery
    double gamma = 0.0;               // contention multiplier, >= 0

    void validate(std::size_t subq_count) const {
        detail::require(alpha.size() == subq_count && beta.size() == subq_count,
                        "NonDecision: per-subquery length mismatch");
        for (double a : alpha) detail::require(a > 0.0, "NonDecision: alpha must be > 0");
        for (const auto& b : beta)
            detail::require(b.std_avg_ratio >= 0 && b.skew_ratio >= 0 && b.range_ratio >= 0,
                            "NonDecision: beta components must be >= 0");
        detail::require(gamma >= 0.0, "NonDecision: gamma must be >= 0");
    }
};

// ---------------------------------------------------------------------------
// Synthetic analytic cost model
// ---------------------------------------------------------------------------

struct SubqConstants {
    double work_per_row_s = 0.0;       // task-seconds per row
    double shuffle_bytes_per_row = 0.0;
    double base_overhead_s = 0.0;
};

struct Price {
    double cpu_rate = 0.0;     // cost per core-second
    double mem_rate = 0.0;     // cost per GB-second
    double shuffle_rate = 0.0; // cost per GB shuffled
};

struct ModelConstants {
    double bandwidth_gbps = 1.0;       // shuffle bandwidth, GB/s
    double gp_curvature = 0.05;        // curvature of the partition-size bowl
    double partition_penalty = 0.03;   // seconds per octave off the ideal partition count
    double ideal_partition_mb = 64.0;  // bytes-per-partition target defining p*
    double advisory_cap_mb = 128.0;    // upper cap on the advisory-size optimum
};

/// Per-subquery predictive model family. A pure deterministic function of
/// (subquery, theta_c, theta_p, theta_s, non-decision inputs):
///
///   bytes    = alpha * shuffle_bytes_per_row
///   p*       = max(1, bytes / ideal_partition_bytes)
///   g_p      = 1 + gp_curvature * log2(advisory_bytes / min(bytes, cap))^2
///   latency  = (1+gamma) * ( work*alpha*g_p / total_cores
///                          + shuffle_gb*(1+skew) / (BW * (compress ? 0.7 : 1.0))
///                          + partition_penalty * |log2(partitions / p*)|
///                          + base_overhead )
///   cost     = latency * (cpu_rate*total_cores + mem_rate*total_mem)
///            + shuffle_rate * shuffle_gb
///
/// with total_cores = executor_cores * executor_count and total_mem =
/// executor_memory_gb * executor_count. Latency is strictly decreasing in
/// total cores and the cost rate strictly increasing in both total cores
/// and total memory, which is what produces the latency/cost tradeoff.
class CostModel {
public:
    CostModel() = default;

    CostModel(std::vector<SubqConstants> subq_constants, Price price, ModelConstants constants,
              const ConfigSpace& context, const ConfigSpace& plan, const ConfigSpace& stage,
              std::uint64_t seed = 0)
        : subq_(std::move(subq_constants)),
          price_(price),
          constants_(constants),
          seed_(seed),
          context_id_(context.id),
          plan_id_(plan.id),
          stage_id_(stage.id) {
        for (const auto& c : subq_)
            detail::require(c.work_per_row_s > 0 && c.shuffle_bytes_per_row > 0 &&
                                c.base_overhead_s > 0,
                            "CostModel: subquery constants must be > 0");
        idx_cores_ = context.find_role(ParamRole::ExecutorCores);
        idx_mem_ = context.find_role(ParamRole::ExecutorMemoryGb);
        idx_count_ = context.find_role(ParamRole::ExecutorCount);
        idx_compress_ = context.find_role(ParamRole::ShuffleCompress);
        idx_advisory_ = plan.find_role(ParamRole::AdvisoryPartitionMb);
        idx_partitions_ = plan.find_role(ParamRole::ShufflePartitions);
        detail::require(idx_cores_ != ConfigSpace::npos && idx_mem_ != ConfigSpace::npos &&
                            idx_count_ != ConfigSpace::npos,
                        "CostModel: context space lacks resource roles");
        detail::require(idx_advisory_ != ConfigSpace::npos && idx_partitions_ != ConfigSpace::npos,
                        "CostModel: plan space lacks partition roles");
    }

    std::size_t subq_count() const { return subq_.size(); }
    const Price& price() const { return price_; }
    const ModelConstants& constants() const { return constants_; }
    std::uint64_t seed() const { return seed_; }
    const std::vector<SubqConstants>& subq_constants() const { return subq_; }

    double shuffle_gb(std::size_t subq_id, double alpha) const {
        return alpha * subq_[subq_id].shuffle_bytes_per_row / kGiB;
    }

    ObjectiveVector predict_subq(std::size_t subq_id, const ConfigVector& theta_c,
                                 const ConfigVector& theta_p, const ConfigVector& theta_s,
                                 const NonDecision& nd) const {
        detail::require(subq_id < subq_.size(), "predict_subq: unknown subquery");
        detail::require(theta_c.space_id == context_id_, "predict_subq: theta_c from wrong space");
        detail::require(theta_p.space_id == plan_id_, "predict_subq: theta_p from wrong space");
        detail::require(theta_s.space_id == stage_id_, "predict_subq: theta_s from wrong space");
        detail::require(nd.alpha.size() > subq_id, "predict_subq: non-decision too short");

        const SubqConstants& c = subq_[subq_id];
        const double alpha = nd.alpha[subq_id];
        const double skew = nd.beta[subq_id].skew_ratio;

        const double cores = theta_c.coords[idx_cores_] * theta_c.coords[idx_count_];
        const double mem_gb = theta_c.coords[idx_mem_] * theta_c.coords[idx_count_];
        const bool compress =
            idx_compress_ != ConfigSpace::npos && theta_c.coords[idx_compress_] != 0.0;

        const double bytes = alpha * c.shuffle_bytes_per_row;
        const double s_gb = bytes / kGiB;
        const double p_star = std::max(1.0, bytes / (constants_.ideal_partition_mb * kMiB));
        const double opt_advisory = std::min(bytes, constants_.advisory_cap_mb * kMiB);

        const double advisory_bytes = theta_p.coords[idx_advisory_] * kMiB;
        const double off = std::log2(advisory_bytes / opt_advisory);
        const double g_p = 1.0 + constants_.gp_curvature * off * off;

        const double partitions = theta_p.coords[idx_partitions_];
        const double partition_term =
            constants_.partition_penalty * std::fabs(std::log2(partitions / p_star));

        const double work_term = c.work_per_row_s * alpha * g_p / cores;
        const double shuffle_term =
            s_gb * (1.0 + skew) / (constants_.bandwidth_gbps * (compress ? 0.7 : 1.0));

        const double latency =
            (1.0 + nd.gamma) * (work_term + shuffle_term + partition_term + c.base_overhead_s);
        const double rate = price_.cpu_rate * cores + price_.mem_rate * mem_gb;
        const double cost = latency * rate + price_.shuffle_rate * s_gb;
        return {latency, cost};
    }

    /// Componentwise sum of predict_subq over all subqueries, folded in
    /// subquery index order. Every query-level objective in this project is
    /// computed through this fold so that alternative solver routes agree
    /// bit for bit.
    ObjectiveVector predict_query(const ConfigVector& theta_c,
                                  const std::vector<ConfigVector>& theta_p,
                                  const std::vector<ConfigVector>& theta_s,
                                  const NonDecision& nd) const {
        detail::require(theta_p.size() == subq_.size() && theta_s.size() == subq_.size(),
                        "predict_query: per-subquery length mismatch");
        ObjectiveVector total(2, 0.0);
        for (std::size_t i = 0; i < subq_.size(); ++i) {
            ObjectiveVector o = predict_subq(i, theta_c, theta_p[i], theta_s[i], nd);
            total[0] += o[0];
            total[1] += o[1];
        }
        return total;
    }

    static constexpr double kMiB = 1048576.0;
    static constexpr double kGiB = 1073741824.0;

private:
    std::vector<SubqConstants> subq_;
    Price price_;
    ModelConstants constants_;
    std::uint64_t seed_ = 0;
    std::string context_id_, plan_id_, stage_id_;
    std::size_t idx_cores_ = ConfigSpace::npos;
    std::size_t idx_mem_ = ConfigSpace::npos;
    std::size_t idx_count_ = ConfigSpace::npos;
    std::size_t idx_compress_ = ConfigSpace::npos;
    std::size_t idx_advisory_ = ConfigSpace::npos;
    std::size_t idx_partitions_ = ConfigSpace::npos;
};

// ---------------------------------------------------------------------------
// Permutation feature importance
// ---------------------------------------------------------------------------

/// Per-parameter importance of one sampled space, measured as the increase
/// in relative prediction error when that parameter's column is shuffled.
struct FisReport {
    std::vector<std::string> names;
    std::vector<bool> important;      // copied from the space; kept unconditionally
    std::vector<double> scores;       // raw mean relative error, >= 0
    std::vector<double> normalized;   // scores scaled to sum to 1
};

namespace detail {

// Samples used by the importance probe: one Latin-hypercube column per dim.
inline std::vector<std::vector<double>> fis_design(const ConfigSpace& space, std::size_t n,
                                                   Rng& rng) {
    std::vector<std::vector<double>> cols(space.dims.size());
    for (std::size_t d = 0; d < space.dims.size(); ++d) {
        const auto& values = space.dims[d].values;
        auto perm = rng.permutation(n);
        cols[d].resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            double u = (static_cast<double>(perm[i]) + rng.next_double()) / static_cast<double>(n);
            std::size_t idx = std::min(values.size() - 1,
                                       static_cast<std::size_t>(u * static_cast<double>(values.size())));
            cols[d][i] = values[idx];
        }
    }
    return cols;
}

}  // namespace detail

/// Permutation importance over an LHS design of `n_samples` points.
///
/// The probe evaluates every subquery of the model under each design point,
/// then re-evaluates with one column shuffled at a time; the score is the
/// mean relative error across samples, subqueries, and objectives.
/// Deterministic for a fixed seed. `space` may be the context space or the
/// joint plan+stage space; the dims of the other groups stay at defaults.
inline FisReport permutation_fis(const CostModel& model, const ConfigSpace& space,
                                 const ConfigSpace& context, const ConfigSpace& plan,
                                 const ConfigSpace& stage, std::size_t n_samples,
                                 std::uint64_t seed, const NonDecision& nd) {
    detail::require(n_samples >= 50, "permutation_fis: n_samples must be >= 50");
    Rng rng(derive_seed(seed, 0xF15));
    auto cols = detail::fis_design(space, n_samples, rng);

    const ConfigVector base_c = default_config(context);
    const ConfigVector base_p = default_config(plan);
    const ConfigVector base_s = default_config(stage);

    // The probed space writes its coords into whichever group vectors it
    // spans; a joint plan+stage space splits at plan.dim_count().
    auto assemble = [&](std::size_t sample, const std::vector<std::vector<double>>& columns) {
        ConfigVector c = base_c, p = base_p, s = base_s;
        if (space.group == ParamGroup::Context) {
            for (std::size_t d = 0; d < columns.size(); ++d) c.coords[d] = columns[d][sample];
        } else {
            for (std::size_t d = 0; d < columns.size(); ++d) {
                if (d < plan.dim_count())
                    p.coords[d] = columns[d][sample];
                else
                    s.coords[d - plan.dim_count()] = columns[d][sample];
            }
        }
        return std::tuple<ConfigVector, ConfigVector, ConfigVector>{std::move(c), std::move(p),
                                                                    std::move(s)};
    };

    const std::size_t m = model.subq_count();
    std::vector<ObjectiveVector> truth(n_samples * m);
    for (std::size_t i = 0; i < n_samples; ++i) {
        auto [c, p, s] = assemble(i, cols);
        for (std::size_t q = 0; q < m; ++q) truth[i * m + q] = model.predict_subq(q, c, p, s, nd);
    }

    FisReport report;
    for (const auto& d : space.dims) {
        report.names.push_back(d.name);
        report.important.push_back(d.important);
    }
    report.scores.resize(space.dims.size(), 0.0);

    const double k_obj = truth.empty() ? 1.0 : static_cast<double>(truth[0].size());
    for (std::size_t d = 0; d < space.dims.size(); ++d) {
        auto shuffled = cols;
        rng.shuffle(shuffled[d]);
        double err = 0.0;
        for (std::size_t i = 0; i < n_samples; ++i) {
            auto [c, p, s] = assemble(i, shuffled);
            for (std::size_t q = 0; q < m; ++q) {
                ObjectiveVector o = model.predict_subq(q, c, p, s, nd);
                const ObjectiveVector& t = truth[i * m + q];
                for (std::size_t v = 0; v < t.size(); ++v)
                    err += std::fabs(o[v] - t[v]) / std::fabs(t[v]);
            }
        }
        report.scores[d] = err / (static_cast<double>(n_samples * m) * k_obj);
    }

    double total = 0.0;
    for (double s : report.scores) total += s;
    report.normalized.resize(report.scores.size());
    for (std::size_t d = 0; d < report.scores.size(); ++d)
        report.normalized[d] = total > 0.0 ? report.scores[d] / total
                                           : 1.0 / static_cast<double>(report.scores.size());
    return report;
}

/// Keep mask from a FIS report: parameters are sorted by descending
/// normalized score and the tail whose cumulative score stays strictly below
/// `cumulative_threshold` is dropped. Structurally important parameters are
/// never dropped. Dropped parameters are pinned to their defaults by the
/// samplers downstream.
inline std::vector<bool> fis_filter(const FisReport& report, double cumulative_threshold) {
    detail::require(cumulative_threshold >= 0.0 && cumulative_threshold < 1.0,
                    "fis_filter: threshold must be in [0, 1)");
    const std::size_t n = report.normalized.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (report.normalized[a] != report.normalized[b])
            return report.normalized[a] > report.normalized[b];
        return a < b;
    });

    std::vector<bool> keep(n, true);
    double tail = 0.0;
    for (std::size_t i = n; i-- > 0;) {
        tail += report.normalized[order[i]];
        if (tail < cumulative_threshold && !report.important[order[i]])
            keep[order[i]] = false;
        else
            break;
    }
    return keep;
}

}  // namespace qtune
