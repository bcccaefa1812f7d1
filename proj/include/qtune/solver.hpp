#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "qtune/cost_model.hpp"
#include "qtune/dag.hpp"
#include "qtune/pareto.hpp"
#include "qtune/rng.hpp"
#include "qtune/sampling.hpp"
#include "qtune/types.hpp"

namespace qtune {

// ---------------------------------------------------------------------------
// Weights
// ---------------------------------------------------------------------------

/// Nonnegative objective weights summing to 1.
struct WeightVector {
    std::vector<double> w;

    void validate() const {
        double sum = 0.0;
        for (double x : w) {
            detail::require(x >= 0.0, "WeightVector: negative weight");
            sum += x;
        }
        detail::require(std::fabs(sum - 1.0) < 1e-9, "WeightVector: weights must sum to 1");
    }
};

/// n weight vectors for k = 2 with w1 evenly spaced over {0, 1/(n-1), ..., 1}.
inline std::vector<WeightVector> evenly_spaced_weights(std::size_t n) {
    detail::require(n >= 2, "evenly_spaced_weights: need at least 2 vectors");
    std::vector<WeightVector> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double w1 = static_cast<double>(i) / static_cast<double>(n - 1);
        out.push_back({{w1, 1.0 - w1}});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Effective set: the interchange format between subquery tuning and DAG
// aggregation
// ---------------------------------------------------------------------------

/// One jointly sampled plan+stage configuration.
struct PairSample {
    ConfigVector theta_p;
    ConfigVector theta_s;
};

/// One kept (theta_p, theta_s) choice for a (theta_c, subquery) cell, stored
/// as an index into the shared pair-sample table.
struct SubqEntry {
    std::uint32_t pair_idx = 0;
    ObjectiveVector obj;
};

/// Per theta_c candidate, per subquery: the nondominated (theta_p, theta_s,
/// objectives) choices, in canonical order.
struct EffectiveSet {
    std::vector<ConfigVector> theta_c;
    std::vector<std::vector<std::vector<SubqEntry>>> entries;  // [theta_c][subq] -> front
    std::shared_ptr<const std::vector<PairSample>> pairs;

    std::size_t find(const ConfigVector& c) const {
        for (std::size_t i = 0; i < theta_c.size(); ++i)
            if (theta_c[i].coords == c.coords) return i;
        return ConfigSpace::npos;
    }
};

namespace detail {

inline std::vector<SubqEntry> filter_entries(std::vector<SubqEntry> raw) {
    std::vector<ObjectiveVector> objs;
    objs.reserve(raw.size());
    for (const auto& e : raw) objs.push_back(e.obj);
    std::vector<SubqEntry> kept;
    for (std::size_t idx : filter_indices(objs)) kept.push_back(std::move(raw[idx]));
    return kept;
}

inline std::vector<SubqEntry> tune_one(const CostModel& model, std::size_t subq,
                                       const ConfigVector& theta_c,
                                       const std::vector<PairSample>& pairs,
                                       const NonDecision& nd) {
    std::vector<SubqEntry> raw;
    raw.reserve(pairs.size());
    for (std::uint32_t j = 0; j < pairs.size(); ++j)
        raw.push_back(
            {j, model.predict_subq(subq, theta_c, pairs[j].theta_p, pairs[j].theta_s, nd)});
    return filter_entries(std::move(raw));
}

inline std::vector<SubqEntry> repredict(const CostModel& model, std::size_t subq,
                                        const ConfigVector& theta_c,
                                        const std::vector<SubqEntry>& source,
                                        const std::vector<PairSample>& pairs,
                                        const NonDecision& nd) {
    std::vector<SubqEntry> raw;
    raw.reserve(source.size());
    for (const auto& e : source)
        raw.push_back({e.pair_idx, model.predict_subq(subq, theta_c, pairs[e.pair_idx].theta_p,
                                                      pairs[e.pair_idx].theta_s, nd)});
    return filter_entries(std::move(raw));
}

}  // namespace detail

/// Step 1 of the solver: for each theta_c representative and each subquery,
/// evaluate every joint plan+stage sample and keep the nondominated set.
/// Only subquery-level Pareto optimal choices can contribute to the
/// query-level front under a fixed theta_c, so nothing is lost here.
inline EffectiveSet subq_tune(const QueryDAG& dag, const CostModel& model,
                              const std::vector<ConfigVector>& theta_c_reps,
                              std::shared_ptr<const std::vector<PairSample>> pairs,
                              const NonDecision& nd) {
    detail::require(!theta_c_reps.empty() && !pairs->empty(), "subq_tune: empty candidate lists");
    EffectiveSet eff;
    eff.theta_c = theta_c_reps;
    eff.pairs = std::move(pairs);
    eff.entries.resize(theta_c_reps.size());
    for (std::size_t c = 0; c < theta_c_reps.size(); ++c) {
        eff.entries[c].resize(dag.size());
        for (std::size_t q = 0; q < dag.size(); ++q)
            eff.entries[c][q] = detail::tune_one(model, q, eff.theta_c[c], *eff.pairs, nd);
    }
    return eff;
}

/// Step 2: propagate the representatives' optimal plan/stage choices to all
/// members of their clusters. Objectives are re-predicted under each member's
/// own theta_c and the per-cell lists re-filtered for dominance.
inline EffectiveSet assign_opt_p(const EffectiveSet& tuned, const ClusterModel& cluster,
                                 const std::vector<ConfigVector>& all_candidates,
                                 const QueryDAG& dag, const CostModel& model,
                                 const NonDecision& nd) {
    detail::require(cluster.assignment.size() == all_candidates.size(),
                    "assign_opt_p: unassigned candidate");
    EffectiveSet out;
    out.theta_c = all_candidates;
    out.pairs = tuned.pairs;
    out.entries.resize(all_candidates.size());
    for (std::size_t i = 0; i < all_candidates.size(); ++i) {
        const std::size_t c = cluster.assignment[i];
        detail::require(c < tuned.theta_c.size(), "assign_opt_p: representative not tuned");
        out.entries[i].resize(dag.size());
        const bool is_rep = cluster.representative[c] == i;
        for (std::size_t q = 0; q < dag.size(); ++q) {
            if (is_rep)
                out.entries[i][q] = tuned.entries[c][q];
            else
                out.entries[i][q] = detail::repredict(model, q, all_candidates[i],
                                                      tuned.entries[c][q], *out.pairs, nd);
        }
    }
    return out;
}

/// Step 3: extend the effective set with crossover-generated theta_c
/// candidates. New candidates inherit the plan/stage choices of the nearest
/// representative and are then processed as in assign_opt_p; candidates
/// already present are dropped.
inline EffectiveSet enrich_and_extend(EffectiveSet eff, const std::vector<ConfigVector>& new_thetac,
                                      const ClusterModel& cluster,
                                      const std::vector<ConfigVector>& clustered_candidates,
                                      const QueryDAG& dag, const CostModel& model,
                                      const NonDecision& nd) {
    for (const auto& cand : new_thetac) {
        if (eff.find(cand) != ConfigSpace::npos) continue;
        const std::size_t c = cluster.nearest_cluster(cand, clustered_candidates);
        const std::size_t rep_idx = cluster.representative[c];
        const std::size_t rep_key = eff.find(clustered_candidates[rep_idx]);
        detail::require(rep_key != ConfigSpace::npos, "enrich_and_extend: representative missing");
        std::vector<std::vector<SubqEntry>> per_subq(dag.size());
        for (std::size_t q = 0; q < dag.size(); ++q)
            per_subq[q] =
                detail::repredict(model, q, cand, eff.entries[rep_key][q], *eff.pairs, nd);
        eff.theta_c.push_back(cand);
        eff.entries.push_back(std::move(per_subq));
    }
    return eff;
}

// ---------------------------------------------------------------------------
// DAG aggregation (per fixed theta_c)
// ---------------------------------------------------------------------------

/// Per-subquery objective lists for one theta_c, in subquery order.
using SubqFronts = std::vector<std::vector<ObjectiveVector>>;

/// A query-level point composed from one entry per subquery.
struct AggPoint {
    ObjectiveVector obj;
    std::vector<std::uint32_t> choice;  // entry index per subquery
};

namespace detail {

/// Left-to-right fold of the chosen per-subquery objectives over [lo, hi).
/// Every query-level value in the solver is produced by this fold so that
/// all aggregation routes and the brute-force oracle agree exactly.
inline void extend_fold(ObjectiveVector& acc, const SubqFronts& fronts, std::size_t lo,
                        std::size_t hi, std::span<const std::uint32_t> choice) {
    for (std::size_t q = lo; q < hi; ++q) {
        const ObjectiveVector& o = fronts[q][choice[q - lo]];
        for (std::size_t v = 0; v < acc.size(); ++v) acc[v] += o[v];
    }
}

struct MergeCand {
    double o0, o1;
    std::uint32_t ia, ib;
};

inline void compact_candidates(std::vector<MergeCand>& buf) {
    std::sort(buf.begin(), buf.end(), [](const MergeCand& x, const MergeCand& y) {
        if (x.o0 != y.o0) return x.o0 < y.o0;
        if (x.o1 != y.o1) return x.o1 < y.o1;
        if (x.ia != y.ia) return x.ia < y.ia;
        return x.ib < y.ib;
    });
    std::vector<MergeCand> kept;
    double best_o1 = std::numeric_limits<double>::infinity();
    const MergeCand* prev = nullptr;
    for (const auto& c : buf) {
        if (prev && c.o0 == prev->o0 && c.o1 == prev->o1) continue;
        if (c.o1 < best_o1) {
            kept.push_back(c);
            best_o1 = c.o1;
        }
        prev = &c;
    }
    buf = std::move(kept);
}

/// Minkowski-sum merge of two partial fronts followed by nondominated
/// filtering (k = 2 fast path). Objectives of every candidate pair are
/// refolded canonically, not taken as sums of partial sums.
inline std::vector<AggPoint> merge_points(const std::vector<AggPoint>& left,
                                          const std::vector<AggPoint>& right,
                                          const SubqFronts& fronts, std::size_t mid,
                                          std::size_t hi) {
    constexpr std::size_t kBufferCap = 1u << 21;
    std::vector<MergeCand> buf;
    buf.reserve(std::min(left.size() * right.size() + 1, kBufferCap + right.size()));
    for (std::uint32_t ia = 0; ia < left.size(); ++ia) {
        for (std::uint32_t ib = 0; ib < right.size(); ++ib) {
            ObjectiveVector acc = left[ia].obj;
            extend_fold(acc, fronts, mid, hi, right[ib].choice);
            buf.push_back({acc[0], acc[1], ia, ib});
        }
        if (buf.size() > kBufferCap) compact_candidates(buf);
    }
    compact_candidates(buf);

    std::vector<AggPoint> out;
    out.reserve(buf.size());
    for (const auto& c : buf) {
        AggPoint p;
        p.obj = {c.o0, c.o1};
        p.choice = left[c.ia].choice;
        p.choice.insert(p.choice.end(), right[c.ib].choice.begin(), right[c.ib].choice.end());
        out.push_back(std::move(p));
    }
    return out;
}

inline std::vector<AggPoint> dnc_range(const SubqFronts& fronts, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) {
        std::vector<AggPoint> out;
        out.reserve(fronts[lo].size());
        for (std::uint32_t j = 0; j < fronts[lo].size(); ++j)
            out.push_back({fronts[lo][j], {j}});
        return out;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    auto left = dnc_range(fronts, lo, mid);
    auto right = dnc_range(fronts, mid, hi);
    return merge_points(left, right, fronts, mid, hi);
}

inline void check_fronts(const SubqFronts& fronts) {
    require(!fronts.empty(), "aggregation: no subqueries");
    for (const auto& f : fronts) require(!f.empty(), "aggregation: empty subquery front");
}

}  // namespace detail

/// HMOOC1: divide and conquer. Recursively halves the subquery list and
/// merges partial fronts by the sum combination of their entries followed by
/// nondominated filtering. Produces the full Pareto front of the m-fold sum
/// composition of the inputs.
inline std::vector<AggPoint> agg_divide_conquer(const SubqFronts& fronts) {
    detail::check_fronts(fronts);
    detail::require(fronts[0][0].size() == 2, "agg_divide_conquer: k = 2 only");
    return detail::dnc_range(fronts, 0, fronts.size());
}

/// HMOOC2: weighted-sum approximation. Per weight vector, each subquery
/// independently picks the entry minimizing the weighted normalized
/// objectives (ties to the lowest index in canonical order); the chosen raw
/// objectives are summed and dominated sums filtered out across weights.
///
/// Normalization scope: objectives are scaled by the range of the composed
/// objective space (the sum of per-subquery ranges), which is a single
/// affine transform per objective. This keeps the weights scale-free while
/// the per-subquery picks still minimize one common linear functional of
/// the composed point, so every returned point is Pareto optimal in the
/// full composition universe. Normalizing each subquery's front by its own
/// range instead would rescale the weights differently per subquery and can
/// produce dominated compositions.
inline std::vector<AggPoint> agg_ws(const SubqFronts& fronts,
                                    const std::vector<WeightVector>& weights) {
    detail::check_fronts(fronts);
    detail::require(!weights.empty(), "agg_ws: need at least one weight vector");
    const std::size_t m = fronts.size();
    const std::size_t k = fronts[0][0].size();

    // Range of the composed objective space per objective.
    ObjectiveVector scale(k, 0.0);
    for (std::size_t q = 0; q < m; ++q) {
        ObjectiveVector lo = fronts[q][0], hi = fronts[q][0];
        for (const auto& o : fronts[q])
            for (std::size_t v = 0; v < k; ++v) {
                lo[v] = std::min(lo[v], o[v]);
                hi[v] = std::max(hi[v], o[v]);
            }
        for (std::size_t v = 0; v < k; ++v) scale[v] += hi[v] - lo[v];
    }

    std::vector<AggPoint> picks;
    picks.reserve(weights.size());
    for (const auto& wv : weights) {
        wv.validate();
        ObjectiveVector scaled_w(k);
        for (std::size_t v = 0; v < k; ++v)
            scaled_w[v] = scale[v] > 0.0 ? wv.w[v] / scale[v] : 0.0;

        AggPoint p;
        p.choice.resize(m);
        for (std::size_t q = 0; q < m; ++q) {
            double best = std::numeric_limits<double>::infinity();
            std::uint32_t best_j = 0;
            for (std::uint32_t j = 0; j < fronts[q].size(); ++j) {
                double value = 0.0;
                for (std::size_t v = 0; v < k; ++v) value += scaled_w[v] * fronts[q][j][v];
                if (value < best) {
                    best = value;
                    best_j = j;
                }
            }
            p.choice[q] = best_j;
        }
        p.obj.assign(k, 0.0);
        detail::extend_fold(p.obj, fronts, 0, m, p.choice);
        picks.push_back(std::move(p));
    }

    std::vector<ObjectiveVector> objs;
    objs.reserve(picks.size());
    for (const auto& p : picks) objs.push_back(p.obj);
    std::vector<AggPoint> out;
    for (std::size_t idx : detail::filter_indices(objs)) out.push_back(std::move(picks[idx]));
    return out;
}

/// HMOOC3: boundary approximation. For each objective, composes the
/// query-level extreme point from each subquery's entry that minimizes that
/// objective (ties: then minimize the remaining objectives, then lowest
/// index). Returns at most k points, all of which lie on the full front.
inline std::vector<AggPoint> agg_boundary(const SubqFronts& fronts) {
    detail::check_fronts(fronts);
    const std::size_t k = fronts[0][0].size();
    detail::require(k == 2, "agg_boundary: k = 2 only");
    const std::size_t m = fronts.size();

    std::vector<AggPoint> extremes;
    for (std::size_t objective = 0; objective < k; ++objective) {
        AggPoint p;
        p.choice.resize(m);
        for (std::size_t q = 0; q < m; ++q) {
            std::uint32_t best_j = 0;
            for (std::uint32_t j = 1; j < fronts[q].size(); ++j) {
                const auto& a = fronts[q][j];
                const auto& b = fronts[q][best_j];
                if (a[objective] < b[objective]) {
                    best_j = j;
                } else if (a[objective] == b[objective]) {
                    for (std::size_t v = 0; v < k; ++v) {
                        if (v == objective) continue;
                        if (a[v] < b[v]) best_j = j;
                        if (a[v] != b[v]) break;
                    }
                }
            }
            p.choice[q] = best_j;
        }
        p.obj.assign(k, 0.0);
        detail::extend_fold(p.obj, fronts, 0, m, p.choice);
        extremes.push_back(std::move(p));
    }

    std::vector<ObjectiveVector> objs;
    for (const auto& p : extremes) objs.push_back(p.obj);
    std::vector<AggPoint> out;
    for (std::size_t idx : detail::filter_indices(objs)) out.push_back(std::move(extremes[idx]));
    return out;
}

// ---------------------------------------------------------------------------
// Full solver pipeline
// ---------------------------------------------------------------------------

enum class Method { HMOOC1, HMOOC2, HMOOC3 };

enum class SamplerKind { Random, Lhs, AdaptiveGrid };

struct FisConfig {
    bool enabled = true;
    std::size_t n_samples = 200;
    double threshold = 0.05;
};

struct SolverConfig {
    SamplerKind sampler = SamplerKind::AdaptiveGrid;
    bool auto_budget = false;
    BudgetPolicy budget_policy{};
    SampleBudget budget{54, 243};
    std::size_t cluster_count = 10;  // capped at the candidate count
    bool crossover = true;
    std::size_t crossover_location = 3;
    std::size_t weight_count = 11;  // HMOOC2 weight vectors
    FisConfig fis{};
    std::uint64_t seed = 1;
};

/// Uniform importance report for when FIS probing is disabled.
inline FisReport uniform_fis(const ConfigSpace& space) {
    FisReport r;
    for (const auto& d : space.dims) {
        r.names.push_back(d.name);
        r.important.push_back(d.important);
        r.scores.push_back(1.0);
        r.normalized.push_back(1.0 / static_cast<double>(space.dims.size()));
    }
    return r;
}

/// Joint plan+stage space: plan dims followed by stage dims, sampled as one
/// product vector per subquery.
inline ConfigSpace join_plan_stage(const ConfigSpace& plan, const ConfigSpace& stage) {
    ConfigSpace joint;
    joint.group = ParamGroup::Plan;
    joint.id = plan.id + "+" + stage.id;
    joint.dims = plan.dims;
    joint.dims.insert(joint.dims.end(), stage.dims.begin(), stage.dims.end());
    return joint;
}

namespace detail {

inline std::vector<ConfigVector> run_sampler(SamplerKind kind, const ConfigSpace& space,
                                             const FisReport& fis, const std::vector<bool>& keep,
                                             std::size_t n, std::uint64_t seed) {
    switch (kind) {
        case SamplerKind::Random:
            return sample_random(space, keep, n, seed);
        case SamplerKind::Lhs:
            return sample_lhs(space, keep, n, seed);
        case SamplerKind::AdaptiveGrid:
        default:
            return sample_adaptive_grid(space, fis, keep, n);
    }
}

inline std::vector<ConfigVector> dedup_configs(const std::vector<ConfigVector>& in) {
    std::vector<ConfigVector> out;
    for (const auto& c : in) {
        bool seen = false;
        for (const auto& o : out)
            if (o.coords == c.coords) {
                seen = true;
                break;
            }
        if (!seen) out.push_back(c);
    }
    return out;
}

inline std::vector<PairSample> split_pairs(const std::vector<ConfigVector>& joint,
                                           const ConfigSpace& plan, const ConfigSpace& stage) {
    std::vector<PairSample> out;
    out.reserve(joint.size());
    for (const auto& j : joint) {
        PairSample p;
        p.theta_p.space_id = plan.id;
        p.theta_p.coords.assign(j.coords.begin(),
                                j.coords.begin() + static_cast<long>(plan.dim_count()));
        p.theta_s.space_id = stage.id;
        p.theta_s.coords.assign(j.coords.begin() + static_cast<long>(plan.dim_count()),
                                j.coords.end());
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace detail

/// Everything the solver derives before aggregation; exposed so the CLI
/// oracle and the tests can brute-force the exact same candidate universe.
struct SolveInputs {
    std::vector<ConfigVector> theta_c_candidates;
    std::shared_ptr<const std::vector<PairSample>> pairs;
    ClusterModel cluster;
    EffectiveSet effective;
};

inline SolveInputs prepare_solve_inputs(const QueryDAG& dag, const CostModel& model,
                                        const NonDecision& nd, const ConfigSpace& context,
                                        const ConfigSpace& plan, const ConfigSpace& stage,
                                        const SolverConfig& cfg) {
    dag.validate();
    nd.validate(dag.size());
    const ConfigSpace joint = join_plan_stage(plan, stage);

    FisReport fis_c = uniform_fis(context);
    FisReport fis_ps = uniform_fis(joint);
    std::vector<bool> keep_c = detail::full_mask(context);
    std::vector<bool> keep_ps = detail::full_mask(joint);
    if (cfg.fis.enabled) {
        fis_c = permutation_fis(model, context, context, plan, stage, cfg.fis.n_samples,
                                derive_seed(cfg.seed, 1), nd);
        fis_ps = permutation_fis(model, joint, context, plan, stage, cfg.fis.n_samples,
                                 derive_seed(cfg.seed, 2), nd);
        keep_c = fis_filter(fis_c, cfg.fis.threshold);
        keep_ps = fis_filter(fis_ps, cfg.fis.threshold);
    }

    SampleBudget budget = cfg.budget;
    if (cfg.auto_budget) {
        std::vector<ConfigVector> def_p(dag.size(), default_config(plan));
        std::vector<ConfigVector> def_s(dag.size(), default_config(stage));
        const double default_latency =
            model.predict_query(default_config(context), def_p, def_s, nd)[0];
        budget = choose_budget(default_latency, cfg.budget_policy);
    }

    SolveInputs in;
    in.theta_c_candidates = detail::dedup_configs(detail::run_sampler(
        cfg.sampler, context, fis_c, keep_c, budget.n_c, derive_seed(cfg.seed, 3)));
    in.pairs = std::make_shared<const std::vector<PairSample>>(detail::split_pairs(
        detail::run_sampler(cfg.sampler, joint, fis_ps, keep_ps, budget.n_p,
                            derive_seed(cfg.seed, 4)),
        plan, stage));

    const std::size_t C = std::min(cfg.cluster_count, in.theta_c_candidates.size());
    in.cluster = cluster_thetac(in.theta_c_candidates, std::max<std::size_t>(C, 1),
                                derive_seed(cfg.seed, 5));

    std::vector<ConfigVector> reps;
    reps.reserve(in.cluster.cluster_count);
    for (std::size_t r : in.cluster.representative) reps.push_back(in.theta_c_candidates[r]);

    // subq_tune keys the set by representative, in cluster order;
    // assign_opt_p re-keys it by the full candidate list.
    EffectiveSet tuned = subq_tune(dag, model, reps, in.pairs, nd);
    in.effective = assign_opt_p(tuned, in.cluster, in.theta_c_candidates, dag, model, nd);

    if (cfg.crossover && in.theta_c_candidates.size() > 1 &&
        context.dim_count() > 1) {
        std::size_t location = std::min(cfg.crossover_location, context.dim_count() - 1);
        auto enriched = crossover_enrich(in.theta_c_candidates, location, derive_seed(cfg.seed, 6));
        in.effective = enrich_and_extend(std::move(in.effective), enriched, in.cluster,
                                         in.theta_c_candidates, dag, model, nd);
    }
    return in;
}

namespace detail {

inline std::vector<AggPoint> aggregate_one(Method method, const SubqFronts& fronts,
                                           std::size_t weight_count) {
    switch (method) {
        case Method::HMOOC1:
            return agg_divide_conquer(fronts);
        case Method::HMOOC2:
            return agg_ws(fronts, evenly_spaced_weights(weight_count));
        case Method::HMOOC3:
        default:
            return agg_boundary(fronts);
    }
}

}  // namespace detail

/// Aggregation stage on an already-prepared effective set: per-theta_c DAG
/// aggregation with the chosen method, union across theta_c, final filter.
inline ParetoSet solve_from_inputs(const SolveInputs& in, const QueryDAG& dag, Method method,
                                   std::size_t weight_count) {
    std::vector<Solution> pool;
    for (std::size_t c = 0; c < in.effective.theta_c.size(); ++c) {
        SubqFronts fronts(dag.size());
        for (std::size_t q = 0; q < dag.size(); ++q)
            for (const auto& e : in.effective.entries[c][q]) fronts[q].push_back(e.obj);
        for (auto& point : detail::aggregate_one(method, fronts, weight_count)) {
            Solution s;
            s.objectives = std::move(point.obj);
            s.theta_c = in.effective.theta_c[c];
            s.theta_p.reserve(dag.size());
            s.theta_s.reserve(dag.size());
            for (std::size_t q = 0; q < dag.size(); ++q) {
                const auto& entry = in.effective.entries[c][q][point.choice[q]];
                s.theta_p.push_back((*in.pairs)[entry.pair_idx].theta_p);
                s.theta_s.push_back((*in.pairs)[entry.pair_idx].theta_s);
            }
            pool.push_back(std::move(s));
        }
    }
    return pareto_filter(pool);
}

/// Full compile-time pipeline: sampling, subquery tuning under the shared
/// theta_c constraint, cluster propagation, crossover enrichment, per-theta_c
/// DAG aggregation with the chosen method, and the cross-theta_c union.
inline ParetoSet solve(const QueryDAG& dag, const CostModel& model, const NonDecision& nd,
                       Method method, const ConfigSpace& context, const ConfigSpace& plan,
                       const ConfigSpace& stage, const SolverConfig& cfg) {
    SolveInputs in = prepare_solve_inputs(dag, model, nd, context, plan, stage, cfg);
    return solve_from_inputs(in, dag, method, cfg.weight_count);
}

// ---------------------------------------------------------------------------
// WUN recommendation
// ---------------------------------------------------------------------------

/// Weighted-Utopia-nearest pick: the front is min-max normalized (so the
/// Utopia point maps to the origin) and the entry minimizing
/// sqrt(sum_i (w_i * p_i)^2) is returned; ties go to the lowest objective-1
/// entry.
inline const Solution& wun_recommend(const ParetoSet& front, const WeightVector& weights) {
    detail::require(!front.empty(), "wun_recommend: empty front");
    weights.validate();
    auto norm = normalize(front);
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < norm.size(); ++i) {
        double sum = 0.0;
        for (std::size_t v = 0; v < weights.w.size(); ++v) {
            double t = weights.w[v] * norm[i][v];
            sum += t * t;
        }
        double d = std::sqrt(sum);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return front.entries[best];
}

// ---------------------------------------------------------------------------
// Weighted-sum baselines (MO-WS / SO-FW)
// ---------------------------------------------------------------------------

struct WsBaselineResult {
    std::vector<Solution> picks;  // one per weight vector, duplicates possible
    std::size_t distinct_count = 0;
    std::vector<ObjectiveVector> sample_objectives;  // the evaluated universe
};

/// Classic weighted sum over the full joint space: each global sample draws
/// one theta_c plus m independent plan/stage pairs; per weight vector the
/// sample minimizing the weighted normalized query objectives is returned.
/// SO-FW is this with a single weight vector.
inline WsBaselineResult baseline_ws(const QueryDAG& dag, const CostModel& model,
                                    const NonDecision& nd,
                                    const std::vector<WeightVector>& weights,
                                    std::size_t global_samples, const ConfigSpace& context,
                                    const ConfigSpace& plan, const ConfigSpace& stage,
                                    std::uint64_t seed) {
    dag.validate();
    detail::require(!weights.empty() && global_samples >= 1, "baseline_ws: empty inputs");
    Rng rng(derive_seed(seed, 0xBA5E));

    auto draw = [&](const ConfigSpace& space) {
        ConfigVector v = default_config(space);
        for (std::size_t d = 0; d < space.dims.size(); ++d)
            v.coords[d] = space.dims[d].values[rng.next_index(space.dims[d].values.size())];
        return v;
    };

    std::vector<Solution> samples;
    samples.reserve(global_samples);
    for (std::size_t s = 0; s < global_samples; ++s) {
        Solution sol;
        sol.theta_c = draw(context);
        sol.theta_p.reserve(dag.size());
        sol.theta_s.reserve(dag.size());
        for (std::size_t q = 0; q < dag.size(); ++q) {
            sol.theta_p.push_back(draw(plan));
            sol.theta_s.push_back(draw(stage));
        }
        sol.objectives = model.predict_query(sol.theta_c, sol.theta_p, sol.theta_s, nd);
        samples.push_back(std::move(sol));
    }

    std::vector<ObjectiveVector> objs;
    objs.reserve(samples.size());
    for (const auto& s : samples) objs.push_back(s.objectives);
    auto norm = detail::normalize_objectives(objs);

    WsBaselineResult result;
    for (const auto& wv : weights) {
        wv.validate();
        std::size_t best = 0;
        double best_value = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < samples.size(); ++i) {
            double value = 0.0;
            for (std::size_t v = 0; v < wv.w.size(); ++v) value += wv.w[v] * norm[i][v];
            if (value < best_value ||
                (value == best_value && lex_less(objs[i], objs[best]))) {
                best_value = value;
                best = i;
            }
        }
        result.picks.push_back(samples[best]);
    }

    std::vector<ObjectiveVector> distinct;
    for (const auto& p : result.picks)
        if (std::find(distinct.begin(), distinct.end(), p.objectives) == distinct.end())
            distinct.push_back(p.objectives);
    result.distinct_count = distinct.size();
    result.sample_objectives = std::move(objs);
    return result;
}

}  // namespace qtune
