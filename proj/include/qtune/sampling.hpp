#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <vector>

#include "qtune/cost_model.hpp"
#include "qtune/errors.hpp"
#include "qtune/rng.hpp"
#include "qtune/types.hpp"

namespace qtune {

/// Sample counts per stage of the solver: n_c context candidates and n_p
/// joint plan+stage candidates per subquery.
struct SampleBudget {
    std::size_t n_c = 1;
    std::size_t n_p = 1;
};

/// Tiered budget rule: queries predicted to run longer than the threshold
/// get the larger budget.
struct BudgetPolicy {
    double latency_threshold_s = 10.0;
    SampleBudget over{54, 81};
    SampleBudget under{27, 54};
};

/// Budget for a query given its predicted latency under the default
/// configuration. The threshold is a strict "over": exactly 10 s takes the
/// low tier.
inline SampleBudget choose_budget(double predicted_default_latency,
                                  const BudgetPolicy& policy = {}) {
    detail::require(predicted_default_latency >= 0.0, "choose_budget: negative latency");
    return predicted_default_latency > policy.latency_threshold_s ? policy.over : policy.under;
}

namespace detail {

inline std::vector<bool> full_mask(const ConfigSpace& space) {
    return std::vector<bool>(space.dims.size(), true);
}

inline std::size_t snap_index(double u, std::size_t n_values) {
    auto idx = static_cast<std::size_t>(u * static_cast<double>(n_values));
    return std::min(idx, n_values - 1);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Random and Latin hypercube sampling
// ---------------------------------------------------------------------------

/// n i.i.d. uniform draws over the grid values of each kept dim; dims with
/// keep[d] == false are pinned to their defaults.
inline std::vector<ConfigVector> sample_random(const ConfigSpace& space,
                                               const std::vector<bool>& keep, std::size_t n,
                                               std::uint64_t seed) {
    detail::require(n >= 1, "sample_random: n must be >= 1");
    detail::require(keep.size() == space.dims.size(), "sample_random: mask size mismatch");
    Rng rng(derive_seed(seed, 0x5A));
    std::vector<ConfigVector> out(n, default_config(space));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t d = 0; d < space.dims.size(); ++d)
            if (keep[d]) {
                const auto& vals = space.dims[d].values;
                out[i].coords[d] = vals[rng.next_index(vals.size())];
            }
    return out;
}

inline std::vector<ConfigVector> sample_random(const ConfigSpace& space, std::size_t n,
                                               std::uint64_t seed) {
    return sample_random(space, detail::full_mask(space), n, seed);
}

/// Latin hypercube sampling: per kept dim the n samples hit each of n equal
/// strata exactly once; the stratum position is then snapped onto the grid.
/// With n equal to a dim's grid size this yields a permutation of its values.
inline std::vector<ConfigVector> sample_lhs(const ConfigSpace& space,
                                            const std::vector<bool>& keep, std::size_t n,
                                            std::uint64_t seed) {
    detail::require(n >= 1, "sample_lhs: n must be >= 1");
    detail::require(keep.size() == space.dims.size(), "sample_lhs: mask size mismatch");
    Rng rng(derive_seed(seed, 0x1845));
    std::vector<ConfigVector> out(n, default_config(space));
    for (std::size_t d = 0; d < space.dims.size(); ++d) {
        if (!keep[d]) continue;
        const auto& vals = space.dims[d].values;
        auto perm = rng.permutation(n);
        for (std::size_t i = 0; i < n; ++i) {
            double u = (static_cast<double>(perm[i]) + rng.next_double()) / static_cast<double>(n);
            out[i].coords[d] = vals[detail::snap_index(u, vals.size())];
        }
    }
    return out;
}

inline std::vector<ConfigVector> sample_lhs(const ConfigSpace& space, std::size_t n,
                                            std::uint64_t seed) {
    return sample_lhs(space, detail::full_mask(space), n, seed);
}

// ---------------------------------------------------------------------------
// Adaptive grid search
// ---------------------------------------------------------------------------

namespace detail {

/// Nested chain of grid-index subsets for one dim: {default}, then the
/// endpoint farthest from the default, then the other endpoint, then repeated
/// bisection of the widest index gap. Each prefix of the chain is the value
/// subset used when the dim is allotted that many values, so a lower
/// allotment is always a subset of a higher one.
inline std::vector<std::size_t> value_chain(const ParamDef& dim) {
    const std::size_t n = dim.values.size();
    std::size_t def_idx = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (dim.values[i] == dim.default_value) def_idx = i;

    std::vector<std::size_t> chain{def_idx};
    auto contains = [&](std::size_t idx) {
        return std::find(chain.begin(), chain.end(), idx) != chain.end();
    };
    const std::size_t far_end = (def_idx < n - 1 - def_idx) ? n - 1 : 0;
    if (!contains(far_end)) chain.push_back(far_end);
    const std::size_t near_end = far_end == 0 ? n - 1 : 0;
    if (!contains(near_end)) chain.push_back(near_end);

    while (chain.size() < n) {
        auto sorted = chain;
        std::sort(sorted.begin(), sorted.end());
        std::size_t best_gap = 0, best_mid = 0;
        for (std::size_t i = 1; i < sorted.size(); ++i) {
            std::size_t gap = sorted[i] - sorted[i - 1];
            if (gap > best_gap) {
                best_gap = gap;
                best_mid = sorted[i - 1] + gap / 2;
            }
        }
        chain.push_back(best_mid);
    }
    return chain;
}

}  // namespace detail

/// FIS-guided grid: dims are allotted distinct values one at a time, always
/// to the dim with the highest normalized importance per already-allotted
/// value (ties to the lower dim index), stopping at the first allotment that
/// would push the full grid past `max_points`. Because the allotment
/// sequence does not depend on the budget and per-dim value subsets grow
/// along a fixed chain, the sample set at a lower budget is a subset of the
/// set at any higher budget.
///
/// Dims dropped by `keep` are pinned to their defaults. A budget of 1
/// returns exactly the all-defaults point.
inline std::vector<ConfigVector> sample_adaptive_grid(const ConfigSpace& space,
                                                      const FisReport& fis,
                                                      const std::vector<bool>& keep,
                                                      std::size_t max_points) {
    detail::require(max_points >= 1, "sample_adaptive_grid: budget must be >= 1");
    detail::require(fis.normalized.size() == space.dims.size(),
                    "sample_adaptive_grid: FIS report does not match space");
    detail::require(keep.size() == space.dims.size(),
                    "sample_adaptive_grid: mask size mismatch");

    const std::size_t nd = space.dims.size();
    std::vector<std::size_t> allot(nd, 1);
    std::size_t total = 1;
    while (true) {
        double best_score = -1.0;
        std::size_t best_dim = ConfigSpace::npos;
        for (std::size_t d = 0; d < nd; ++d) {
            if (!keep[d] || allot[d] >= space.dims[d].values.size()) continue;
            double score = fis.normalized[d] / static_cast<double>(allot[d]);
            if (score > best_score) {
                best_score = score;
                best_dim = d;
            }
        }
        if (best_dim == ConfigSpace::npos) break;
        std::size_t grown = total / allot[best_dim] * (allot[best_dim] + 1);
        if (grown > max_points) break;
        ++allot[best_dim];
        total = grown;
    }

    std::vector<std::vector<double>> dim_values(nd);
    for (std::size_t d = 0; d < nd; ++d) {
        auto chain = detail::value_chain(space.dims[d]);
        chain.resize(allot[d]);
        std::sort(chain.begin(), chain.end());
        for (std::size_t idx : chain) dim_values[d].push_back(space.dims[d].values[idx]);
    }

    std::vector<ConfigVector> out;
    out.reserve(total);
    ConfigVector current = default_config(space);
    std::vector<std::size_t> cursor(nd, 0);
    while (true) {
        for (std::size_t d = 0; d < nd; ++d) current.coords[d] = dim_values[d][cursor[d]];
        out.push_back(current);
        std::size_t d = nd;
        while (d-- > 0) {
            if (++cursor[d] < dim_values[d].size()) break;
            cursor[d] = 0;
            if (d == 0) return out;
        }
        if (nd == 0) return out;
    }
}

inline std::vector<ConfigVector> sample_adaptive_grid(const ConfigSpace& space,
                                                      const FisReport& fis,
                                                      std::size_t max_points) {
    return sample_adaptive_grid(space, fis, fis_filter(fis, 0.0), max_points);
}

// ---------------------------------------------------------------------------
// Context-candidate clustering (k-medoids)
// ---------------------------------------------------------------------------

/// Partition of theta_c candidates into C groups, each represented by one of
/// its own members, so every representative is an executable grid point.
struct ClusterModel {
    std::size_t cluster_count = 0;
    std::vector<std::size_t> representative;  // candidate index per cluster
    std::vector<std::size_t> assignment;      // candidate index -> cluster index
    // min-max scaling of candidate coordinates used for distances
    std::vector<double> scale_lo, scale_range;

    std::size_t nearest_cluster(const ConfigVector& v,
                                const std::vector<ConfigVector>& candidates) const {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < representative.size(); ++c) {
            double d = distance(v, candidates[representative[c]]);
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        return best;
    }

    double distance(const ConfigVector& a, const ConfigVector& b) const {
        double sum = 0.0;
        for (std::size_t i = 0; i < a.coords.size(); ++i) {
            double range = scale_range[i];
            double da = range > 0 ? (a.coords[i] - scale_lo[i]) / range : 0.0;
            double db = range > 0 ? (b.coords[i] - scale_lo[i]) / range : 0.0;
            sum += (da - db) * (da - db);
        }
        return std::sqrt(sum);
    }
};

/// k-medoids over min-max-normalized coordinates with Euclidean distance and
/// a fixed iteration cap. Deterministic per seed. Duplicate candidates are
/// allowed; C greater than the candidate count is an error.
inline ClusterModel cluster_thetac(const std::vector<ConfigVector>& candidates, std::size_t C,
                                   std::uint64_t seed) {
    detail::require(C >= 1, "cluster_thetac: C must be >= 1");
    detail::require(C <= candidates.size(), "cluster_thetac: C exceeds candidate count");

    ClusterModel model;
    model.cluster_count = C;
    const std::size_t n = candidates.size();
    const std::size_t dims = candidates[0].coords.size();

    model.scale_lo.assign(dims, std::numeric_limits<double>::infinity());
    std::vector<double> hi(dims, -std::numeric_limits<double>::infinity());
    for (const auto& c : candidates)
        for (std::size_t i = 0; i < dims; ++i) {
            model.scale_lo[i] = std::min(model.scale_lo[i], c.coords[i]);
            hi[i] = std::max(hi[i], c.coords[i]);
        }
    model.scale_range.resize(dims);
    for (std::size_t i = 0; i < dims; ++i) model.scale_range[i] = hi[i] - model.scale_lo[i];

    if (C == n) {
        model.representative.resize(n);
        model.assignment.resize(n);
        std::iota(model.representative.begin(), model.representative.end(), std::size_t{0});
        std::iota(model.assignment.begin(), model.assignment.end(), std::size_t{0});
        return model;
    }

    // Greedy farthest-point seeding from a seeded start.
    Rng rng(derive_seed(seed, 0xC1));
    std::vector<std::size_t> medoids{rng.next_index(n)};
    while (medoids.size() < C) {
        std::size_t farthest = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            double d = std::numeric_limits<double>::infinity();
            for (std::size_t mIdx : medoids)
                d = std::min(d, model.distance(candidates[i], candidates[mIdx]));
            if (d > far_d) {
                far_d = d;
                farthest = i;
            }
        }
        medoids.push_back(farthest);
    }

    std::vector<std::size_t> assign(n, 0);
    constexpr int kMaxIterations = 50;
    for (int iter = 0; iter < kMaxIterations; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < C; ++c) {
                double d = model.distance(candidates[i], candidates[medoids[c]]);
                if (d < best_d) {
                    best_d = d;
                    assign[i] = c;
                }
            }
        }
        bool changed = false;
        for (std::size_t c = 0; c < C; ++c) {
            double best_total = std::numeric_limits<double>::infinity();
            std::size_t best_member = medoids[c];
            for (std::size_t i = 0; i < n; ++i) {
                if (assign[i] != c) continue;
                double total = 0.0;
                for (std::size_t j = 0; j < n; ++j)
                    if (assign[j] == c) total += model.distance(candidates[i], candidates[j]);
                if (total < best_total) {
                    best_total = total;
                    best_member = i;
                }
            }
            if (best_member != medoids[c]) {
                medoids[c] = best_member;
                changed = true;
            }
        }
        if (!changed) break;
    }

    for (std::size_t i = 0; i < n; ++i) {
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < C; ++c) {
            double d = model.distance(candidates[i], candidates[medoids[c]]);
            if (d < best_d) {
                best_d = d;
                assign[i] = c;
            }
        }
    }
    model.representative = std::move(medoids);
    model.assignment = std::move(assign);
    return model;
}

// ---------------------------------------------------------------------------
// theta_c crossover enrichment
// ---------------------------------------------------------------------------

/// Cartesian-product crossover: each candidate splits at `location` into a
/// prefix and a suffix; the output is every distinct prefix combined with
/// every distinct suffix, deduplicated, and is always a superset of the
/// input. `location` 0 draws a seeded random split in [1, d-1].
inline std::vector<ConfigVector> crossover_enrich(const std::vector<ConfigVector>& candidates,
                                                  std::size_t location, std::uint64_t seed) {
    if (candidates.empty()) return {};
    const std::size_t d = candidates[0].coords.size();
    if (location == 0) {
        Rng rng(derive_seed(seed, 0xC505));
        location = 1 + rng.next_index(d - 1);
    }
    detail::require(location >= 1 && location < d, "crossover_enrich: bad location");

    std::vector<std::vector<double>> prefixes, suffixes;
    auto push_unique = [](std::vector<std::vector<double>>& pool, std::vector<double> part) {
        if (std::find(pool.begin(), pool.end(), part) == pool.end()) pool.push_back(std::move(part));
    };
    for (const auto& c : candidates) {
        push_unique(prefixes, {c.coords.begin(), c.coords.begin() + static_cast<long>(location)});
        push_unique(suffixes, {c.coords.begin() + static_cast<long>(location), c.coords.end()});
    }

    std::vector<ConfigVector> out;
    out.reserve(prefixes.size() * suffixes.size());
    std::set<std::vector<double>> seen;
    for (const auto& p : prefixes)
        for (const auto& s : suffixes) {
            ConfigVector v;
            v.space_id = candidates[0].space_id;
            v.coords = p;
            v.coords.insert(v.coords.end(), s.begin(), s.end());
            if (seen.insert(v.coords).second) out.push_back(std::move(v));
        }
    return out;
}

}  // namespace qtune
