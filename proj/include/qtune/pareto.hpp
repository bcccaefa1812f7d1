#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "qtune/errors.hpp"
#include "qtune/types.hpp"

namespace qtune {

// ---------------------------------------------------------------------------
// Dominance
// ---------------------------------------------------------------------------

/// Pareto dominance for minimization: a dominates b iff a <= b componentwise
/// and a < b in at least one component. Points with equal objectives do not
/// dominate each other.
///
/// Comparisons are exact; the synthetic model family is built on rational
/// grids so no epsilon is involved anywhere in the Pareto machinery.
inline bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
    detail::require(a.size() == b.size(), "dominates: dimension mismatch");
    bool strict = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) return false;
        if (a[i] < b[i]) strict = true;
    }
    return strict;
}

// ---------------------------------------------------------------------------
// Nondominated filtering
// ---------------------------------------------------------------------------

namespace detail {

/// Returns the indices (into `points`) of the nondominated subset, in
/// canonical order. Exactly equal objective vectors are deduplicated keeping
/// the entry that appears first in input order.
///
/// k = 2 runs the classic sort-and-sweep; general k falls back to pairwise
/// checks against the growing front.
inline std::vector<std::size_t> filter_indices(const std::vector<ObjectiveVector>& points) {
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (points.empty()) return order;

    const std::size_t k = points[0].size();
    for (const auto& p : points)
        require(p.size() == k, "pareto_filter: dimension mismatch");

    // Sort lexicographically; ties broken by input index so dedup keeps the
    // first occurrence.
    std::sort(order.begin(), order.end(), [&](std::size_t ia, std::size_t ib) {
        if (points[ia] != points[ib]) return lex_less(points[ia], points[ib]);
        return ia < ib;
    });

    std::vector<std::size_t> kept;
    if (k == 2) {
        // After lex sorting, a point survives iff its second objective is
        // strictly below everything kept so far.
        double best_second = std::numeric_limits<double>::infinity();
        const ObjectiveVector* prev = nullptr;
        for (std::size_t idx : order) {
            const auto& p = points[idx];
            if (prev && p == *prev) continue;  // duplicate objective vector
            if (p[1] < best_second) {
                kept.push_back(idx);
                best_second = p[1];
                prev = &p;
            } else {
                prev = &p;
            }
        }
        // Sweep direction already yields canonical order.
        return kept;
    }

    // General k: keep lex-first of duplicates, then pairwise dominance.
    std::vector<std::size_t> uniq;
    for (std::size_t idx : order) {
        if (!uniq.empty() && points[uniq.back()] == points[idx]) continue;
        uniq.push_back(idx);
    }
    for (std::size_t i = 0; i < uniq.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < uniq.size() && !dominated; ++j)
            if (j != i && dominates(points[uniq[j]], points[uniq[i]])) dominated = true;
        if (!dominated) kept.push_back(uniq[i]);
    }
    return kept;
}

}  // namespace detail

/// Nondominated subset of `points` as a canonical ParetoSet.
/// Empty input yields an empty set.
inline ParetoSet pareto_filter(const std::vector<Solution>& points) {
    std::vector<ObjectiveVector> objs;
    objs.reserve(points.size());
    for (const auto& s : points) objs.push_back(s.objectives);
    ParetoSet out;
    for (std::size_t idx : detail::filter_indices(objs)) out.entries.push_back(points[idx]);
    return out;
}

// ---------------------------------------------------------------------------
// Hypervolume (k = 2, sweep line)
// ---------------------------------------------------------------------------

/// Area of the union of rectangles [point, ref] over a 2-D front. Points not
/// strictly inside the reference box are clipped to contribute zero. Empty
/// set has hypervolume 0.
inline double hypervolume(const ParetoSet& set, const ObjectiveVector& ref) {
    detail::require(ref.size() == 2, "hypervolume: only k = 2 is supported");
    detail::require(all_finite(ref), "hypervolume: non-finite reference point");
    if (set.empty()) return 0.0;

    std::vector<ObjectiveVector> pts;
    for (const auto& s : set.entries) {
        detail::require(s.objectives.size() == 2, "hypervolume: only k = 2 is supported");
        if (s.objectives[0] < ref[0] && s.objectives[1] < ref[1]) pts.push_back(s.objectives);
    }
    if (pts.empty()) return 0.0;
    std::sort(pts.begin(), pts.end(), lex_less);

    // Entries of a front sorted by objective 1 have strictly decreasing
    // objective 2; duplicates cannot occur after filtering.
    double area = (ref[0] - pts[0][0]) * (ref[1] - pts[0][1]);
    for (std::size_t i = 1; i < pts.size(); ++i)
        area += (ref[0] - pts[i][0]) * (pts[i - 1][1] - pts[i][1]);
    return area;
}

// ---------------------------------------------------------------------------
// Utopia / nadir and normalization
// ---------------------------------------------------------------------------

/// Componentwise (min, max) over the set.
inline std::pair<ObjectiveVector, ObjectiveVector> utopia_nadir(const ParetoSet& set) {
    detail::require(!set.empty(), "empty Pareto set");
    ObjectiveVector utopia = set.entries[0].objectives;
    ObjectiveVector nadir = set.entries[0].objectives;
    for (const auto& s : set.entries) {
        for (std::size_t i = 0; i < utopia.size(); ++i) {
            utopia[i] = std::min(utopia[i], s.objectives[i]);
            nadir[i] = std::max(nadir[i], s.objectives[i]);
        }
    }
    return {utopia, nadir};
}

namespace detail {

/// Min-max scaling of raw objective vectors to [0, 1]; a zero-range
/// objective maps to 0 for all points.
inline std::vector<ObjectiveVector> normalize_objectives(const std::vector<ObjectiveVector>& objs) {
    require(!objs.empty(), "normalize: empty set");
    const std::size_t k = objs[0].size();
    ObjectiveVector lo = objs[0], hi = objs[0];
    for (const auto& o : objs)
        for (std::size_t i = 0; i < k; ++i) {
            lo[i] = std::min(lo[i], o[i]);
            hi[i] = std::max(hi[i], o[i]);
        }
    std::vector<ObjectiveVector> out;
    out.reserve(objs.size());
    for (const auto& o : objs) {
        ObjectiveVector n(k);
        for (std::size_t i = 0; i < k; ++i) {
            const double range = hi[i] - lo[i];
            n[i] = range > 0.0 ? (o[i] - lo[i]) / range : 0.0;
        }
        out.push_back(std::move(n));
    }
    return out;
}

}  // namespace detail

/// Per-objective min-max scaling of a front to [0, 1].
inline std::vector<ObjectiveVector> normalize(const ParetoSet& set) {
    std::vector<ObjectiveVector> objs;
    objs.reserve(set.entries.size());
    for (const auto& s : set.entries) objs.push_back(s.objectives);
    return detail::normalize_objectives(objs);
}

}  // namespace qtune
