#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "qtune/errors.hpp"

namespace qtune {

// ---------------------------------------------------------------------------
// Parameter spaces
// ---------------------------------------------------------------------------

enum class ParamGroup { Context, Plan, Stage };

enum class ParamKind { IntGrid, FloatGrid, Bool };

/// Semantic role of a parameter. The synthetic cost model and the runtime
/// simulator bind to dimensions by role rather than by position, so spaces
/// can be reshaped in workload files without touching the model.
enum class ParamRole {
    None,
    ExecutorCores,          // per-executor cores; total cores = cores * count
    ExecutorMemoryGb,       // per-executor memory
    ExecutorCount,
    ShuffleCompress,        // bool
    AdvisoryPartitionMb,    // target partition size for plan rules
    BroadcastThresholdMb,   // join build side below this broadcasts
    ShuffleHashThresholdMb, // join build side below this hash-joins
    ShufflePartitions,
};

struct ParamDef {
    std::string name;
    ParamKind kind = ParamKind::IntGrid;
    std::vector<double> values;  // allowed grid values, strictly increasing
    double default_value = 0.0;
    bool important = false;      // structural: never dropped by importance filtering
    ParamRole role = ParamRole::None;
};

/// Finite grid description of one parameter group.
struct ConfigSpace {
    ParamGroup group = ParamGroup::Context;
    std::string id;
    std::vector<ParamDef> dims;

    std::size_t dim_count() const { return dims.size(); }

    /// Index of the first dim with the given role, or npos.
    std::size_t find_role(ParamRole role) const {
        for (std::size_t i = 0; i < dims.size(); ++i)
            if (dims[i].role == role) return i;
        return npos;
    }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    void validate() const {
        for (const auto& d : dims) {
            detail::require(!d.values.empty(), "ConfigSpace: dim has no allowed values");
            for (std::size_t i = 1; i < d.values.size(); ++i)
                detail::require(d.values[i - 1] < d.values[i],
                                "ConfigSpace: dim values must be strictly increasing");
            detail::require(
                std::find(d.values.begin(), d.values.end(), d.default_value) != d.values.end(),
                "ConfigSpace: default not in allowed values");
        }
    }
};

/// A point in one parameter group's grid.
struct ConfigVector {
    std::string space_id;
    std::vector<double> coords;

    bool operator==(const ConfigVector& other) const {
        return space_id == other.space_id && coords == other.coords;
    }
};

inline void validate_against(const ConfigVector& v, const ConfigSpace& space) {
    detail::require(v.space_id == space.id, "ConfigVector: wrong space");
    detail::require(v.coords.size() == space.dims.size(), "ConfigVector: dimension mismatch");
    for (std::size_t i = 0; i < v.coords.size(); ++i) {
        const auto& vals = space.dims[i].values;
        detail::require(std::find(vals.begin(), vals.end(), v.coords[i]) != vals.end(),
                        "ConfigVector: coordinate not in grid");
    }
}

inline ConfigVector default_config(const ConfigSpace& space) {
    ConfigVector v;
    v.space_id = space.id;
    v.coords.reserve(space.dims.size());
    for (const auto& d : space.dims) v.coords.push_back(d.default_value);
    return v;
}

// ---------------------------------------------------------------------------
// Objectives and solutions
// ---------------------------------------------------------------------------

/// k-dimensional minimize-all objective value. k = 2 in the synthetic family:
/// (analytical latency in seconds, cost in abstract cost units).
using ObjectiveVector = std::vector<double>;

inline bool all_finite(const ObjectiveVector& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

/// One full configuration with its predicted query-level objectives. All
/// per-subquery lists share a single theta_c.
struct Solution {
    ObjectiveVector objectives;
    ConfigVector theta_c;
    std::vector<ConfigVector> theta_p;  // one per subquery
    std::vector<ConfigVector> theta_s;  // one per subquery

    std::size_t subq_count() const { return theta_p.size(); }
};

/// Nondominated collection, canonically sorted ascending by objective 1,
/// then objective 2 (lexicographic for higher k). For k = 2 this makes
/// objective 1 strictly increasing and objective 2 strictly decreasing.
struct ParetoSet {
    std::vector<Solution> entries;

    bool empty() const { return entries.empty(); }
    std::size_t size() const { return entries.size(); }
};

/// Lexicographic comparison of objective vectors.
inline bool lex_less(const ObjectiveVector& a, const ObjectiveVector& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace qtune
