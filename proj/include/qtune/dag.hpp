#pragma once

#include <cstddef>
#include <vector>

#include "qtune/errors.hpp"

namespace qtune {

enum class SubqRole { Scan, Join, Other };

/// One compile-time subquery: a group of operators that maps to one runtime
/// query stage. `children` lists the subqueries feeding into this one; for
/// joins the first child is the build side.
struct SubQ {
    std::size_t id = 0;
    SubqRole role = SubqRole::Scan;
    std::vector<std::size_t> children;
};

/// The workload: m subqueries in topological order (children always precede
/// their parents in the list).
struct QueryDAG {
    std::vector<SubQ> subqs;

    std::size_t size() const { return subqs.size(); }

    void validate() const {
        detail::require(!subqs.empty(), "QueryDAG: must have at least one subquery");
        for (std::size_t i = 0; i < subqs.size(); ++i) {
            detail::require(subqs[i].id == i, "QueryDAG: ids must be 0..m-1 in order");
            for (std::size_t c : subqs[i].children)
                detail::require(c < i, "QueryDAG: children must precede parents (acyclic)");
        }
    }

    bool has_join() const {
        for (const auto& s : subqs)
            if (s.role == SubqRole::Join) return true;
        return false;
    }
};

}  // namespace qtune
