#pragma once

#include <cstddef>
#include <vector>

#include "qtune/cost_model.hpp"
#include "qtune/dag.hpp"
#include "qtune/errors.hpp"
#include "qtune/pareto.hpp"
#include "qtune/solver.hpp"

namespace qtune {

/// Number of full configurations in the sampled candidate universe:
/// |theta_c| * n_p^m. Guards callers against runaway enumerations.
inline double brute_force_size(std::size_t n_thetac, std::size_t n_pairs, std::size_t m) {
    double total = static_cast<double>(n_thetac);
    for (std::size_t i = 0; i < m; ++i) total *= static_cast<double>(n_pairs);
    return total;
}

/// Exhaustive reference front over the sampled candidate sets: every theta_c
/// candidate combined with every per-subquery assignment of plan/stage
/// pairs, evaluated through predict_query and filtered. Deliberately knows
/// nothing about clustering, effective sets, or DAG aggregation.
inline ParetoSet brute_force_front(const QueryDAG& dag, const CostModel& model,
                                   const NonDecision& nd,
                                   const std::vector<ConfigVector>& theta_c_candidates,
                                   const std::vector<PairSample>& pairs,
                                   double max_combinations = 5e6) {
    dag.validate();
    detail::require(!theta_c_candidates.empty() && !pairs.empty(),
                    "brute_force_front: empty candidate sets");
    const std::size_t m = dag.size();
    detail::require(brute_force_size(theta_c_candidates.size(), pairs.size(), m) <=
                        max_combinations,
                    "brute_force_front: candidate universe too large to enumerate");

    std::vector<Solution> pool;
    std::vector<std::size_t> choice(m, 0);
    for (const auto& theta_c : theta_c_candidates) {
        // Per-subquery objective table for this theta_c.
        std::vector<std::vector<ObjectiveVector>> table(m);
        for (std::size_t q = 0; q < m; ++q) {
            table[q].reserve(pairs.size());
            for (const auto& pair : pairs)
                table[q].push_back(model.predict_subq(q, theta_c, pair.theta_p, pair.theta_s, nd));
        }

        std::fill(choice.begin(), choice.end(), std::size_t{0});
        while (true) {
            Solution s;
            s.objectives.assign(2, 0.0);
            for (std::size_t q = 0; q < m; ++q) {
                s.objectives[0] += table[q][choice[q]][0];
                s.objectives[1] += table[q][choice[q]][1];
            }
            s.theta_c = theta_c;
            s.theta_p.reserve(m);
            s.theta_s.reserve(m);
            for (std::size_t q = 0; q < m; ++q) {
                s.theta_p.push_back(pairs[choice[q]].theta_p);
                s.theta_s.push_back(pairs[choice[q]].theta_s);
            }
            pool.push_back(std::move(s));

            std::size_t digit = m;
            bool done = true;
            while (digit-- > 0) {
                if (++choice[digit] < pairs.size()) {
                    done = false;
                    break;
                }
                choice[digit] = 0;
            }
            if (done) break;
        }
        // Keep the pool bounded: filtering is idempotent and order-safe.
        if (pool.size() > (1u << 20)) pool = pareto_filter(pool).entries;
    }
    return pareto_filter(pool);
}

}  // namespace qtune
