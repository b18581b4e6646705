#pragma once

#include <cstdint>

#include "cardsolver/heuristic.hpp"
#include "cardsolver/model.hpp"

namespace cardsolver {

struct ExactResult {
  WeightedSolution solution;
  bool proved_optimal = false;
  long long nodes_explored = 0;
  bool wall_budget_hit = false;
};

/// Enumerates every cardinality-k selection; ties by lowest lexicographic
/// bit-vector. Guarded by C(n,k) <= 1e6 (throws TooLarge).
ExactResult brute_force(const ProblemInstance& inst);

/// Best-first search branching on b_i, bounded by the Line relaxation of the
/// partially fixed instance. proved_optimal only when the tree is exhausted
/// within the node and wall-clock budgets.
ExactResult branch_and_bound(const ProblemInstance& inst, long long node_budget,
                             double time_budget_s);

/// C(n,k) with saturation at 2^63-1.
long long binomial(int n, int k);

}  // namespace cardsolver
