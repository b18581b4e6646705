#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <vector>

#include "cardsolver/model.hpp"
#include "cardsolver/qp.hpp"
#include "cardsolver/relax.hpp"
#include "cardsolver/rng.hpp"

namespace cardsolver {

struct PoolConfig {
  int m_random = 100;
  int perturbations_per_relax = 10;
  std::uint64_t seed = 0;
};

struct GaConfig {
  double retain_fraction = 0.5;   // p
  double mutation_prob = 0.1;     // m
  double spread_threshold = 0.01; // l
  int max_generations = 200;
  // Per-generation best fitness, appended after each selection step.
  std::vector<double>* best_log = nullptr;
};

struct VnsConfig {
  int max_non_improving = 100;
  std::uint64_t seed = 0;
};

struct PoolEntry {
  BinarySelection selection;
  double fitness = std::numeric_limits<double>::infinity();
};

struct Pool {
  std::vector<PoolEntry> entries;
  int generation = 0;
};

constexpr double kInfeasibleFitness = std::numeric_limits<double>::infinity();

/// Restricted-QP fitness evaluation with memoization keyed by the bit-vector.
/// Thread-safe for concurrent evaluate() calls.
class FitnessEvaluator {
 public:
  explicit FitnessEvaluator(const ProblemInstance& inst) : inst_(inst) {}

  double evaluate(const BinarySelection& b);

  /// Full restricted solve (weights included), bypassing the cache.
  WeightedSolution solve_restricted(const BinarySelection& b) const;

  const ProblemInstance& instance() const { return inst_; }

 private:
  const ProblemInstance& inst_;
  std::map<std::vector<std::uint8_t>, double> cache_;
  std::mutex mutex_;
};

BinarySelection random_selection(int n, int k, Rng& rng);

double fitness(const ProblemInstance& inst, const BinarySelection& b);

Pool build_pool(const ProblemInstance& inst, const std::vector<BinarySelection>& relax_selections,
                const PoolConfig& cfg, FitnessEvaluator& eval);

Pool ga_select(const Pool& pool, double retain_fraction);

/// Relative spread (max-min)/min over finite-fitness entries. Throws
/// DegenerateSpread when min <= 0 or nothing is finite.
bool spread_ok(const Pool& pool, double threshold);

BinarySelection crossover(const BinarySelection& father, const BinarySelection& mother, int k,
                          Rng& rng);

BinarySelection mutate(const BinarySelection& b, double prob, Rng& rng);

BinarySelection run_ga(const ProblemInstance& inst, Pool pool, const GaConfig& cfg, Rng& rng,
                       FitnessEvaluator& eval);

BinarySelection run_vns(const ProblemInstance& inst, const BinarySelection& b0,
                        const VnsConfig& cfg, Rng& rng, FitnessEvaluator& eval);

/// Relaxations -> pool -> GA -> VNS -> final restricted solve.
WeightedSolution solve_pipeline(const ProblemInstance& inst, const PoolConfig& pool_cfg,
                                const GaConfig& ga_cfg, const VnsConfig& vns_cfg,
                                const DualAscentParams& dual_params, double lambda_g);

/// Same pipeline with the relaxation selections supplied by the caller,
/// for when they were already computed elsewhere.
WeightedSolution solve_pipeline(const ProblemInstance& inst,
                                const std::vector<BinarySelection>& relax_selections,
                                const PoolConfig& pool_cfg, const GaConfig& ga_cfg,
                                const VnsConfig& vns_cfg);

}  // namespace cardsolver
