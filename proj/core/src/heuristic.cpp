#include "cardsolver/heuristic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace cardsolver {

namespace {

// Keeps the qpsolve contract strict (it rejects dependent equality rows)
// while letting restricted instances with redundant rows through: solve on an
// independent row subset, then verify the dropped rows at the solution.
struct ReducedRows {
  std::vector<int> keep;
  std::vector<int> dropped;
};

ReducedRows independent_rows(const Eigen::MatrixXd& Aeq) {
  ReducedRows rr;
  const int m = static_cast<int>(Aeq.rows());
  if (m == 0) return rr;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Aeq.transpose());
  const int rk = static_cast<int>(qr.rank());
  std::vector<bool> kept(static_cast<std::size_t>(m), false);
  for (int j = 0; j < rk; ++j)
    kept[static_cast<std::size_t>(qr.colsPermutation().indices()[j])] = true;
  for (int r = 0; r < m; ++r)
    (kept[static_cast<std::size_t>(r)] ? rr.keep : rr.dropped).push_back(r);
  std::sort(rr.keep.begin(), rr.keep.end());
  return rr;
}

}  // namespace

WeightedSolution FitnessEvaluator::solve_restricted(const BinarySelection& b) const {
  const int n = inst_.n;
  WeightedSolution ws;
  ws.selection = b;
  ws.x = Eigen::VectorXd::Zero(n);
  ws.status = SolveStatus::Infeasible;
  ws.objective = kInfeasibleFitness;
  if (b.size() != n) throw DimensionMismatch("solve_restricted: selection length != n");

  const std::vector<int> sel = b.one_indices();
  const int d = static_cast<int>(sel.size());
  if (d == 0) return ws;

  QpProblem qp;
  qp.H.resize(d, d);
  qp.g.resize(d);
  qp.lo.resize(d);
  qp.hi.resize(d);
  for (int a = 0; a < d; ++a) {
    qp.g[a] = inst_.q[sel[static_cast<std::size_t>(a)]];
    qp.lo[a] = inst_.lower[sel[static_cast<std::size_t>(a)]];
    qp.hi[a] = inst_.upper[sel[static_cast<std::size_t>(a)]];
    for (int c = 0; c < d; ++c)
      qp.H(a, c) = inst_.Q(sel[static_cast<std::size_t>(a)], sel[static_cast<std::size_t>(c)]);
  }
  Eigen::MatrixXd Aall(inst_.num_linear(), d);
  for (int a = 0; a < d; ++a) Aall.col(a) = inst_.A.col(sel[static_cast<std::size_t>(a)]);

  ReducedRows rr = independent_rows(Aall);
  qp.Aeq.resize(static_cast<int>(rr.keep.size()), d);
  qp.beq.resize(static_cast<int>(rr.keep.size()));
  for (std::size_t i = 0; i < rr.keep.size(); ++i) {
    qp.Aeq.row(static_cast<int>(i)) = Aall.row(rr.keep[i]);
    qp.beq[static_cast<int>(i)] = inst_.c_a[rr.keep[i]];
  }

  QpResult r = solve_qp(qp);
  if (r.status != QpStatus::Optimal) return ws;
  for (int rd : rr.dropped) {
    if (std::abs(Aall.row(rd).dot(r.x) - inst_.c_a[rd]) > 1e-6 * (1.0 + std::abs(inst_.c_a[rd])))
      return ws;  // redundant row inconsistent with its right-hand side
  }

  for (int a = 0; a < d; ++a) ws.x[sel[static_cast<std::size_t>(a)]] = r.x[a];
  ws.objective = r.objective;
  ws.status = SolveStatus::Optimal;
  return ws;
}

double FitnessEvaluator::evaluate(const BinarySelection& b) {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(b.bits);
    if (it != cache_.end()) return it->second;
  }
  WeightedSolution ws = solve_restricted(b);
  const double f = (ws.status == SolveStatus::Optimal) ? ws.objective : kInfeasibleFitness;
  std::lock_guard<std::mutex> lock(mutex_);
  cache_.emplace(b.bits, f);
  return f;
}

double fitness(const ProblemInstance& inst, const BinarySelection& b) {
  FitnessEvaluator eval(inst);
  return eval.evaluate(b);
}

BinarySelection random_selection(int n, int k, Rng& rng) {
  if (k < 0 || k > n) throw InvalidBounds("random_selection: k out of range");
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  std::vector<int> ones(idx.begin(), idx.begin() + k);
  return BinarySelection::from_indices(n, ones, k);
}

BinarySelection crossover(const BinarySelection& father, const BinarySelection& mother, int k,
                          Rng& rng) {
  if (father.size() != mother.size()) throw LengthMismatch("crossover: parent lengths differ");
  if (father.popcount() != k || mother.popcount() != k)
    throw InvalidBounds("crossover: parents must have popcount k");

  const int n = father.size();
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(n), 0);
  std::vector<int> symdiff;
  int common = 0;
  for (int i = 0; i < n; ++i) {
    const bool f = father.bits[static_cast<std::size_t>(i)];
    const bool m = mother.bits[static_cast<std::size_t>(i)];
    if (f && m) {
      bits[static_cast<std::size_t>(i)] = 1;
      ++common;
    } else if (f != m) {
      symdiff.push_back(i);
    }
  }
  int need = k - common;
  for (int i = 0; i < need; ++i) {
    std::uniform_int_distribution<int> pick(i, static_cast<int>(symdiff.size()) - 1);
    std::swap(symdiff[static_cast<std::size_t>(i)], symdiff[static_cast<std::size_t>(pick(rng))]);
    bits[static_cast<std::size_t>(symdiff[static_cast<std::size_t>(i)])] = 1;
  }
  return BinarySelection::make(std::move(bits), k);
}

BinarySelection mutate(const BinarySelection& b, double prob, Rng& rng) {
  const int k = b.popcount();
  if (k == 0 || k == b.size()) return b;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) >= prob) return b;

  std::vector<int> ones, zeros;
  for (int i = 0; i < b.size(); ++i)
    (b.bits[static_cast<std::size_t>(i)] ? ones : zeros).push_back(i);
  std::uniform_int_distribution<int> pick1(0, static_cast<int>(ones.size()) - 1);
  std::uniform_int_distribution<int> pick0(0, static_cast<int>(zeros.size()) - 1);
  BinarySelection out = b;
  out.bits[static_cast<std::size_t>(ones[static_cast<std::size_t>(pick1(rng))])] = 0;
  out.bits[static_cast<std::size_t>(zeros[static_cast<std::size_t>(pick0(rng))])] = 1;
  return out;
}

Pool build_pool(const ProblemInstance& inst, const std::vector<BinarySelection>& relax_selections,
                const PoolConfig& cfg, FitnessEvaluator& eval) {
  Rng rng = make_rng(cfg.seed, "pool");
  std::vector<BinarySelection> candidates;
  for (const auto& s : relax_selections) {
    candidates.push_back(s);
    for (int p = 0; p < cfg.perturbations_per_relax; ++p)
      candidates.push_back(mutate(s, 1.0, rng));
  }
  const int k = inst.k();
  for (int i = 0; i < cfg.m_random; ++i) candidates.push_back(random_selection(inst.n, k, rng));

  Pool pool;
  std::set<std::vector<std::uint8_t>> seen;
  for (auto& c : candidates) {
    if (!seen.insert(c.bits).second) continue;
    pool.entries.push_back({c, eval.evaluate(c)});
  }
  const bool all_infeasible =
      std::all_of(pool.entries.begin(), pool.entries.end(),
                  [](const PoolEntry& e) { return !std::isfinite(e.fitness); });
  if (pool.entries.empty() || (all_infeasible && cfg.m_random == 0))
    throw EmptyPool("build_pool: no feasible candidates and no random fill");
  return pool;
}

Pool ga_select(const Pool& pool, double retain_fraction) {
  const std::size_t sz = pool.entries.size();
  std::size_t keep = static_cast<std::size_t>(
      std::ceil(retain_fraction * static_cast<double>(sz) - 1e-12));
  keep = std::max<std::size_t>(keep, sz >= 2 ? 2 : sz);
  keep = std::min(keep, sz);

  std::vector<std::size_t> order(sz);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pool.entries[a].fitness < pool.entries[b].fitness;
  });

  Pool out;
  out.generation = pool.generation;
  std::vector<std::size_t> kept(order.begin(), order.begin() + static_cast<long>(keep));
  std::sort(kept.begin(), kept.end());  // preserve insertion order
  for (std::size_t i : kept) out.entries.push_back(pool.entries[i]);
  return out;
}

bool spread_ok(const Pool& pool, double threshold) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& e : pool.entries) {
    if (!std::isfinite(e.fitness)) continue;
    lo = std::min(lo, e.fitness);
    hi = std::max(hi, e.fitness);
  }
  if (!std::isfinite(lo)) throw DegenerateSpread("spread_ok: no finite-fitness entries");
  if (lo <= 0.0) throw DegenerateSpread("spread_ok: min fitness <= 0");
  return (hi - lo) / lo <= threshold;
}

namespace {

const PoolEntry& best_entry(const Pool& pool) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < pool.entries.size(); ++i)
    if (pool.entries[i].fitness < pool.entries[best].fitness) best = i;
  return pool.entries[best];
}

}  // namespace

BinarySelection run_ga(const ProblemInstance& inst, Pool pool, const GaConfig& cfg, Rng& rng,
                       FitnessEvaluator& eval) {
  if (pool.entries.empty()) throw EmptyPool("run_ga: empty pool");
  const int k = inst.k();

  for (int gen = 0; gen < cfg.max_generations; ++gen) {
    pool = ga_select(pool, cfg.retain_fraction);
    if (cfg.best_log) cfg.best_log->push_back(best_entry(pool).fitness);

    bool ok;
    try {
      ok = spread_ok(pool, cfg.spread_threshold);
    } catch (const DegenerateSpread&) {
      ok = false;
    }
    if (ok) return best_entry(pool).selection;

    std::vector<std::size_t> finite;
    for (std::size_t i = 0; i < pool.entries.size(); ++i)
      if (std::isfinite(pool.entries[i].fitness)) finite.push_back(i);
    if (finite.size() < 2) break;

    std::uniform_int_distribution<std::size_t> pick(0, finite.size() - 1);
    std::size_t fa = finite[pick(rng)];
    std::size_t mo = fa;
    while (mo == fa) mo = finite[pick(rng)];

    BinarySelection child = crossover(pool.entries[fa].selection, pool.entries[mo].selection, k, rng);
    child = mutate(child, cfg.mutation_prob, rng);

    const bool dup = std::any_of(pool.entries.begin(), pool.entries.end(),
                                 [&](const PoolEntry& e) { return e.selection == child; });
    if (!dup) pool.entries.push_back({child, eval.evaluate(child)});
    ++pool.generation;
  }
  return best_entry(pool).selection;
}

BinarySelection run_vns(const ProblemInstance& inst, const BinarySelection& b0,
                        const VnsConfig& cfg, Rng& rng, FitnessEvaluator& eval) {
  if (cfg.max_non_improving < 1) throw InvalidBounds("run_vns: max_non_improving >= 1 required");
  const int k = b0.popcount();
  if (k == 0 || k == b0.size()) return b0;
  (void)inst;

  BinarySelection incumbent = b0;
  double best = eval.evaluate(incumbent);
  BinarySelection latest = incumbent;
  int non_improving = 0;

  // Chained proposals: a rejected proposal seeds the next swap.
  while (non_improving < cfg.max_non_improving) {
    BinarySelection cand = mutate(latest, 1.0, rng);
    const double f = eval.evaluate(cand);
    if (f < best) {
      incumbent = cand;
      best = f;
      non_improving = 0;
    } else {
      ++non_improving;
    }
    latest = cand;
  }
  return incumbent;
}

WeightedSolution solve_pipeline(const ProblemInstance& inst, const PoolConfig& pool_cfg,
                                const GaConfig& ga_cfg, const VnsConfig& vns_cfg,
                                const DualAscentParams& dual_params, double lambda_g) {
  const int k = inst.k();

  std::vector<BinarySelection> sels;
  try {
    sels.push_back(solve_line(inst, k).selection);
  } catch (const RelaxationInfeasible&) {
    // target unreachable even for the relaxation; heuristics may still try
  }
  sels.push_back(solve_dual(inst, dual_params).selection);
  sels.push_back(solve_augm(inst, lambda_g, dual_params).selection);

  return solve_pipeline(inst, sels, pool_cfg, ga_cfg, vns_cfg);
}

WeightedSolution solve_pipeline(const ProblemInstance& inst,
                                const std::vector<BinarySelection>& relax_selections,
                                const PoolConfig& pool_cfg, const GaConfig& ga_cfg,
                                const VnsConfig& vns_cfg) {
  const std::vector<BinarySelection>& sels = relax_selections;
  FitnessEvaluator eval(inst);
  Pool pool = build_pool(inst, sels, pool_cfg, eval);

  Rng ga_rng = make_rng(pool_cfg.seed, "ga");
  BinarySelection best = run_ga(inst, std::move(pool), ga_cfg, ga_rng, eval);

  Rng vns_rng = make_rng(vns_cfg.seed, "vns");
  BinarySelection refined = run_vns(inst, best, vns_cfg, vns_rng, eval);

  WeightedSolution ws = eval.solve_restricted(refined);
  if (ws.status != SolveStatus::Optimal) {
    // VNS never accepts a worse point, so this means nothing was feasible.
    throw PipelineInfeasible("solve_pipeline: no candidate selection is feasible");
  }
  return ws;
}

}  // namespace cardsolver
