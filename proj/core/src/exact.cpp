#include "cardsolver/exact.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <queue>

#include "cardsolver/relax.hpp"

namespace cardsolver {

long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long long r = 1;
  for (int i = 1; i <= k; ++i) {
    if (r > (std::numeric_limits<long long>::max() / (n - k + i))) return std::numeric_limits<long long>::max();
    r = r * (n - k + i) / i;
  }
  return r;
}

namespace {

constexpr long long kBruteForceGuard = 1000000;

// Visit index combinations in ascending order; the first optimum found is the
// lexicographically-lowest tie by this enumeration.
template <typename F>
void for_each_combination(int n, int k, F&& visit) {
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    visit(idx);
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

}  // namespace

ExactResult brute_force(const ProblemInstance& inst) {
  const int n = inst.n;
  ExactResult res;
  FitnessEvaluator eval(inst);

  if (inst.num_cardinality() == 1) {
    const int k = inst.k();
    if (binomial(n, k) > kBruteForceGuard)
      throw TooLarge("brute_force: C(n,k) exceeds enumeration guard");
    double best = std::numeric_limits<double>::infinity();
    BinarySelection best_sel;
    for_each_combination(n, k, [&](const std::vector<int>& ones) {
      BinarySelection b = BinarySelection::from_indices(n, ones, k);
      ++res.nodes_explored;
      const double f = eval.evaluate(b);
      if (f < best) {
        best = f;
        best_sel = b;
      }
    });
    if (std::isfinite(best)) {
      res.solution = eval.solve_restricted(best_sel);
      res.proved_optimal = true;
    } else {
      res.solution.status = SolveStatus::Infeasible;
      res.proved_optimal = true;  // proved: no feasible selection exists
    }
    return res;
  }

  // General B: enumerate all bit-vectors under a size guard.
  if (n > 20) throw TooLarge("brute_force: general B limited to n <= 20");
  double best = std::numeric_limits<double>::infinity();
  BinarySelection best_sel;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) bits[static_cast<std::size_t>(i)] = (mask >> i) & 1u;
    BinarySelection b(std::move(bits));
    if (!inst.selection_feasible(b)) continue;
    ++res.nodes_explored;
    const double f = eval.evaluate(b);
    if (f < best) {
      best = f;
      best_sel = b;
    }
  }
  if (std::isfinite(best)) {
    res.solution = eval.solve_restricted(best_sel);
    res.proved_optimal = true;
  } else {
    res.solution.status = SolveStatus::Infeasible;
    res.proved_optimal = true;
  }
  return res;
}

namespace {

struct BnbNode {
  std::vector<std::int8_t> fix;  // 0 free, +1 fixed one, -1 fixed zero
  Eigen::VectorXd b_r;           // relaxation b at this node
  double bound = 0.0;
  long long id = 0;  // deterministic tie key for best-first ordering
};

struct NodeOrder {
  bool operator()(const BnbNode& a, const BnbNode& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

BinarySelection selection_under_fixes(const Eigen::VectorXd& b_r,
                                      const std::vector<std::int8_t>& fix, int k) {
  Eigen::VectorXd scores = b_r;
  for (int i = 0; i < static_cast<int>(fix.size()); ++i) {
    if (fix[static_cast<std::size_t>(i)] > 0) scores[i] = 1e9;
    if (fix[static_cast<std::size_t>(i)] < 0) scores[i] = -1e9;
  }
  return discretize_topk(scores, k);
}

}  // namespace

ExactResult branch_and_bound(const ProblemInstance& inst, long long node_budget,
                             double time_budget_s) {
  const int n = inst.n;
  const int k = inst.k();
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  ExactResult res;
  FitnessEvaluator eval(inst);
  double incumbent = std::numeric_limits<double>::infinity();
  BinarySelection incumbent_sel;

  auto relax_node = [&](const std::vector<std::int8_t>& fix,
                        Eigen::VectorXd* b_r, double* bound) -> bool {
    LineOptions opts;
    opts.b_bounds.resize(static_cast<std::size_t>(n), {0.0, 1.0});
    for (int i = 0; i < n; ++i) {
      if (fix[static_cast<std::size_t>(i)] > 0) opts.b_bounds[static_cast<std::size_t>(i)] = {1.0, 1.0};
      if (fix[static_cast<std::size_t>(i)] < 0) opts.b_bounds[static_cast<std::size_t>(i)] = {0.0, 0.0};
    }
    try {
      RelaxationOutcome r = solve_line(inst, k, opts);
      *b_r = r.continuous_b;
      *bound = r.bound;
      return true;
    } catch (const RelaxationInfeasible&) {
      return false;
    }
  };

  auto try_candidate = [&](const BinarySelection& sel) {
    const double f = eval.evaluate(sel);
    if (f < incumbent) {
      incumbent = f;
      incumbent_sel = sel;
    }
  };

  std::priority_queue<BnbNode, std::vector<BnbNode>, NodeOrder> open;
  long long next_id = 0;

  BnbNode root;
  root.fix.assign(static_cast<std::size_t>(n), 0);
  ++res.nodes_explored;
  if (relax_node(root.fix, &root.b_r, &root.bound)) {
    try_candidate(selection_under_fixes(root.b_r, root.fix, k));
    root.id = next_id++;
    open.push(std::move(root));
  }

  bool exhausted = true;
  while (!open.empty()) {
    if (res.nodes_explored >= node_budget) {
      exhausted = false;
      break;
    }
    if (time_budget_s > 0.0 && elapsed() > time_budget_s) {
      res.wall_budget_hit = true;
      exhausted = false;
      break;
    }
    BnbNode node = open.top();
    open.pop();
    if (node.bound >= incumbent - 1e-9) continue;  // pruned

    // Branch on the most fractional relaxed b; ties by lowest index.
    int branch = -1;
    double best_frac = -1.0;
    for (int i = 0; i < n; ++i) {
      if (node.fix[static_cast<std::size_t>(i)] != 0) continue;
      const double v = std::min(std::max(node.b_r[i], 0.0), 1.0);
      const double frac = 0.5 - std::abs(v - 0.5);
      if (frac > best_frac + 1e-15) {
        best_frac = frac;
        branch = i;
      }
    }
    if (branch < 0) continue;  // fully fixed

    for (int value = 1; value >= 0; --value) {
      BnbNode child;
      child.fix = node.fix;
      child.fix[static_cast<std::size_t>(branch)] = (value == 1) ? 1 : -1;

      int fixed1 = 0, free_cnt = 0;
      for (auto f : child.fix) {
        fixed1 += (f > 0);
        free_cnt += (f == 0);
      }
      if (fixed1 > k || fixed1 + free_cnt < k) continue;

      ++res.nodes_explored;
      if (!relax_node(child.fix, &child.b_r, &child.bound)) continue;
      try_candidate(selection_under_fixes(child.b_r, child.fix, k));
      if (child.bound >= incumbent - 1e-9) continue;
      if (free_cnt > 1) {
        child.id = next_id++;
        open.push(std::move(child));
      }
    }
  }

  res.proved_optimal = exhausted && std::isfinite(incumbent);
  if (std::isfinite(incumbent)) {
    res.solution = eval.solve_restricted(incumbent_sel);
  } else {
    res.solution.status = SolveStatus::Infeasible;
    res.proved_optimal = exhausted;
  }
  return res;
}

}  // namespace cardsolver
