#include "cardsolver/relax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cardsolver {

namespace {

// Selection coefficients c = B'lam_b + L lam_l - U lam_u; b_i = 1 is
// attractive where c_i is most negative.
Eigen::VectorXd selection_coefficients(const ProblemInstance& inst, const DualVariables& lam) {
  Eigen::VectorXd c = inst.B.transpose() * lam.lam_b;
  c += inst.lower.cwiseProduct(lam.lam_l);
  c -= inst.upper.cwiseProduct(lam.lam_u);
  return c;
}

// Feasible selection maximizing the given scores. Single-row B reduces to
// top-k; multi-row B is filled greedily row by row, ties by lowest index.
BinarySelection select_by_scores(const ProblemInstance& inst, const Eigen::VectorXd& scores) {
  if (inst.num_cardinality() == 1) return discretize_topk(scores, inst.k());

  std::vector<std::uint8_t> bits(static_cast<std::size_t>(inst.n), 0);
  for (int r = 0; r < inst.num_cardinality(); ++r) {
    long long have = 0;
    for (int i = 0; i < inst.n; ++i)
      if (bits[static_cast<std::size_t>(i)]) have += static_cast<long long>(std::llround(inst.B(r, i)));
    std::vector<int> order(static_cast<std::size_t>(inst.n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return scores[a] > scores[b]; });
    for (int i : order) {
      if (have >= inst.c_b[r]) break;
      if (bits[static_cast<std::size_t>(i)] || inst.B(r, i) < 0.5) continue;
      bits[static_cast<std::size_t>(i)] = 1;
      have += static_cast<long long>(std::llround(inst.B(r, i)));
    }
  }
  return BinarySelection(std::move(bits));
}

// Value of the inner minimization over b restricted to at most k ones:
// the k most negative coefficients, each clamped at zero.
double selection_term(const ProblemInstance& inst, const Eigen::VectorXd& c,
                      Eigen::VectorXd* inner_b = nullptr) {
  BinarySelection sel = select_by_scores(inst, -c);
  double v = 0.0;
  if (inner_b) inner_b->setZero(inst.n);
  for (int i : sel.one_indices()) {
    if (c[i] < 0.0) {
      v += c[i];
      if (inner_b) (*inner_b)[i] = 1.0;
    }
  }
  return v;
}

}  // namespace

DualVariables DualVariables::zeros(const ProblemInstance& inst) {
  DualVariables lam;
  lam.lam_a = Eigen::VectorXd::Zero(inst.num_linear());
  lam.lam_b = Eigen::VectorXd::Zero(inst.num_cardinality());
  lam.lam_l = Eigen::VectorXd::Zero(inst.n);
  lam.lam_u = Eigen::VectorXd::Zero(inst.n);
  return lam;
}

Eigen::VectorXd compute_phi(const Eigen::MatrixXd& Q) {
  const int n = static_cast<int>(Q.rows());
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (Q + Q.transpose()));
  if (llt.info() != Eigen::Success)
    throw NearSingularQ("compute_phi: Q is not positive-definite");
  Eigen::MatrixXd qinv = llt.solve(Eigen::MatrixXd::Identity(n, n));

  // 1-norm condition estimate from the explicit inverse.
  double norm_q = 0.0, norm_qi = 0.0;
  for (int j = 0; j < n; ++j) {
    norm_q = std::max(norm_q, Q.col(j).cwiseAbs().sum());
    norm_qi = std::max(norm_qi, qinv.col(j).cwiseAbs().sum());
  }
  if (norm_q * norm_qi > 1e12)
    throw NearSingularQ("compute_phi: condition estimate " + std::to_string(norm_q * norm_qi));

  Eigen::VectorXd phi(n);
  for (int j = 0; j < n; ++j) phi[j] = 1.0 / qinv.row(j).cwiseAbs().sum();
  return phi;
}

InstanceFactors::InstanceFactors(const ProblemInstance& inst)
    : llt_(0.5 * (inst.Q + inst.Q.transpose())) {
  if (llt_.info() != Eigen::Success)
    throw NearSingularQ("InstanceFactors: Q is not positive-definite");
  q_inv_ = llt_.solve(Eigen::MatrixXd::Identity(inst.n, inst.n));
  phi_ = compute_phi(inst.Q);
}

BinarySelection discretize_topk(const Eigen::VectorXd& b_r, int k) {
  const int n = static_cast<int>(b_r.size());
  if (k < 0 || k > n) throw InvalidBounds("discretize_topk: k out of range");
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return b_r[a] > b_r[b]; });
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < k; ++i) bits[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;
  return BinarySelection(std::move(bits));
}

double dual_objective(const ProblemInstance& inst, const InstanceFactors& factors,
                      const DualVariables& lam) {
  Eigen::VectorXd d = inst.q + inst.A.transpose() * lam.lam_a - lam.lam_l + lam.lam_u;
  Eigen::VectorXd x_hat = -0.5 * factors.llt().solve(d);
  Eigen::VectorXd c = selection_coefficients(inst, lam);
  return -x_hat.dot(inst.Q * x_hat) + selection_term(inst, c) - lam.lam_a.dot(inst.c_a) -
         lam.lam_b.dot(inst.c_b.cast<double>());
}

double dual_objective(const ProblemInstance& inst, const DualVariables& lam) {
  InstanceFactors factors(inst);
  return dual_objective(inst, factors, lam);
}

RelaxationOutcome solve_line(const ProblemInstance& inst, int k) {
  return solve_line(inst, k, LineOptions{});
}

RelaxationOutcome solve_line(const ProblemInstance& inst, int k, const LineOptions& opts) {
  const int n = inst.n;
  const int ma = inst.num_linear();
  const int mb = inst.num_cardinality();
  if (mb == 1 && k != inst.c_b[0])
    throw InvalidBounds("solve_line: k must equal c_b[0]");

  // Variables z = [x, b_R, s, t]; the coupled bounds L b <= x <= U b become
  // the slack equalities x - L b - s = 0 and -x + U b - t = 0 with s, t >= 0.
  const int d = 4 * n;
  const int m = ma + mb + 2 * n;
  const double inf = std::numeric_limits<double>::infinity();

  QpProblem qp;
  qp.H = Eigen::MatrixXd::Zero(d, d);
  qp.H.topLeftCorner(n, n) = inst.Q;
  qp.g = Eigen::VectorXd::Zero(d);
  qp.g.head(n) = inst.q;
  qp.Aeq = Eigen::MatrixXd::Zero(m, d);
  qp.beq = Eigen::VectorXd::Zero(m);
  qp.Aeq.block(0, 0, ma, n) = inst.A;
  qp.beq.head(ma) = inst.c_a;
  qp.Aeq.block(ma, n, mb, n) = inst.B;
  qp.beq.segment(ma, mb) = inst.c_b.cast<double>();
  for (int i = 0; i < n; ++i) {
    int r = ma + mb + i;
    qp.Aeq(r, i) = 1.0;
    qp.Aeq(r, n + i) = -inst.lower[i];
    qp.Aeq(r, 2 * n + i) = -1.0;
    r = ma + mb + n + i;
    qp.Aeq(r, i) = -1.0;
    qp.Aeq(r, n + i) = inst.upper[i];
    qp.Aeq(r, 3 * n + i) = -1.0;
  }
  qp.lo = Eigen::VectorXd::Constant(d, -inf);
  qp.hi = Eigen::VectorXd::Constant(d, inf);
  for (int i = 0; i < n; ++i) {
    double blo = 0.0, bhi = 1.0;
    if (i < static_cast<int>(opts.b_bounds.size())) {
      blo = std::max(blo, opts.b_bounds[static_cast<std::size_t>(i)].first);
      bhi = std::min(bhi, opts.b_bounds[static_cast<std::size_t>(i)].second);
    }
    qp.lo[n + i] = blo;
    qp.hi[n + i] = bhi;
    qp.lo[2 * n + i] = 0.0;
    qp.lo[3 * n + i] = 0.0;
  }

  QpResult r = solve_qp(qp, opts.warm);
  if (r.status == QpStatus::Infeasible)
    throw RelaxationInfeasible("solve_line: relaxed polytope is empty");
  if (opts.warm_out) {
    opts.warm_out->x = r.x;
    opts.warm_out->bound_state = r.bound_state;
  }

  RelaxationOutcome out;
  out.kind = RelaxationKind::Line;
  out.x_hat = r.x.head(n);
  out.continuous_b = r.x.segment(n, n);
  out.selection = select_by_scores(inst, out.continuous_b);
  out.bound = r.objective;
  out.iterations = r.iterations;
  return out;
}

namespace {

struct AscentEval {
  double value = 0.0;  // unpenalized objective (the reported bound)
  Eigen::VectorXd g_a, g_b, g_l, g_u;
};

// Shared subgradient evaluation for the Dual and Augm ascents. use_phi
// switches the quadratic term to Phi and enables the lambda_g penalty.
AscentEval evaluate(const ProblemInstance& inst, const InstanceFactors& factors,
                    const DualVariables& lam, bool use_phi, double lambda_g,
                    double penalty_weight, Eigen::VectorXd* x_hat_out) {
  AscentEval ev;
  Eigen::VectorXd dvec = inst.q + inst.A.transpose() * lam.lam_a - lam.lam_l + lam.lam_u;
  Eigen::VectorXd x_hat = -0.5 * factors.llt().solve(dvec);
  if (x_hat_out) *x_hat_out = x_hat;
  Eigen::VectorXd c = selection_coefficients(inst, lam);
  Eigen::VectorXd inner_b;
  const double bterm = selection_term(inst, c, &inner_b);
  const double affine = -lam.lam_a.dot(inst.c_a) - lam.lam_b.dot(inst.c_b.cast<double>());

  if (!use_phi) {
    ev.value = -x_hat.dot(inst.Q * x_hat) + bterm + affine;
    // Danskin: the x-part gradient is the constraint residual at x_hat.
    ev.g_a = inst.A * x_hat - inst.c_a;
    ev.g_l = inst.lower.cwiseProduct(inner_b) - x_hat;
    ev.g_u = x_hat - inst.upper.cwiseProduct(inner_b);
  } else {
    Eigen::VectorXd ar = inst.A * x_hat - inst.c_a;
    ev.value = -x_hat.dot(factors.phi_diagonal().cwiseProduct(x_hat)) + bterm + affine +
               lambda_g * ar.squaredNorm();
    // x_hat is defined through Q, so the envelope argument no longer applies;
    // chain through d -> x_hat instead.
    Eigen::VectorXd w = factors.llt().solve(factors.phi_diagonal().cwiseProduct(x_hat) -
                                            lambda_g * (inst.A.transpose() * ar));
    ev.g_a = inst.A * w - inst.c_a;
    ev.g_l = inst.lower.cwiseProduct(inner_b) - w;
    ev.g_u = w - inst.upper.cwiseProduct(inner_b);
  }
  ev.g_b = inst.B * inner_b - inst.c_b.cast<double>();

  // Soft sign rule: penalize positive selection coefficients.
  if (penalty_weight > 0.0) {
    Eigen::VectorXd cpos = c.cwiseMax(0.0);
    ev.g_b -= 2.0 * penalty_weight * (inst.B * cpos);
    ev.g_l -= 2.0 * penalty_weight * inst.lower.cwiseProduct(cpos);
    ev.g_u += 2.0 * penalty_weight * inst.upper.cwiseProduct(cpos);
  }
  return ev;
}

RelaxationOutcome ascend(const ProblemInstance& inst, bool use_phi, double lambda_g,
                         const DualAscentParams& params) {
  InstanceFactors factors(inst);
  DualVariables lam = DualVariables::zeros(inst);
  DualVariables best_lam = lam;
  double best = -std::numeric_limits<double>::infinity();

  for (int t = 1; t <= params.max_iters; ++t) {
    AscentEval ev = evaluate(inst, factors, lam, use_phi, lambda_g, params.penalty_weight, nullptr);
    if (ev.value > best) {
      best = ev.value;
      best_lam = lam;
    }
    double gnorm = std::sqrt(ev.g_a.squaredNorm() + ev.g_b.squaredNorm() +
                             ev.g_l.squaredNorm() + ev.g_u.squaredNorm());
    if (gnorm < 1e-14) break;
    const double step = params.step0 / (std::sqrt(static_cast<double>(t)) * gnorm);
    lam.lam_a += step * ev.g_a;
    lam.lam_b += step * ev.g_b;
    lam.lam_l = (lam.lam_l + step * ev.g_l).cwiseMax(0.0);
    lam.lam_u = (lam.lam_u + step * ev.g_u).cwiseMax(0.0);
  }

  Eigen::VectorXd x_hat;
  AscentEval ev = evaluate(inst, factors, best_lam, use_phi, lambda_g, 0.0, &x_hat);
  Eigen::VectorXd c = selection_coefficients(inst, best_lam);

  RelaxationOutcome out;
  out.kind = use_phi ? RelaxationKind::Augm : RelaxationKind::Dual;
  out.continuous_b = -c;
  out.x_hat = x_hat;
  out.selection = select_by_scores(inst, out.continuous_b);
  out.bound = best;
  out.iterations = params.max_iters;
  return out;
}

}  // namespace

RelaxationOutcome solve_dual(const ProblemInstance& inst, const DualAscentParams& params) {
  return ascend(inst, false, 0.0, params);
}

RelaxationOutcome solve_augm(const ProblemInstance& inst, double lambda_g,
                             const DualAscentParams& params) {
  return ascend(inst, true, lambda_g, params);
}

}  // namespace cardsolver
