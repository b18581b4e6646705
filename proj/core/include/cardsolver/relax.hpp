#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "cardsolver/model.hpp"
#include "cardsolver/qp.hpp"

namespace cardsolver {

enum class RelaxationKind { Line, Dual, Augm };

/// Multipliers for the dualized primal constraints.
struct DualVariables {
  Eigen::VectorXd lam_a;  // A x = c_a
  Eigen::VectorXd lam_b;  // B b = c_b
  Eigen::VectorXd lam_l;  // L b <= x, >= 0
  Eigen::VectorXd lam_u;  // x <= U b, >= 0

  static DualVariables zeros(const ProblemInstance& inst);
};

struct RelaxationOutcome {
  RelaxationKind kind = RelaxationKind::Line;
  BinarySelection selection;
  // b_R for Line; the negated selection-coefficient vector for Dual/Augm.
  Eigen::VectorXd continuous_b;
  Eigen::VectorXd x_hat;
  double bound = 0.0;
  int iterations = 0;
};

struct DualAscentParams {
  int max_iters = 500;
  double step0 = 1.0;
  double penalty_weight = 10.0;  // soft enforcement of the coefficient sign rule
  std::uint64_t seed = 0;
};

/// Per-instance factorization cache shared by the dual-side relaxations.
/// Immutable after construction.
class InstanceFactors {
 public:
  explicit InstanceFactors(const ProblemInstance& inst);

  const Eigen::LLT<Eigen::MatrixXd>& llt() const { return llt_; }
  const Eigen::MatrixXd& q_inverse() const { return q_inv_; }
  const Eigen::VectorXd& phi_diagonal() const { return phi_; }

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::MatrixXd q_inv_;
  Eigen::VectorXd phi_;
};

/// Diagonal of Phi: Phi_jj = 1 / sum_k |Qinv_jk|. Throws NearSingularQ when
/// the condition estimate exceeds 1e12.
Eigen::VectorXd compute_phi(const Eigen::MatrixXd& Q);

/// Exactly the k largest entries map to 1; ties broken by lowest index.
BinarySelection discretize_topk(const Eigen::VectorXd& b_r, int k);

/// Lagrangian dual value at lam; a lower bound on the primal optimum.
double dual_objective(const ProblemInstance& inst, const DualVariables& lam);
double dual_objective(const ProblemInstance& inst, const InstanceFactors& factors,
                      const DualVariables& lam);

/// Continuous relaxation of b with top-k re-discretization. Optional
/// per-index overrides pin b_i (used by branch and bound); a warm start from
/// a neighbouring solve is honoured when its dimensions match.
struct LineOptions {
  // For each index: pair (lo, hi) for b_R; default [0,1].
  std::vector<std::pair<double, double>> b_bounds;
  const QpWarmStart* warm = nullptr;
  QpWarmStart* warm_out = nullptr;  // filled with the final iterate when set
};

RelaxationOutcome solve_line(const ProblemInstance& inst, int k);
RelaxationOutcome solve_line(const ProblemInstance& inst, int k, const LineOptions& opts);

/// Projected subgradient ascent on the Lagrangian dual.
RelaxationOutcome solve_dual(const ProblemInstance& inst, const DualAscentParams& params);

/// Dual ascent with the diagonal Phi quadratic and the lambda_g penalty term.
RelaxationOutcome solve_augm(const ProblemInstance& inst, double lambda_g,
                             const DualAscentParams& params);

}  // namespace cardsolver
