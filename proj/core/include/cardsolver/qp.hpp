#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "cardsolver/errors.hpp"

namespace cardsolver {

/// Equality-constrained, box-bounded convex QP:
///   min  x'Hx + g'x   s.t.  Aeq x = beq,  lo <= x <= hi.
/// Note the objective carries no 1/2 factor; all callers use this convention.
struct QpProblem {
  Eigen::MatrixXd H;    // d x d, symmetric PSD
  Eigen::VectorXd g;    // d
  Eigen::MatrixXd Aeq;  // m x d (m may be 0)
  Eigen::VectorXd beq;  // m
  Eigen::VectorXd lo;   // d, -inf allowed
  Eigen::VectorXd hi;   // d, +inf allowed

  int dim() const { return static_cast<int>(g.size()); }
};

enum class QpStatus { Optimal, Infeasible, IterationLimit };

struct QpResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  QpStatus status = QpStatus::IterationLimit;
  int iterations = 0;
  double kkt_residual = 0.0;
  // Bound state per variable: -1 at lower, +1 at upper, 0 free. Feed back as
  // a warm start for a nearby problem.
  std::vector<std::int8_t> bound_state;
};

struct QpWarmStart {
  Eigen::VectorXd x;
  std::vector<std::int8_t> bound_state;  // same encoding as QpResult
};

/// Primal active-set solve. Throws SingularKkt when the equality rows are
/// linearly dependent beyond tolerance.
QpResult solve_qp(const QpProblem& p, const QpWarmStart* warm = nullptr);

}  // namespace cardsolver
