#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "cardsolver/errors.hpp"

namespace cardsolver {

/// Length-n bit-vector with a fixed number of ones; the unit of heuristic
/// search. Construct through make() (which checks the expected cardinality)
/// or from_indices().
struct BinarySelection {
  std::vector<std::uint8_t> bits;

  BinarySelection() = default;
  explicit BinarySelection(std::vector<std::uint8_t> b) : bits(std::move(b)) {}

  static BinarySelection make(std::vector<std::uint8_t> b, int expected_k);
  static BinarySelection from_indices(int n, const std::vector<int>& ones, int expected_k);

  int size() const { return static_cast<int>(bits.size()); }
  int popcount() const;
  std::vector<int> one_indices() const;

  bool operator==(const BinarySelection& o) const { return bits == o.bits; }
  bool operator<(const BinarySelection& o) const { return bits < o.bits; }
};

/// The generalized primal model:
///   min x'Qx + q'x  s.t.  A x = c_a,  L b <= x <= U b,  B b = c_b,
/// with b binary. L and U are diagonal; only their diagonals are stored.
struct ProblemInstance {
  int n = 0;
  Eigen::MatrixXd Q;
  Eigen::VectorXd q;
  Eigen::MatrixXd A;    // m_a x n
  Eigen::VectorXd c_a;  // m_a
  Eigen::VectorXd lower;  // diagonal of L
  Eigen::VectorXd upper;  // diagonal of U
  Eigen::MatrixXd B;    // m_b x n, nonnegative integers
  Eigen::VectorXi c_b;  // m_b, positive

  int num_linear() const { return static_cast<int>(A.rows()); }
  int num_cardinality() const { return static_cast<int>(B.rows()); }

  // Cardinality for the common single-row-B case.
  int k() const { return c_b.size() > 0 ? c_b[0] : 0; }

  bool selection_feasible(const BinarySelection& b) const;
};

/// Mean-variance specialization: pick exactly k of n assets, weights in
/// [lower, upper], hit target_return exactly, budget sums to one.
struct MvSpec {
  int n = 0;
  Eigen::VectorXd returns;
  double target_return = 0.0;
  int k = 0;
  double lower = 0.0;  // in [0,1)
  double upper = 1.0;  // in (0,1]

  void check() const;  // throws InvalidBounds / DimensionMismatch
};

enum class SolveStatus { Optimal, Infeasible };

struct WeightedSolution {
  Eigen::VectorXd x;
  BinarySelection selection;
  double objective = 0.0;  // v = x'Qx + q'x
  SolveStatus status = SolveStatus::Infeasible;
};

struct Diagnostic {
  enum class Code {
    AsymmetricQ,
    NotPositiveDefinite,
    BadBounds,        // L_ii > U_ii or negative lower
    DimensionError,
    BadCardinalityData,  // B entries negative/non-integer, c_b nonpositive
  };
  Code code;
  std::string message;
};

ProblemInstance build_from_mv(const MvSpec& spec, const Eigen::MatrixXd& Q);

/// Empty iff all ProblemInstance invariants hold; one entry per violation.
std::vector<Diagnostic> validate(const ProblemInstance& inst);

}  // namespace cardsolver
