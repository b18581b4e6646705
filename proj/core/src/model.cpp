#include "cardsolver/model.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace cardsolver {

int BinarySelection::popcount() const {
  int c = 0;
  for (auto b : bits) c += (b != 0);
  return c;
}

std::vector<int> BinarySelection::one_indices() const {
  std::vector<int> idx;
  for (int i = 0; i < size(); ++i)
    if (bits[i]) idx.push_back(i);
  return idx;
}

BinarySelection BinarySelection::make(std::vector<std::uint8_t> b, int expected_k) {
  BinarySelection s(std::move(b));
  if (s.popcount() != expected_k)
    throw InvalidBounds("BinarySelection popcount " + std::to_string(s.popcount()) +
                        " != required cardinality " + std::to_string(expected_k));
  return s;
}

BinarySelection BinarySelection::from_indices(int n, const std::vector<int>& ones, int expected_k) {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(n), 0);
  for (int i : ones) {
    if (i < 0 || i >= n) throw DimensionMismatch("selection index out of range");
    bits[static_cast<std::size_t>(i)] = 1;
  }
  return make(std::move(bits), expected_k);
}

bool ProblemInstance::selection_feasible(const BinarySelection& b) const {
  if (b.size() != n) return false;
  Eigen::VectorXd bv(n);
  for (int i = 0; i < n; ++i) bv[i] = b.bits[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
  Eigen::VectorXd res = B * bv - c_b.cast<double>();
  return res.lpNorm<Eigen::Infinity>() < 0.5;
}

void MvSpec::check() const {
  if (n <= 0 || returns.size() != n)
    throw DimensionMismatch("MvSpec: returns length must equal n");
  if (k <= 0 || k > n) throw InvalidBounds("MvSpec: k must lie in [1, n]");
  if (!(lower >= 0.0 && lower < 1.0) || !(upper > 0.0 && upper <= 1.0) || !(lower < upper))
    throw InvalidBounds("MvSpec: need 0 <= l < u <= 1");
  if (k * lower > 1.0 + 1e-12 || k * upper < 1.0 - 1e-12)
    throw InvalidBounds("MvSpec: budget needs k*l <= 1 <= k*u");
}

ProblemInstance build_from_mv(const MvSpec& spec, const Eigen::MatrixXd& Q) {
  spec.check();
  if (Q.rows() != spec.n || Q.cols() != spec.n)
    throw DimensionMismatch("build_from_mv: Q must be n x n");

  ProblemInstance inst;
  inst.n = spec.n;
  inst.Q = Q;
  inst.q = Eigen::VectorXd::Zero(spec.n);
  inst.A.resize(2, spec.n);
  inst.A.row(0) = spec.returns.transpose();
  inst.A.row(1) = Eigen::RowVectorXd::Ones(spec.n);
  inst.c_a.resize(2);
  inst.c_a << spec.target_return, 1.0;
  inst.lower = Eigen::VectorXd::Constant(spec.n, spec.lower);
  inst.upper = Eigen::VectorXd::Constant(spec.n, spec.upper);
  inst.B = Eigen::MatrixXd::Ones(1, spec.n);
  inst.c_b.resize(1);
  inst.c_b << spec.k;
  return inst;
}

namespace {

std::string at_index(int i, int j) {
  std::ostringstream os;
  os << "(" << i << "," << j << ")";
  return os.str();
}

}  // namespace

std::vector<Diagnostic> validate(const ProblemInstance& inst) {
  std::vector<Diagnostic> out;
  const int n = inst.n;

  auto dim_err = [&](const std::string& msg) {
    out.push_back({Diagnostic::Code::DimensionError, msg});
  };

  if (n <= 0) {
    dim_err("n must be positive");
    return out;
  }
  if (inst.Q.rows() != n || inst.Q.cols() != n) dim_err("Q must be n x n");
  if (inst.q.size() != n) dim_err("q must have length n");
  if (inst.A.cols() != n || inst.A.rows() != inst.c_a.size())
    dim_err("A/c_a dimensions inconsistent with n");
  if (inst.lower.size() != n || inst.upper.size() != n)
    dim_err("bound vectors must have length n");
  if (inst.B.cols() != n || inst.B.rows() != inst.c_b.size())
    dim_err("B/c_b dimensions inconsistent with n");
  if (!out.empty()) return out;

  // Q symmetric within 1e-12 relative tolerance.
  const double qscale = std::max(1.0, inst.Q.cwiseAbs().maxCoeff());
  double worst = 0.0;
  int wi = 0, wj = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double d = std::abs(inst.Q(i, j) - inst.Q(j, i));
      if (d > worst) {
        worst = d;
        wi = i;
        wj = j;
      }
    }
  if (worst > 1e-12 * qscale)
    out.push_back({Diagnostic::Code::AsymmetricQ,
                   "AsymmetricQ at " + at_index(wi, wj) + ", |Q_ij - Q_ji| = " + std::to_string(worst)});

  // Strict positive definiteness after symmetrization.
  Eigen::MatrixXd qs = 0.5 * (inst.Q + inst.Q.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(qs, Eigen::EigenvaluesOnly);
  const double mineig = es.eigenvalues().minCoeff();
  if (!(mineig > 1e-10 * qscale))
    out.push_back({Diagnostic::Code::NotPositiveDefinite,
                   "NotPositiveDefinite, min eig = " + std::to_string(mineig)});

  for (int i = 0; i < n; ++i) {
    if (inst.lower[i] < 0.0)
      out.push_back({Diagnostic::Code::BadBounds, "negative lower bound at index " + std::to_string(i)});
    if (!(inst.upper[i] > 0.0))
      out.push_back({Diagnostic::Code::BadBounds, "nonpositive upper bound at index " + std::to_string(i)});
    if (inst.lower[i] > inst.upper[i])
      out.push_back({Diagnostic::Code::BadBounds, "lower > upper at index " + std::to_string(i)});
  }

  for (int r = 0; r < inst.B.rows(); ++r) {
    for (int j = 0; j < n; ++j) {
      double v = inst.B(r, j);
      if (v < 0.0 || std::abs(v - std::round(v)) > 1e-9) {
        out.push_back({Diagnostic::Code::BadCardinalityData,
                       "B entry not a nonnegative integer at " + at_index(r, j)});
        break;
      }
    }
    if (inst.c_b[r] <= 0)
      out.push_back({Diagnostic::Code::BadCardinalityData,
                     "c_b must be positive at row " + std::to_string(r)});
  }

  return out;
}

}  // namespace cardsolver
