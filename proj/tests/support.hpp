#pragma once

// Shared helpers for the unit and acceptance suites: randomized problem
// generators and an independent first-order QP oracle used to cross-check
// the active-set kernel.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "cardsolver/model.hpp"
#include "cardsolver/qp.hpp"

namespace testsupport {

// Covariance-like PD matrix from a one-factor correlation structure scaled
// by random volatilities.
inline Eigen::MatrixXd random_pd_matrix(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> load(0.3, 0.9);
  std::uniform_real_distribution<double> vol(0.1, 0.3);
  Eigen::VectorXd f(n), s(n);
  for (int i = 0; i < n; ++i) {
    f[i] = load(rng);
    s[i] = vol(rng);
  }
  Eigen::MatrixXd C = f * f.transpose();
  for (int i = 0; i < n; ++i) C(i, i) = 1.0;
  Eigen::MatrixXd Q = s.asDiagonal() * C * s.asDiagonal();
  return 0.5 * (Q + Q.transpose());
}

struct RandomMv {
  cardsolver::ProblemInstance inst;
  cardsolver::BinarySelection witness;  // selection used to pick the target
};

// Mean-variance instance whose target return is attainable by construction:
// the target is the return of a random feasible portfolio on a random
// k-subset.
inline RandomMv random_mv_instance(int n, int k, std::mt19937_64& rng, double lower = 0.01,
                                   double upper = 1.0) {
  using namespace cardsolver;
  std::normal_distribution<double> ret(0.002, 0.0025);
  Eigen::VectorXd r(n);
  for (int i = 0; i < n; ++i) r[i] = ret(rng);

  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<int> ones(idx.begin(), idx.begin() + k);
  std::sort(ones.begin(), ones.end());

  // Random weights on the chosen subset inside [lower, upper], budget one.
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  double rest = 1.0 - k * lower;
  std::vector<double> cuts;
  for (int i = 0; i < k - 1; ++i) cuts.push_back(u01(rng) * rest);
  cuts.push_back(0.0);
  cuts.push_back(rest);
  std::sort(cuts.begin(), cuts.end());
  for (int i = 0; i < k; ++i) {
    double wi = lower + (cuts[static_cast<std::size_t>(i) + 1] - cuts[static_cast<std::size_t>(i)]);
    w[ones[static_cast<std::size_t>(i)]] = std::min(wi, upper);
  }
  // Renormalize in case the upper clamp bit.
  w *= 1.0 / w.sum();

  MvSpec spec;
  spec.n = n;
  spec.returns = r;
  spec.target_return = r.dot(w);
  spec.k = k;
  spec.lower = lower;
  spec.upper = upper;

  RandomMv out;
  out.inst = build_from_mv(spec, random_pd_matrix(n, rng));
  out.witness = BinarySelection::from_indices(n, ones, k);
  return out;
}

// Random bounded-feasible equality+box QP. A feasible interior-ish point is
// drawn first so beq is always consistent.
inline cardsolver::QpProblem random_qp(int d, int m, std::mt19937_64& rng) {
  using namespace cardsolver;
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::MatrixXd M(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) M(i, j) = nd(rng);
  QpProblem p;
  p.H = M.transpose() * M + 0.1 * Eigen::MatrixXd::Identity(d, d);
  p.g.resize(d);
  for (int i = 0; i < d; ++i) p.g[i] = nd(rng);
  p.lo.resize(d);
  p.hi.resize(d);
  std::uniform_real_distribution<double> lo_d(-2.0, 0.0), wid(0.5, 3.0);
  for (int i = 0; i < d; ++i) {
    p.lo[i] = lo_d(rng);
    p.hi[i] = p.lo[i] + wid(rng);
  }
  Eigen::VectorXd x0(d);
  std::uniform_real_distribution<double> u01(0.1, 0.9);
  for (int i = 0; i < d; ++i) x0[i] = p.lo[i] + u01(rng) * (p.hi[i] - p.lo[i]);
  p.Aeq.resize(m, d);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < d; ++j) p.Aeq(i, j) = nd(rng);
  p.beq = p.Aeq * x0;
  return p;
}

// Augmented-Lagrangian projected-gradient oracle. Accelerated (FISTA)
// inner loops on the smooth augmented objective with box projection;
// multiplier updates outside. Independent of the active-set code path.
inline double alm_pg_objective(const cardsolver::QpProblem& p, int outer = 60, int inner = 4000) {
  const int d = p.dim();
  const int m = static_cast<int>(p.Aeq.rows());
  const double rho = 1e4;

  Eigen::VectorXd nu = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd x(d);
  for (int i = 0; i < d; ++i) {
    double lo = std::isfinite(p.lo[i]) ? p.lo[i] : -1.0;
    double hi = std::isfinite(p.hi[i]) ? p.hi[i] : 1.0;
    x[i] = 0.5 * (lo + hi);
  }
  auto project = [&](Eigen::VectorXd& z) {
    for (int i = 0; i < d; ++i) z[i] = std::clamp(z[i], p.lo[i], p.hi[i]);
  };

  Eigen::MatrixXd AtA = m > 0 ? (p.Aeq.transpose() * p.Aeq).eval() : Eigen::MatrixXd::Zero(d, d);
  const double L =
      2.0 * p.H.selfadjointView<Eigen::Lower>().eigenvalues().real().maxCoeff() +
      (m > 0 ? 2.0 * rho * AtA.selfadjointView<Eigen::Lower>().eigenvalues().real().maxCoeff()
             : 0.0);
  const double step = 1.0 / L;

  for (int t = 0; t < outer; ++t) {
    Eigen::VectorXd y = x, x_prev = x;
    double tk = 1.0;
    for (int it = 0; it < inner; ++it) {
      Eigen::VectorXd grad = 2.0 * (p.H * y) + p.g;
      if (m > 0) {
        Eigen::VectorXd res = p.Aeq * y - p.beq;
        grad += p.Aeq.transpose() * (nu + 2.0 * rho * res);
      }
      Eigen::VectorXd x_new = y - step * grad;
      project(x_new);
      double tk1 = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
      y = x_new + ((tk - 1.0) / tk1) * (x_new - x_prev);
      tk = tk1;
      x_prev = x_new;
      x = x_new;
    }
    if (m > 0) nu += 2.0 * rho * (p.Aeq * x - p.beq);
  }
  return x.dot(p.H * x) + p.g.dot(x);
}

}  // namespace testsupport
