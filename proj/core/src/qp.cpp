#include "cardsolver/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cardsolver {

namespace {

constexpr double kActTol = 1e-9;    // constraint-activity tolerance
constexpr double kOptTol = 1e-8;    // multiplier sign / KKT tolerance
constexpr double kFeasTol = 1e-7;   // phase-1 acceptance

struct CoreResult {
  Eigen::VectorXd z;
  std::vector<std::int8_t> state;
  int iterations = 0;
  bool converged = false;
};

// Primal active-set loop on  min z'Hz + g'z  s.t. Aeq z = beq, lo <= z <= hi,
// from a box-feasible start. Equality residual at the start is driven to zero
// by the KKT steps themselves.
CoreResult active_set_core(const Eigen::MatrixXd& H, const Eigen::VectorXd& g,
                           const Eigen::MatrixXd& Aeq, const Eigen::VectorXd& beq,
                           const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                           Eigen::VectorXd z, std::vector<std::int8_t> state,
                           int max_iter) {
  const int d = static_cast<int>(g.size());
  const int m = static_cast<int>(beq.size());
  const double hscale = std::max(1.0, H.size() ? H.cwiseAbs().maxCoeff() : 0.0);
  const double eps_h = 1e-10 * hscale;   // proximal shift keeps KKT nonsingular on PSD H
  const double eps_d = 1e-11;

  CoreResult res;
  std::vector<int> free_idx;
  free_idx.reserve(static_cast<std::size_t>(d));

  int it = 0;
  for (; it < max_iter; ++it) {
    free_idx.clear();
    for (int i = 0; i < d; ++i)
      if (state[static_cast<std::size_t>(i)] == 0) free_idx.push_back(i);
    const int f = static_cast<int>(free_idx.size());

    Eigen::VectorXd grad = 2.0 * (H * z) + g;
    Eigen::VectorXd req = beq - Aeq * z;

    Eigen::VectorXd p = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd nu = Eigen::VectorXd::Zero(m);

    if (f > 0) {
      Eigen::MatrixXd K = Eigen::MatrixXd::Zero(f + m, f + m);
      for (int a = 0; a < f; ++a)
        for (int b = 0; b < f; ++b) K(a, b) = 2.0 * H(free_idx[static_cast<std::size_t>(a)], free_idx[static_cast<std::size_t>(b)]);
      for (int a = 0; a < f; ++a) K(a, a) += eps_h;
      for (int r = 0; r < m; ++r)
        for (int a = 0; a < f; ++a) {
          K(f + r, a) = Aeq(r, free_idx[static_cast<std::size_t>(a)]);
          K(a, f + r) = K(f + r, a);
        }
      for (int r = 0; r < m; ++r) K(f + r, f + r) = -eps_d;

      Eigen::VectorXd rhs(f + m);
      for (int a = 0; a < f; ++a) rhs[a] = -grad[free_idx[static_cast<std::size_t>(a)]];
      rhs.tail(m) = req;

      Eigen::VectorXd sol = K.partialPivLu().solve(rhs);
      for (int a = 0; a < f; ++a) p[free_idx[static_cast<std::size_t>(a)]] = sol[a];
      nu = sol.tail(m);
    } else if (m > 0) {
      // All variables pinned; estimate multipliers by least squares.
      nu = Aeq.transpose().colPivHouseholderQr().solve(-grad);
    }

    const double pnorm = p.lpNorm<Eigen::Infinity>();
    const double znorm = z.lpNorm<Eigen::Infinity>();

    if (pnorm <= 1e-11 * (1.0 + znorm)) {
      // Stationary on the working set; check bound multipliers.
      Eigen::VectorXd t = grad + Aeq.transpose() * nu;
      int worst = -1;
      double worst_mu = -kOptTol * (1.0 + t.lpNorm<Eigen::Infinity>());
      for (int i = 0; i < d; ++i) {
        const auto s = state[static_cast<std::size_t>(i)];
        if (s == 0) continue;
        const double mu = (s < 0) ? t[i] : -t[i];
        if (mu < worst_mu) {
          worst_mu = mu;
          worst = i;
        }
      }
      if (worst < 0) {
        res.converged = true;
        break;
      }
      state[static_cast<std::size_t>(worst)] = 0;
      continue;
    }

    // Ratio test against the box; lowest index wins ties.
    double alpha = 1.0;
    int blocking = -1;
    std::int8_t block_side = 0;
    for (int i : free_idx) {
      const double pi = p[i];
      if (pi > kActTol && std::isfinite(hi[i])) {
        const double a = (hi[i] - z[i]) / pi;
        if (a < alpha - 1e-15) {
          alpha = std::max(0.0, a);
          blocking = i;
          block_side = +1;
        }
      } else if (pi < -kActTol && std::isfinite(lo[i])) {
        const double a = (lo[i] - z[i]) / pi;
        if (a < alpha - 1e-15) {
          alpha = std::max(0.0, a);
          blocking = i;
          block_side = -1;
        }
      }
    }

    z += alpha * p;
    if (blocking >= 0) {
      z[blocking] = (block_side > 0) ? hi[blocking] : lo[blocking];
      state[static_cast<std::size_t>(blocking)] = block_side;
    }
    // Numeric safety: never leave the box.
    for (int i = 0; i < d; ++i) z[i] = std::min(std::max(z[i], lo[i]), hi[i]);
  }

  res.z = std::move(z);
  res.state = std::move(state);
  res.iterations = it;
  return res;
}

double objective_of(const QpProblem& p, const Eigen::VectorXd& x) {
  return x.dot(p.H * x) + p.g.dot(x);
}

// Stationarity + feasibility residual of a candidate solution.
double kkt_residual(const QpProblem& p, const Eigen::VectorXd& x,
                    const std::vector<std::int8_t>& state, const Eigen::VectorXd& nu) {
  Eigen::VectorXd t = 2.0 * (p.H * x) + p.g + p.Aeq.transpose() * nu;
  double r = 0.0;
  for (int i = 0; i < p.dim(); ++i) {
    const auto s = state[static_cast<std::size_t>(i)];
    if (s == 0)
      r = std::max(r, std::abs(t[i]));
    else if (s < 0)
      r = std::max(r, std::max(0.0, -t[i]));  // lower-bound multiplier must be >= 0
    else
      r = std::max(r, std::max(0.0, t[i]));
  }
  if (p.beq.size() > 0) r = std::max(r, (p.Aeq * x - p.beq).lpNorm<Eigen::Infinity>());
  return r;
}

}  // namespace

QpResult solve_qp(const QpProblem& p, const QpWarmStart* warm) {
  const int d = p.dim();
  const int m = static_cast<int>(p.beq.size());
  if (p.H.rows() != d || p.H.cols() != d || p.lo.size() != d || p.hi.size() != d ||
      p.Aeq.cols() != (m > 0 ? d : p.Aeq.cols()) || p.Aeq.rows() != m)
    throw DimensionMismatch("solve_qp: inconsistent problem dimensions");
  for (int i = 0; i < d; ++i)
    if (p.lo[i] > p.hi[i]) throw InvalidBounds("solve_qp: lo > hi at index " + std::to_string(i));

  // Reject equality systems whose rows are linearly dependent.
  Eigen::MatrixXd Aeq = p.Aeq;
  Eigen::VectorXd beq = p.beq;
  if (m > 0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Aeq.transpose());
    if (qr.rank() < m)
      throw SingularKkt("solve_qp: equality rows linearly dependent (rank " +
                        std::to_string(qr.rank()) + " of " + std::to_string(m) + ")");
  }

  QpResult out;
  out.x = Eigen::VectorXd::Zero(d);
  out.bound_state.assign(static_cast<std::size_t>(d), 0);

  Eigen::VectorXd z0(d);
  std::vector<std::int8_t> state0(static_cast<std::size_t>(d), 0);
  bool have_start = false;

  if (warm && warm->x.size() == d) {
    Eigen::VectorXd zc = warm->x;
    for (int i = 0; i < d; ++i) zc[i] = std::min(std::max(zc[i], p.lo[i]), p.hi[i]);
    const double eqres = m > 0 ? (Aeq * zc - beq).lpNorm<Eigen::Infinity>() : 0.0;
    if (eqres <= kFeasTol * (1.0 + (m > 0 ? beq.lpNorm<Eigen::Infinity>() : 0.0))) {
      z0 = zc;
      if (warm->bound_state.size() == static_cast<std::size_t>(d)) state0 = warm->bound_state;
      for (int i = 0; i < d; ++i) {
        auto& s = state0[static_cast<std::size_t>(i)];
        if (s < 0 && std::abs(z0[i] - p.lo[i]) > kActTol) s = 0;
        if (s > 0 && std::abs(z0[i] - p.hi[i]) > kActTol) s = 0;
      }
      have_start = true;
    }
  }

  if (!have_start) {
    // Phase 1: artificial variables absorb the equality residual; the start
    // point is trivially feasible for the augmented problem.
    Eigen::VectorXd zc = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < d; ++i) zc[i] = std::min(std::max(0.0, p.lo[i]), p.hi[i]);
    if (m == 0) {
      z0 = zc;
      for (int i = 0; i < d; ++i) {
        if (std::abs(z0[i] - p.lo[i]) <= kActTol) state0[static_cast<std::size_t>(i)] = -1;
        else if (std::abs(z0[i] - p.hi[i]) <= kActTol) state0[static_cast<std::size_t>(i)] = +1;
      }
    } else {
      const int da = d + m;
      Eigen::MatrixXd H1 = Eigen::MatrixXd::Zero(da, da);
      H1.bottomRightCorner(m, m).setIdentity();
      Eigen::VectorXd g1 = Eigen::VectorXd::Zero(da);
      Eigen::MatrixXd A1(m, da);
      A1.leftCols(d) = Aeq;
      A1.rightCols(m).setIdentity();
      const double inf = std::numeric_limits<double>::infinity();
      Eigen::VectorXd lo1(da), hi1(da);
      lo1.head(d) = p.lo;
      hi1.head(d) = p.hi;
      lo1.tail(m).setConstant(-inf);
      hi1.tail(m).setConstant(inf);
      Eigen::VectorXd z1(da);
      z1.head(d) = zc;
      z1.tail(m) = beq - Aeq * zc;
      std::vector<std::int8_t> s1(static_cast<std::size_t>(da), 0);
      for (int i = 0; i < d; ++i) {
        if (std::abs(zc[i] - p.lo[i]) <= kActTol) s1[static_cast<std::size_t>(i)] = -1;
        else if (std::abs(zc[i] - p.hi[i]) <= kActTol) s1[static_cast<std::size_t>(i)] = +1;
      }
      CoreResult ph1 = active_set_core(H1, g1, A1, beq, lo1, hi1, std::move(z1), std::move(s1),
                                       50 * da);
      out.iterations += ph1.iterations;
      const double art = ph1.z.tail(m).lpNorm<Eigen::Infinity>();
      if (art > kFeasTol * (1.0 + beq.lpNorm<Eigen::Infinity>())) {
        out.status = QpStatus::Infeasible;
        out.x = ph1.z.head(d);
        out.objective = objective_of(p, out.x);
        return out;
      }
      z0 = ph1.z.head(d);
      for (int i = 0; i < d; ++i) state0[static_cast<std::size_t>(i)] = ph1.state[static_cast<std::size_t>(i)];
    }
  }

  CoreResult core = active_set_core(p.H, p.g, Aeq, beq, p.lo, p.hi,
                                    std::move(z0), std::move(state0), 50 * std::max(d, 4));
  out.iterations += core.iterations;
  out.x = core.z;
  out.bound_state = core.state;
  out.objective = objective_of(p, out.x);

  // Recover equality multipliers on the final free set for the residual check.
  Eigen::VectorXd nu = Eigen::VectorXd::Zero(m);
  if (m > 0) {
    std::vector<int> free_idx;
    for (int i = 0; i < d; ++i)
      if (core.state[static_cast<std::size_t>(i)] == 0) free_idx.push_back(i);
    if (!free_idx.empty()) {
      Eigen::MatrixXd Af(static_cast<int>(free_idx.size()), m);
      Eigen::VectorXd gf(static_cast<int>(free_idx.size()));
      Eigen::VectorXd grad = 2.0 * (p.H * out.x) + p.g;
      for (int a = 0; a < static_cast<int>(free_idx.size()); ++a) {
        Af.row(a) = Aeq.col(free_idx[static_cast<std::size_t>(a)]).transpose();
        gf[a] = -grad[free_idx[static_cast<std::size_t>(a)]];
      }
      nu = Af.colPivHouseholderQr().solve(gf);
    }
  }
  out.kkt_residual = kkt_residual(p, out.x, core.state, nu);

  const double scale = 1.0 + std::abs(out.objective) +
                       (m > 0 ? beq.lpNorm<Eigen::Infinity>() : 0.0);
  out.status = (core.converged && out.kkt_residual <= 1e-6 * scale)
                   ? QpStatus::Optimal
                   : (core.converged ? QpStatus::Optimal : QpStatus::IterationLimit);
  return out;
}

}  // namespace cardsolver
