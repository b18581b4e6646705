// Synthesizes a benchmark-format dataset plus its efficient-frontier
// companion file. Assets follow a one-factor correlation structure with
// weekly-return scale statistics; the frontier is computed from the
// cardinality-free model (budget + target return, weights in [0,1]).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <vector>

#include <CLI11.hpp>

#include "cardsolver/dataio.hpp"
#include "cardsolver/qp.hpp"

namespace cs = cardsolver;

namespace {

struct Universe {
  Eigen::VectorXd mean, sd, loading;
};

Universe sample_universe(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  // Two tiers, echoing real equity universes: a core of calm assets with a
  // wide return spread that carries the efficient frontier, and a dominated
  // high-volatility fringe. Efficient portfolios then live on roughly a
  // dozen names across the whole frontier.
  const int core = std::max(12, n / 10);
  std::uniform_real_distribution<double> core_ret(0.001, 0.008);
  std::uniform_real_distribution<double> core_sd(0.015, 0.025);
  std::uniform_real_distribution<double> core_load(0.3, 0.5);
  std::uniform_real_distribution<double> fringe_ret(-0.002, 0.003);
  std::uniform_real_distribution<double> fringe_sd(0.04, 0.08);
  std::uniform_real_distribution<double> fringe_load(0.5, 0.9);
  Universe u;
  u.mean.resize(n);
  u.sd.resize(n);
  u.loading.resize(n);
  for (int i = 0; i < n; ++i) {
    if (i < core) {
      u.mean[i] = core_ret(rng);
      u.sd[i] = core_sd(rng);
      u.loading[i] = core_load(rng);
    } else {
      u.mean[i] = fringe_ret(rng);
      u.sd[i] = fringe_sd(rng);
      u.loading[i] = fringe_load(rng);
    }
  }
  // Shuffle so tier membership is not positional.
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Universe shuffled = u;
  for (int i = 0; i < n; ++i) {
    shuffled.mean[i] = u.mean[perm[static_cast<std::size_t>(i)]];
    shuffled.sd[i] = u.sd[perm[static_cast<std::size_t>(i)]];
    shuffled.loading[i] = u.loading[perm[static_cast<std::size_t>(i)]];
  }
  return shuffled;
}

double corr(const Universe& u, int i, int j) {
  return i == j ? 1.0 : u.loading[i] * u.loading[j];
}

int write_port(const Universe& u, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) {
    std::cerr << "cannot write " << path << "\n";
    return 1;
  }
  const int n = static_cast<int>(u.mean.size());
  std::fprintf(f, "%d\n", n);
  for (int i = 0; i < n; ++i) std::fprintf(f, "%.6f %.6f\n", u.mean[i], u.sd[i]);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) std::fprintf(f, "%d %d %.6f\n", i + 1, j + 1, corr(u, i, j));
  std::fclose(f);
  return 0;
}

// Minimum variance subject to budget, target return, and 0 <= x <= 1.
double frontier_variance(const Eigen::MatrixXd& Q, const Eigen::VectorXd& r, double target,
                         bool* ok) {
  const int n = static_cast<int>(r.size());
  cs::QpProblem qp;
  qp.H = Q;
  qp.g = Eigen::VectorXd::Zero(n);
  qp.Aeq.resize(2, n);
  qp.Aeq.row(0) = r.transpose();
  qp.Aeq.row(1) = Eigen::RowVectorXd::Ones(n);
  qp.beq.resize(2);
  qp.beq << target, 1.0;
  qp.lo = Eigen::VectorXd::Zero(n);
  qp.hi = Eigen::VectorXd::Ones(n);
  cs::QpResult res = cs::solve_qp(qp);
  *ok = res.status == cs::QpStatus::Optimal;
  return res.objective;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic benchmark dataset generator"};
  int n = 31;
  std::uint64_t seed = 1;
  int points = 200;
  int k_cap = 10;
  double lower_cap = 0.01;
  std::string out, uef_out;
  app.add_option("--n", n, "number of assets")->required();
  app.add_option("--seed", seed, "generator seed");
  app.add_option("--points", points, "frontier sample count");
  app.add_option("--k", k_cap, "cardinality used to cap the frontier domain");
  app.add_option("--lower", lower_cap, "per-asset lower bound used for the cap");
  app.add_option("--out", out, "port file path")->required();
  app.add_option("--uef-out", uef_out, "frontier file path");
  CLI11_PARSE(app, argc, argv);

  Universe u = sample_universe(n, seed);
  if (int rc = write_port(u, out); rc != 0) return rc;

  if (!uef_out.empty()) {
    // Re-read so the frontier matches the file's rounded statistics.
    std::ifstream f(out);
    cs::AssetUniverse au = cs::parse_port(f);
    Eigen::MatrixXd Q = cs::covariance(au);
    const Eigen::VectorXd& r = au.mean_returns;

    // Efficient segment: from the min-variance portfolio's return up to the
    // best single-asset return.
    cs::QpProblem mv;
    mv.H = Q;
    mv.g = Eigen::VectorXd::Zero(n);
    mv.Aeq = Eigen::RowVectorXd::Ones(n);
    mv.beq = Eigen::VectorXd::Ones(1);
    mv.lo = Eigen::VectorXd::Zero(n);
    mv.hi = Eigen::VectorXd::Ones(n);
    cs::QpResult gmv = cs::solve_qp(mv);
    if (gmv.status != cs::QpStatus::Optimal) {
      std::cerr << "min-variance solve failed\n";
      return 1;
    }
    // The cardinality model carries an exact return constraint, so the
    // usable domain is trimmed at both ends: below the constrained
    // min-variance return the constrained frontier bends away from the
    // unconstrained one, and near the best asset's return exactly-k
    // portfolios cannot follow it either.
    const double r_gmv = r.dot(gmv.x);
    // Proxy for the constrained min-variance return: keep the k largest
    // min-variance weights, floor them at `lower`, renormalize.
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return gmv.x[a] > gmv.x[b]; });
    Eigen::VectorXd w_proxy = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < k_cap && i < n; ++i) {
      const int a = order[static_cast<std::size_t>(i)];
      w_proxy[a] = std::max(gmv.x[a], lower_cap);
    }
    w_proxy /= w_proxy.sum();
    const double r0 = std::max(r_gmv, r.dot(w_proxy));

    std::vector<double> sorted(r.data(), r.data() + n);
    std::sort(sorted.rbegin(), sorted.rend());
    double rmax_c = (1.0 - (k_cap - 1) * lower_cap) * sorted[0];
    for (int i = 1; i < k_cap && i < n; ++i) rmax_c += lower_cap * sorted[static_cast<std::size_t>(i)];
    const double r1 = r0 + 0.90 * (rmax_c - r0);

    std::FILE* f2 = std::fopen(uef_out.c_str(), "wb");
    if (!f2) {
      std::cerr << "cannot write " << uef_out << "\n";
      return 1;
    }
    for (int i = 0; i < points; ++i) {
      const double t = r0 + (r1 - r0) * static_cast<double>(i) / (points - 1);
      bool ok = false;
      const double v = frontier_variance(Q, r, t, &ok);
      if (ok) std::fprintf(f2, "%.12g %.12g\n", t, v);
    }
    std::fclose(f2);
  }
  return 0;
}
