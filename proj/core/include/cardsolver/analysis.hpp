#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "cardsolver/exact.hpp"
#include "cardsolver/heuristic.hpp"
#include "cardsolver/model.hpp"

namespace cardsolver {

enum class Method { Line, Dual, Augm, Ours, Exact };

const char* method_name(Method m);
std::optional<Method> method_from_name(const std::string& name);

enum class PointStatus { Ok, Infeasible };

struct FrontierPoint {
  double target_return = 0.0;
  double risk = 0.0;  // objective v of the returned solution
  BinarySelection selection;
  Method method = Method::Ours;
  PointStatus status = PointStatus::Infeasible;
  // Both deviation components, so either percentage-error convention can be
  // recomputed from the report.
  double pe = 0.0;
  double pe_vertical = 0.0;
  double pe_horizontal = 0.0;
};

/// Return/variance pairs, strictly increasing in return.
struct UefCurve {
  std::vector<std::pair<double, double>> points;

  double min_return() const { return points.front().first; }
  double max_return() const { return points.back().first; }
};

struct GapRecord {
  double target_return = 0.0;
  Method method = Method::Ours;
  double binary_gap = 0.0;
  double objective_gap = 0.0;
  bool reference_proved = false;
};

struct Aggregates {
  std::optional<double> mean, median, max, min;

  static Aggregates of(const std::vector<double>& values);
};

struct GapReport {
  std::vector<GapRecord> records;
  std::map<Method, Aggregates> binary_gap_stats;
  std::map<Method, Aggregates> objective_gap_stats;
  int references_proved = 0;
  int references_total = 0;
};

double binary_gap(const BinarySelection& b1, const BinarySelection& b2);

double objective_gap(double obj, double obj_ref);

/// min(vertical, horizontal) relative deviation from the interpolated UEF,
/// in percent.
double percentage_error(const FrontierPoint& point, const UefCurve& uef);

struct SweepConfig {
  int count = 50;
  int k = 10;
  double lower = 0.01;
  double upper = 1.0;
  double lambda_g = 1e-7;
  std::set<Method> methods = {Method::Line, Method::Dual, Method::Augm, Method::Ours};
  PoolConfig pool;
  GaConfig ga;
  VnsConfig vns;
  DualAscentParams dual;
  std::uint64_t seed = 0;
  int jobs = 1;
  // Exact-reference budgets (cmd_gaps); Method::Exact must be in `methods`.
  long long node_budget = 1000000;
  double time_budget_s = 0.0;
};

struct SweepResult {
  std::vector<FrontierPoint> points;  // ordered by target return, then method
  std::map<Method, Aggregates> pe_stats;
  GapReport gaps;  // populated when Method::Exact was requested
};

/// count equally spaced target returns across the UEF domain; each target is
/// an independent job (parallelized by cfg.jobs, output order deterministic).
SweepResult sweep_frontier(const Eigen::VectorXd& mean_returns, const Eigen::MatrixXd& Q,
                           const UefCurve& uef, const SweepConfig& cfg);

}  // namespace cardsolver
