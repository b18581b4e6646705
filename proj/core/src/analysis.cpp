#include "cardsolver/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace cardsolver {

const char* method_name(Method m) {
  switch (m) {
    case Method::Line: return "line";
    case Method::Dual: return "dual";
    case Method::Augm: return "augm";
    case Method::Ours: return "ours";
    case Method::Exact: return "exact";
  }
  return "?";
}

std::optional<Method> method_from_name(const std::string& name) {
  if (name == "line") return Method::Line;
  if (name == "dual") return Method::Dual;
  if (name == "augm") return Method::Augm;
  if (name == "ours") return Method::Ours;
  if (name == "exact") return Method::Exact;
  return std::nullopt;
}

Aggregates Aggregates::of(const std::vector<double>& values) {
  Aggregates a;
  if (values.empty()) return a;
  std::vector<double> v = values;
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  a.mean = sum / static_cast<double>(v.size());
  const std::size_t mid = v.size() / 2;
  a.median = (v.size() % 2 == 1) ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
  a.min = v.front();
  a.max = v.back();
  return a;
}

double binary_gap(const BinarySelection& b1, const BinarySelection& b2) {
  if (b1.size() != b2.size()) throw LengthMismatch("binary_gap: selection lengths differ");
  int diff = 0;
  for (int i = 0; i < b1.size(); ++i)
    diff += (b1.bits[static_cast<std::size_t>(i)] != b2.bits[static_cast<std::size_t>(i)]);
  return 0.5 * static_cast<double>(diff);
}

double objective_gap(double obj, double obj_ref) {
  if (!(obj_ref > 0.0)) throw NonpositiveReference("objective_gap: reference must be positive");
  return (obj - obj_ref) / obj_ref;
}

namespace {

// Piecewise-linear variance at the given return; requires r in the domain.
double uef_variance_at(const UefCurve& uef, double r) {
  const auto& pts = uef.points;
  if (pts.empty() || r < pts.front().first - 1e-12 || r > pts.back().first + 1e-12)
    throw OutOfRange("percentage_error: return outside UEF domain");
  if (pts.size() == 1) return pts.front().second;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (r <= pts[i + 1].first + 1e-12) {
      const double r0 = pts[i].first, r1 = pts[i + 1].first;
      const double v0 = pts[i].second, v1 = pts[i + 1].second;
      if (r1 - r0 <= 0.0) return v0;
      const double t = std::min(std::max((r - r0) / (r1 - r0), 0.0), 1.0);
      return v0 + t * (v1 - v0);
    }
  }
  return pts.back().second;
}

// Inverse interpolation: return at the given variance, first bracketing
// segment wins. Empty when the variance is outside every segment.
std::optional<double> uef_return_at(const UefCurve& uef, double v) {
  const auto& pts = uef.points;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double v0 = pts[i].second, v1 = pts[i + 1].second;
    const double lo = std::min(v0, v1), hi = std::max(v0, v1);
    if (v >= lo - 1e-15 && v <= hi + 1e-15) {
      if (std::abs(v1 - v0) < 1e-300) return pts[i].first;
      const double t = (v - v0) / (v1 - v0);
      return pts[i].first + t * (pts[i + 1].first - pts[i].first);
    }
  }
  return std::nullopt;
}

}  // namespace

double percentage_error(const FrontierPoint& point, const UefCurve& uef) {
  if (point.status != PointStatus::Ok)
    throw OutOfRange("percentage_error: point is not Ok");
  const double v_line = uef_variance_at(uef, point.target_return);
  const double vertical = std::abs(point.risk - v_line) / std::abs(v_line) * 100.0;

  double horizontal = std::numeric_limits<double>::infinity();
  if (auto r_line = uef_return_at(uef, point.risk); r_line.has_value() && point.target_return != 0.0)
    horizontal = std::abs(point.target_return - *r_line) / std::abs(point.target_return) * 100.0;

  return std::min(vertical, horizontal);
}

namespace {

struct TargetOutcome {
  std::vector<FrontierPoint> points;
  std::optional<ExactResult> reference;
};

TargetOutcome run_target(const Eigen::VectorXd& mean_returns, const Eigen::MatrixXd& Q,
                         double target, const SweepConfig& cfg, std::uint64_t target_seed) {
  TargetOutcome out;

  MvSpec spec;
  spec.n = static_cast<int>(mean_returns.size());
  spec.returns = mean_returns;
  spec.target_return = target;
  spec.k = cfg.k;
  spec.lower = cfg.lower;
  spec.upper = cfg.upper;
  ProblemInstance inst = build_from_mv(spec, Q);
  FitnessEvaluator eval(inst);

  auto emit = [&](Method m, const WeightedSolution& ws) {
    FrontierPoint p;
    p.target_return = target;
    p.method = m;
    if (ws.status == SolveStatus::Optimal) {
      p.status = PointStatus::Ok;
      p.risk = ws.objective;
      p.selection = ws.selection;
    }
    out.points.push_back(std::move(p));
  };
  auto emit_infeasible = [&](Method m) {
    FrontierPoint p;
    p.target_return = target;
    p.method = m;
    out.points.push_back(std::move(p));
  };

  // Each relaxation is solved once and shared between its own frontier
  // point and the pipeline's starting pool.
  const bool want_ours = cfg.methods.count(Method::Ours) > 0;
  std::vector<BinarySelection> relax_sels;
  for (Method m : {Method::Line, Method::Dual, Method::Augm}) {
    const bool wanted = cfg.methods.count(m) > 0;
    if (!wanted && !want_ours) continue;
    try {
      RelaxationOutcome r;
      if (m == Method::Line)
        r = solve_line(inst, cfg.k);
      else if (m == Method::Dual)
        r = solve_dual(inst, cfg.dual);
      else
        r = solve_augm(inst, cfg.lambda_g, cfg.dual);
      relax_sels.push_back(r.selection);
      if (wanted) emit(m, eval.solve_restricted(r.selection));
    } catch (const RelaxationInfeasible&) {
      if (wanted) emit_infeasible(m);
    }
  }

  if (want_ours) {
    PoolConfig pool = cfg.pool;
    pool.seed = target_seed;
    VnsConfig vns = cfg.vns;
    vns.seed = derive_seed(target_seed, "vns-root");
    try {
      emit(Method::Ours, solve_pipeline(inst, relax_sels, pool, cfg.ga, vns));
    } catch (const PipelineInfeasible&) {
      emit_infeasible(Method::Ours);
    } catch (const EmptyPool&) {
      emit_infeasible(Method::Ours);
    }
  }

  if (cfg.methods.count(Method::Exact)) {
    ExactResult er = branch_and_bound(inst, cfg.node_budget, cfg.time_budget_s);
    emit(Method::Exact, er.solution);
    out.reference = std::move(er);
  }

  return out;
}

}  // namespace

SweepResult sweep_frontier(const Eigen::VectorXd& mean_returns, const Eigen::MatrixXd& Q,
                           const UefCurve& uef, const SweepConfig& cfg) {
  if (uef.points.empty()) throw DatasetMissing("sweep_frontier: empty UEF curve");
  const int count = cfg.count;
  if (count < 1) throw InvalidBounds("sweep_frontier: count >= 1 required");

  const double rmin = uef.min_return();
  const double rmax = uef.max_return();
  std::vector<double> targets(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    targets[static_cast<std::size_t>(i)] =
        (count == 1) ? rmin : rmin + (rmax - rmin) * static_cast<double>(i) / (count - 1);

  std::vector<TargetOutcome> outcomes(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  const int jobs = std::max(1, std::min(cfg.jobs, count));
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      outcomes[static_cast<std::size_t>(i)] =
          run_target(mean_returns, Q, targets[static_cast<std::size_t>(i)], cfg,
                     derive_seed(cfg.seed, "target", static_cast<std::uint64_t>(i)));
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  SweepResult res;
  std::map<Method, std::vector<double>> pe_values;
  std::map<Method, std::vector<double>> bgap_values, ogap_values;

  for (auto& oc : outcomes) {
    for (auto& p : oc.points) {
      if (p.status == PointStatus::Ok) {
        try {
          const double v_line = uef_variance_at(uef, p.target_return);
          p.pe_vertical = std::abs(p.risk - v_line) / std::abs(v_line) * 100.0;
          auto r_line = uef_return_at(uef, p.risk);
          p.pe_horizontal = (r_line.has_value() && p.target_return != 0.0)
                                ? std::abs(p.target_return - *r_line) / std::abs(p.target_return) * 100.0
                                : std::numeric_limits<double>::infinity();
          p.pe = std::min(p.pe_vertical, p.pe_horizontal);
          pe_values[p.method].push_back(p.pe);
        } catch (const OutOfRange&) {
          // target fell outside the UEF domain; excluded from aggregates
        }
      }
      res.points.push_back(p);
    }

    if (oc.reference.has_value()) {
      const ExactResult& er = *oc.reference;
      ++res.gaps.references_total;
      if (er.proved_optimal) ++res.gaps.references_proved;
      if (er.solution.status != SolveStatus::Optimal) continue;
      for (const auto& p : oc.points) {
        if (p.method == Method::Exact || p.status != PointStatus::Ok) continue;
        GapRecord rec;
        rec.target_return = p.target_return;
        rec.method = p.method;
        rec.reference_proved = er.proved_optimal;
        rec.binary_gap = binary_gap(p.selection, er.solution.selection);
        rec.objective_gap = objective_gap(p.risk, er.solution.objective);
        bgap_values[p.method].push_back(rec.binary_gap);
        ogap_values[p.method].push_back(rec.objective_gap);
        res.gaps.records.push_back(std::move(rec));
      }
    }
  }

  for (auto& [m, v] : pe_values) res.pe_stats[m] = Aggregates::of(v);
  for (auto& [m, v] : bgap_values) res.gaps.binary_gap_stats[m] = Aggregates::of(v);
  for (auto& [m, v] : ogap_values) res.gaps.objective_gap_stats[m] = Aggregates::of(v);
  return res;
}

}  // namespace cardsolver
