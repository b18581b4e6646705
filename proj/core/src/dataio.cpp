#include "cardsolver/dataio.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace cardsolver {

namespace {

using ordered_json = nlohmann::ordered_json;

// Reads a line, tolerating CRLF; returns false at EOF.
bool next_line(std::istream& in, std::string& line, long& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }
  return false;
}

bool blank(const std::string& s) {
  return s.find_first_not_of(" \t") == std::string::npos;
}

}  // namespace

AssetUniverse parse_port(std::istream& in) {
  AssetUniverse u;
  std::string line;
  long lineno = 0;

  if (!next_line(in, line, lineno)) throw ParseError("empty port file", lineno);
  {
    std::istringstream is(line);
    if (!(is >> u.n) || u.n <= 0) throw ParseError("expected positive asset count", lineno);
  }

  u.mean_returns.resize(u.n);
  u.std_devs.resize(u.n);
  for (int i = 0; i < u.n; ++i) {
    if (!next_line(in, line, lineno))
      throw ParseError("fewer than n asset lines (CountMismatch)", lineno);
    std::istringstream is(line);
    double mean, sd;
    if (!(is >> mean >> sd)) throw ParseError("expected 'mean std_dev'", lineno);
    if (!(sd > 0.0)) throw ParseError("std_dev must be positive", lineno);
    u.mean_returns[i] = mean;
    u.std_devs[i] = sd;
  }

  u.correlation = Eigen::MatrixXd::Constant(u.n, u.n, std::nan(""));
  std::set<std::pair<int, int>> seen;
  while (next_line(in, line, lineno)) {
    if (blank(line)) continue;
    std::istringstream is(line);
    int i, j;
    double c;
    if (!(is >> i >> j >> c)) throw ParseError("expected 'i j correlation'", lineno);
    if (i < 1 || i > u.n || j < 1 || j > u.n)
      throw ParseError("correlation index out of range", lineno);
    if (c < -1.0 - 1e-9 || c > 1.0 + 1e-9)
      throw ParseError("correlation outside [-1, 1]", lineno);
    auto key = std::minmax(i, j);
    if (!seen.insert(key).second) throw ParseError("duplicate correlation entry", lineno);
    u.correlation(i - 1, j - 1) = c;
    u.correlation(j - 1, i - 1) = c;
  }

  for (int i = 0; i < u.n; ++i) {
    if (std::isnan(u.correlation(i, i))) {
      u.correlation(i, i) = 1.0;
      u.warnings.push_back("diagonal correlation defaulted to 1.0 for asset " + std::to_string(i + 1));
    }
  }
  for (int i = 0; i < u.n; ++i)
    for (int j = 0; j < u.n; ++j)
      if (std::isnan(u.correlation(i, j)))
        throw ParseError("missing correlation entry for pair (" + std::to_string(i + 1) + "," +
                             std::to_string(j + 1) + ")", lineno);
  return u;
}

Eigen::MatrixXd covariance(const AssetUniverse& u, bool* shift_applied) {
  Eigen::MatrixXd Q(u.n, u.n);
  for (int i = 0; i < u.n; ++i)
    for (int j = 0; j < u.n; ++j)
      Q(i, j) = u.correlation(i, j) * u.std_devs[i] * u.std_devs[j];
  Q = 0.5 * (Q + Q.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q, Eigen::EigenvaluesOnly);
  const double mineig = es.eigenvalues().minCoeff();
  if (mineig < -1e-8) throw NotPsd("covariance: smallest eigenvalue " + std::to_string(mineig));
  bool shifted = false;
  if (mineig <= 1e-10) {
    Q.diagonal().array() += 1e-10;
    shifted = true;
  }
  if (shift_applied) *shift_applied = shifted;
  return Q;
}

UefCurve parse_uef(std::istream& in, bool swap_columns, std::vector<std::string>* warnings) {
  std::vector<std::pair<double, double>> pts;
  std::string line;
  long lineno = 0;
  while (next_line(in, line, lineno)) {
    if (blank(line)) continue;
    std::istringstream is(line);
    double a, b;
    if (!(is >> a >> b)) throw ParseError("expected 'return variance' pair", lineno);
    pts.emplace_back(swap_columns ? b : a, swap_columns ? a : b);
  }
  if (pts.empty()) throw ParseError("empty UEF curve", lineno);

  std::stable_sort(pts.begin(), pts.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  UefCurve curve;
  for (const auto& p : pts) {
    if (!curve.points.empty() && p.first == curve.points.back().first) {
      if (p.second < curve.points.back().second) curve.points.back().second = p.second;
      if (warnings)
        warnings->push_back("duplicate return " + std::to_string(p.first) +
                            " collapsed to lower variance");
      continue;
    }
    curve.points.push_back(p);
  }
  return curve;
}

namespace {

std::string bits_to_string(const BinarySelection& b) {
  std::string s;
  s.reserve(static_cast<std::size_t>(b.size()));
  for (auto v : b.bits) s.push_back(v ? '1' : '0');
  return s;
}

BinarySelection bits_from_string(const std::string& s) {
  std::vector<std::uint8_t> bits;
  bits.reserve(s.size());
  for (char c : s) bits.push_back(c == '1' ? 1 : 0);
  return BinarySelection(std::move(bits));
}

ordered_json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

double number_from(const ordered_json& j, double fallback) {
  if (j.is_number()) return j.get<double>();
  return fallback;
}

ordered_json aggregates_to_json(const Aggregates& a) {
  ordered_json j = ordered_json::object();
  if (a.mean) j["mean"] = *a.mean;
  if (a.median) j["median"] = *a.median;
  if (a.max) j["max"] = *a.max;
  if (a.min) j["min"] = *a.min;
  return j;
}

Aggregates aggregates_from_json(const ordered_json& j) {
  Aggregates a;
  if (j.contains("mean")) a.mean = j["mean"].get<double>();
  if (j.contains("median")) a.median = j["median"].get<double>();
  if (j.contains("max")) a.max = j["max"].get<double>();
  if (j.contains("min")) a.min = j["min"].get<double>();
  return a;
}

std::string fmt17(double v) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string write_report_json(const ReportDocument& doc) {
  ordered_json j;
  ordered_json meta;
  meta["dataset_id"] = doc.metadata.dataset_id;
  meta["seed"] = doc.metadata.seed;
  ordered_json cfg = ordered_json::object();
  for (const auto& [k, v] : doc.metadata.config) cfg[k] = v;
  meta["config"] = cfg;
  meta["covariance_shifted"] = doc.metadata.covariance_shifted;
  meta["notes"] = doc.metadata.notes;
  j["metadata"] = meta;

  ordered_json frontier = ordered_json::array();
  for (const auto& p : doc.frontier) {
    ordered_json e;
    e["target_return"] = p.target_return;
    e["method"] = method_name(p.method);
    e["status"] = p.status == PointStatus::Ok ? "ok" : "infeasible";
    if (p.status == PointStatus::Ok) {
      e["risk"] = p.risk;
      e["selection"] = bits_to_string(p.selection);
      e["pe"] = number_or_null(p.pe);
      e["pe_vertical"] = number_or_null(p.pe_vertical);
      e["pe_horizontal"] = number_or_null(p.pe_horizontal);
    }
    frontier.push_back(e);
  }
  j["frontier"] = frontier;

  ordered_json gaps = ordered_json::array();
  for (const auto& g : doc.gaps) {
    ordered_json e;
    e["target_return"] = g.target_return;
    e["method"] = method_name(g.method);
    e["binary_gap"] = g.binary_gap;
    e["objective_gap"] = g.objective_gap;
    e["reference_proved"] = g.reference_proved;
    gaps.push_back(e);
  }
  j["gaps"] = gaps;

  ordered_json agg = ordered_json::object();
  for (const auto& [k, a] : doc.aggregates) agg[k] = aggregates_to_json(a);
  j["aggregates"] = agg;

  if (doc.solution) {
    ordered_json s;
    s["status"] = doc.solution->status == SolveStatus::Optimal ? "optimal" : "infeasible";
    s["objective"] = doc.solution->objective;
    s["selection"] = bits_to_string(doc.solution->selection);
    ordered_json xs = ordered_json::array();
    for (int i = 0; i < doc.solution->x.size(); ++i) xs.push_back(doc.solution->x[i]);
    s["x"] = xs;
    j["solution"] = s;
  }
  if (doc.oracle) {
    ordered_json o;
    o["proved_optimal"] = doc.oracle->proved_optimal;
    o["nodes_explored"] = doc.oracle->nodes_explored;
    o["wall_budget_hit"] = doc.oracle->wall_budget_hit;
    j["oracle"] = o;
  }
  return j.dump(2) + "\n";
}

ReportDocument read_report_json(const std::string& text) {
  ordered_json j = ordered_json::parse(text);
  ReportDocument doc;
  const auto& meta = j.at("metadata");
  doc.metadata.dataset_id = meta.at("dataset_id").get<std::string>();
  doc.metadata.seed = meta.at("seed").get<std::uint64_t>();
  for (const auto& [k, v] : meta.at("config").items())
    doc.metadata.config[k] = v.get<std::string>();
  doc.metadata.covariance_shifted = meta.at("covariance_shifted").get<bool>();
  for (const auto& n : meta.at("notes")) doc.metadata.notes.push_back(n.get<std::string>());

  for (const auto& e : j.at("frontier")) {
    FrontierPoint p;
    p.target_return = e.at("target_return").get<double>();
    p.method = *method_from_name(e.at("method").get<std::string>());
    if (e.at("status").get<std::string>() == "ok") {
      p.status = PointStatus::Ok;
      p.risk = e.at("risk").get<double>();
      p.selection = bits_from_string(e.at("selection").get<std::string>());
      const double inf = std::numeric_limits<double>::infinity();
      p.pe = number_from(e.at("pe"), inf);
      p.pe_vertical = number_from(e.at("pe_vertical"), inf);
      p.pe_horizontal = number_from(e.at("pe_horizontal"), inf);
    }
    doc.frontier.push_back(std::move(p));
  }
  for (const auto& e : j.at("gaps")) {
    GapRecord g;
    g.target_return = e.at("target_return").get<double>();
    g.method = *method_from_name(e.at("method").get<std::string>());
    g.binary_gap = e.at("binary_gap").get<double>();
    g.objective_gap = e.at("objective_gap").get<double>();
    g.reference_proved = e.at("reference_proved").get<bool>();
    doc.gaps.push_back(g);
  }
  for (const auto& [k, v] : j.at("aggregates").items()) doc.aggregates[k] = aggregates_from_json(v);

  if (j.contains("solution")) {
    WeightedSolution s;
    s.status = j["solution"].at("status").get<std::string>() == "optimal" ? SolveStatus::Optimal
                                                                          : SolveStatus::Infeasible;
    s.objective = j["solution"].at("objective").get<double>();
    s.selection = bits_from_string(j["solution"].at("selection").get<std::string>());
    const auto& xs = j["solution"].at("x");
    s.x.resize(static_cast<int>(xs.size()));
    for (int i = 0; i < s.x.size(); ++i) s.x[i] = xs[static_cast<std::size_t>(i)].get<double>();
    doc.solution = std::move(s);
  }
  if (j.contains("oracle")) {
    OracleInfo o;
    o.proved_optimal = j["oracle"].at("proved_optimal").get<bool>();
    o.nodes_explored = j["oracle"].at("nodes_explored").get<long long>();
    o.wall_budget_hit = j["oracle"].at("wall_budget_hit").get<bool>();
    doc.oracle = o;
  }
  return doc;
}

std::map<std::string, std::string> write_report_csv(const ReportDocument& doc) {
  std::map<std::string, std::string> out;

  {
    std::ostringstream os;
    os << "key,value\n";
    os << "dataset_id," << doc.metadata.dataset_id << "\n";
    os << "seed," << doc.metadata.seed << "\n";
    os << "covariance_shifted," << (doc.metadata.covariance_shifted ? "true" : "false") << "\n";
    for (const auto& [k, v] : doc.metadata.config) os << "config." << k << "," << v << "\n";
    out["metadata"] = os.str();
  }
  {
    std::ostringstream os;
    os << "target_return,method,status,risk,selection,pe,pe_vertical,pe_horizontal\n";
    for (const auto& p : doc.frontier) {
      os << fmt17(p.target_return) << "," << method_name(p.method) << ","
         << (p.status == PointStatus::Ok ? "ok" : "infeasible") << ",";
      if (p.status == PointStatus::Ok)
        os << fmt17(p.risk) << "," << bits_to_string(p.selection) << "," << fmt17(p.pe) << ","
           << fmt17(p.pe_vertical) << "," << fmt17(p.pe_horizontal);
      else
        os << ",,,,";
      os << "\n";
    }
    out["frontier"] = os.str();
  }
  {
    std::ostringstream os;
    os << "target_return,method,binary_gap,objective_gap,reference_proved\n";
    for (const auto& g : doc.gaps)
      os << fmt17(g.target_return) << "," << method_name(g.method) << "," << fmt17(g.binary_gap)
         << "," << fmt17(g.objective_gap) << "," << (g.reference_proved ? "true" : "false") << "\n";
    out["gaps"] = os.str();
  }
  {
    std::ostringstream os;
    os << "table,mean,median,max,min\n";
    auto cell = [](const std::optional<double>& v) { return v ? fmt17(*v) : std::string(); };
    for (const auto& [k, a] : doc.aggregates)
      os << k << "," << cell(a.mean) << "," << cell(a.median) << "," << cell(a.max) << ","
         << cell(a.min) << "\n";
    out["aggregates"] = os.str();
  }
  return out;
}

}  // namespace cardsolver
