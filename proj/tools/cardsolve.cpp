// Command-line front end: solve / frontier / gaps / oracle.
//
// Exit codes: 0 ok, 1 input error, 2 infeasible, 3 oracle guard.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cardsolver/analysis.hpp"
#include "cardsolver/dataio.hpp"
#include "cardsolver/exact.hpp"
#include "cardsolver/heuristic.hpp"
#include "cardsolver/model.hpp"

namespace cs = cardsolver;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitOracleGuard = 3;

struct Options {
  std::string dataset;
  std::string uef;
  bool uef_swap_columns = false;
  int k = 10;
  double lower = 0.01;
  double upper = 1.0;
  double target_return = std::numeric_limits<double>::quiet_NaN();
  int sweep = 50;
  std::string methods = "line,dual,augm,ours";
  double lambda_g = 1e-7;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out;
  std::string format = "json";

  int m_random = 100;
  int perturbations = 10;
  double retain = 0.5;
  double mutation = 0.1;
  double spread = 0.01;
  int generations = 200;
  int vns_limit = 100;
  int ascent_iters = 500;
  double step0 = 1.0;
  double penalty_weight = 10.0;

  long long nodes = 1000000;
  double time_s = 0.0;
  bool have_nodes = false;
  bool have_time = false;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::map<std::string, std::string> config_echo(const Options& o) {
  std::map<std::string, std::string> c;
  c["dataset"] = o.dataset;
  c["uef"] = o.uef;
  c["k"] = std::to_string(o.k);
  c["lower"] = fmt(o.lower);
  c["upper"] = fmt(o.upper);
  if (std::isfinite(o.target_return)) c["return"] = fmt(o.target_return);
  c["sweep"] = std::to_string(o.sweep);
  c["methods"] = o.methods;
  c["lambda_g"] = fmt(o.lambda_g);
  c["seed"] = std::to_string(o.seed);
  // --jobs is deliberately absent: it changes scheduling only, and reports
  // must not depend on it.
  c["m_random"] = std::to_string(o.m_random);
  c["perturbations"] = std::to_string(o.perturbations);
  c["retain"] = fmt(o.retain);
  c["mutation"] = fmt(o.mutation);
  c["spread"] = fmt(o.spread);
  c["generations"] = std::to_string(o.generations);
  c["vns_limit"] = std::to_string(o.vns_limit);
  c["ascent_iters"] = std::to_string(o.ascent_iters);
  c["step0"] = fmt(o.step0);
  c["penalty_weight"] = fmt(o.penalty_weight);
  c["nodes"] = std::to_string(o.nodes);
  c["time_s"] = fmt(o.time_s);
  return c;
}

cs::SweepConfig sweep_config(const Options& o) {
  cs::SweepConfig cfg;
  cfg.count = o.sweep;
  cfg.k = o.k;
  cfg.lower = o.lower;
  cfg.upper = o.upper;
  cfg.lambda_g = o.lambda_g;
  cfg.pool.m_random = o.m_random;
  cfg.pool.perturbations_per_relax = o.perturbations;
  cfg.ga.retain_fraction = o.retain;
  cfg.ga.mutation_prob = o.mutation;
  cfg.ga.spread_threshold = o.spread;
  cfg.ga.max_generations = o.generations;
  cfg.vns.max_non_improving = o.vns_limit;
  cfg.dual.max_iters = o.ascent_iters;
  cfg.dual.step0 = o.step0;
  cfg.dual.penalty_weight = o.penalty_weight;
  cfg.seed = o.seed;
  cfg.jobs = o.jobs;
  cfg.node_budget = o.nodes;
  cfg.time_budget_s = o.time_s;
  return cfg;
}

int parse_methods(const std::string& spec, std::set<cs::Method>* out) {
  out->clear();
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    auto m = cs::method_from_name(tok);
    if (!m) {
      std::cerr << "unknown method: " << tok << "\n";
      return kExitInput;
    }
    out->insert(*m);
  }
  if (out->empty()) {
    std::cerr << "no methods selected\n";
    return kExitInput;
  }
  return kExitOk;
}

int emit_report(const cs::ReportDocument& doc, const Options& o) {
  if (o.format == "json") {
    const std::string text = cs::write_report_json(doc);
    if (o.out.empty()) {
      std::cout << text;
    } else {
      std::ofstream f(o.out, std::ios::binary);
      if (!f) {
        std::cerr << "cannot write " << o.out << "\n";
        return kExitInput;
      }
      f << text;
    }
    return kExitOk;
  }
  if (o.format == "csv") {
    if (o.out.empty()) {
      std::cerr << "--out is required with --format csv\n";
      return kExitInput;
    }
    std::filesystem::path base(o.out);
    std::filesystem::path stem = base.parent_path() / base.stem();
    for (const auto& [table, content] : cs::write_report_csv(doc)) {
      std::filesystem::path p = stem;
      p += "_" + table + ".csv";
      std::ofstream f(p, std::ios::binary);
      if (!f) {
        std::cerr << "cannot write " << p.string() << "\n";
        return kExitInput;
      }
      f << content;
    }
    return kExitOk;
  }
  std::cerr << "unknown format: " << o.format << "\n";
  return kExitInput;
}

struct LoadedData {
  cs::AssetUniverse universe;
  Eigen::MatrixXd Q;
  bool shifted = false;
  cs::UefCurve uef;  // empty unless requested
};

int load_data(const Options& o, bool need_uef, LoadedData* data) {
  std::ifstream f(o.dataset);
  if (!f) {
    std::cerr << "cannot read dataset " << o.dataset << "\n";
    return kExitInput;
  }
  try {
    data->universe = cs::parse_port(f);
    data->Q = cs::covariance(data->universe, &data->shifted);
  } catch (const cs::Error& e) {
    std::cerr << "dataset error: " << e.what() << "\n";
    return kExitInput;
  }
  if (need_uef) {
    if (o.uef.empty()) {
      std::cerr << "--uef is required for this command\n";
      return kExitInput;
    }
    std::ifstream uf(o.uef);
    if (!uf) {
      std::cerr << "cannot read UEF " << o.uef << "\n";
      return kExitInput;
    }
    try {
      data->uef = cs::parse_uef(uf, o.uef_swap_columns);
    } catch (const cs::Error& e) {
      std::cerr << "UEF error: " << e.what() << "\n";
      return kExitInput;
    }
  }
  return kExitOk;
}

cs::ReportDocument base_report(const Options& o, const LoadedData& data) {
  cs::ReportDocument doc;
  doc.metadata.dataset_id = std::filesystem::path(o.dataset).stem().string();
  doc.metadata.seed = o.seed;
  doc.metadata.config = config_echo(o);
  doc.metadata.covariance_shifted = data.shifted;
  for (const auto& w : data.universe.warnings) doc.metadata.notes.push_back(w);
  doc.metadata.notes.push_back("returns treated as-published");
  return doc;
}

int cmd_solve(const Options& o) {
  if (!std::isfinite(o.target_return)) {
    std::cerr << "--return is required for solve\n";
    return kExitInput;
  }
  LoadedData data;
  if (int rc = load_data(o, false, &data); rc != kExitOk) return rc;

  cs::MvSpec spec;
  spec.n = data.universe.n;
  spec.returns = data.universe.mean_returns;
  spec.target_return = o.target_return;
  spec.k = o.k;
  spec.lower = o.lower;
  spec.upper = o.upper;

  try {
    cs::ProblemInstance inst = cs::build_from_mv(spec, data.Q);
    cs::SweepConfig cfg = sweep_config(o);
    cs::PoolConfig pool = cfg.pool;
    pool.seed = cs::derive_seed(o.seed, "target", 0);
    cs::VnsConfig vns = cfg.vns;
    vns.seed = cs::derive_seed(pool.seed, "vns-root");
    cs::WeightedSolution ws = cs::solve_pipeline(inst, pool, cfg.ga, vns, cfg.dual, o.lambda_g);

    cs::ReportDocument doc = base_report(o, data);
    doc.solution = ws;
    return emit_report(doc, o);
  } catch (const cs::PipelineInfeasible& e) {
    std::cerr << e.what() << "\n";
    return kExitInfeasible;
  } catch (const cs::EmptyPool& e) {
    std::cerr << e.what() << "\n";
    return kExitInfeasible;
  } catch (const cs::Error& e) {
    std::cerr << e.what() << "\n";
    return kExitInput;
  }
}

int cmd_frontier(const Options& o, bool with_exact) {
  LoadedData data;
  if (int rc = load_data(o, true, &data); rc != kExitOk) return rc;

  cs::SweepConfig cfg = sweep_config(o);
  if (int rc = parse_methods(o.methods, &cfg.methods); rc != kExitOk) return rc;
  if (with_exact) cfg.methods.insert(cs::Method::Exact);

  try {
    cs::SweepResult sr = cs::sweep_frontier(data.universe.mean_returns, data.Q, data.uef, cfg);
    cs::ReportDocument doc = base_report(o, data);
    doc.frontier = sr.points;
    doc.gaps = sr.gaps.records;
    for (const auto& [m, a] : sr.pe_stats) doc.aggregates["pe/" + std::string(cs::method_name(m))] = a;
    for (const auto& [m, a] : sr.gaps.binary_gap_stats)
      doc.aggregates["binary_gap/" + std::string(cs::method_name(m))] = a;
    for (const auto& [m, a] : sr.gaps.objective_gap_stats)
      doc.aggregates["objective_gap/" + std::string(cs::method_name(m))] = a;
    if (with_exact) {
      doc.metadata.notes.push_back("references proved optimal: " +
                                   std::to_string(sr.gaps.references_proved) + "/" +
                                   std::to_string(sr.gaps.references_total));
    }
    return emit_report(doc, o);
  } catch (const cs::Error& e) {
    std::cerr << e.what() << "\n";
    return kExitInput;
  }
}

int cmd_oracle(const Options& o) {
  if (!std::isfinite(o.target_return)) {
    std::cerr << "--return is required for oracle\n";
    return kExitInput;
  }
  LoadedData data;
  if (int rc = load_data(o, false, &data); rc != kExitOk) return rc;

  cs::MvSpec spec;
  spec.n = data.universe.n;
  spec.returns = data.universe.mean_returns;
  spec.target_return = o.target_return;
  spec.k = o.k;
  spec.lower = o.lower;
  spec.upper = o.upper;

  try {
    cs::ProblemInstance inst = cs::build_from_mv(spec, data.Q);
    cs::ExactResult er;
    if (o.have_nodes || o.have_time) {
      er = cs::branch_and_bound(inst, o.nodes, o.time_s);
    } else {
      try {
        er = cs::brute_force(inst);
      } catch (const cs::TooLarge& e) {
        std::cerr << e.what() << " (set --nodes/--time-s to run branch and bound)\n";
        return kExitOracleGuard;
      }
    }
    cs::ReportDocument doc = base_report(o, data);
    if (er.solution.status == cs::SolveStatus::Optimal) doc.solution = er.solution;
    doc.oracle = cs::OracleInfo{er.proved_optimal, er.nodes_explored, er.wall_budget_hit};
    return emit_report(doc, o);
  } catch (const cs::Error& e) {
    std::cerr << e.what() << "\n";
    return kExitInput;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cardinality-constrained MIQP solver"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* c, bool needs_uef) {
    c->add_option("--dataset", o.dataset, "port-format dataset file")->required();
    if (needs_uef) c->add_option("--uef", o.uef, "efficient-frontier file (return variance)");
    c->add_flag("--uef-swap-columns", o.uef_swap_columns, "UEF columns are (variance return)");
    c->add_option("--k", o.k, "cardinality");
    c->add_option("--lower", o.lower, "per-asset lower bound");
    c->add_option("--upper", o.upper, "per-asset upper bound");
    c->add_option("--lambda-g", o.lambda_g, "augmented-model penalty weight");
    c->add_option("--seed", o.seed, "root RNG seed");
    c->add_option("--jobs", o.jobs, "worker parallelism");
    c->add_option("--out", o.out, "output path (stdout when omitted, json only)");
    c->add_option("--format", o.format, "json|csv");
    c->add_option("--m-random", o.m_random, "random pool entries");
    c->add_option("--perturbations", o.perturbations, "perturbations per relaxation selection");
    c->add_option("--retain", o.retain, "GA retain fraction");
    c->add_option("--mutation", o.mutation, "GA mutation probability");
    c->add_option("--spread", o.spread, "GA spread threshold");
    c->add_option("--generations", o.generations, "GA generation cap");
    c->add_option("--vns-limit", o.vns_limit, "VNS non-improving limit");
    c->add_option("--ascent-iters", o.ascent_iters, "dual ascent iterations");
    c->add_option("--step0", o.step0, "dual ascent initial step");
    c->add_option("--penalty-weight", o.penalty_weight, "dual ascent sign penalty");
  };

  CLI::App* solve = app.add_subcommand("solve", "run the full pipeline at one target return");
  add_common(solve, false);
  solve->add_option("--return", o.target_return, "target portfolio return");

  CLI::App* frontier = app.add_subcommand("frontier", "sweep target returns across the UEF");
  add_common(frontier, true);
  frontier->add_option("--sweep", o.sweep, "number of frontier targets");
  frontier->add_option("--methods", o.methods, "comma-separated: line,dual,augm,ours");

  CLI::App* gaps = app.add_subcommand("gaps", "frontier sweep with exact references and gap tables");
  add_common(gaps, true);
  gaps->add_option("--sweep", o.sweep, "number of frontier targets");
  gaps->add_option("--methods", o.methods, "comma-separated: line,dual,augm,ours");
  gaps->add_option("--nodes", o.nodes, "branch-and-bound node budget per target");
  gaps->add_option("--time-s", o.time_s, "branch-and-bound time budget per target (seconds)");

  CLI::App* oracle = app.add_subcommand("oracle", "exact reference solve at one target return");
  add_common(oracle, false);
  oracle->add_option("--return", o.target_return, "target portfolio return");
  auto* nopt = oracle->add_option("--nodes", o.nodes, "node budget (enables branch and bound)");
  auto* topt = oracle->add_option("--time-s", o.time_s, "time budget in seconds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  o.have_nodes = nopt->count() > 0;
  o.have_time = topt->count() > 0;

  if (solve->parsed()) return cmd_solve(o);
  if (frontier->parsed()) return cmd_frontier(o, false);
  if (gaps->parsed()) return cmd_frontier(o, true);
  if (oracle->parsed()) return cmd_oracle(o);
  return kExitInput;
}
