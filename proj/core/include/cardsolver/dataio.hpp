#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cardsolver/analysis.hpp"
#include "cardsolver/model.hpp"

namespace cardsolver {

/// Per-asset statistics parsed from an OR-Library style "port" file.
struct AssetUniverse {
  int n = 0;
  Eigen::VectorXd mean_returns;
  Eigen::VectorXd std_devs;
  Eigen::MatrixXd correlation;
  std::vector<std::string> warnings;  // e.g. defaulted diagonal entries
};

/// Format: line 1 = n; n lines "mean std"; then "i j corr" (1-based upper
/// triangle including the diagonal).
AssetUniverse parse_port(std::istream& in);

/// Q_ij = corr_ij * sd_i * sd_j, symmetrized. A tiny diagonal shift is
/// applied when the smallest eigenvalue sits in (-1e-8, 1e-10]; the flag
/// records it for report metadata.
Eigen::MatrixXd covariance(const AssetUniverse& u, bool* shift_applied = nullptr);

/// Whitespace-separated "return variance" pairs, one per line. swap_columns
/// reads "variance return" instead.
UefCurve parse_uef(std::istream& in, bool swap_columns = false,
                   std::vector<std::string>* warnings = nullptr);

enum class ReportFormat { Json, Csv };

struct ReportMetadata {
  std::string dataset_id;
  std::uint64_t seed = 0;
  // Flattened config echo; enough to reproduce the run from the report.
  std::map<std::string, std::string> config;
  bool covariance_shifted = false;
  std::vector<std::string> notes;
};

struct OracleInfo {
  bool proved_optimal = false;
  long long nodes_explored = 0;
  bool wall_budget_hit = false;
};

struct ReportDocument {
  ReportMetadata metadata;
  std::vector<FrontierPoint> frontier;
  std::vector<GapRecord> gaps;
  // Aggregate tables keyed "<table>/<method>", e.g. "pe/ours".
  std::map<std::string, Aggregates> aggregates;
  std::optional<WeightedSolution> solution;
  std::optional<OracleInfo> oracle;
};

/// Deterministic single-object JSON serialization (LF line endings).
std::string write_report_json(const ReportDocument& doc);

/// One CSV table per logical section, each with a header row.
std::map<std::string, std::string> write_report_csv(const ReportDocument& doc);

/// Inverse of write_report_json; the pair is a lossless round trip.
ReportDocument read_report_json(const std::string& text);

}  // namespace cardsolver
