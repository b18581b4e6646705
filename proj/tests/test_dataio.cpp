#include <doctest.h>

#include <sstream>

#include "cardsolver/dataio.hpp"

using namespace cardsolver;

TEST_SUITE_BEGIN("dataio");

TEST_CASE("parse_port reads a small universe") {
  std::istringstream in(
      "3\n"
      "0.001 0.02\n"
      "0.002 0.03\n"
      "0.003 0.04\n"
      "1 1 1.0\n"
      "1 2 0.5\n"
      "1 3 0.2\n"
      "2 2 1.0\n"
      "2 3 0.4\n"
      "3 3 1.0\n");
  AssetUniverse u = parse_port(in);
  CHECK(u.n == 3);
  CHECK(u.mean_returns[1] == doctest::Approx(0.002));
  CHECK(u.std_devs[2] == doctest::Approx(0.04));
  CHECK(u.correlation(0, 1) == doctest::Approx(0.5));
  CHECK(u.correlation(1, 0) == doctest::Approx(0.5));
  CHECK(u.warnings.empty());

  Eigen::MatrixXd Q = covariance(u);
  CHECK(Q(0, 0) == doctest::Approx(0.02 * 0.02));
  CHECK(Q(0, 1) == doctest::Approx(0.5 * 0.02 * 0.03));
  CHECK(Q.isApprox(Q.transpose()));
}

TEST_CASE("parse_port defaults a missing diagonal with a warning") {
  std::istringstream in(
      "2\n"
      "0.001 0.02\n"
      "0.002 0.03\n"
      "1 2 0.5\n"
      "2 2 1.0\n");
  AssetUniverse u = parse_port(in);
  CHECK(u.correlation(0, 0) == 1.0);
  REQUIRE(u.warnings.size() == 1);
  CHECK(u.warnings[0].find("asset 1") != std::string::npos);
}

TEST_CASE("parse_port rejects broken input") {
  auto expect_parse_error = [](const std::string& text) {
    std::istringstream in(text);
    CHECK_THROWS_AS(parse_port(in), const ParseError&);
  };
  expect_parse_error("");
  expect_parse_error("2\n0.001 0.02\n");  // too few asset lines
  expect_parse_error("1\n0.001 0.02\n1 1 1.0\n1 1 1.0\n");  // duplicate pair
  expect_parse_error("1\n0.001 0.02\n1 1 2.0\n");           // correlation > 1
  expect_parse_error("2\n0.001 0.02\n0.002 0.03\n1 1 1.0\n2 2 1.0\n");  // missing (1,2)
  expect_parse_error("1\n0.001 -0.02\n1 1 1.0\n");          // negative std dev
}

TEST_CASE("parse_port tolerates CRLF line endings") {
  std::istringstream in("1\r\n0.001 0.02\r\n1 1 1.0\r\n");
  AssetUniverse u = parse_port(in);
  CHECK(u.n == 1);
}

TEST_CASE("parse_uef sorts and optionally swaps columns") {
  std::istringstream in("0.2 2.0\n0.1 1.0\n");
  UefCurve c = parse_uef(in);
  CHECK(c.points.front().first == doctest::Approx(0.1));
  CHECK(c.points.back().second == doctest::Approx(2.0));

  std::istringstream swapped("1.0 0.1\n2.0 0.2\n");
  UefCurve c2 = parse_uef(swapped, true);
  CHECK(c2.points.front().first == doctest::Approx(0.1));
  CHECK(c2.points.front().second == doctest::Approx(1.0));
}

TEST_CASE("parse_uef collapses duplicate returns to the lower variance") {
  std::istringstream in("0.1 2.0\n0.1 1.0\n0.2 3.0\n");
  std::vector<std::string> warnings;
  UefCurve c = parse_uef(in, false, &warnings);
  REQUIRE(c.points.size() == 2);
  CHECK(c.points[0].second == doctest::Approx(1.0));
  CHECK(warnings.size() == 1);
}

TEST_CASE("JSON report round trips losslessly") {
  ReportDocument doc;
  doc.metadata.dataset_id = "unit";
  doc.metadata.seed = 42;
  doc.metadata.config["k"] = "10";
  doc.metadata.covariance_shifted = true;
  doc.metadata.notes.push_back("note one");

  FrontierPoint p;
  p.target_return = 0.01;
  p.method = Method::Ours;
  p.status = PointStatus::Ok;
  p.risk = 0.25;
  p.selection = BinarySelection::make({1, 0, 1}, 2);
  p.pe = 1.5;
  p.pe_vertical = 1.5;
  p.pe_horizontal = std::numeric_limits<double>::infinity();
  doc.frontier.push_back(p);

  GapRecord g;
  g.target_return = 0.01;
  g.method = Method::Ours;
  g.binary_gap = 1.0;
  g.objective_gap = 0.001;
  g.reference_proved = true;
  doc.gaps.push_back(g);

  doc.aggregates["pe/ours"] = Aggregates::of({1.0, 2.0, 3.0});

  WeightedSolution ws;
  ws.status = SolveStatus::Optimal;
  ws.objective = 0.125;
  ws.selection = p.selection;
  ws.x = Eigen::Vector3d(0.5, 0.0, 0.5);
  doc.solution = ws;

  OracleInfo oi;
  oi.proved_optimal = true;
  oi.nodes_explored = 17;
  doc.oracle = oi;

  const std::string text = write_report_json(doc);
  CHECK(text.back() == '\n');
  ReportDocument back = read_report_json(text);
  CHECK(write_report_json(back) == text);
  CHECK(back.metadata.dataset_id == "unit");
  CHECK(back.frontier.size() == 1);
  CHECK(back.frontier[0].selection == p.selection);
  CHECK(std::isinf(back.frontier[0].pe_horizontal));
  CHECK(back.aggregates.count("pe/ours") == 1);
  REQUIRE(back.solution.has_value());
  CHECK(back.solution->objective == 0.125);
  REQUIRE(back.oracle.has_value());
  CHECK(back.oracle->nodes_explored == 17);
}

TEST_CASE("CSV tables carry headers") {
  ReportDocument doc;
  doc.metadata.dataset_id = "unit";
  FrontierPoint p;
  p.target_return = 0.01;
  p.method = Method::Line;
  p.status = PointStatus::Ok;
  p.risk = 0.25;
  p.selection = BinarySelection::make({1, 0}, 1);
  doc.frontier.push_back(p);
  doc.aggregates["pe/line"] = Aggregates::of({1.0});

  auto tables = write_report_csv(doc);
  REQUIRE(tables.count("frontier") == 1);
  CHECK(tables["frontier"].rfind("target_return,", 0) == 0);
  REQUIRE(tables.count("aggregates") == 1);
  CHECK(tables["aggregates"].find("pe/line") != std::string::npos);
}

TEST_SUITE_END();
