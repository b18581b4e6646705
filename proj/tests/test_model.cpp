#include <doctest.h>

#include "cardsolver/model.hpp"
#include "support.hpp"

using namespace cardsolver;

TEST_SUITE_BEGIN("model");

TEST_CASE("BinarySelection::make checks cardinality") {
  auto b = BinarySelection::make({1, 0, 1, 0}, 2);
  CHECK(b.popcount() == 2);
  CHECK(b.one_indices() == std::vector<int>{0, 2});
  CHECK_THROWS_AS(BinarySelection::make({1, 1, 1, 0}, 2), const Error&);
}

TEST_CASE("BinarySelection::from_indices") {
  auto b = BinarySelection::from_indices(5, {4, 1}, 2);
  CHECK(b.bits == std::vector<std::uint8_t>{0, 1, 0, 0, 1});
  CHECK_THROWS_AS(BinarySelection::from_indices(5, {1}, 2), const Error&);
  CHECK_THROWS_AS(BinarySelection::from_indices(3, {5, 1}, 2), const Error&);
}

TEST_CASE("build_from_mv lays out the generalized model") {
  MvSpec spec;
  spec.n = 4;
  spec.returns = Eigen::Vector4d(0.1, 0.2, 0.3, 0.4);
  spec.target_return = 0.25;
  spec.k = 2;
  spec.lower = 0.05;
  spec.upper = 0.9;
  Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(4, 4);
  ProblemInstance inst = build_from_mv(spec, Q);

  CHECK(inst.n == 4);
  CHECK(inst.num_linear() == 2);
  CHECK(inst.A.row(0).transpose().isApprox(spec.returns));
  CHECK(inst.A.row(1).isApproxToConstant(1.0));
  CHECK(inst.c_a[0] == doctest::Approx(0.25));
  CHECK(inst.c_a[1] == doctest::Approx(1.0));
  CHECK(inst.lower.isApproxToConstant(0.05));
  CHECK(inst.upper.isApproxToConstant(0.9));
  CHECK(inst.num_cardinality() == 1);
  CHECK(inst.B.row(0).isApproxToConstant(1.0));
  CHECK(inst.k() == 2);
  CHECK(inst.q.isZero());
}

TEST_CASE("MvSpec::check rejects unusable bounds") {
  MvSpec spec;
  spec.n = 4;
  spec.returns = Eigen::Vector4d::Ones();
  spec.k = 2;
  spec.lower = 0.6;  // k*l = 1.2 > 1
  spec.upper = 1.0;
  CHECK_THROWS_AS(spec.check(), const InvalidBounds&);

  spec.lower = 0.01;
  spec.upper = 0.4;  // k*u = 0.8 < 1
  CHECK_THROWS_AS(spec.check(), const InvalidBounds&);

  spec.upper = 0.01;  // l < u violated
  CHECK_THROWS_AS(spec.check(), const InvalidBounds&);

  spec.lower = 0.1;
  spec.upper = 0.9;
  CHECK_NOTHROW(spec.check());
}

TEST_CASE("validate flags broken instances") {
  std::mt19937_64 rng(11);
  ProblemInstance inst = testsupport::random_mv_instance(6, 3, rng).inst;
  CHECK(validate(inst).empty());

  SUBCASE("asymmetric Q") {
    inst.Q(0, 1) += 1.0;
    auto diags = validate(inst);
    REQUIRE(!diags.empty());
    CHECK(diags[0].code == Diagnostic::Code::AsymmetricQ);
  }
  SUBCASE("indefinite Q") {
    inst.Q = -Eigen::MatrixXd::Identity(6, 6);
    auto diags = validate(inst);
    REQUIRE(!diags.empty());
    CHECK(diags[0].code == Diagnostic::Code::NotPositiveDefinite);
  }
  SUBCASE("inverted bounds") {
    inst.lower[2] = inst.upper[2] + 1.0;
    auto diags = validate(inst);
    REQUIRE(!diags.empty());
    CHECK(diags[0].code == Diagnostic::Code::BadBounds);
  }
  SUBCASE("fractional B entry") {
    inst.B(0, 0) = 0.5;
    auto diags = validate(inst);
    REQUIRE(!diags.empty());
    CHECK(diags[0].code == Diagnostic::Code::BadCardinalityData);
  }
}

TEST_CASE("selection_feasible respects B b = c_b") {
  std::mt19937_64 rng(12);
  auto mv = testsupport::random_mv_instance(6, 3, rng);
  CHECK(mv.inst.selection_feasible(mv.witness));
  auto wrong = BinarySelection::from_indices(6, {0, 1}, 2);
  CHECK(!mv.inst.selection_feasible(wrong));
}

TEST_SUITE_END();
