#include <benchmark/benchmark.h>

#include <random>

#include "cardsolver/exact.hpp"
#include "cardsolver/heuristic.hpp"
#include "cardsolver/qp.hpp"
#include "cardsolver/relax.hpp"
#include "support.hpp"

using namespace cardsolver;

static void BM_SolveQp(benchmark::State& state) {
  std::mt19937_64 rng(1);
  QpProblem p = testsupport::random_qp(static_cast<int>(state.range(0)), 2, rng);
  for (auto _ : state) {
    QpResult r = solve_qp(p);
    benchmark::DoNotOptimize(r.objective);
  }
}
BENCHMARK(BM_SolveQp)->Arg(10)->Arg(40)->Arg(120);

static void BM_LineRelaxation(benchmark::State& state) {
  std::mt19937_64 rng(2);
  auto mv = testsupport::random_mv_instance(static_cast<int>(state.range(0)), 10, rng);
  for (auto _ : state) {
    RelaxationOutcome r = solve_line(mv.inst, 10);
    benchmark::DoNotOptimize(r.bound);
  }
}
BENCHMARK(BM_LineRelaxation)->Arg(31)->Arg(85);

static void BM_Fitness(benchmark::State& state) {
  std::mt19937_64 rng(3);
  auto mv = testsupport::random_mv_instance(31, 10, rng);
  Rng sel_rng = make_rng(3, "bench");
  for (auto _ : state) {
    // Fresh evaluator so the cache never short-circuits the solve.
    FitnessEvaluator eval(mv.inst);
    benchmark::DoNotOptimize(eval.evaluate(random_selection(31, 10, sel_rng)));
  }
}
BENCHMARK(BM_Fitness);

static void BM_DualAscent(benchmark::State& state) {
  std::mt19937_64 rng(4);
  auto mv = testsupport::random_mv_instance(31, 10, rng);
  DualAscentParams params;
  params.max_iters = 100;
  for (auto _ : state) {
    RelaxationOutcome r = solve_dual(mv.inst, params);
    benchmark::DoNotOptimize(r.bound);
  }
}
BENCHMARK(BM_DualAscent);

BENCHMARK_MAIN();
