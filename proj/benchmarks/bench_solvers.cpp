#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "num/dynamics.hpp"
#include "num/iterate.hpp"
#include "num/oracle.hpp"
#include "num/pf_solver.hpp"
#include "num/random_scenario.hpp"

using namespace num;

namespace {

/// Nested instance with prices taken at a random interior point.
struct NestedCase {
  Scenario scenario;
  std::vector<double> p;
  AscendingInstance ascending;
};

NestedCase nested_case(std::size_t n) {
  Scenario s = random_aggregating_scenario(42, n);
  std::mt19937_64 rng(n);
  std::uniform_real_distribution<double> frac(0.1, 0.9);
  Flow x = lexicographic_max_point(s.network);
  for (double& v : x) v *= frac(rng);
  auto p = prices(s, x);
  const auto shape = detect_flow_aggregating(s.network);
  AscendingInstance inst{shape->alphas, std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) inst.p[i] = p[shape->user_order[i]];
  return {std::move(s), std::move(p), std::move(inst)};
}

void BM_StringSolve(benchmark::State& state) {
  const auto c = nested_case(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(string_solve(c.ascending));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_StringSolve)->RangeMultiplier(4)->Range(4, 4096)->Complexity(benchmark::oN);

void BM_DualSolveNested(benchmark::State& state) {
  const auto c = nested_case(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_pf_dual(c.scenario.network, c.p));
}
BENCHMARK(BM_DualSolveNested)->RangeMultiplier(2)->Range(4, 64);

void BM_DualSolveRandom(benchmark::State& state) {
  const Scenario s = random_scenario(static_cast<std::uint64_t>(state.range(0)));
  const auto p = prices(s, lexicographic_max_point(s.network));
  for (auto _ : state) benchmark::DoNotOptimize(solve_pf_dual(s.network, p));
}
BENCHMARK(BM_DualSolveRandom)->DenseRange(1, 5);

void BM_IterationStep(benchmark::State& state) {
  const Scenario s = state.range(0) == 0 ? aggregating_benchmark_scenario() : random_scenario(7);
  const PFMap T(s, 1e-8);
  const Flow x = lexicographic_max_point(s.network);
  for (auto _ : state) benchmark::DoNotOptimize(algorithm1_step(x, T, s, 10));
}
BENCHMARK(BM_IterationStep)->Arg(0)->Arg(1);

void BM_KmtField(benchmark::State& state) {
  const Scenario s = aggregating_benchmark_scenario();
  const Flow x = lexicographic_max_point(s.network);
  for (auto _ : state) benchmark::DoNotOptimize(kmt_vector_field(x, s, 1.0, 0.1));
}
BENCHMARK(BM_KmtField);

void BM_ReferenceOptimum(benchmark::State& state) {
  const Scenario s = random_scenario(static_cast<std::uint64_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(reference_optimum(s));
}
BENCHMARK(BM_ReferenceOptimum)->Arg(3)->Arg(8);

}  // namespace

BENCHMARK_MAIN();
