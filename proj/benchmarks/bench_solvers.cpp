#include "robl1/robl1.hpp"

#include <benchmark/benchmark.h>

namespace {

robl1::Dataset corrupted(robl1::Index n, robl1::Index samples, double fraction) {
  robl1::GenSpec s;
  s.n = n;
  s.samples = samples;
  s.outlier_fraction = fraction;
  s.seed = 42;
  return robl1::generate(s);
}

void BM_SolveL1Exact(benchmark::State& state) {
  const auto data = corrupted(4, state.range(0), 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(robl1::solve_l1(data));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolveL1Exact)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

void BM_SolveL1FirstOrder(benchmark::State& state) {
  const auto data = corrupted(4, state.range(0), 0.3);
  robl1::SolverOptions opts;
  opts.method = robl1::L1Method::first_order;
  for (auto _ : state) benchmark::DoNotOptimize(robl1::solve_l1(data, opts));
}
BENCHMARK(BM_SolveL1FirstOrder)->Arg(256)->Arg(1024);

void BM_Reweighted(benchmark::State& state) {
  const auto data = corrupted(4, 200, 0.4);
  const double delta = robl1::default_reweight_delta(data);
  for (auto _ : state) benchmark::DoNotOptimize(robl1::solve_reweighted_l1(data, 2, delta));
}
BENCHMARK(BM_Reweighted);

void BM_Regularized(benchmark::State& state) {
  robl1::GenSpec s;
  s.n = 4;
  s.samples = state.range(0);
  s.outlier_fraction = 0.2;
  s.noise_snr_db = 20.0;
  s.seed = 3;
  const auto data = robl1::generate(s);
  for (auto _ : state) benchmark::DoNotOptimize(robl1::solve_regularized(data, 0.1));
}
BENCHMARK(BM_Regularized)->Arg(200)->Arg(1000);

void BM_CheckOptimal(benchmark::State& state) {
  const auto data = corrupted(4, state.range(0), 0.3);
  const auto est = robl1::solve_l1(data);
  for (auto _ : state) benchmark::DoNotOptimize(robl1::check_optimal(data, est.theta));
}
BENCHMARK(BM_CheckOptimal)->Arg(200)->Arg(2000);

void BM_T3(benchmark::State& state) {
  robl1::GenSpec s;
  s.n = 3;
  s.samples = state.range(0);
  s.outlier_fraction = 0.3;
  s.seed = 5;
  const auto data = robl1::generate_multi(3, s);
  for (auto _ : state) benchmark::DoNotOptimize(robl1::t3_value(data, data.truth->a0));
}
BENCHMARK(BM_T3)->Arg(50)->Arg(200);

void BM_SumOfNorms(benchmark::State& state) {
  robl1::GenSpec s;
  s.n = 3;
  s.samples = 200;
  s.outlier_fraction = 0.3;
  s.seed = 6;
  const auto data = robl1::generate_multi(3, s);
  for (auto _ : state) benchmark::DoNotOptimize(robl1::solve_sum_of_norms(data));
}
BENCHMARK(BM_SumOfNorms);

}  // namespace
