#include "robl1/robl1.hpp"

#include <benchmark/benchmark.h>

namespace {

robl1::Matrix gaussian(robl1::Index n, robl1::Index samples) {
  robl1::GenSpec s;
  s.n = n;
  s.samples = samples;
  s.seed = 9;
  return robl1::generate(s).regressors;
}

void BM_GenericityIndex(benchmark::State& state) {
  const auto x = gaussian(4, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(robl1::genericity_index(x));
}
BENCHMARK(BM_GenericityIndex)->Arg(12)->Arg(20)->Arg(25);

void BM_RValues(benchmark::State& state) {
  const auto x = gaussian(4, state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(robl1::r_value(x));
    benchmark::DoNotOptimize(robl1::rn_value(x));
  }
}
BENCHMARK(BM_RValues)->Arg(200)->Arg(1000);

void BM_K1(benchmark::State& state) {
  const auto x = gaussian(3, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(robl1::k1_value(x));
}
BENCHMARK(BM_K1)->Arg(10)->Arg(14);

void BM_K2(benchmark::State& state) {
  const auto x = gaussian(4, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(robl1::k2_value(x));
}
BENCHMARK(BM_K2)->Arg(100)->Arg(1000);

void BM_ErrorConstants(benchmark::State& state) {
  const auto x = gaussian(2, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(robl1::error_bound_constants(x));
}
BENCHMARK(BM_ErrorConstants)->Arg(8)->Arg(12);

void BM_L0BruteForce(benchmark::State& state) {
  robl1::GenSpec s;
  s.n = 3;
  s.samples = state.range(0);
  s.outlier_fraction = 0.2;
  s.seed = 4;
  const auto data = robl1::generate(s);
  for (auto _ : state) benchmark::DoNotOptimize(robl1::l0_brute_force(data));
}
BENCHMARK(BM_L0BruteForce)->Arg(12)->Arg(20);

}  // namespace
