#include <benchmark/benchmark.h>

#include <vector>

#include "rlakit/comparison.hpp"

namespace {

// A long audited sequence with sparse overstatements, the shape a real
// comparison audit produces.
std::vector<double> sparse_taints(long long n) {
  std::vector<double> taints(static_cast<size_t>(n), 0.0);
  for (size_t i = 96; i < taints.size(); i += 97) taints[i] = 0.01;
  return taints;
}

void BM_KmPvalue(benchmark::State& state) {
  const auto taints = sparse_taints(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(rla::km_pvalue(taints, 0.005));
}
BENCHMARK(BM_KmPvalue)->Arg(100)->Arg(1000)->Arg(10000);

void BM_KwPvalue(benchmark::State& state) {
  const auto taints = sparse_taints(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(rla::kw_pvalue(taints, 0.005, rla::kDefaultKaplanWaldGamma));
}
BENCHMARK(BM_KwPvalue)->Arg(100)->Arg(1000)->Arg(10000);

void BM_CleanSampleSize(benchmark::State& state) {
  double taint = 0.001;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rla::clean_sample_size(taint, 0.05));
    taint = taint < 0.2 ? taint + 1e-6 : 0.001;  // defeat value memoization
  }
}
BENCHMARK(BM_CleanSampleSize);

}  // namespace

BENCHMARK_MAIN();
