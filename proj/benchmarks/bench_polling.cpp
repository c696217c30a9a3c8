#include <benchmark/benchmark.h>

#include "rlakit/polling.hpp"

namespace {

// Single tail evaluation; the sum is O(sample) after truncation, so this
// tracks the per-checkpoint cost of workload simulation.
void BM_TriHyperTail(benchmark::State& state) {
  const long long sample = state.range(0);
  const long long population = 20 * sample;
  const long long winners = population / 2 + population / 40;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        rla::tri_hyper_tail(winners, population - winners, population, sample, 0));
}
BENCHMARK(BM_TriHyperTail)->Arg(100)->Arg(1000)->Arg(10000);

void BM_CondHyperTail(benchmark::State& state) {
  const long long pair = state.range(0);
  const long long winners = 11 * pair / 20;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        rla::cond_hyper_tail(winners, pair - winners, pair / 10, pair / 20));
}
BENCHMARK(BM_CondHyperTail)->Arg(1000)->Arg(10000);

// Full assessment: boundary search over the null at the default depth.
void BM_PollingPvalue(benchmark::State& state) {
  rla::PollingSample sample;
  sample.size = state.range(0);
  sample.wins = 11 * sample.size / 20;
  sample.losses = sample.size - sample.wins;
  const long long population = 20 * sample.size;
  for (auto _ : state)
    benchmark::DoNotOptimize(rla::polling_pvalue(sample, population, 0));
}
BENCHMARK(BM_PollingPvalue)->Arg(50)->Arg(500)->Arg(5000);

void BM_PollingPvalueExhaustive(benchmark::State& state) {
  rla::PollingSample sample;
  sample.size = state.range(0);
  sample.wins = 11 * sample.size / 20;
  sample.losses = sample.size - sample.wins;
  const long long population = 20 * sample.size;
  for (auto _ : state)
    benchmark::DoNotOptimize(rla::polling_pvalue(
        sample, population, 0, rla::PollingMethod::tri_hypergeometric,
        rla::SearchDepth::exhaustive));
}
BENCHMARK(BM_PollingPvalueExhaustive)->Arg(50)->Arg(500);

}  // namespace

BENCHMARK_MAIN();
