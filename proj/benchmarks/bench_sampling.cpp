#include <benchmark/benchmark.h>

#include <string>
#include <utility>
#include <vector>

#include "rlakit/ratio.hpp"
#include "rlakit/sampling.hpp"

namespace {

// One SHA-256 per draw is the floor for everything else.
void BM_SeedUniform(benchmark::State& state) {
  const std::string seed = "BENCH-SEED:stratum";
  long long k = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(rla::seed_uniform64(seed, ++k));
}
BENCHMARK(BM_SeedUniform);

void BM_DrawSrs(benchmark::State& state) {
  const long long count = state.range(0);
  for (auto _ : state)
    benchmark::DoNotOptimize(rla::draw_srs("BENCH-SEED:srs", 1000000, count));
  state.SetItemsProcessed(state.iterations() * count);
}
BENCHMARK(BM_DrawSrs)->Arg(100)->Arg(1000)->Arg(10000);

void BM_DrawPpeb(benchmark::State& state) {
  std::vector<std::pair<std::string, rla::Ratio>> bounds;
  bounds.reserve(500);
  for (int i = 0; i < 500; ++i)
    bounds.emplace_back("batch-" + std::to_string(i), rla::Ratio(1 + i % 7, 4));
  const long long draws = state.range(0);
  for (auto _ : state)
    benchmark::DoNotOptimize(rla::draw_ppeb("BENCH-SEED:ppeb", bounds, draws));
  state.SetItemsProcessed(state.iterations() * draws);
}
BENCHMARK(BM_DrawPpeb)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
