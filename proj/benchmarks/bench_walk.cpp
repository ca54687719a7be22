#include <benchmark/benchmark.h>

#include "walklab/birkhoff.hpp"
#include "walklab/chains.hpp"
#include "walklab/observable.hpp"
#include "walklab/statlab.hpp"
#include "walklab/step_law.hpp"

using namespace walklab;

static void BM_BirkhoffLazyHeaviside(benchmark::State& state) {
  const auto law = lazy_srw(1, 0.5);
  const auto f = make_heaviside();
  const std::vector<std::uint64_t> cps{static_cast<std::uint64_t>(state.range(0))};
  std::uint64_t trial = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_birkhoff(law, f, 1, cps, trial++));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BirkhoffLazyHeaviside)->Arg(1 << 12)->Arg(1 << 16);

static void BM_BirkhoffScenery2d(benchmark::State& state) {
  const auto law = product_lazy(2, 0.5);
  const auto f = make_scenery(2, 7);
  const std::vector<std::uint64_t> cps{static_cast<std::uint64_t>(state.range(0))};
  std::uint64_t trial = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_birkhoff(law, f, 1, cps, trial++));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BirkhoffScenery2d)->Arg(1 << 14);

static void BM_OceanEval(benchmark::State& state) {
  const auto f = make_ocean(std::make_shared<OceanSchedule>(2.0, 3, "log"));
  std::int64_t x = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(f(Site{x}));
    x = (x * 6364136223846793005LL + 1442695040888963407LL) & ((std::int64_t{1} << 40) - 1);
  }
}
BENCHMARK(BM_OceanEval);

static void BM_DriftSample(benchmark::State& state) {
  const auto law = drift_pareto(0.5, 2.5);
  RandomStream rng(1, 0, streams::kPath);
  for (auto _ : state) benchmark::DoNotOptimize(law.sample(rng));
}
BENCHMARK(BM_DriftSample);

static void BM_ChainMonteCarlo(benchmark::State& state) {
  ThreeStateChain c{0.2, 0.5, 0.3, 0.1, 0.4, 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(monte_carlo_moments(c, 10'000, 3));
}
BENCHMARK(BM_ChainMonteCarlo);
