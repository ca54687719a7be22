#include <benchmark/benchmark.h>

#include "walklab/diagnostics.hpp"
#include "walklab/kernel.hpp"
#include "walklab/moments.hpp"

using namespace walklab;

static void BM_KernelConvolution(benchmark::State& state) {
  const auto law = lazy_srw(static_cast<std::size_t>(state.range(0)), 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(kernel_at(law, static_cast<std::uint64_t>(state.range(1))));
}
BENCHMARK(BM_KernelConvolution)->Args({1, 1000})->Args({2, 200});

static void BM_ExactSecondMoment(benchmark::State& state) {
  MomentPlan plan{lazy_srw(1, 0.5), make_scenery(1, 5)};
  plan.horizon = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(exact_second_moment(plan));
}
BENCHMARK(BM_ExactSecondMoment)->Arg(1 << 10)->Arg(1 << 12);

static void BM_LltReport(benchmark::State& state) {
  const std::vector<std::uint64_t> ns{100, 400};
  const auto law = lazy_srw(1, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(llt_report(law, ns));
}
BENCHMARK(BM_LltReport);
BENCHMARK_MAIN();
