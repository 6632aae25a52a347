#include <benchmark/benchmark.h>

#include <vector>

#include "loctime/kac.hpp"
#include "loctime/kernels.hpp"
#include "loctime/paths.hpp"
#include "loctime/statistics.hpp"

using namespace loctime;

static void BM_SimulatePath(benchmark::State& state) {
  const double dt = 1.0 / static_cast<double>(state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_path(1.0, dt, 0.0, seed++));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulatePath)->Arg(10000)->Arg(100000);

static void BM_LocalTimeField(benchmark::State& state) {
  const double dt = 1.0 / static_cast<double>(state.range(0));
  const auto path = simulate_path(1.0, dt, 0.0, 7);
  const auto grid = GridSpec::centered(8.0, 0.001);
  std::vector<double> values;
  for (auto _ : state) {
    local_time_field_into(path.positions, path.dt, grid, values);
    benchmark::DoNotOptimize(values.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LocalTimeField)->Arg(10000)->Arg(100000);

static void BM_IncrementFunctionals(benchmark::State& state) {
  const auto path = simulate_path(1.0, 1e-5, 0.0, 7);
  const auto field = local_time_field(path, GridSpec::centered(8.0, 0.001));
  for (auto _ : state) benchmark::DoNotOptimize(increment_functionals(field, 0.02));
}
BENCHMARK(BM_IncrementFunctionals);

static void BM_KacMoment(benchmark::State& state) {
  PermutationSumSpec spec;
  spec.alpha = 1.0;
  for (int i = 0; i < state.range(0); ++i) spec.points.push_back(0.1 * i - 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(kac_moment(spec));
}
BENCHMARK(BM_KacMoment)->DenseRange(3, 7, 2)->Unit(benchmark::kMicrosecond);

static void BM_IntegralWPower(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(integral_w_power(1.0, 0.01, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_IntegralWPower)->DenseRange(2, 4);

BENCHMARK_MAIN();
