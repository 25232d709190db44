#include <benchmark/benchmark.h>

#include "popkit/moments.hpp"
#include "popkit/multivariate.hpp"
#include "popkit/population.hpp"
#include "popkit/recovery.hpp"
#include "popkit/transport.hpp"

namespace {

using namespace popkit;

void BM_EstimateMoments(benchmark::State& state) {
  const auto sample = sample_population({ThreeSpike{}, static_cast<std::size_t>(state.range(0)), 10, 1});
  for (auto _ : state) benchmark::DoNotOptimize(estimate_moments(sample.data, 10));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EstimateMoments)->Arg(1000)->Arg(100000);

void BM_Recover(benchmark::State& state) {
  const auto t = static_cast<Count>(state.range(0));
  const auto sample = sample_population({TruncatedNormal{}, 100000, t, 2});
  const auto est = estimate_moments(sample.data, t);
  auto config = RecoveryConfig::defaults(t);
  config.objective = state.range(1) == 1 ? Objective::L1 : Objective::L2;
  for (auto _ : state) benchmark::DoNotOptimize(recover(est, config));
}
BENCHMARK(BM_Recover)->Args({4, 1})->Args({10, 1})->Args({4, 2})->Args({10, 2})->Unit(benchmark::kMillisecond);

void BM_Emd1d(benchmark::State& state) {
  const auto a = GriddedDistribution::uniform(static_cast<std::size_t>(state.range(0)));
  const auto b = GriddedDistribution::point_mass(static_cast<std::size_t>(state.range(0)), 0);
  for (auto _ : state) benchmark::DoNotOptimize(emd_1d(a, b));
}
BENCHMARK(BM_Emd1d)->Arg(100)->Arg(10000);

void BM_EmdTransport(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto a = to_point_masses(GriddedDistribution::uniform(m));
  const auto b = matched_moment_pair(8).first;
  for (auto _ : state) benchmark::DoNotOptimize(emd_transport(a, b));
}
BENCHMARK(BM_EmdTransport)->Arg(20)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_RecoverMulti(benchmark::State& state) {
  std::vector<double> masses(21 * 21, 0.0);
  masses[5 * 21 + 4] = 0.5;
  masses[15 * 21 + 14] = 0.5;
  const auto est = exact_multi_moments(MultiGriddedDistribution(2, 20, masses), 4);
  const auto config = RecoveryConfig::defaults(4);
  for (auto _ : state) benchmark::DoNotOptimize(recover_multi(est, config, 20));
}
BENCHMARK(BM_RecoverMulti)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
