#include <benchmark/benchmark.h>

#include "bandsplit/config.hpp"
#include "bandsplit/simulator.hpp"

namespace {

void BM_SimulateAsym(benchmark::State& state) {
  auto config = bandsplit::bundled_scenario("two_band_asym");
  config.flows[0].packets = static_cast<std::uint64_t>(state.range(0));
  const auto spec = bandsplit::SchedulerSpec::parse("leaky_bucket");
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(bandsplit::simulate(config, spec, seed++));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateAsym)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace
