#include <benchmark/benchmark.h>

#include <numbers>

#include "slp/simulation.hpp"

namespace {

slp::simulation::ScenarioConfig bench_config() {
  slp::simulation::ScenarioConfig c;
  c.zeta_db = {0.0, 6.0, 12.0};
  c.phi = {std::numbers::pi / 8};
  c.methods = {"cipm", "cipmr", "zf"};
  c.trials = 20;
  c.symbols_per_channel = 50;
  c.seed = 11;
  return c;
}

void BM_SweepPowerSerial(benchmark::State& state) {
  const auto config = bench_config();
  for (auto _ : state) benchmark::DoNotOptimize(slp::simulation::sweep_power_serial(config));
}

void BM_SweepPowerParallel(benchmark::State& state) {
  const auto config = bench_config();
  const slp::simulation::SweepOptions options{static_cast<int>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(slp::simulation::sweep_power(config, options));
}

}  // namespace

BENCHMARK(BM_SweepPowerSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepPowerParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
