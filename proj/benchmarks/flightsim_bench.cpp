#include "morphwing/flightsim.hpp"

#include <benchmark/benchmark.h>

using namespace morphwing;

static void BM_FullDynamics(benchmark::State& state) {
  FullState x;
  x.q_active << 0.3, 0.2, 0.3, 0.2;
  x.active_rates << 2.0, -1.0, 2.0, -1.0;
  const flightsim::RobotParams p;
  const VecX u = VecX::Zero(4);
  for (auto _ : state) benchmark::DoNotOptimize(flightsim::full_dynamics(x, u, {}, p));
}
BENCHMARK(BM_FullDynamics);

static void BM_SimulateOnePeriod(benchmark::State& state) {
  flightsim::SimConfig c;
  c.controller.auto_trim = false;
  c.warmup = 0.0;
  c.duration = 0.1;
  for (auto _ : state) benchmark::DoNotOptimize(flightsim::simulate(c));
}
BENCHMARK(BM_SimulateOnePeriod)->Unit(benchmark::kMillisecond);
