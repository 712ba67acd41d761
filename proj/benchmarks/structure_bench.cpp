#include "morphwing/structure.hpp"
#include "morphwing/wing.hpp"

#include <benchmark/benchmark.h>

using namespace morphwing;

static void BM_AssembleWing(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(wing::build_wing());
}
BENCHMARK(BM_AssembleWing);

static void BM_MarchWing(benchmark::State& state) {
  const wing::Wing w = wing::build_wing();
  const VecX omega = VecX::Constant(1, 0.52);
  for (auto _ : state) {
    benchmark::DoNotOptimize(structure::march(w.structure, [&](double) { return omega; }, 0.1, 1e-4));
  }
}
BENCHMARK(BM_MarchWing)->Unit(benchmark::kMillisecond);
