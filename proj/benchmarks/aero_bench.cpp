#include "morphwing/aero.hpp"

#include <benchmark/benchmark.h>

using namespace morphwing;

static void BM_AeroStep(benchmark::State& state) {
  const auto strips = static_cast<std::size_t>(state.range(0));
  const aero::AeroModel m = aero::build_aero_model(aero::elliptic_wing(0.3, 6.0, strips), {}, 5.0);
  aero::WakeState xi = aero::WakeState::zero(m);
  const VecX y1 = VecX::Constant(static_cast<Eigen::Index>(strips), 0.05);
  for (auto _ : state) {
    xi = aero::aero_step(m, xi, y1, 1e-4).xi;
    benchmark::DoNotOptimize(xi.lag_states.data());
  }
}
BENCHMARK(BM_AeroStep)->Arg(8)->Arg(20)->Arg(40);

static void BM_BuildAeroModel(benchmark::State& state) {
  const auto g = aero::elliptic_wing(0.3, 6.0, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(aero::build_aero_model(g, {}, 5.0));
}
BENCHMARK(BM_BuildAeroModel)->Arg(8)->Arg(20);
