#include "morphwing/placement.hpp"
#include "morphwing/wing.hpp"

#include <benchmark/benchmark.h>

using namespace morphwing;

static void BM_EvaluatePlacement(benchmark::State& state) {
  const wing::WingDesign d;
  const wing::Wing w = wing::build_wing(d, std::vector<structure::PrimerSlot>{});
  placement::PlacementProblem p;
  p.structure = w.structure;
  p.candidate_slots = wing::candidate_slots(d, wing::primer_gain({}));
  p.tip_node = w.tip_node;
  p.gait.loads = {{3, Vec3(0, 0, 0.05), Vec3::Zero(), 1, 0.0}, {w.tip_node, Vec3(0, 0.02, 0), Vec3::Zero(), 1, 1.57}};
  p.v_desired = {Vec3::UnitX()};
  placement::OmegaParams params = placement::OmegaParams::Zero(7, 2);
  params(1, 0) = 0.1;
  params(2, 1) = -0.05;
  for (auto _ : state) benchmark::DoNotOptimize(placement::evaluate_placement(p, {2, 4}, params));
}
BENCHMARK(BM_EvaluatePlacement)->Unit(benchmark::kMillisecond);
