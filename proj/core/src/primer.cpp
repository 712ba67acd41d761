#include "morphwing/primer.hpp"

#include <algorithm>
#include <cmath>

namespace morphwing::primer {

std::vector<std::string> PrimerSpec::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive");
  };
  positive(wire_diameter, "wire_diameter");
  if (!(force_per_wire >= 0.0)) throw ConfigError("force_per_wire must be non-negative");
  if (loop_count < 1) throw ConfigError("loop_count must be positive");
  if (strands_per_loop < 1) throw ConfigError("strands_per_loop must be positive");
  positive(rhombus_width, "rhombus_width");
  positive(stroke_max, "stroke_max");
  positive(time_constant, "time_constant");
  positive(drive_current, "drive_current");
  positive(sma_contraction_fraction, "sma_contraction_fraction");
  if (stroke_max > 1.5) throw ConfigError("stroke_max exceeds the 1.5 mm sanity bound");

  std::vector<std::string> warnings;
  if (sma_contraction_fraction < 0.03 || sma_contraction_fraction > 0.06) {
    warnings.emplace_back("sma_contraction_fraction outside the 3-6% band");
  }
  return warnings;
}

double total_compression_force(const PrimerSpec& spec) {
  return spec.force_per_wire * spec.loop_count * spec.strands_per_loop;
}

double stroke(const PrimerSpec& spec, double applied_force_gf) {
  if (!(applied_force_gf >= 0.0)) throw ConfigError("applied force must be non-negative");
  const double total = total_compression_force(spec);
  if (total <= 0.0) return 0.0;
  return spec.stroke_max * std::min(1.0, applied_force_gf / total);
}

PrimerState step_dynamics(const PrimerState& state, double command, double dt,
                          const PrimerSpec& spec) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  if (!std::isfinite(command) || !std::isfinite(state.displacement)) {
    throw NumericalError("non-finite state");
  }
  PrimerState next;
  next.clamped = command < 0.0 || command > spec.stroke_max;
  next.command = std::clamp(command, 0.0, spec.stroke_max);
  const double decay = std::exp(-dt / spec.time_constant);
  const double d = next.command + (state.displacement - next.command) * decay;
  next.displacement = std::clamp(d, 0.0, spec.stroke_max);
  next.activation = next.displacement / spec.stroke_max;
  return next;
}

}  // namespace morphwing::primer
