#pragma once

#include "morphwing/common.hpp"

#include <string>
#include <vector>

// SMA-driven rhombic primer: static force/stroke characteristics and a
// first-order actuation lag. Displacements are rhombus output strokes in mm,
// positive for contraction.
namespace morphwing::primer {

struct PrimerSpec {
  double wire_diameter = 38.0;       // um
  double force_per_wire = 20.0;      // gf
  int loop_count = 11;
  int strands_per_loop = 2;
  double rhombus_width = 40.0;       // mm
  double stroke_max = 1.04;          // mm
  double time_constant = 0.25;       // s
  double drive_current = 55.0;       // mA
  double sma_contraction_fraction = 0.045;

  /// Throws on invalid fields; returns soft warnings (e.g. contraction
  /// fraction outside the usual 3-6% band).
  std::vector<std::string> validate() const;
};

struct PrimerState {
  double displacement = 0.0;  // mm
  double command = 0.0;       // mm
  double activation = 0.0;    // [0, 1]
  bool clamped = false;       // last command was outside [0, stroke_max]
};

/// Force on the actuated diagonal, gf.
double total_compression_force(const PrimerSpec& spec);

/// Linear compliance to saturation, mm.
double stroke(const PrimerSpec& spec, double applied_force_gf);

/// Exact first-order lag over dt toward the (clamped) command.
PrimerState step_dynamics(const PrimerState& state, double command, double dt,
                          const PrimerSpec& spec);

/// Elbow angle change (deg) for a displacement (mm) at a sensitivity (deg/mm).
inline double elbow_angle_shift(double displacement, double sensitivity) {
  return sensitivity * displacement;
}

}  // namespace morphwing::primer
