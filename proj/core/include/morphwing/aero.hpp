#pragma once

#include "morphwing/common.hpp"
#include "morphwing/linear_system.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

// Unsteady strip aerodynamics: Wagner indicial lag states per strip coupled
// through a Prandtl lifting-line downwash solve, written as the linear
// state-space block
//
//   xi' = A xi + B y1,    y2 = C xi + D y1
//
// The input y1 holds one quasi-steady angle of attack per strip (rad). The
// output y2 stacks the net wrench [F; M] about the geometry origin (6 rows)
// followed by the sectional lift of every strip (N rows).
namespace morphwing::aero {

/// Quarter-chord station of a strip. Column 2 of `orientation` is the lift
/// direction.
struct StationFrame {
  Vec3 position = Vec3::Zero();
  Mat3 orientation = Mat3::Identity();
};

struct StripGeometry {
  std::vector<double> span_stations;  // m, strictly increasing, tip to tip
  std::vector<double> chord;          // m
  std::vector<double> area;           // m^2
  std::vector<StationFrame> station_frames;
  double span = 0.0;  // tip-to-tip length the stations are distributed over

  std::size_t size() const { return span_stations.size(); }
  void validate() const;
};

/// Elliptic planform with cosine-spaced strips and exact strip areas.
StripGeometry elliptic_wing(double span, double aspect_ratio, std::size_t strips);

/// Per-strip pose and local flow speed used when the wing is moving. An
/// empty snapshot means "geometry frames at the reference airspeed".
struct StripKinematics {
  Vec3 position = Vec3::Zero();
  Vec3 lift_direction = Vec3::UnitZ();
  double flow_speed = 0.0;  // m/s, component normal to the span axis
};
using KinematicSnapshot = std::vector<StripKinematics>;

/// Indicial response phi(s) = 1 - sum_i a_i exp(-b_i s), s in semichords.
struct WagnerApproximant {
  std::vector<double> a{0.165, 0.335};
  std::vector<double> b{0.0455, 0.3};

  std::size_t lag_count() const { return a.size(); }
  double phi(double s) const;
};

struct AeroModel {
  MatX a_xi, b_xi, c_xi, d_xi;
  double airspeed = 0.0;
  double air_density = 1.225;
  std::size_t n_lag = 2;
  VecX strip_speed;  // m/s
  VecX strip_width;  // m, area / chord

  std::size_t strip_count() const { return static_cast<std::size_t>(strip_speed.size()); }
  std::size_t state_dim() const { return static_cast<std::size_t>(a_xi.rows()); }
  std::size_t input_dim() const { return static_cast<std::size_t>(b_xi.cols()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(c_xi.rows()); }

  /// -C A^{-1} B + D: output per unit held input once the lags settle.
  MatX steady_gain() const;
};

/// Downwash coupling: effective angle of every strip per unit geometric angle,
/// from a sine-series lifting-line solve with as many terms as strips.
MatX lifting_line_coupling(const StripGeometry& geometry);

AeroModel build_aero_model(const StripGeometry& geometry, const KinematicSnapshot& snapshot,
                           double airspeed, double air_density = 1.225,
                           const WagnerApproximant& wagner = {});
/// Same, reusing a coupling matrix from lifting_line_coupling(geometry).
AeroModel build_aero_model(const StripGeometry& geometry, const MatX& coupling,
                           const KinematicSnapshot& snapshot, double airspeed,
                           double air_density = 1.225, const WagnerApproximant& wagner = {});

/// Compose the model with a linear input map: y1_model = input_map * y1_new.
AeroModel with_input_map(const AeroModel& model, const MatX& input_map);

struct WakeState {
  VecX lag_states;
  std::size_t n_lag = 2;

  static WakeState zero(const AeroModel& model);
};

struct ForceOutput {
  Vec6 wrench = Vec6::Zero();
  VecX per_strip_lift;
};

ForceOutput split_output(const AeroModel& model, const VecX& y2);
ForceOutput evaluate_output(const AeroModel& model, const VecX& xi, const VecX& y1);

struct StepResult {
  WakeState xi;
  ForceOutput y2;
};

/// Advance the lag states one step with y1 held, returning y2 at step end.
StepResult aero_step(const AeroModel& model, const WakeState& xi, const VecX& y1, double dt);

struct RebuildPolicy {
  std::function<AeroModel(std::size_t step)> build;
  std::size_t interval = 1;
};

/// Bound circulation per strip (Kutta-Joukowski) and the horseshoe strength
/// shed at every step. shed[n] = bound[n] - bound[n + 1], so the shed sum
/// plus the final bound circulation reproduces the initial bound circulation.
struct WakeHistory {
  std::vector<VecX> bound;  // size steps + 1
  std::vector<VecX> shed;   // size steps

  VecX total_shed() const;
  /// |initial bound - final bound - total shed| relative to the largest
  /// circulation seen.
  double kelvin_residual() const;
};

VecX bound_circulation(const AeroModel& model, const ForceOutput& y2);

WakeHistory wake_circulation_history(const std::vector<VecX>& y1_trajectory,
                                     const RebuildPolicy& policy, double dt);
WakeHistory wake_circulation_history(const std::vector<VecX>& y1_trajectory,
                                     const AeroModel& model, double dt);

/// Debug export: "# rows,cols" header then one comma-separated row per line.
void write_matrix_csv(std::ostream& out, const MatX& m);
MatX read_matrix_csv(std::istream& in);

}  // namespace morphwing::aero
