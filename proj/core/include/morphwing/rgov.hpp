#pragma once

#include "morphwing/aero.hpp"
#include "morphwing/common.hpp"
#include "morphwing/flight_state.hpp"
#include "morphwing/gait.hpp"
#include "morphwing/structure.hpp"

#include <cstddef>
#include <utility>
#include <vector>

// Reference-governor view of the primer-driven structure: pre-stabilized
// output dynamics Y' = A_Y Y + B_Y omega over Y = [y1; y1'], the equilibrium
// locus, and scalar governing of primer commands against affine constraints
// on the aerodynamic output y2.
namespace morphwing::rgov {

/// c . y2 <= bound
struct Constraint {
  VecX c;
  double bound = 0.0;
};

struct RGModel {
  MatX a_y;
  MatX b_y;
  std::vector<Constraint> y2_constraints;

  std::size_t state_dim() const { return static_cast<std::size_t>(a_y.rows()); }
  std::size_t input_dim() const { return static_cast<std::size_t>(b_y.cols()); }
};

/// Acceleration-level PD on selected DOFs (indices into y1). An empty channel
/// list selects every DOF. Defaults: zeta 0.9, natural frequency twice the
/// gait frequency.
struct PrestabilizerGains {
  double kp = 0.0;  // 1/s^2
  double kd = 0.0;  // 1/s
  std::vector<std::size_t> channels;

  static PrestabilizerGains from_gait(double gait_frequency_hz, double zeta = 0.9);
};

/// Closed loop of a second-order block system [0 I; -K -C] with PD added on
/// the selected channels; throws "pre-stabilization failed" with the
/// offending eigenvalues when not Hurwitz.
RGModel prestabilize(const MatX& a, const MatX& b, const PrestabilizerGains& gains);
RGModel prestabilize(const structure::AssembledStructure& s, const PrestabilizerGains& gains);

/// -A_Y^{-1} B_Y omega.
VecX equilibrium_locus(const RGModel& model, const VecX& omega);

/// Hyperplane slope of the locus: d(equilibrium)/d(omega) = -A_Y^{-1} B_Y.
MatX locus_direction(const RGModel& model);

struct GovernorOptions {
  double horizon = 0.2;  // s
  std::size_t horizon_steps = 200;
  double tolerance = 1e-6;  // bisection width on lambda
  bool check_steady_state = true;
};

struct GovernResult {
  VecX omega;
  double lambda = 1.0;
  /// false when even lambda = 0 violates a constraint from this state
  bool feasible = true;
};

/// Predicted y2 samples at t = k * horizon / steps, k = 0..steps, for the
/// coupled [Y; xi] system with omega held. `aero` takes Y as its input (see
/// aero::with_input_map). An empty xi0 starts the wake at its steady state
/// for the current Y.
std::vector<VecX> predict_outputs(const RGModel& model, const aero::AeroModel& aero,
                                  const VecX& omega, const VecX& state, const VecX& xi0,
                                  const GovernorOptions& options);

/// Largest lambda in [0, 1] (to the bisection tolerance) such that
/// lambda * requested keeps every predicted y2 sample admissible.
GovernResult govern(const RGModel& model, const VecX& requested_omega, const VecX& current_state,
                    const aero::AeroModel& aero, const GovernorOptions& options = {},
                    const VecX& xi0 = VecX());

/// Largest constraint excess max(c . y2 - bound) over the samples.
double worst_violation(const std::vector<Constraint>& constraints, const std::vector<VecX>& y2);

/// (q_a - q_ref(t), q_a' - q_ref'(t)).
std::pair<VecX, VecX> zero_dynamics_residual(const FullState& x, const gait::GaitReference& gait,
                                             double t);

}  // namespace morphwing::rgov
