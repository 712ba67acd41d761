#pragma once

#include "morphwing/aero.hpp"
#include "morphwing/common.hpp"
#include "morphwing/flight_state.hpp"
#include "morphwing/gait.hpp"
#include "morphwing/multibody.hpp"
#include "morphwing/primer.hpp"
#include "morphwing/rgov.hpp"
#include "morphwing/wing.hpp"

#include <cstddef>
#include <string>
#include <vector>

// Longitudinal flight model: planar body (x, z, pitch) with two mirrored
// articulated wings (flap and elbow active, wrist passive). Active joints
// track a periodic gait through computed torque; primers shift the elbow
// reference through the compliant wing structure.
namespace morphwing::flightsim {

/// Generalized coordinate order.
enum Coordinate : std::size_t {
  kX = 0, kZ = 1, kPitch = 2,
  kFlapL = 3, kElbowL = 4, kFlapR = 5, kElbowR = 6,
  kWristL = 7, kWristR = 8,
  kCoordinates = 9
};

struct LinkSpec {
  double length = 0.05;  // m
  double chord = 0.07;   // m
  double mass = 1.5e-3;  // kg
  std::size_t strips = 2;
};

/// Order-of-magnitude MAV values; the physical vehicle's mass properties are
/// not published.
struct RobotParams {
  double body_mass = 0.028;                      // kg
  Vec3 body_inertia = Vec3(2e-5, 1e-4, 1e-4);    // kg m^2, principal
  Vec3 body_com = Vec3(0.0, 0.0, -0.005);       // body frame, below the shoulders
  Vec3 shoulder = Vec3(0.0, 0.012, 0.0);         // left shoulder, body frame
  LinkSpec arm{0.05, 0.07, 1.5e-3, 2};
  LinkSpec forearm{0.055, 0.07, 1.2e-3, 3};
  LinkSpec hand{0.05, 0.06, 0.8e-3, 3};
  double wrist_stiffness = 0.02;   // N m/rad
  double wrist_damping = 6e-5;     // N m s/rad
  double incidence = 0.15;         // rad, wing setting angle
  double body_drag_area = 0.0;     // m^2 (Cd * A)
  double flap_limit = 1.4;         // rad
  double elbow_limit = 1.5;        // rad
  double wrist_limit = 1.2;        // rad

  void validate() const;
  double total_mass() const {
    return body_mass + 2.0 * (arm.mass + forearm.mass + hand.mass);
  }
};

multibody::Tree build_tree(const RobotParams& params);

/// Computed-torque PD on active joint error.
struct JointGains {
  double kp = 35530.6;  // 1/s^2, (2 pi 30)^2
  double kd = 377.0;    // 1/s
};

struct PitchGains {
  double kp = 0.4;    // mm/rad
  double kd = 0.3;    // mm/(rad/s)
  double trim = 0.52; // mm; replaced by the trim search when auto_trim is set
  /// +1 or -1: which way a command moves the pitch moment; set by trim.
  double sign = 1.0;
  double stroke_max = 1.04;  // mm
};

struct ControllerConfig {
  bool closed_loop = true;
  PitchGains gains;
  double pitch_ref = 0.0;      // rad
  double rate = 100.0;         // Hz
  bool period_filter = true;   // average pitch over the last gait period
  bool auto_trim = true;
  bool governor = false;
  std::vector<rgov::Constraint> governor_constraints;
};

struct AeroConfig {
  bool enabled = true;
  double airspeed = 5.0;  // m/s, initial forward speed
  double air_density = 1.225;
  aero::WagnerApproximant wagner;
};

/// Flight gait: elbow swept back at mid-stroke with no lag behind the flap;
/// the primers sweep it forward.
inline gait::GaitShape flight_gait() {
  gait::GaitShape g;
  g.flap_amplitude = 0.45;
  g.elbow_amplitude = 0.25;
  g.elbow_mean = 0.27;
  g.elbow_phase = 0.0;
  return g;
}

struct SimConfig {
  RobotParams robot;
  gait::GaitShape gait = flight_gait();
  JointGains joints;
  primer::PrimerSpec primer;
  wing::WingDesign wing;
  double gearing = 1.0;       // flight elbow shift per structure elbow angle
  double max_gearing = 2.6;
  ControllerConfig controller;
  AeroConfig aero;
  double duration = 10.0;     // s
  double dt = 1e-4;           // s
  std::size_t sample_every = 10;
  double initial_pitch_error = 0.17453292519943295;  // rad
  bool gravity = true;
  double pitch_limit = 1.2217304763960306;  // rad, divergence bound (70 deg)
  double state_bound = 1e4;
  double warmup = 0.3;        // s, captive run before release
  bool balance_trim = true;   // trim incidence and drag area as well
  bool free_trim = true;      // refine the command on the released body
  Vec6 stabilizer_wrench = Vec6::Zero();  // optional external body wrench

  void validate() const;
};

/// Uniformly sampled flight record: body velocity, attitude, aerodynamic
/// wrench, wing joints and primer actions.
struct SimOutput {
  std::vector<double> time;
  std::vector<Vec3> body_velocity;       // world x, y, z
  std::vector<double> pitch;             // rad
  std::vector<double> pitch_rate;        // rad/s
  std::vector<Vec6> wrench;              // aero force and moment about the body origin
  std::vector<VecX> joints;              // q_active then q_passive
  std::vector<Vec3> primer;              // command (mm), displacement (mm), elbow shift (rad)
  std::vector<double> zero_dynamics;     // |y1| over active joints
  double trim_command = 0.0;
  double trim_incidence = 0.0;
  double drag_area = 0.0;
  bool saturated = false;

  std::size_t size() const { return time.size(); }
};

class SimulationDiverged : public NumericalError {
 public:
  SimulationDiverged(const std::string& what, SimOutput partial, FullState last_good)
      : NumericalError(what), partial_(std::move(partial)), last_good_(std::move(last_good)) {}
  const SimOutput& partial() const { return partial_; }
  const FullState& last_good() const { return last_good_; }

 private:
  SimOutput partial_;
  FullState last_good_;
};

/// q = [x, z, pitch, active, passive], qd likewise.
VecX positions(const FullState& x);
VecX velocities(const FullState& x);
FullState from_coordinates(const VecX& q, const VecX& qd);

/// State derivative [q'; q''] under joint torques u (one per active joint)
/// and an aerodynamic output whose wrench acts on the body about its origin.
VecX full_dynamics(const FullState& x, const VecX& u, const aero::ForceOutput& y2,
                   const RobotParams& params, bool gravity = true);

double total_energy(const FullState& x, const RobotParams& params, bool gravity = true);

/// One classic RK4 step of full_dynamics with u and y2 held.
FullState rk4_step(const FullState& x, const VecX& u, const aero::ForceOutput& y2,
                   const RobotParams& params, double dt, bool gravity = true);

/// Active-joint tracking output y1 = q_a - q_ref(t).
VecX gait_output(const FullState& x, const gait::GaitReference& gait, double t);

struct PitchCommand {
  double command = 0.0;  // mm
  bool saturated = false;
};
PitchCommand pitch_controller(const FullState& x, double pitch_ref, const PitchGains& gains);

struct TrimResult {
  double command = 0.0;    // mm
  double incidence = 0.0;  // rad
  double drag_area = 0.0;  // m^2
  double sign = 1.0;       // d(pitch moment)/d(command) sign
  Vec3 residual = Vec3::Zero();  // captive mean net x force, z force, pitch moment
  double pitch_acceleration = 0.0;  // rad/s^2, released body, second period
};

/// Captive-body balance: drag area from the mean thrust, incidence for mean
/// lift equal to weight, and bisection on the primer command for zero mean
/// pitch moment over one gait period. With free_trim the command bisection
/// is repeated on the released body (zero mean pitch acceleration).
TrimResult trim(const SimConfig& config);

/// Mean net generalized load on (x, z, pitch) over the last gait period of a
/// captive run with a fixed primer command, body held at `pitch`.
Vec3 captive_mean_load(const SimConfig& config, double command, double pitch = 0.0);

/// Mean pitch acceleration over the second gait period after releasing the
/// body from a captive warm-up.
double released_pitch_acceleration(const SimConfig& config, double command);

SimOutput simulate(const SimConfig& config);

/// Closed-loop summary numbers.
struct SimSummary {
  double settling_time = -1.0;   // s; first time after which |pitch error| stays within band
  double max_pitch_error = 0.0;  // rad
  double command_min = 0.0;      // mm
  double command_max = 0.0;      // mm
  bool bounded = true;
};
SimSummary summarize(const SimOutput& out, double pitch_ref, double band);

/// Mean flight elbow angle (rad) over one gait period with a fixed primer
/// displacement, starting from structure steady state.
double mean_elbow_angle(const SimConfig& config, double displacement_mm);

}  // namespace morphwing::flightsim
