#pragma once

#include "morphwing/aero.hpp"
#include "morphwing/common.hpp"
#include "morphwing/flightsim.hpp"
#include "morphwing/placement.hpp"
#include "morphwing/primer.hpp"
#include "morphwing/rgov.hpp"
#include "morphwing/wing.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Scenario configuration: one YAML document with nested sections and
// unit-suffixed numbers. See README for the grammar.
namespace morphwing::config {

enum class ScenarioKind { aero_validate, structure_march, rg_analysis, placement_optimize, closed_loop_sim };

std::string_view kind_name(ScenarioKind kind);
/// Section a kind needs to be present.
std::string_view required_section(ScenarioKind kind);

struct AeroSettings {
  double airspeed = 5.0;        // m/s
  double air_density = 1.225;   // kg/m^3
  double aspect_ratio = 6.0;
  double span = 0.3;            // m, elliptic validation wing
  std::size_t strips = 20;
  double alpha = 0.08726646259971647;  // rad, validation angle of attack
  aero::WagnerApproximant wagner;
  double step_semichords = 1000.0;
  std::size_t samples = 200;
};

struct MarchSettings {
  double duration = 1.0;  // s
  double dt = 1e-4;       // s
  std::string profile = "step";  // step, sine or ramp
  double command = 1.04;  // mm
  double frequency = 2.0;  // Hz, sine profile
  std::size_t sample_every = 10;
  std::vector<double> sensitivity_points{0.0, 0.26, 0.52, 0.78, 1.04};  // mm
  std::vector<std::size_t> slots;  // primer slot elements, empty = flexure
};

/// coefficient * output <= bound. Outputs: wrench (0..5), strip lifts, then
/// (rg-analysis only) the elbow angle; bound in the output's SI unit.
struct ConstraintSettings {
  std::size_t output = 2;
  double coefficient = 1.0;
  double bound = 0.05;
};

struct GovernorSettings {
  rgov::GovernorOptions options;
  double zeta = 0.9;
  std::vector<std::size_t> channels;  // prestabilized DOFs, empty = all
  double requested = 1.04;  // mm
  double duration = 1.0;    // s
  double update = 0.01;     // s, governor period
  double dt = 1e-4;         // s
  std::size_t sample_every = 10;
  std::vector<ConstraintSettings> constraints{ConstraintSettings{}};
};

/// Desired direction: baseline component `component` rotated by `angle`
/// about baseline component `axis` (1-based), or `vector` when nonzero.
struct DesiredSettings {
  std::size_t component = 1;
  std::size_t axis = 3;
  double angle = 0.3490658503988659;  // rad
  Vec3 vector = Vec3::Zero();
};

struct PlacementSettings {
  placement::GaitExcitation gait;
  std::vector<DesiredSettings> desired{DesiredSettings{}};
  std::size_t budget = 2;
  placement::PlacementOptions options;
  bool aero_coupled = false;
  std::vector<std::size_t> candidates;  // element indices, empty = every element
  bool verify = false;  // also run the brute-force oracle
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::closed_loop_sim;
  std::string output_dir;
  std::uint64_t seed = 1;
  primer::PrimerSpec primer;
  wing::WingDesign wing;
  AeroSettings aero;
  flightsim::SimConfig flight;
  MarchSettings march;
  GovernorSettings governor;
  PlacementSettings placement;

  /// Flight settings with the shared primer, wing and aero sections applied.
  flightsim::SimConfig flight_config() const;
};

PlacementSettings default_placement();

struct Issue {
  int line = 0;  // 1-based, 0 = whole file
  int column = 0;
  std::string key;
  std::string message;

  std::string describe(const std::string& source) const;
};

class ConfigErrors : public ConfigError {
 public:
  ConfigErrors(std::string source, std::vector<Issue> issues);
  const std::vector<Issue>& issues() const { return issues_; }

 private:
  std::vector<Issue> issues_;
};

/// Parse and validate; throws ConfigErrors listing every problem found.
ScenarioConfig parse(const std::string& text, const std::string& source = "<config>");
ScenarioConfig load(const std::string& path);

/// Every field written in its canonical unit; parse(emit(c)) reproduces c.
std::string emit(const ScenarioConfig& config);

/// Dimension-level checks run after parsing (module validation).
void validate(const ScenarioConfig& config);

}  // namespace morphwing::config
