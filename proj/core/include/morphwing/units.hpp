#pragma once

#include <string>
#include <string_view>
#include <vector>

// Unit-suffixed quantities ("1.04mm", "10Hz", "2.5GPa") converted to SI.
namespace morphwing::units {

enum class Dimension {
  dimensionless,
  length,
  mass,
  time,
  frequency,
  angle,
  force,
  load,  // force or moment, for output-constraint bounds
  pressure,
  density,
  current,
  velocity,
  area,
  inertia,
  torque,
  rotational_stiffness,
  rotational_damping,
  rate_gain,          // 1/s
  acceleration_gain,  // 1/s^2
  stroke_per_angle,   // mm/rad style controller gain, SI m/rad
  stroke_per_rate     // m s/rad
};

std::string_view name(Dimension d);

/// Canonical SI suffix used when writing normalized values.
std::string_view si_suffix(Dimension d);

/// Accepted suffixes for a dimension, canonical first.
std::vector<std::string> suffixes(Dimension d);

/// Parse "<number><suffix>" into SI. Dimensionless values take no suffix
/// (or "%"). Throws ConfigError naming the expected suffixes.
double parse(std::string_view text, Dimension d);

/// Parse into the unit named by `target` (one of the dimension's suffixes).
/// A value already written in `target` is returned unscaled.
double parse(std::string_view text, Dimension d, std::string_view target);

/// SI value written with the canonical suffix, round-trip precision.
std::string format(double si_value, Dimension d);

/// Value written with an explicit suffix, round-trip precision.
std::string format(double value, std::string_view suffix);

}  // namespace morphwing::units
