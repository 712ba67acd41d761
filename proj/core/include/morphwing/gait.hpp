#pragma once

#include "morphwing/common.hpp"

#include <cstddef>
#include <vector>

namespace morphwing::gait {

/// Periodic cubic spline through uniformly spaced knots over one period
/// (C2 continuous across the wrap).
class PeriodicSpline {
 public:
  PeriodicSpline() = default;
  PeriodicSpline(std::vector<double> knots, double period);

  double value(double t) const;
  double derivative(double t) const;
  double second_derivative(double t) const;
  double period() const { return period_; }
  const std::vector<double>& knots() const { return knots_; }

 private:
  std::vector<double> knots_;
  std::vector<double> moments_;  // second derivatives at the knots
  double period_ = 1.0;
  double h_ = 1.0;

  std::size_t segment(double t, double& u) const;
};

/// Active-joint channel order used throughout the flight model.
enum Channel : std::size_t { flap_left = 0, elbow_left = 1, flap_right = 2, elbow_right = 3 };
inline constexpr std::size_t kChannels = 4;

/// Periodic reference for the active joints.
struct GaitReference {
  double frequency = 10.0;  // Hz
  std::vector<PeriodicSpline> channels;

  double period() const { return 1.0 / frequency; }
  VecX position(double t) const;
  VecX velocity(double t) const;
  VecX acceleration(double t) const;
};

struct GaitShape {
  double frequency = 10.0;         // Hz
  double flap_amplitude = 0.70;    // rad
  double flap_mean = 0.0;          // rad
  double elbow_mean = 0.0;         // rad
  double elbow_amplitude = 0.35;   // rad
  double elbow_phase = 1.5707963267948966;  // rad, lag behind flap
  std::size_t knots = 16;
};

/// Mirrored flap/elbow gait sampled into periodic splines.
GaitReference make_gait(const GaitShape& shape = {});

}  // namespace morphwing::gait
