#pragma once

#include "morphwing/common.hpp"

#include <cmath>

// Longitudinal flight state: planar body motion (x forward, z up, pitch
// nose-up positive) plus mirrored wing joints.
namespace morphwing {

struct FullState {
  Vec3 body_position = Vec3::Zero();  // m, lateral component held at zero
  Vec3 body_velocity = Vec3::Zero();  // m/s
  double pitch = 0.0;                 // rad
  double pitch_rate = 0.0;            // rad/s
  VecX q_active = VecX::Zero(4);      // flap_L, elbow_L, flap_R, elbow_R (rad)
  VecX q_passive = VecX::Zero(2);     // wrist_L, wrist_R (rad)
  VecX active_rates = VecX::Zero(4);  // rad/s
  VecX passive_rates = VecX::Zero(2);

  bool finite() const {
    return body_position.allFinite() && body_velocity.allFinite() && std::isfinite(pitch) &&
           std::isfinite(pitch_rate) && q_active.allFinite() && q_passive.allFinite() &&
           active_rates.allFinite() && passive_rates.allFinite();
  }
};

}  // namespace morphwing
