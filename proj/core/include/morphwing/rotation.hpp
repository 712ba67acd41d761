#pragma once

#include "morphwing/common.hpp"

namespace morphwing::rotation {

/// Skew-symmetric matrix such that hat(a) * b == a.cross(b).
Mat3 hat(const Vec3& v);
Vec3 vee(const Mat3& m);

/// Rotation matrix exp(hat(psi)).
Mat3 exp_map(const Vec3& psi);

/// Principal rotation vector of R (norm in [0, pi]).
Vec3 log_map(const Mat3& r);

/// Tangent map T(psi) = sum_n (-1)^n / (n+1)! hat(psi)^n, in closed form.
/// Maps quasi-coordinate rates to material angular velocity: if
/// R = exp(hat(psi)) then R^T dR = hat(T(psi) dpsi).
Mat3 tangent_map(const Vec3& psi);
Mat3 tangent_map_inverse(const Vec3& psi);

/// Directional derivative d/ds T(psi + s * dir) at s = 0.
Mat3 tangent_map_derivative(const Vec3& psi, const Vec3& dir);

/// Throws "rotation branch" unless |psi| < pi.
void require_principal(const Vec3& psi);

}  // namespace morphwing::rotation
