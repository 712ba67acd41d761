#include "morphwing/rotation.hpp"

#include <Eigen/Geometry>

#include <cmath>

namespace morphwing::rotation {

namespace {

// Coefficients of T(psi) = I - a(t) hat + b(t) hat^2 and their
// derivatives divided by t, with Taylor branches near the origin.
struct TangentCoeffs {
  double a, b, da_over_t, db_over_t;
};

TangentCoeffs tangent_coeffs(double t) {
  TangentCoeffs c{};
  const double t2 = t * t;
  if (t < 1e-3) {
    c.a = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
    c.b = 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0;
    c.da_over_t = -1.0 / 12.0 + t2 / 180.0;
    c.db_over_t = -1.0 / 60.0 + t2 / 1260.0;
    return c;
  }
  const double s = std::sin(t);
  const double co = std::cos(t);
  c.a = (1.0 - co) / t2;
  c.b = (t - s) / (t2 * t);
  c.da_over_t = (s / t2 - 2.0 * (1.0 - co) / (t2 * t)) / t;
  c.db_over_t = ((1.0 - co) / (t2 * t) - 3.0 * (t - s) / (t2 * t2)) / t;
  return c;
}

}  // namespace

Mat3 hat(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Vec3 vee(const Mat3& m) { return {m(2, 1), m(0, 2), m(1, 0)}; }

Mat3 exp_map(const Vec3& psi) {
  const double t = psi.norm();
  const Mat3 k = hat(psi);
  double sa = 0.0;
  double cb = 0.0;
  if (t < 1e-4) {
    const double t2 = t * t;
    sa = 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
    cb = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
  } else {
    sa = std::sin(t) / t;
    cb = (1.0 - std::cos(t)) / (t * t);
  }
  return Mat3::Identity() + sa * k + cb * k * k;
}

Vec3 log_map(const Mat3& r) {
  const Eigen::AngleAxisd aa(r);
  return aa.angle() * aa.axis();
}

void require_principal(const Vec3& psi) {
  if (!psi.allFinite() || psi.norm() >= kPi) throw NumericalError("rotation branch");
}

Mat3 tangent_map(const Vec3& psi) {
  require_principal(psi);
  const TangentCoeffs c = tangent_coeffs(psi.norm());
  const Mat3 k = hat(psi);
  return Mat3::Identity() - c.a * k + c.b * k * k;
}

Mat3 tangent_map_inverse(const Vec3& psi) {
  require_principal(psi);
  const double t = psi.norm();
  const Mat3 k = hat(psi);
  double g = 0.0;
  if (t < 1e-3) {
    const double t2 = t * t;
    g = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0;
  } else {
    g = 1.0 / (t * t) - (1.0 + std::cos(t)) / (2.0 * t * std::sin(t));
  }
  return Mat3::Identity() + 0.5 * k + g * k * k;
}

Mat3 tangent_map_derivative(const Vec3& psi, const Vec3& dir) {
  require_principal(psi);
  const TangentCoeffs c = tangent_coeffs(psi.norm());
  const Mat3 k = hat(psi);
  const Mat3 dk = hat(dir);
  const double proj = psi.dot(dir);
  return -c.da_over_t * proj * k - c.a * dk + c.db_over_t * proj * k * k +
         c.b * (dk * k + k * dk);
}

}  // namespace morphwing::rotation
