#include "morphwing/rotation.hpp"

#include <gtest/gtest.h>

#include <random>

namespace morphwing::rotation {
namespace {

Mat3 series_tangent(const Vec3& psi, int order) {
  const Mat3 h = hat(psi);
  Mat3 term = Mat3::Identity();
  Mat3 sum = Mat3::Zero();
  double fact = 1.0;
  for (int n = 0; n <= order; ++n) {
    fact *= static_cast<double>(n + 1);
    sum += ((n % 2 == 0) ? 1.0 : -1.0) / fact * term;
    term = term * h;
  }
  return sum;
}

Vec3 random_psi(std::mt19937& rng, double scale) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return scale * Vec3(u(rng), u(rng), u(rng));
}

TEST(Rotation, HatVeeRoundTrip) {
  const Vec3 a(0.3, -1.2, 2.0), b(-0.7, 0.4, 1.1);
  EXPECT_TRUE((hat(a) * b - a.cross(b)).norm() < 1e-15);
  EXPECT_TRUE((vee(hat(a)) - a).norm() < 1e-15);
}

TEST(Rotation, ExpIsOrthogonal) {
  std::mt19937 rng(11);
  for (int i = 0; i < 200; ++i) {
    const Mat3 r = exp_map(random_psi(rng, 3.0));
    EXPECT_LT((r.transpose() * r - Mat3::Identity()).norm(), 1e-12);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
  }
}

TEST(Rotation, LogInvertsExp) {
  std::mt19937 rng(12);
  for (int i = 0; i < 200; ++i) {
    const Vec3 psi = random_psi(rng, 1.7);
    if (psi.norm() >= 3.0) continue;
    EXPECT_LT((log_map(exp_map(psi)) - psi).norm(), 1e-10);
  }
  EXPECT_LT(log_map(Mat3::Identity()).norm(), 1e-15);
}

TEST(Rotation, TangentMatchesHighOrderSeries) {
  const Vec3 psi(kPi / 2.0, 0.0, 0.0);
  EXPECT_LT((tangent_map(psi) - series_tangent(psi, 30)).cwiseAbs().maxCoeff(), 1e-10);
  const Vec3 small(1e-5, -2e-5, 3e-6);
  EXPECT_LT((tangent_map(small) - series_tangent(small, 12)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Rotation, TangentMapsRatesToMaterialAngularVelocity) {
  std::mt19937 rng(13);
  const double h = 1e-5;
  for (int i = 0; i < 50; ++i) {
    const Vec3 psi = random_psi(rng, 1.0);
    const Vec3 dpsi = random_psi(rng, 1.0);
    const Mat3 r = exp_map(psi);
    const Mat3 dr = (exp_map(psi + h * dpsi) - exp_map(psi - h * dpsi)) / (2.0 * h);
    const Vec3 w = vee(r.transpose() * dr);
    EXPECT_LT((w - tangent_map(psi) * dpsi).norm(), 1e-8);
  }
}

TEST(Rotation, TangentInverseAndDerivative) {
  std::mt19937 rng(14);
  const double h = 1e-6;
  for (int i = 0; i < 50; ++i) {
    const Vec3 psi = random_psi(rng, 1.2);
    const Vec3 dir = random_psi(rng, 1.0);
    EXPECT_LT((tangent_map(psi) * tangent_map_inverse(psi) - Mat3::Identity()).norm(), 1e-12);
    const Mat3 fd = (tangent_map(psi + h * dir) - tangent_map(psi - h * dir)) / (2.0 * h);
    EXPECT_LT((fd - tangent_map_derivative(psi, dir)).norm(), 1e-8);
  }
}

TEST(Rotation, PrincipalBranchGuard) {
  EXPECT_NO_THROW(require_principal(Vec3(3.0, 0.0, 0.0)));
  EXPECT_THROW(require_principal(Vec3(0.0, 0.0, kPi)), NumericalError);
}

}  // namespace
}  // namespace morphwing::rotation
