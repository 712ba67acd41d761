#include "morphwing/gait.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace morphwing::gait {
namespace {

PeriodicSpline cosine_spline(std::size_t knots, double period) {
  std::vector<double> v(knots);
  for (std::size_t k = 0; k < knots; ++k) v[k] = std::cos(2.0 * kPi * static_cast<double>(k) / static_cast<double>(knots));
  return PeriodicSpline(v, period);
}

TEST(Spline, InterpolatesKnots) {
  const std::vector<double> knots{0.3, -0.1, 0.7, 0.2, 0.0};
  const PeriodicSpline s(knots, 2.0);
  for (std::size_t k = 0; k < knots.size(); ++k) {
    EXPECT_NEAR(s.value(2.0 * static_cast<double>(k) / 5.0), knots[k], 1e-14);
  }
}

TEST(Spline, PeriodicAcrossWrap) {
  const PeriodicSpline s({0.3, -0.1, 0.7, 0.2, 0.0}, 2.0);
  for (double t : {0.0, 0.37, 1.9}) {
    EXPECT_NEAR(s.value(t), s.value(t + 2.0), 1e-13);
    EXPECT_NEAR(s.value(t), s.value(t - 6.0), 1e-13);
  }
  const double e = 1e-9;
  EXPECT_NEAR(s.derivative(2.0 - e), s.derivative(e), 1e-6);
  EXPECT_NEAR(s.second_derivative(2.0 - e), s.second_derivative(e), 1e-6);
}

TEST(Spline, DerivativesMatchFiniteDifferences) {
  const PeriodicSpline s({0.3, -0.1, 0.7, 0.2, 0.0, 0.5}, 0.1);
  const double h = 1e-6;
  for (double t : {0.011, 0.042, 0.093}) {
    EXPECT_NEAR(s.derivative(t), (s.value(t + h) - s.value(t - h)) / (2.0 * h), 1e-4);
    EXPECT_NEAR(s.second_derivative(t), (s.derivative(t + h) - s.derivative(t - h)) / (2.0 * h), 1e-2);
  }
}

TEST(Spline, ConvergesToSampledFunction) {
  auto err = [](std::size_t n) {
    const PeriodicSpline s = cosine_spline(n, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double t = i / 1000.0;
      worst = std::max(worst, std::abs(s.value(t) - std::cos(2.0 * kPi * t)));
    }
    return worst;
  };
  const double e8 = err(8), e16 = err(16);
  EXPECT_LT(e16, 1e-3);
  EXPECT_GT(e8 / e16, 12.0);
}

TEST(Spline, RejectsDegenerateInput) {
  EXPECT_THROW(PeriodicSpline({1.0, 2.0}, 1.0), Error);
  EXPECT_THROW(PeriodicSpline({1.0, 2.0, 3.0}, 0.0), Error);
}

TEST(Gait, MirroredChannels) {
  const GaitReference g = make_gait({});
  ASSERT_EQ(g.channels.size(), kChannels);
  for (double t : {0.0, 0.013, 0.077}) {
    const VecX q = g.position(t);
    ASSERT_EQ(q.size(), 4);
    EXPECT_EQ(q(flap_left), q(flap_right));
    EXPECT_EQ(q(elbow_left), q(elbow_right));
    EXPECT_EQ(g.velocity(t).size(), 4);
    EXPECT_EQ(g.acceleration(t).size(), 4);
  }
}

TEST(Gait, ShapeParameters) {
  GaitShape shape;
  shape.frequency = 8.0;
  shape.flap_amplitude = 0.5;
  shape.flap_mean = 0.1;
  shape.elbow_mean = 0.2;
  shape.elbow_phase = 0.0;
  const GaitReference g = make_gait(shape);
  EXPECT_DOUBLE_EQ(g.period(), 0.125);
  EXPECT_NEAR(g.position(0.0)(flap_left), 0.6, 1e-14);
  EXPECT_NEAR(g.position(0.0)(elbow_left), 0.2 + shape.elbow_amplitude, 1e-14);
  double mean = 0.0;
  for (int i = 0; i < 400; ++i) mean += g.position(0.125 * i / 400.0)(flap_left) / 400.0;
  EXPECT_NEAR(mean, 0.1, 1e-3);
  shape.frequency = 0.0;
  EXPECT_THROW(make_gait(shape), ConfigError);
}

}  // namespace
}  // namespace morphwing::gait
