#include "morphwing/aero.hpp"
#include "morphwing/linear_system.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

namespace morphwing::aero {
namespace {

double lifting_line_cl(double alpha, double aspect_ratio) {
  return 2.0 * kPi * alpha / (1.0 + 2.0 / aspect_ratio);
}

double total_cl(const AeroModel& m, const StripGeometry& g, double alpha, double speed, double rho) {
  const VecX y1 = VecX::Constant(static_cast<Eigen::Index>(g.size()), alpha);
  const ForceOutput f = split_output(m, m.steady_gain() * y1);
  double area = 0.0;
  for (double a : g.area) area += a;
  return f.per_strip_lift.sum() / (0.5 * rho * speed * speed * area);
}

TEST(Geometry, EllipticWingAreasSumToPlanform) {
  const StripGeometry g = elliptic_wing(0.3, 6.0, 20);
  ASSERT_EQ(g.size(), 20u);
  double area = 0.0;
  for (double a : g.area) area += a;
  EXPECT_NEAR(area, 0.3 * 0.3 / 6.0, 1e-12);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_GT(g.span_stations[i], g.span_stations[i - 1]);
  EXPECT_NO_THROW(g.validate());
}

TEST(Geometry, InvalidGeometryRejected) {
  StripGeometry g = elliptic_wing(0.3, 6.0, 4);
  g.chord[1] = -0.01;
  EXPECT_THROW(g.validate(), Error);
  EXPECT_THROW(elliptic_wing(0.3, 6.0, 0), Error);
}

class LiftSlope : public ::testing::TestWithParam<double> {};

TEST_P(LiftSlope, MatchesLiftingLineWithinTwoPercent) {
  const double ar = GetParam();
  const StripGeometry g = elliptic_wing(0.3, ar, 20);
  const AeroModel m = build_aero_model(g, {}, 5.0);
  const double alpha = deg2rad(5.0);
  const double cl = total_cl(m, g, alpha, 5.0, 1.225);
  EXPECT_NEAR(cl / lifting_line_cl(alpha, ar), 1.0, 0.02) << "AR " << ar;
}

INSTANTIATE_TEST_SUITE_P(AspectRatios, LiftSlope, ::testing::Values(4.0, 6.0, 8.0, 12.0));

TEST(Model, LagDynamicsAreStable) {
  for (std::size_t n : {4u, 9u, 20u}) {
    const StripGeometry g = elliptic_wing(0.25, 5.0, n);
    const AeroModel m = build_aero_model(g, {}, 3.0);
    EXPECT_LT(spectral_abscissa(m.a_xi), 0.0);
    EXPECT_EQ(m.output_dim(), 6 + n);
    EXPECT_EQ(m.state_dim(), 2 * n);
  }
}

TEST(Model, WagnerApproximantLimits) {
  const WagnerApproximant w;
  EXPECT_NEAR(w.phi(0.0), 0.5, 1e-15);
  EXPECT_GT(w.phi(1000.0), 0.99);
  EXPECT_NEAR(w.phi(1000.0), 1.0, 1e-12);
  EXPECT_LT(w.phi(1.0), w.phi(2.0));
}

TEST(Model, StepResponseStartsAtHalfAndSettles) {
  const StripGeometry g = elliptic_wing(0.3, 6.0, 20);
  const double speed = 5.0;
  const AeroModel m = build_aero_model(g, {}, speed);
  const VecX y1 = VecX::Constant(20, 0.05);
  const double settled = split_output(m, m.steady_gain() * y1).per_strip_lift.sum();
  WakeState xi = WakeState::zero(m);
  EXPECT_NEAR(evaluate_output(m, xi.lag_states, y1).per_strip_lift.sum() / settled, 0.5, 0.01);

  const double semichord = 0.5 * 0.3 / 6.0;
  const double horizon = 1000.0 * semichord / speed;
  const int steps = 500;
  double last = 0.0;
  for (int k = 0; k < steps; ++k) {
    const StepResult r = aero_step(m, xi, y1, horizon / steps);
    xi = r.xi;
    last = r.y2.per_strip_lift.sum() / settled;
  }
  EXPECT_GE(last, 0.99);
}

TEST(Model, StepRejectsBadInput) {
  const AeroModel m = build_aero_model(elliptic_wing(0.3, 6.0, 4), {}, 5.0);
  EXPECT_THROW(aero_step(m, WakeState::zero(m), VecX::Zero(4), 0.0), Error);
  EXPECT_THROW(aero_step(m, WakeState::zero(m), VecX::Constant(4, NAN), 1e-3), Error);
}

TEST(Model, LiftScalesWithDynamicPressure) {
  const StripGeometry g = elliptic_wing(0.3, 6.0, 10);
  const VecX y1 = VecX::Constant(10, 0.1);
  const AeroModel slow = build_aero_model(g, {}, 2.0);
  const AeroModel fast = build_aero_model(g, {}, 4.0);
  const double ls = split_output(slow, slow.steady_gain() * y1).per_strip_lift.sum();
  const double lf = split_output(fast, fast.steady_gain() * y1).per_strip_lift.sum();
  EXPECT_NEAR(lf / ls, 4.0, 1e-9);
}

TEST(Wake, PeriodicFlappingShedsPeriodically) {
  const StripGeometry g = elliptic_wing(0.3, 6.0, 8);
  const AeroModel m = build_aero_model(g, {}, 5.0);
  const int per_period = 100;
  const double period = 0.1, dt = period / per_period;
  std::vector<VecX> y1;
  for (int k = 0; k <= 20 * per_period; ++k) {
    const double t = k * dt;
    VecX a(8);
    for (int i = 0; i < 8; ++i) a(i) = 0.1 * std::sin(2.0 * kPi * t / period + 0.2 * i);
    y1.push_back(a);
  }
  const WakeHistory h = wake_circulation_history(y1, m, dt);
  double scale = 0.0, diff = 0.0;
  const std::size_t n = h.shed.size();
  for (std::size_t k = n - per_period; k < n; ++k) {
    scale = std::max(scale, h.shed[k].cwiseAbs().maxCoeff());
    diff = std::max(diff, (h.shed[k] - h.shed[k - per_period]).cwiseAbs().maxCoeff());
  }
  EXPECT_LT(diff, 1e-6 * scale);
}

TEST(Wake, KelvinSumAfterImpulsiveChange) {
  const StripGeometry g = elliptic_wing(0.3, 6.0, 8);
  const AeroModel m = build_aero_model(g, {}, 5.0);
  std::vector<VecX> y1(400, VecX::Constant(8, 0.08));
  y1[0].setZero();
  const WakeHistory h = wake_circulation_history(y1, m, 1e-3);
  EXPECT_LT(h.kelvin_residual(), 1e-12);
  const VecX lhs = h.total_shed();
  const VecX rhs = h.bound.front() - h.bound.back();
  EXPECT_LT((lhs - rhs).norm(), 1e-12 * std::max(1.0, rhs.norm()));
}

TEST(Export, MatrixCsvRoundTrip) {
  const AeroModel m = build_aero_model(elliptic_wing(0.3, 6.0, 5), {}, 5.0);
  std::stringstream ss;
  write_matrix_csv(ss, m.b_xi);
  const MatX back = read_matrix_csv(ss);
  EXPECT_EQ(back.rows(), m.b_xi.rows());
  EXPECT_EQ(back.cols(), m.b_xi.cols());
  EXPECT_EQ((back - m.b_xi).cwiseAbs().maxCoeff(), 0.0);
}

}  // namespace
}  // namespace morphwing::aero
