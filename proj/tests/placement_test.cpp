#include "morphwing/placement.hpp"
#include "morphwing/rotation.hpp"
#include "morphwing/wing.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace morphwing::placement {
namespace {

PlacementProblem fixture(const wing::WingDesign& design, std::size_t budget) {
  const wing::Wing w = wing::build_wing(design, std::vector<structure::PrimerSlot>{});
  PlacementProblem p;
  p.structure = w.structure;
  p.candidate_slots = wing::candidate_slots(design, wing::primer_gain({}));
  p.tip_node = w.tip_node;
  p.gait.frequency = 10.0;
  p.gait.loads = {{design.flexure_element() + 1, Vec3(0, 0, 0.05), Vec3::Zero(), 1, 0.0},
                  {w.tip_node, Vec3(0, 0.02, 0), Vec3::Zero(), 1, kPi / 2}};
  p.v_desired = {Vec3::UnitX()};
  p.budget = budget;
  return p;
}

OmegaParams zero_params(const PlacementProblem& p, std::size_t slots) {
  return OmegaParams::Zero(static_cast<Eigen::Index>(1 + 2 * p.options.harmonics), static_cast<Eigen::Index>(slots));
}

PrincipalComponents baseline(const PlacementProblem& p) {
  return evaluate_placement(p, {0}, zero_params(p, 1)).pcs;
}

double angle_between_lines(const Vec3& a, const Vec3& b) {
  return std::acos(std::min(1.0, std::abs(a.normalized().dot(b.normalized()))));
}

TEST(Pca, RecoversKnownAxes) {
  const Mat3 r = rotation::exp_map(Vec3(0.3, -0.2, 0.5));
  Eigen::Matrix<double, Eigen::Dynamic, 3> pts(360, 3);
  for (int i = 0; i < 360; ++i) {
    const double t = 2.0 * kPi * i / 360.0;
    pts.row(i) = (r * Vec3(3.0 * std::cos(t), 1.0 * std::sin(t), 0.0) + Vec3(1, 2, 3)).transpose();
  }
  const PrincipalComponents pc = wingtip_pca(pts);
  EXPECT_LT(angle_between_lines(pc.vectors.col(0), r.col(0)), 1e-10);
  EXPECT_LT(angle_between_lines(pc.vectors.col(1), r.col(1)), 1e-10);
  EXPECT_NEAR(pc.variances(0), 4.5, 1e-9);
  EXPECT_NEAR(pc.variances(1), 0.5, 1e-9);
  EXPECT_NEAR(pc.variances(2), 0.0, 1e-12);
  for (int c = 0; c < 3; ++c) {
    const Vec3 v = pc.vectors.col(c);
    const int first = std::abs(v(0)) > 1e-12 ? 0 : (std::abs(v(1)) > 1e-12 ? 1 : 2);
    EXPECT_GT(v(first), 0.0);
  }
}

TEST(Geometry, RotateAbout) {
  const Vec3 v = rotate_about(Vec3::UnitX(), Vec3::UnitZ(), kPi / 2);
  EXPECT_LT((v - Vec3::UnitY()).norm(), 1e-15);
  EXPECT_LT((rotate_about(Vec3(1, 2, 3), Vec3(0, 0, 2), 0.4) - rotation::exp_map(Vec3(0, 0, 0.4)) * Vec3(1, 2, 3)).norm(), 1e-14);
}

TEST(Problem, ValidationMessages) {
  PlacementProblem p = fixture({}, 1);
  EXPECT_NO_THROW(p.validate());
  p.v_desired = {Vec3(1, 1, 0)};
  EXPECT_THROW(p.validate(), ConfigError);
  p = fixture({}, 1);
  p.budget = 0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = fixture({}, 1);
  p.gait.loads[0].node = 99;
  EXPECT_THROW(p.validate(), ConfigError);
  p = fixture({}, 3);
  EXPECT_THROW(brute_force_placement(p), ConfigError);
}

TEST(Evaluate, SteadyStateSatisfiesDynamics) {
  const PlacementProblem p = fixture({}, 1);
  OmegaParams w = zero_params(p, 2);
  w(0, 0) = 0.2;
  w(1, 0) = -0.1;
  w(2, 1) = 0.05;
  const Evaluation e = evaluate_placement(p, {1, 4}, w);
  EXPECT_LT(e.dynamics_residual, 1e-8);
  EXPECT_EQ(e.omega_samples.cols(), 2);
  EXPECT_EQ(static_cast<std::size_t>(e.omega_samples.rows()), p.options.samples);
  EXPECT_EQ(static_cast<std::size_t>(e.tip.rows()), p.options.samples);
  EXPECT_NEAR(e.objective, e.omega_samples.squaredNorm(), 1e-12 * e.objective);
}

TEST(Evaluate, ZeroCommandGivesZeroObjective) {
  const PlacementProblem p = fixture({}, 1);
  const Evaluation e = evaluate_placement(p, {3}, zero_params(p, 1));
  EXPECT_EQ(e.objective, 0.0);
  EXPECT_LT(angle_between_lines(e.pcs.vectors.col(0), baseline(p).vectors.col(0)), 1e-12);
}

TEST(Evaluate, RepeatedSlotsDropped) {
  const PlacementProblem p = fixture({}, 2);
  OmegaParams w = zero_params(p, 2);
  w(1, 0) = 0.1;
  w(1, 1) = 5.0;
  const Evaluation twice = evaluate_placement(p, {2, 2}, w);
  const Evaluation once = evaluate_placement(p, {2}, w.leftCols(1));
  EXPECT_NEAR(twice.objective, once.objective, 1e-15);
  EXPECT_EQ(twice.omega_samples.cols(), 1);
}

TEST(Optimize, DegenerateWhenBaselineAlreadyAligned) {
  PlacementProblem p = fixture({}, 1);
  p.v_desired = {baseline(p).vectors.col(0)};
  const PlacementSolution s = optimize_placement(p);
  EXPECT_TRUE(s.has_flag("degenerate"));
  EXPECT_NEAR(s.objective, 0.0, 1e-12);
}

TEST(Optimize, MeetsDesiredDirection) {
  PlacementProblem p = fixture({}, 1);
  const PrincipalComponents b = baseline(p);
  p.v_desired = {rotate_about(b.vectors.col(0), b.vectors.col(2), deg2rad(20.0))};
  const PlacementSolution s = optimize_placement(p);
  ASSERT_FALSE(s.has_flag("pc_unmet"));
  EXPECT_LE(s.pc_residual(0), p.options.angle_tolerance + 1e-6);
  EXPECT_GT(s.objective, 0.0);
  EXPECT_EQ(s.chosen_slots.size(), 1u);
  const Evaluation check = evaluate_placement(p, s.chosen_slots, s.params);
  EXPECT_NEAR(check.objective, s.objective, 1e-12 * s.objective);
}

TEST(Optimize, MatchesBruteForceAtBudgetOne) {
  PlacementProblem p = fixture({}, 1);
  const PrincipalComponents b = baseline(p);
  p.v_desired = {rotate_about(b.vectors.col(0), b.vectors.col(2), deg2rad(15.0))};
  const PlacementSolution s = optimize_placement(p);
  const PlacementSolution o = brute_force_placement(p);
  EXPECT_EQ(s.chosen_slots, o.chosen_slots);
  EXPECT_NEAR(s.objective, o.objective, 1e-6 * o.objective);
}

TEST(Optimize, Deterministic) {
  PlacementProblem p = fixture(wing::WingDesign::coarse(), 1);
  const PrincipalComponents b = baseline(p);
  p.v_desired = {rotate_about(b.vectors.col(0), b.vectors.col(2), deg2rad(10.0))};
  const PlacementSolution s1 = optimize_placement(p);
  const PlacementSolution s2 = optimize_placement(p);
  EXPECT_EQ(s1.chosen_slots, s2.chosen_slots);
  EXPECT_EQ(s1.objective, s2.objective);
  EXPECT_EQ(s1.params, s2.params);
}

}  // namespace
}  // namespace morphwing::placement
