#include "morphwing/multibody.hpp"

#include <Eigen/Cholesky>
#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace morphwing::multibody {
namespace {

const Vec3 kGravity(0.0, -9.81, 0.0);

Link rod_link(int parent, const Vec3& origin, double length, double mass) {
  Link l;
  l.parent = parent;
  l.axis = Vec3::UnitZ();
  l.origin = origin;
  l.mass = mass;
  l.com = Vec3(0.5 * length, 0.0, 0.0);
  l.inertia = Vec3(0.0, 1.0, 1.0).asDiagonal() * (mass * length * length / 12.0);
  return l;
}

Tree double_pendulum() {
  return Tree({rod_link(-1, Vec3::Zero(), 0.3, 0.2), rod_link(0, Vec3(0.3, 0, 0), 0.2, 0.1)});
}

Tree spatial_chain() {
  Link a = rod_link(-1, Vec3::Zero(), 0.1, 0.05);
  a.axis = Vec3(0.0, 0.3, 1.0);
  Link b = rod_link(0, Vec3(0.1, 0, 0), 0.08, 0.03);
  b.axis = Vec3::UnitX();
  b.com = Vec3(0.02, 0.03, 0.01);
  Link c;
  c.parent = 1;
  c.joint = JointType::prismatic;
  c.axis = Vec3(1.0, 1.0, 0.0);
  c.origin = Vec3(0.08, 0, 0);
  c.mass = 0.02;
  c.inertia = Mat3::Identity() * 1e-6;
  return Tree({a, b, c});
}

struct State {
  VecX q, qd;
};

State rk4(const Tree& t, const State& s, double dt, const Vec3& g) {
  const VecX zero = VecX::Zero(static_cast<Eigen::Index>(t.size()));
  auto f = [&](const VecX& q, const VecX& qd) { return t.forward_dynamics(q, qd, zero, g); };
  const VecX a1 = f(s.q, s.qd);
  const VecX v2 = s.qd + 0.5 * dt * a1;
  const VecX a2 = f(s.q + 0.5 * dt * s.qd, v2);
  const VecX v3 = s.qd + 0.5 * dt * a2;
  const VecX a3 = f(s.q + 0.5 * dt * v2, v3);
  const VecX v4 = s.qd + dt * a3;
  const VecX a4 = f(s.q + dt * v3, v4);
  return {s.q + dt / 6.0 * (s.qd + 2.0 * v2 + 2.0 * v3 + v4), s.qd + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)};
}

TEST(Tree, RejectsBadTopology) {
  Link a;
  a.parent = 0;
  EXPECT_THROW(Tree({a}), ConfigError);
  Link b;
  b.axis = Vec3::Zero();
  EXPECT_THROW(Tree({b}), ConfigError);
}

TEST(Pendulum, MatchesAnalyticAcceleration) {
  Link l;
  l.axis = Vec3::UnitZ();
  l.mass = 0.3;
  l.com = Vec3(0.4, 0, 0);
  const Tree t({l});
  for (double q : {0.0, 0.5, -1.2}) {
    const VecX qv = VecX::Constant(1, q);
    const VecX qdd = t.forward_dynamics(qv, VecX::Zero(1), VecX::Zero(1), kGravity);
    EXPECT_NEAR(qdd(0), -9.81 / 0.4 * std::cos(q), 1e-12);
    EXPECT_NEAR(t.mass_matrix(t.kinematics(qv, VecX::Zero(1)))(0, 0), 0.3 * 0.16, 1e-15);
  }
}

TEST(Pendulum, SpringAndDamperTerms) {
  Link l;
  l.axis = Vec3::UnitZ();
  l.mass = 1.0;
  l.com = Vec3(1.0, 0, 0);
  l.stiffness = 2.0;
  l.damping = 0.5;
  l.rest = 0.1;
  const Tree t({l});
  const VecX q = VecX::Constant(1, 0.4), qd = VecX::Constant(1, 3.0);
  const VecX h = t.bias(t.kinematics(q, qd), q, qd, Vec3::Zero());
  EXPECT_NEAR(h(0), 2.0 * 0.3 + 0.5 * 3.0, 1e-12);
}

TEST(Prismatic, FreeFallAlongAxis) {
  Link l;
  l.joint = JointType::prismatic;
  l.axis = Vec3(0.0, 1.0, 0.0);
  l.mass = 0.7;
  const Tree t({l});
  const VecX qdd = t.forward_dynamics(VecX::Zero(1), VecX::Zero(1), VecX::Zero(1), kGravity);
  EXPECT_NEAR(qdd(0), -9.81, 1e-12);
}

TEST(MassMatrix, SymmetricPositiveDefiniteAndMatchesKineticEnergy) {
  const Tree t = spatial_chain();
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int k = 0; k < 25; ++k) {
    VecX q(3), qd(3);
    q << u(rng), u(rng), 0.1 * u(rng);
    qd << u(rng), u(rng), u(rng);
    const Kinematics kin = t.kinematics(q, qd);
    const MatX m = t.mass_matrix(kin);
    EXPECT_LT((m - m.transpose()).norm(), 1e-15);
    EXPECT_EQ(Eigen::LLT<MatX>(m).info(), Eigen::Success);
    EXPECT_NEAR(0.5 * qd.dot(m * qd), t.kinetic_energy(kin), 1e-13);
  }
}

TEST(Jacobian, PointVelocityAndForce) {
  const Tree t = spatial_chain();
  VecX q(3), qd(3);
  q << 0.3, -0.4, 0.02;
  qd << 1.0, 2.0, -0.5;
  const Kinematics k = t.kinematics(q, qd);
  const Vec3 p = k.position[1] + k.rotation[1] * Vec3(0.03, 0.01, 0.0);
  const MatX j = t.point_jacobian(k, 1, p);
  EXPECT_LT((j * qd - t.point_velocity(k, 1, p)).norm(), 1e-13);
  const Vec3 f(0.2, -0.1, 0.4);
  EXPECT_LT((t.point_force(k, 1, p, f) - j.transpose() * f).norm(), 1e-14);
  EXPECT_EQ(j.col(2).norm(), 0.0);
}

TEST(Momentum, MatchesComVelocity) {
  const Tree t = spatial_chain();
  VecX q(3), qd(3);
  q << 0.2, 0.5, 0.01;
  qd << -0.7, 1.1, 0.3;
  const double h = 1e-6;
  const Vec3 cp = t.system_com(t.kinematics(q + h * qd, qd));
  const Vec3 cm = t.system_com(t.kinematics(q - h * qd, qd));
  const Vec3 p = t.linear_momentum(t.kinematics(q, qd));
  EXPECT_LT((p - t.total_mass() * (cp - cm) / (2.0 * h)).norm(), 1e-8);
}

TEST(Energy, ConservedWithoutDissipation) {
  const Tree t = double_pendulum();
  State s{VecX(2), VecX(2)};
  s.q << 0.8, -0.3;
  s.qd << 0.0, 1.0;
  const double e0 = t.energy(t.kinematics(s.q, s.qd), s.q, kGravity);
  for (int i = 0; i < 20000; ++i) s = rk4(t, s, 1e-4, kGravity);
  const double e1 = t.energy(t.kinematics(s.q, s.qd), s.q, kGravity);
  EXPECT_LT(std::abs(e1 - e0), 1e-8 * std::abs(e0));
}

TEST(Prescribed, RequiredForceReproducesAcceleration) {
  const Tree t = spatial_chain();
  VecX q(3), qd(3), forces(3);
  q << 0.1, 0.2, 0.0;
  qd << 0.5, -0.2, 0.1;
  forces << 0.01, -0.02, 0.03;
  const Kinematics k = t.kinematics(q, qd);
  const MatX m = t.mass_matrix(k);
  const VecX h = t.bias(k, q, qd, kGravity);
  const PartialSolution s = solve_prescribed(m, h, forces, {0, 2}, Eigen::Vector2d(3.0, -1.0));
  EXPECT_EQ(s.qdd(0), 3.0);
  EXPECT_EQ(s.qdd(2), -1.0);
  VecX total = forces;
  total(0) += s.required(0);
  total(2) += s.required(1);
  EXPECT_LT((t.forward_dynamics(q, qd, total, kGravity) - s.qdd).norm(), 1e-9);
  EXPECT_THROW(solve_prescribed(m, h, forces, {0}, Eigen::Vector2d(1.0, 2.0)), ConfigError);
}

}  // namespace
}  // namespace morphwing::multibody
