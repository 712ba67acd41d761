#include "morphwing/multibody.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Geometry>

#include <algorithm>

namespace morphwing::multibody {

Tree::Tree(std::vector<Link> links) : links_(std::move(links)) {
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const Link& l = links_[i];
    if (l.parent >= static_cast<int>(i)) throw ConfigError("link parents must precede children");
    if (!(l.axis.norm() > 0.0)) throw ConfigError("joint axis must be non-zero");
    if (l.mass < 0.0) throw ConfigError("link mass must be non-negative");
    links_[i].axis.normalize();
  }
}

bool Tree::is_ancestor(std::size_t ancestor, std::size_t link) const {
  int cur = static_cast<int>(link);
  while (cur >= 0) {
    if (static_cast<std::size_t>(cur) == ancestor) return true;
    cur = links_[static_cast<std::size_t>(cur)].parent;
  }
  return false;
}

Kinematics Tree::kinematics(const VecX& q, const VecX& qd) const {
  const std::size_t n = links_.size();
  if (q.size() != static_cast<Eigen::Index>(n) || qd.size() != static_cast<Eigen::Index>(n)) {
    throw ConfigError("coordinate vector size mismatch");
  }
  Kinematics k;
  k.rotation.resize(n);
  k.position.resize(n);
  k.axis.resize(n);
  k.joint_point.resize(n);
  k.omega.resize(n);
  k.velocity.resize(n);
  k.alpha_bias.resize(n);
  k.accel_bias.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Link& l = links_[i];
    Mat3 rp = Mat3::Identity();
    Vec3 pp = Vec3::Zero(), wp = Vec3::Zero(), vp = Vec3::Zero(), ap = Vec3::Zero(),
         accp = Vec3::Zero();
    if (l.parent >= 0) {
      const auto p = static_cast<std::size_t>(l.parent);
      rp = k.rotation[p];
      pp = k.position[p];
      wp = k.omega[p];
      vp = k.velocity[p];
      ap = k.alpha_bias[p];
      accp = k.accel_bias[p];
    }
    const auto ii = static_cast<Eigen::Index>(i);
    const Vec3 r = rp * l.origin;
    const Vec3 o = pp + r;
    const Vec3 vo = vp + wp.cross(r);
    const Vec3 ao = accp + ap.cross(r) + wp.cross(wp.cross(r));
    const Vec3 a = rp * l.axis;
    k.axis[i] = a;
    k.joint_point[i] = o;
    if (l.joint == JointType::prismatic) {
      const Vec3 d = a * q(ii);
      k.rotation[i] = rp;
      k.position[i] = o + d;
      k.omega[i] = wp;
      k.alpha_bias[i] = ap;
      k.velocity[i] = vo + wp.cross(d) + a * qd(ii);
      k.accel_bias[i] = ao + ap.cross(d) + wp.cross(wp.cross(d)) + 2.0 * wp.cross(a * qd(ii));
    } else {
      k.rotation[i] = rp * Eigen::AngleAxisd(q(ii), l.axis).toRotationMatrix();
      k.position[i] = o;
      k.omega[i] = wp + a * qd(ii);
      k.alpha_bias[i] = ap + wp.cross(a * qd(ii));
      k.velocity[i] = vo;
      k.accel_bias[i] = ao;
    }
  }
  return k;
}

MatX Tree::point_jacobian(const Kinematics& k, std::size_t link, const Vec3& point) const {
  MatX j = MatX::Zero(3, static_cast<Eigen::Index>(links_.size()));
  int cur = static_cast<int>(link);
  while (cur >= 0) {
    const auto c = static_cast<std::size_t>(cur);
    j.col(cur) = links_[c].joint == JointType::prismatic
                     ? k.axis[c]
                     : Vec3(k.axis[c].cross(point - k.joint_point[c]));
    cur = links_[c].parent;
  }
  return j;
}

MatX Tree::angular_jacobian(const Kinematics& k, std::size_t link) const {
  MatX j = MatX::Zero(3, static_cast<Eigen::Index>(links_.size()));
  int cur = static_cast<int>(link);
  while (cur >= 0) {
    const auto c = static_cast<std::size_t>(cur);
    if (links_[c].joint == JointType::revolute) j.col(cur) = k.axis[c];
    cur = links_[c].parent;
  }
  return j;
}

Vec3 Tree::point_velocity(const Kinematics& k, std::size_t link, const Vec3& point) const {
  return k.velocity[link] + k.omega[link].cross(point - k.position[link]);
}

Vec3 Tree::com_position(const Kinematics& k, std::size_t link) const {
  return k.position[link] + k.rotation[link] * links_[link].com;
}

MatX Tree::mass_matrix(const Kinematics& k) const {
  const auto n = static_cast<Eigen::Index>(links_.size());
  MatX m = MatX::Zero(n, n);
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const Link& l = links_[i];
    if (l.mass == 0.0 && l.inertia.isZero(0.0)) continue;
    const MatX jv = point_jacobian(k, i, com_position(k, i));
    const MatX jw = angular_jacobian(k, i);
    const Mat3 iw = k.rotation[i] * l.inertia * k.rotation[i].transpose();
    m.noalias() += l.mass * jv.transpose() * jv + jw.transpose() * iw * jw;
  }
  return 0.5 * (m + m.transpose());
}

VecX Tree::bias(const Kinematics& k, const VecX& q, const VecX& qd, const Vec3& gravity) const {
  const auto n = static_cast<Eigen::Index>(links_.size());
  VecX h = VecX::Zero(n);
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const Link& l = links_[i];
    const auto ii = static_cast<Eigen::Index>(i);
    h(ii) += l.stiffness * (q(ii) - l.rest) + l.damping * qd(ii);
    if (l.mass == 0.0 && l.inertia.isZero(0.0)) continue;
    const Vec3 c = com_position(k, i);
    const Vec3 r = c - k.position[i];
    const Vec3 w = k.omega[i];
    const Vec3 acc = k.accel_bias[i] + k.alpha_bias[i].cross(r) + w.cross(w.cross(r));
    const Mat3 iw = k.rotation[i] * l.inertia * k.rotation[i].transpose();
    const Vec3 force = l.mass * (acc - gravity);
    const Vec3 torque = iw * k.alpha_bias[i] + w.cross(iw * w);
    h.noalias() += point_jacobian(k, i, c).transpose() * force + angular_jacobian(k, i).transpose() * torque;
  }
  return h;
}

VecX Tree::point_force(const Kinematics& k, std::size_t link, const Vec3& point,
                       const Vec3& force) const {
  return point_jacobian(k, link, point).transpose() * force;
}

double Tree::kinetic_energy(const Kinematics& k) const {
  double t = 0.0;
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const Link& l = links_[i];
    const Vec3 v = point_velocity(k, i, com_position(k, i));
    const Mat3 iw = k.rotation[i] * l.inertia * k.rotation[i].transpose();
    t += 0.5 * l.mass * v.squaredNorm() + 0.5 * k.omega[i].dot(iw * k.omega[i]);
  }
  return t;
}

double Tree::potential_energy(const Kinematics& k, const VecX& q, const Vec3& gravity) const {
  double v = 0.0;
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const Link& l = links_[i];
    const double dq = q(static_cast<Eigen::Index>(i)) - l.rest;
    v += -l.mass * gravity.dot(com_position(k, i)) + 0.5 * l.stiffness * dq * dq;
  }
  return v;
}

Vec3 Tree::linear_momentum(const Kinematics& k) const {
  Vec3 p = Vec3::Zero();
  for (std::size_t i = 0; i < links_.size(); ++i) {
    p += links_[i].mass * point_velocity(k, i, com_position(k, i));
  }
  return p;
}

Vec3 Tree::system_com(const Kinematics& k) const {
  Vec3 c = Vec3::Zero();
  for (std::size_t i = 0; i < links_.size(); ++i) c += links_[i].mass * com_position(k, i);
  return c / total_mass();
}

double Tree::total_mass() const {
  double m = 0.0;
  for (const Link& l : links_) m += l.mass;
  return m;
}

VecX Tree::forward_dynamics(const VecX& q, const VecX& qd, const VecX& forces,
                            const Vec3& gravity) const {
  const Kinematics k = kinematics(q, qd);
  const MatX m = mass_matrix(k);
  Eigen::LLT<MatX> llt(m);
  if (llt.info() != Eigen::Success) throw NumericalError("singular inertia matrix");
  return llt.solve(forces - bias(k, q, qd, gravity));
}

PartialSolution solve_prescribed(const MatX& mass, const VecX& bias, const VecX& forces,
                                 const std::vector<std::size_t>& prescribed,
                                 const VecX& prescribed_qdd) {
  const Eigen::Index n = mass.rows();
  if (prescribed_qdd.size() != static_cast<Eigen::Index>(prescribed.size())) {
    throw ConfigError("prescribed acceleration size mismatch");
  }
  std::vector<bool> is_p(static_cast<std::size_t>(n), false);
  for (std::size_t p : prescribed) is_p.at(p) = true;
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!is_p[static_cast<std::size_t>(i)]) free.push_back(i);
  }
  const auto nf = static_cast<Eigen::Index>(free.size());
  const auto np = static_cast<Eigen::Index>(prescribed.size());

  PartialSolution s;
  s.qdd = VecX::Zero(n);
  for (Eigen::Index j = 0; j < np; ++j) s.qdd(static_cast<Eigen::Index>(prescribed[static_cast<std::size_t>(j)])) = prescribed_qdd(j);
  const VecX residual = forces - bias - mass * s.qdd;  // with free accelerations still zero
  if (nf > 0) {
    MatX mff(nf, nf);
    VecX rf(nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
      rf(a) = residual(free[static_cast<std::size_t>(a)]);
      for (Eigen::Index b = 0; b < nf; ++b) mff(a, b) = mass(free[static_cast<std::size_t>(a)], free[static_cast<std::size_t>(b)]);
    }
    Eigen::LLT<MatX> llt(mff);
    if (llt.info() != Eigen::Success) throw NumericalError("singular inertia matrix");
    const VecX qf = llt.solve(rf);
    for (Eigen::Index a = 0; a < nf; ++a) s.qdd(free[static_cast<std::size_t>(a)]) = qf(a);
  }
  const VecX need = mass * s.qdd + bias - forces;
  s.required.resize(np);
  for (Eigen::Index j = 0; j < np; ++j) s.required(j) = need(static_cast<Eigen::Index>(prescribed[static_cast<std::size_t>(j)]));
  return s;
}

}  // namespace morphwing::multibody
