#pragma once

#include "morphwing/common.hpp"

#include <string>
#include <vector>

// Kinematic tree of rigid links, one single-DOF joint per link, generalized
// coordinate i belonging to link i. Equations of motion
//
//   M(q) q'' + h(q, q') = Q
//
// with h collecting velocity-product, gravity and joint spring/damper terms.
namespace morphwing::multibody {

enum class JointType { prismatic, revolute };

struct Link {
  std::string name;
  int parent = -1;  // -1 = world; parents precede children
  JointType joint = JointType::revolute;
  Vec3 axis = Vec3::UnitZ();      // in the parent frame
  Vec3 origin = Vec3::Zero();     // joint position in the parent frame
  double mass = 0.0;              // kg
  Vec3 com = Vec3::Zero();        // in the link frame
  Mat3 inertia = Mat3::Zero();    // about the com, link frame
  double stiffness = 0.0;         // N m/rad or N/m
  double damping = 0.0;           // N m s/rad or N s/m
  double rest = 0.0;
};

struct Kinematics {
  std::vector<Mat3> rotation;     // link frame -> world
  std::vector<Vec3> position;     // link frame origin
  std::vector<Vec3> axis;         // joint axis, world
  std::vector<Vec3> joint_point;  // joint location, world
  std::vector<Vec3> omega;
  std::vector<Vec3> velocity;     // of the frame origin
  std::vector<Vec3> alpha_bias;   // angular acceleration with q'' = 0
  std::vector<Vec3> accel_bias;   // origin acceleration with q'' = 0
};

class Tree {
 public:
  Tree() = default;
  explicit Tree(std::vector<Link> links);

  std::size_t size() const { return links_.size(); }
  const std::vector<Link>& links() const { return links_; }
  bool is_ancestor(std::size_t ancestor, std::size_t link) const;

  Kinematics kinematics(const VecX& q, const VecX& qd) const;

  /// 3 x n translational Jacobian of a world point fixed to `link`.
  MatX point_jacobian(const Kinematics& k, std::size_t link, const Vec3& point) const;
  MatX angular_jacobian(const Kinematics& k, std::size_t link) const;
  Vec3 point_velocity(const Kinematics& k, std::size_t link, const Vec3& point) const;
  Vec3 com_position(const Kinematics& k, std::size_t link) const;

  MatX mass_matrix(const Kinematics& k) const;
  /// Velocity-product, gravity and joint spring/damper terms.
  VecX bias(const Kinematics& k, const VecX& q, const VecX& qd, const Vec3& gravity) const;
  /// Generalized force of a world force applied at a world point on `link`.
  VecX point_force(const Kinematics& k, std::size_t link, const Vec3& point, const Vec3& force) const;

  double kinetic_energy(const Kinematics& k) const;
  /// Gravity plus joint springs.
  double potential_energy(const Kinematics& k, const VecX& q, const Vec3& gravity) const;
  /// Dissipation-free part ignores dampers; this is the total mechanical energy.
  double energy(const Kinematics& k, const VecX& q, const Vec3& gravity) const {
    return kinetic_energy(k) + potential_energy(k, q, gravity);
  }
  Vec3 linear_momentum(const Kinematics& k) const;
  Vec3 system_com(const Kinematics& k) const;
  double total_mass() const;

  /// q'' for generalized forces Q.
  VecX forward_dynamics(const VecX& q, const VecX& qd, const VecX& forces, const Vec3& gravity) const;

 private:
  std::vector<Link> links_;
};

/// Split solve with prescribed accelerations on `prescribed` coordinates:
/// returns full q'' and the generalized forces the prescribed coordinates
/// need (what actuators or a test stand must supply).
struct PartialSolution {
  VecX qdd;
  VecX required;  // one entry per prescribed coordinate
};
PartialSolution solve_prescribed(const MatX& mass, const VecX& bias, const VecX& forces,
                                 const std::vector<std::size_t>& prescribed,
                                 const VecX& prescribed_qdd);

}  // namespace morphwing::multibody
