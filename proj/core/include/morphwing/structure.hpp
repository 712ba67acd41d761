#pragma once

#include "morphwing/common.hpp"

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

// Discretized compliant structure: a chain of two-node rod elements with
// linear interpolation of centerline position and orientation
// quasi-coordinates. Element integrands follow the virtual-work split into
// internal (kappa1), inertial (kappa2..kappa4) and external/actuator
// (kappa5, kappa6) load increments; stacking them gives the first-order
// system  d/dt [y; y'] = A [y; y'] + B omega.
//
// Nodal degrees of freedom are 6 per node: position increment (m) followed by
// a small spatial rotation increment (rad), so R = exp(hat(dphi)) R_ref.
namespace morphwing::structure {

using Vec12 = Eigen::Matrix<double, 12, 1>;
using Mat12 = Eigen::Matrix<double, 12, 12>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// State of one element: positions and rotation vectors of the two
/// cross-section ends (A at sigma = 0, B at sigma = l).
struct ElementState {
  Vec3 x0_a = Vec3::Zero();
  Vec3 psi_a = Vec3::Zero();
  Vec3 x0_b = Vec3::UnitX();
  Vec3 psi_b = Vec3::Zero();
  double length_l = 1.0;
  /// Constant rotation from the nodal triad to the section's material axes
  /// (axis 1 along the centerline). Identity for elements built along the
  /// nodal x axis.
  Mat3 section_offset = Mat3::Identity();

  void validate() const;
  Vec12 stacked() const;
};

/// Diagonal section stiffness: axial, two shear (N), torsion and two bending
/// (N m^2), plus inertia data.
struct MaterialMatrix {
  Vec6 diag_entries = Vec6::Ones();
  double density = 1.0;             // kg/m^3
  double cross_section_area = 1.0;  // m^2
  /// Polar and two bending second moments of area (m^4); zero means a solid
  /// circular section of the given area.
  Vec3 second_moments = Vec3::Zero();

  void validate() const;
  Mat6 matrix() const { return diag_entries.asDiagonal(); }
  Vec3 section_moments() const;

  static MaterialMatrix circular_rod(double youngs_modulus, double shear_modulus, double density,
                                     double radius, double shear_factor = 0.9);
};

/// Linear shape functions: N1 rises 0 -> 1 from A to B, N2 falls 1 -> 0.
std::pair<double, double> interpolation(double sigma, double length_l);

/// Midpoint chart of an element: end rotations are R_c exp(-+hat(phi)/2) and
/// the interpolated quasi-coordinate is psi(sigma) = (N1 - 1/2) phi. Built
/// from relative rotations only, so it is unaffected by rigid motions.
struct ElementChart {
  Mat3 r_c = Mat3::Identity();
  Vec3 phi = Vec3::Zero();

  Vec3 psi_a() const { return -0.5 * phi; }
  Vec3 psi_b() const { return 0.5 * phi; }
};
ElementChart element_chart(const ElementState& e);

Mat3 rotation_at(const ElementState& e, double sigma);

/// Gamma = R^T x0' in material axes.
Vec3 axial_strain(const ElementState& e, double sigma);
/// K = T(psi) psi' in material axes.
Vec3 curvature(const ElementState& e, double sigma);

/// Q1 (6x9): maps [dx0'; dpsi'; dpsi] to [dGamma; dK] in nodal axes.
Eigen::Matrix<double, 6, 9> q1(const ElementState& e, double sigma);
/// Q2 (9x12): maps chart end variations [x_a, psi_a, x_b, psi_b] to
/// [dx0'; dpsi'; dpsi] at sigma.
Eigen::Matrix<double, 9, 12> q2(double sigma, double length_l);

/// Q2^T Q1^T E Q1 Q2 with E expressed in nodal axes.
Mat12 kappa1(const ElementState& e, const MaterialMatrix& material, double sigma);
/// Kinetic-energy integrand (translational rho A plus rotary inertia).
Mat12 kappa2(const ElementState& e, const MaterialMatrix& material, double sigma);

/// Chart-to-spatial map for the end rotations: dpsi_k = T(psi_k)^-1 R_k^T dphi_k.
Mat12 chart_jacobian(const ElementState& e);

/// Gauss-Legendre rule on [0, 1].
struct Quadrature {
  std::vector<double> points;
  std::vector<double> weights;
  static Quadrature gauss(int n);
};

enum class ConfigurationStiffness { zero, geometric, centripetal };

struct ElementOptions {
  int stiffness_points = 1;
  int mass_points = 3;
  double rayleigh_alpha = 0.0;   // 1/s
  double rayleigh_beta = 0.002;  // s
  ConfigurationStiffness kappa4 = ConfigurationStiffness::geometric;
  Vec3 spin_axis = Vec3::UnitX();  // centripetal variant only
  double spin_rate = 0.0;          // rad/s, centripetal variant only
  /// Optional external-load gradient per element (kappa5); zero if unset.
  std::function<Mat12(std::size_t element)> load_gradient;
};

/// Integrated element matrices in spatial nodal DOFs
/// [dx_a, dphi_a, dx_b, dphi_b].
struct ElementMatrices {
  Mat12 stiffness = Mat12::Zero();      // I(kappa1)
  Mat12 mass = Mat12::Zero();           // I(kappa2)
  Mat12 damping = Mat12::Zero();        // I(kappa3)
  Mat12 configuration = Mat12::Zero();  // I(kappa4)
  Mat12 load_gradient = Mat12::Zero();  // I(kappa5)
};

/// `reference` is the stress-free configuration of the same element.
ElementMatrices element_matrices(const ElementState& current, const ElementState& reference,
                                 const MaterialMatrix& material, const ElementOptions& options,
                                 std::size_t element_index = 0);

/// Internal force F1 in spatial DOFs from the strain of `current` relative
/// to `reference`.
Vec12 internal_force(const ElementState& current, const ElementState& reference,
                     const MaterialMatrix& material, int points = 1);

/// A primer channel: a force pair of gain * omega (N per mm of command)
/// acting along `direction` between the two ends of `element`, applied at
/// `offset` from the centerline. Positive omega pulls the ends together.
struct PrimerSlot {
  std::size_t element = 0;
  Vec3 direction = Vec3::UnitX();
  Vec3 offset = Vec3::Zero();
  double gain = 1.0;  // N/mm

  bool operator==(const PrimerSlot& other) const;
};

/// I(kappa6) per unit command in spatial element DOFs.
Vec12 slot_load(const PrimerSlot& slot);

struct Increments {
  Vec12 df1 = Vec12::Zero();  // internal
  Vec12 df2 = Vec12::Zero();  // inertial
  Vec12 df3 = Vec12::Zero();  // external and actuator
};

Increments element_increments(const ElementState& element, const Vec12& dy, const Vec12& dy_dot,
                              const Vec12& dy_ddot, const MaterialMatrix& material,
                              const std::vector<PrimerSlot>& slots, const VecX& omega,
                              const ElementOptions& options = {});

struct AssemblyOptions {
  ElementOptions element;
  std::vector<std::size_t> clamped_nodes{0};
  /// Per-element material overrides; empty means the shared material.
  std::vector<MaterialMatrix> element_materials;
};

struct AssembledStructure {
  MatX a_blocks;  // 2n x 2n
  MatX b_blocks;  // 2n x slots
  std::size_t node_count = 0;
  std::vector<PrimerSlot> primer_slots;

  MatX mass;       // free DOFs
  MatX stiffness;  // kappa1 + kappa4 - kappa5
  MatX damping;
  MatX load;  // free DOFs x slots

  std::vector<ElementState> reference_elements;
  std::vector<Eigen::Index> dof_map;  // node*6 + c -> free DOF index or -1

  std::size_t dof_count() const { return static_cast<std::size_t>(mass.rows()); }
  std::size_t state_dim() const { return 2 * dof_count(); }

  /// Six-component increment of a node from a state vector [y; y'].
  Vec6 node_increment(const VecX& state, std::size_t node) const;
  Vec3 node_position(const VecX& state, std::size_t node) const;
  Mat3 node_rotation(const VecX& state, std::size_t node) const;
  std::vector<ElementState> element_states(const VecX& state) const;
  /// Row selecting one DOF component of a node from the state vector.
  Eigen::RowVectorXd dof_selector(std::size_t node, int component) const;
  /// Static response -A^-1 B omega.
  VecX steady_state(const VecX& omega) const;
  /// Undamped natural frequencies (rad/s), ascending.
  VecX natural_frequencies() const;
};

AssembledStructure assemble(const std::vector<ElementState>& elements,
                            const MaterialMatrix& material, const std::vector<PrimerSlot>& slots,
                            const AssemblyOptions& options = {});

/// Same structure with a different set of primer slots (b_blocks only).
AssembledStructure with_slots(const AssembledStructure& base, const std::vector<PrimerSlot>& slots);

struct MarchOptions {
  double divergence_bound = 1e3;  // on the state norm
  std::size_t sample_every = 1;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<VecX> states;    // [y; y'] per sample
  std::vector<VecX> commands;  // omega per sample
};

using OmegaSchedule = std::function<VecX(double t)>;

/// Fixed-step march with omega held over each step (exact discretization).
Trajectory march(const AssembledStructure& s, const OmegaSchedule& omega, double duration,
                 double dt, const MarchOptions& options = {}, const VecX& initial = VecX());

/// Chain of straight elements through the given points (node rotations at
/// identity, section offsets aligning material axis 1 with each segment).
std::vector<ElementState> straight_chain(const std::vector<Vec3>& nodes);

}  // namespace morphwing::structure
