#include "morphwing/structure.hpp"

#include "morphwing/linear_system.hpp"
#include "morphwing/rotation.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <string>

namespace morphwing::structure {

using rotation::exp_map;
using rotation::hat;
using rotation::log_map;
using rotation::tangent_map;
using rotation::tangent_map_derivative;
using rotation::tangent_map_inverse;

namespace {

using Mat69 = Eigen::Matrix<double, 6, 9>;
using Mat912 = Eigen::Matrix<double, 9, 12>;
using Mat612 = Eigen::Matrix<double, 6, 12>;

Mat6 section_rotation(const Mat3& offset) {
  Mat6 l = Mat6::Zero();
  l.topLeftCorner<3, 3>() = offset;
  l.bottomRightCorner<3, 3>() = offset;
  return l;
}

// Stiffness in nodal axes: L E L^T with L = diag(offset, offset).
Mat6 nodal_stiffness(const ElementState& e, const MaterialMatrix& m) {
  const Mat6 l = section_rotation(e.section_offset);
  return l * m.matrix() * l.transpose();
}

// Strain variation operator B = Q1 Q2 in nodal axes, chart DOFs.
Mat612 strain_operator(const ElementState& e, double sigma) { return q1(e, sigma) * q2(sigma, e.length_l); }

// Strain [Gamma; K] in material axes.
Vec6 strain(const ElementState& e, double sigma) {
  Vec6 s;
  s.head<3>() = axial_strain(e, sigma);
  s.tail<3>() = curvature(e, sigma);
  return s;
}

ElementState perturbed(const ElementState& e, int dof, double h) {
  ElementState p = e;
  const int block = dof / 3;
  const int comp = dof % 3;
  Vec3 d = Vec3::Zero();
  d(comp) = h;
  switch (block) {
    case 0: p.x0_a += d; break;
    case 1: p.psi_a = log_map(exp_map(d) * exp_map(e.psi_a)); break;
    case 2: p.x0_b += d; break;
    default: p.psi_b = log_map(exp_map(d) * exp_map(e.psi_b)); break;
  }
  return p;
}

}  // namespace

void ElementState::validate() const {
  if (!(length_l > 0.0) || !std::isfinite(length_l)) throw ConfigError("length must be positive");
  if (!x0_a.allFinite() || !x0_b.allFinite()) throw NumericalError("non-finite state");
  rotation::require_principal(psi_a);
  rotation::require_principal(psi_b);
}

Vec12 ElementState::stacked() const {
  Vec12 y;
  y << x0_a, psi_a, x0_b, psi_b;
  return y;
}

void MaterialMatrix::validate() const {
  for (int i = 0; i < 6; ++i) {
    if (!(diag_entries(i) > 0.0)) throw ConfigError("material stiffness entries must be positive");
  }
  if (!(density > 0.0)) throw ConfigError("density must be positive");
  if (!(cross_section_area > 0.0)) throw ConfigError("cross-section area must be positive");
}

Vec3 MaterialMatrix::section_moments() const {
  if ((second_moments.array() > 0.0).all()) return second_moments;
  const double i = cross_section_area * cross_section_area / (4.0 * kPi);
  return {2.0 * i, i, i};
}

MaterialMatrix MaterialMatrix::circular_rod(double youngs_modulus, double shear_modulus,
                                            double density, double radius, double shear_factor) {
  MaterialMatrix m;
  const double a = kPi * radius * radius;
  const double i = 0.25 * kPi * std::pow(radius, 4);
  m.diag_entries << youngs_modulus * a, shear_factor * shear_modulus * a,
      shear_factor * shear_modulus * a, shear_modulus * 2.0 * i, youngs_modulus * i,
      youngs_modulus * i;
  m.density = density;
  m.cross_section_area = a;
  m.second_moments = Vec3(2.0 * i, i, i);
  return m;
}

std::pair<double, double> interpolation(double sigma, double length_l) {
  if (!(length_l > 0.0)) throw ConfigError("length must be positive");
  if (sigma < 0.0 || sigma > length_l || !std::isfinite(sigma)) {
    throw ConfigError("sigma outside [0, l]");
  }
  const double n1 = sigma / length_l;
  return {n1, 1.0 - n1};
}

ElementChart element_chart(const ElementState& e) {
  const Mat3 ra = exp_map(e.psi_a);
  const Mat3 rb = exp_map(e.psi_b);
  ElementChart c;
  c.phi = log_map(ra.transpose() * rb);
  rotation::require_principal(c.phi);
  c.r_c = ra * exp_map(0.5 * c.phi);
  return c;
}

Mat3 rotation_at(const ElementState& e, double sigma) {
  const ElementChart c = element_chart(e);
  const double n1 = interpolation(sigma, e.length_l).first;
  return c.r_c * exp_map((n1 - 0.5) * c.phi);
}

Vec3 axial_strain(const ElementState& e, double sigma) {
  e.validate();
  const Vec3 dx = (e.x0_b - e.x0_a) / e.length_l;
  return e.section_offset.transpose() * (rotation_at(e, sigma).transpose() * dx);
}

Vec3 curvature(const ElementState& e, double sigma) {
  e.validate();
  interpolation(sigma, e.length_l);
  const ElementChart c = element_chart(e);
  const double n1 = sigma / e.length_l;
  const Vec3 psi = (n1 - 0.5) * c.phi;
  const Vec3 k = tangent_map(psi) * (c.phi / e.length_l);
  return e.section_offset.transpose() * k;
}

Eigen::Matrix<double, 6, 9> q1(const ElementState& e, double sigma) {
  const ElementChart c = element_chart(e);
  const double n1 = interpolation(sigma, e.length_l).first;
  const Vec3 psi = (n1 - 0.5) * c.phi;
  const Vec3 dpsi = c.phi / e.length_l;
  const Mat3 r = c.r_c * exp_map(psi);
  const Mat3 t = tangent_map(psi);
  const Mat3 dt = tangent_map_derivative(psi, dpsi);
  const Vec3 gamma = r.transpose() * ((e.x0_b - e.x0_a) / e.length_l);
  const Vec3 kappa = t * dpsi;

  Mat69 q = Mat69::Zero();
  q.block<3, 3>(0, 0) = r.transpose();
  q.block<3, 3>(0, 6) = hat(gamma) * t;
  q.block<3, 3>(3, 3) = t;
  q.block<3, 3>(3, 6) = hat(kappa) * t + dt;
  return q;
}

Eigen::Matrix<double, 9, 12> q2(double sigma, double length_l) {
  const auto [n1, n2] = interpolation(sigma, length_l);
  const double dn1 = 1.0 / length_l;
  const double dn2 = -1.0 / length_l;
  const Mat3 i = Mat3::Identity();
  Mat912 q = Mat912::Zero();
  // rows: x0', psi', psi; columns: x_a, psi_a, x_b, psi_b
  q.block<3, 3>(0, 0) = dn2 * i;
  q.block<3, 3>(0, 6) = dn1 * i;
  q.block<3, 3>(3, 3) = dn2 * i;
  q.block<3, 3>(3, 9) = dn1 * i;
  q.block<3, 3>(6, 3) = n2 * i;
  q.block<3, 3>(6, 9) = n1 * i;
  return q;
}

Mat12 kappa1(const ElementState& e, const MaterialMatrix& material, double sigma) {
  const Mat612 b = strain_operator(e, sigma);
  const Mat12 k = b.transpose() * nodal_stiffness(e, material) * b;
  return 0.5 * (k + k.transpose());
}

Mat12 kappa2(const ElementState& e, const MaterialMatrix& material, double sigma) {
  const ElementChart c = element_chart(e);
  const auto [n1, n2] = interpolation(sigma, e.length_l);
  const Vec3 psi = (n1 - 0.5) * c.phi;
  const Mat3 t = tangent_map(psi);
  const Vec3 moments = material.section_moments();
  const Mat3 j_material = (material.density * moments).asDiagonal();
  const Mat3 j_nodal = e.section_offset * j_material * e.section_offset.transpose();

  Eigen::Matrix<double, 3, 12> nt = Eigen::Matrix<double, 3, 12>::Zero();
  nt.block<3, 3>(0, 0) = n2 * Mat3::Identity();
  nt.block<3, 3>(0, 6) = n1 * Mat3::Identity();
  Eigen::Matrix<double, 3, 12> nr = Eigen::Matrix<double, 3, 12>::Zero();
  nr.block<3, 3>(0, 3) = n2 * t;
  nr.block<3, 3>(0, 9) = n1 * t;

  const Mat12 m = material.density * material.cross_section_area * nt.transpose() * nt +
                  nr.transpose() * j_nodal * nr;
  return 0.5 * (m + m.transpose());
}

Mat12 chart_jacobian(const ElementState& e) {
  const ElementChart c = element_chart(e);
  const Mat3 ra = exp_map(e.psi_a);
  const Mat3 rb = exp_map(e.psi_b);
  Mat12 h = Mat12::Identity();
  h.block<3, 3>(3, 3) = tangent_map_inverse(c.psi_a()) * ra.transpose();
  h.block<3, 3>(9, 9) = tangent_map_inverse(c.psi_b()) * rb.transpose();
  return h;
}

Quadrature Quadrature::gauss(int n) {
  Quadrature q;
  switch (n) {
    case 1:
      q.points = {0.5};
      q.weights = {1.0};
      break;
    case 2: {
      const double d = 0.5 / std::sqrt(3.0);
      q.points = {0.5 - d, 0.5 + d};
      q.weights = {0.5, 0.5};
      break;
    }
    case 3: {
      const double d = 0.5 * std::sqrt(0.6);
      q.points = {0.5 - d, 0.5, 0.5 + d};
      q.weights = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
      break;
    }
    default:
      throw ConfigError("quadrature order must be 1, 2 or 3");
  }
  return q;
}

namespace {

// Internal force at fixed section stresses, in spatial DOFs.
Vec12 fixed_stress_force(const ElementState& e, const Quadrature& q,
                         const std::vector<Vec6>& nodal_stress) {
  Vec12 f = Vec12::Zero();
  for (std::size_t i = 0; i < q.points.size(); ++i) {
    const double sigma = q.points[i] * e.length_l;
    f += q.weights[i] * e.length_l * strain_operator(e, sigma).transpose() * nodal_stress[i];
  }
  return chart_jacobian(e).transpose() * f;
}

}  // namespace

ElementMatrices element_matrices(const ElementState& current, const ElementState& reference,
                                 const MaterialMatrix& material, const ElementOptions& options,
                                 std::size_t element_index) {
  current.validate();
  const Quadrature qk = Quadrature::gauss(options.stiffness_points);
  const Quadrature qm = Quadrature::gauss(options.mass_points);
  const Mat12 h = chart_jacobian(current);
  const double l = current.length_l;

  Mat12 k_chart = Mat12::Zero();
  for (std::size_t i = 0; i < qk.points.size(); ++i) {
    k_chart += qk.weights[i] * l * kappa1(current, material, qk.points[i] * l);
  }
  Mat12 m_chart = Mat12::Zero();
  for (std::size_t i = 0; i < qm.points.size(); ++i) {
    m_chart += qm.weights[i] * l * kappa2(current, material, qm.points[i] * l);
  }

  ElementMatrices out;
  out.stiffness = h.transpose() * k_chart * h;
  out.stiffness = 0.5 * (out.stiffness + out.stiffness.transpose()).eval();
  out.mass = h.transpose() * m_chart * h;
  out.mass = 0.5 * (out.mass + out.mass.transpose()).eval();
  out.damping = options.rayleigh_alpha * out.mass + options.rayleigh_beta * out.stiffness;

  switch (options.kappa4) {
    case ConfigurationStiffness::zero:
      break;
    case ConfigurationStiffness::geometric: {
      // Derivative of B^T s with the section stresses held; vanishes
      // identically in a stress-free configuration.
      const Mat6 lrot = section_rotation(current.section_offset);
      std::vector<Vec6> stress(qk.points.size());
      bool stressed = false;
      for (std::size_t i = 0; i < qk.points.size(); ++i) {
        const double sigma = qk.points[i] * l;
        const double sigma_ref = qk.points[i] * reference.length_l;
        const Vec6 de = strain(current, sigma) - strain(reference, sigma_ref);
        stress[i] = lrot * (material.matrix() * de);
        stressed = stressed || !stress[i].isZero(0.0);
      }
      if (!stressed) break;
      const double step = 1e-6;
      Mat12 g;
      for (int j = 0; j < 12; ++j) {
        g.col(j) = (fixed_stress_force(perturbed(current, j, step), qk, stress) -
                    fixed_stress_force(perturbed(current, j, -step), qk, stress)) /
                   (2.0 * step);
      }
      out.configuration = 0.5 * (g + g.transpose());
      break;
    }
    case ConfigurationStiffness::centripetal: {
      const Vec3 axis = options.spin_axis.normalized();
      const Mat3 proj = Mat3::Identity() - axis * axis.transpose();
      Mat12 p = Mat12::Zero();
      p.block<3, 3>(0, 0) = proj;
      p.block<3, 3>(6, 6) = proj;
      out.configuration = -options.spin_rate * options.spin_rate * p.transpose() * out.mass * p;
      break;
    }
  }
  if (options.load_gradient) out.load_gradient = options.load_gradient(element_index);
  return out;
}

Vec12 internal_force(const ElementState& current, const ElementState& reference,
                     const MaterialMatrix& material, int points) {
  current.validate();
  reference.validate();
  const Quadrature q = Quadrature::gauss(points);
  const Mat6 lrot = section_rotation(current.section_offset);
  std::vector<Vec6> stress(q.points.size());
  for (std::size_t i = 0; i < q.points.size(); ++i) {
    const Vec6 de = strain(current, q.points[i] * current.length_l) -
                    strain(reference, q.points[i] * reference.length_l);
    stress[i] = lrot * (material.matrix() * de);
  }
  return fixed_stress_force(current, q, stress);
}

bool PrimerSlot::operator==(const PrimerSlot& other) const {
  return element == other.element && direction == other.direction && offset == other.offset &&
         gain == other.gain;
}

Vec12 slot_load(const PrimerSlot& slot) {
  if (!(slot.direction.norm() > 0.0)) throw ConfigError("primer slot direction must be non-zero");
  const Vec3 d = slot.direction.normalized();
  const Vec3 f = slot.gain * d;
  Vec12 load;
  load << f, slot.offset.cross(f), -f, slot.offset.cross(-f);
  return load;
}

Increments element_increments(const ElementState& element, const Vec12& dy, const Vec12& dy_dot,
                              const Vec12& dy_ddot, const MaterialMatrix& material,
                              const std::vector<PrimerSlot>& slots, const VecX& omega,
                              const ElementOptions& options) {
  if (omega.size() != static_cast<Eigen::Index>(slots.size())) {
    throw ConfigError("one primer command per slot is required");
  }
  const ElementMatrices m = element_matrices(element, element, material, options);
  Increments inc;
  inc.df1 = m.stiffness * dy;
  inc.df2 = m.mass * dy_ddot + m.damping * dy_dot + m.configuration * dy;
  inc.df3 = m.load_gradient * dy;
  for (std::size_t s = 0; s < slots.size(); ++s) {
    inc.df3 += slot_load(slots[s]) * omega(static_cast<Eigen::Index>(s));
  }
  return inc;
}

Vec6 AssembledStructure::node_increment(const VecX& state, std::size_t node) const {
  Vec6 d = Vec6::Zero();
  for (int c = 0; c < 6; ++c) {
    const Eigen::Index k = dof_map[node * 6 + static_cast<std::size_t>(c)];
    if (k >= 0) d(c) = state(k);
  }
  return d;
}

Vec3 AssembledStructure::node_position(const VecX& state, std::size_t node) const {
  const Vec3 ref = node < reference_elements.size() ? reference_elements[node].x0_a
                                                    : reference_elements.back().x0_b;
  return ref + node_increment(state, node).head<3>();
}

Mat3 AssembledStructure::node_rotation(const VecX& state, std::size_t node) const {
  const Vec3 ref = node < reference_elements.size() ? reference_elements[node].psi_a
                                                    : reference_elements.back().psi_b;
  return exp_map(node_increment(state, node).tail<3>()) * exp_map(ref);
}

std::vector<ElementState> AssembledStructure::element_states(const VecX& state) const {
  std::vector<ElementState> out = reference_elements;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].x0_a = node_position(state, i);
    out[i].x0_b = node_position(state, i + 1);
    out[i].psi_a = log_map(node_rotation(state, i));
    out[i].psi_b = log_map(node_rotation(state, i + 1));
  }
  return out;
}

Eigen::RowVectorXd AssembledStructure::dof_selector(std::size_t node, int component) const {
  Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(state_dim()));
  const Eigen::Index k = dof_map.at(node * 6 + static_cast<std::size_t>(component));
  if (k >= 0) r(k) = 1.0;
  return r;
}

VecX AssembledStructure::steady_state(const VecX& omega) const {
  VecX z = VecX::Zero(static_cast<Eigen::Index>(state_dim()));
  if (omega.size() == 0) return z;
  z.head(static_cast<Eigen::Index>(dof_count())) = stiffness.partialPivLu().solve(load * omega);
  return z;
}

VecX AssembledStructure::natural_frequencies() const {
  const MatX k = 0.5 * (stiffness + stiffness.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<MatX> es(k, mass, Eigen::EigenvaluesOnly);
  VecX w = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  std::sort(w.data(), w.data() + w.size());
  return w;
}

namespace {

void fill_input(AssembledStructure& s) {
  const auto n = static_cast<Eigen::Index>(s.dof_count());
  const auto m = static_cast<Eigen::Index>(s.primer_slots.size());
  MatX global = MatX::Zero(static_cast<Eigen::Index>(s.node_count * 6), m);
  for (Eigen::Index c = 0; c < m; ++c) {
    const PrimerSlot& slot = s.primer_slots[static_cast<std::size_t>(c)];
    if (slot.element >= s.reference_elements.size()) {
      throw ConfigError("primer slot references element " + std::to_string(slot.element) +
                        " beyond the structure");
    }
    global.block<12, 1>(static_cast<Eigen::Index>(slot.element * 6), c) += slot_load(slot);
  }
  s.load = MatX::Zero(n, m);
  for (std::size_t g = 0; g < s.dof_map.size(); ++g) {
    if (s.dof_map[g] >= 0) s.load.row(s.dof_map[g]) = global.row(static_cast<Eigen::Index>(g));
  }
  s.b_blocks = MatX::Zero(2 * n, m);
  if (m > 0) s.b_blocks.bottomRows(n) = s.mass.llt().solve(s.load);
}

}  // namespace

AssembledStructure assemble(const std::vector<ElementState>& elements,
                            const MaterialMatrix& material, const std::vector<PrimerSlot>& slots,
                            const AssemblyOptions& options) {
  if (elements.empty()) throw ConfigError("structure needs at least one element");
  if (!options.element_materials.empty() && options.element_materials.size() != elements.size()) {
    throw ConfigError("per-element materials must cover every element");
  }
  for (std::size_t i = 0; i < elements.size(); ++i) {
    elements[i].validate();
    if (i + 1 < elements.size()) {
      const bool shared = (elements[i].x0_b - elements[i + 1].x0_a).norm() <= 1e-12 &&
                          (elements[i].psi_b - elements[i + 1].psi_a).norm() <= 1e-12;
      if (!shared) throw ConfigError("inconsistent node chain at element " + std::to_string(i + 1));
    }
  }

  AssembledStructure s;
  s.node_count = elements.size() + 1;
  s.reference_elements = elements;
  s.primer_slots = slots;
  const auto total = static_cast<Eigen::Index>(s.node_count * 6);

  MatX mg = MatX::Zero(total, total);
  MatX kg = MatX::Zero(total, total);
  MatX cg = MatX::Zero(total, total);
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const MaterialMatrix& mat =
        options.element_materials.empty() ? material : options.element_materials[i];
    mat.validate();
    const ElementMatrices em = element_matrices(elements[i], elements[i], mat, options.element, i);
    const auto o = static_cast<Eigen::Index>(i * 6);
    mg.block<12, 12>(o, o) += em.mass;
    kg.block<12, 12>(o, o) += em.stiffness + em.configuration - em.load_gradient;
    cg.block<12, 12>(o, o) += em.damping;
  }

  s.dof_map.assign(s.node_count * 6, -1);
  Eigen::Index next = 0;
  for (std::size_t node = 0; node < s.node_count; ++node) {
    const bool clamped = std::find(options.clamped_nodes.begin(), options.clamped_nodes.end(),
                                   node) != options.clamped_nodes.end();
    for (std::size_t c = 0; c < 6; ++c) {
      if (!clamped) s.dof_map[node * 6 + c] = next++;
    }
  }
  for (std::size_t node : options.clamped_nodes) {
    if (node >= s.node_count) throw ConfigError("clamped node out of range");
  }
  if (next == 0) throw ConfigError("every node is clamped");

  std::vector<Eigen::Index> free;
  for (std::size_t g = 0; g < s.dof_map.size(); ++g) {
    if (s.dof_map[g] >= 0) free.push_back(static_cast<Eigen::Index>(g));
  }
  const auto n = static_cast<Eigen::Index>(free.size());
  s.mass.resize(n, n);
  s.stiffness.resize(n, n);
  s.damping.resize(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      s.mass(r, c) = mg(free[r], free[c]);
      s.stiffness(r, c) = kg(free[r], free[c]);
      s.damping(r, c) = cg(free[r], free[c]);
    }
  }

  Eigen::LLT<MatX> llt(s.mass);
  if (llt.info() != Eigen::Success || !s.mass.allFinite()) throw NumericalError("degenerate inertia");
  const double scale = s.mass.diagonal().cwiseAbs().maxCoeff();
  if (!(llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 1e-12 * std::sqrt(scale))) {
    throw NumericalError("degenerate inertia");
  }

  s.a_blocks = MatX::Zero(2 * n, 2 * n);
  s.a_blocks.topRightCorner(n, n) = MatX::Identity(n, n);
  s.a_blocks.bottomLeftCorner(n, n) = -llt.solve(s.stiffness);
  s.a_blocks.bottomRightCorner(n, n) = -llt.solve(s.damping);
  fill_input(s);
  return s;
}

AssembledStructure with_slots(const AssembledStructure& base, const std::vector<PrimerSlot>& slots) {
  AssembledStructure s = base;
  s.primer_slots = slots;
  fill_input(s);
  return s;
}

Trajectory march(const AssembledStructure& s, const OmegaSchedule& omega, double duration,
                 double dt, const MarchOptions& options, const VecX& initial) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  if (!(duration >= dt)) throw ConfigError("march horizon must cover at least one step");
  const auto n = static_cast<Eigen::Index>(s.state_dim());
  const auto m = static_cast<Eigen::Index>(s.primer_slots.size());
  VecX z = initial.size() == 0 ? VecX::Zero(n) : initial;
  if (z.size() != n) throw ConfigError("initial state dimension mismatch");

  const Discretization d = discretize(s.a_blocks, s.b_blocks, dt);
  const auto steps = static_cast<std::size_t>(std::llround(duration / dt));
  const std::size_t every = std::max<std::size_t>(1, options.sample_every);

  auto command = [&](double t) {
    VecX w = omega ? omega(t) : VecX::Zero(m);
    if (w.size() != m) throw ConfigError("omega schedule dimension mismatch");
    return w;
  };

  Trajectory traj;
  VecX w = command(0.0);
  traj.times.push_back(0.0);
  traj.states.push_back(z);
  traj.commands.push_back(w);
  for (std::size_t k = 1; k <= steps; ++k) {
    z = d.phi * z + d.gamma * w;
    const double t = static_cast<double>(k) * dt;
    if (!z.allFinite() || z.norm() > options.divergence_bound) {
      throw NumericalError("non-physical divergence at t=" + std::to_string(t));
    }
    w = command(t);
    if (k % every == 0) {
      traj.times.push_back(t);
      traj.states.push_back(z);
      traj.commands.push_back(w);
    }
  }
  return traj;
}

std::vector<ElementState> straight_chain(const std::vector<Vec3>& nodes) {
  if (nodes.size() < 2) throw ConfigError("structure needs at least one element");
  std::vector<ElementState> out;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    ElementState e;
    e.x0_a = nodes[i];
    e.x0_b = nodes[i + 1];
    const Vec3 d = nodes[i + 1] - nodes[i];
    e.length_l = d.norm();
    if (!(e.length_l > 0.0)) throw ConfigError("length must be positive");
    const Vec3 u = d / e.length_l;
    const Vec3 axis = Vec3::UnitX().cross(u);
    const double s = axis.norm();
    const double c = Vec3::UnitX().dot(u);
    if (s < 1e-14) {
      e.section_offset = c > 0 ? Mat3::Identity() : exp_map(Vec3(0.0, 0.0, kPi));
    } else {
      e.section_offset = exp_map(axis / s * std::atan2(s, c));
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace morphwing::structure
