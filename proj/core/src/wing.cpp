#include "morphwing/wing.hpp"

#include "morphwing/rotation.hpp"

#include <algorithm>
#include <cmath>

namespace morphwing::wing {

WingDesign WingDesign::coarse() {
  WingDesign d;
  d.arm.elements = 1;
  d.forearm.elements = 1;
  return d;
}

double primer_gain(const primer::PrimerSpec& spec) {
  return primer::total_compression_force(spec) * kGramForce / spec.stroke_max;
}

structure::PrimerSlot slot_on(const WingDesign& design, std::size_t element, double gain) {
  structure::PrimerSlot s;
  s.element = element;
  s.direction = Vec3::UnitX();
  s.offset = Vec3(0.0, design.slot_offset, 0.0);
  s.gain = gain;
  return s;
}

std::vector<structure::PrimerSlot> candidate_slots(const WingDesign& design, double gain) {
  std::vector<structure::PrimerSlot> out;
  for (std::size_t e = 0; e < design.element_count(); ++e) out.push_back(slot_on(design, e, gain));
  return out;
}

Wing build_wing(const WingDesign& design, const primer::PrimerSpec& spec) {
  spec.validate();
  return build_wing(design, {slot_on(design, design.flexure_element(), primer_gain(spec))});
}

Wing build_wing(const WingDesign& design, const std::vector<structure::PrimerSlot>& slots) {
  std::vector<Vec3> nodes{Vec3::Zero()};
  std::vector<structure::MaterialMatrix> materials;
  for (const SegmentSpec* seg : {&design.arm, &design.flexure, &design.forearm, &design.hand}) {
    if (seg->elements == 0) throw ConfigError("every wing segment needs at least one element");
    if (!(seg->length > 0.0)) throw ConfigError("length must be positive");
    const auto mat = structure::MaterialMatrix::circular_rod(seg->youngs_modulus, seg->shear_modulus,
                                                             seg->density, seg->radius);
    const double step = seg->length / static_cast<double>(seg->elements);
    for (std::size_t i = 0; i < seg->elements; ++i) {
      nodes.push_back(nodes.back() + Vec3(step, 0.0, 0.0));
      materials.push_back(mat);
    }
  }
  structure::AssemblyOptions options;
  options.element = design.element_options;
  options.element_materials = materials;
  Wing w;
  w.design = design;
  w.structure = structure::assemble(structure::straight_chain(nodes), materials.front(), slots, options);
  w.elbow_node_a = design.flexure_element();
  w.elbow_node_b = w.elbow_node_a + design.flexure.elements;
  w.tip_node = nodes.size() - 1;
  return w;
}

double elbow_angle(const Wing& wing, const VecX& state) {
  const Mat3 ra = wing.structure.node_rotation(state, wing.elbow_node_a);
  const Mat3 rb = wing.structure.node_rotation(state, wing.elbow_node_b);
  return rotation::log_map(ra.transpose() * rb).z();
}

Eigen::RowVectorXd elbow_selector(const Wing& wing) {
  return wing.structure.dof_selector(wing.elbow_node_b, 5) -
         wing.structure.dof_selector(wing.elbow_node_a, 5);
}

Vec3 tip_position(const Wing& wing, const VecX& state) {
  return wing.structure.node_position(state, wing.tip_node);
}

double measure_elbow_sensitivity(const Wing& wing, const std::vector<double>& displacements_mm) {
  if (displacements_mm.size() < 2) throw ConfigError("sensitivity sweep needs two or more points");
  if (wing.structure.primer_slots.empty()) throw ConfigError("wing has no primer slot");
  const auto n = static_cast<Eigen::Index>(displacements_mm.size());
  MatX design(n, 2);
  VecX angle(n);
  VecX omega = VecX::Zero(static_cast<Eigen::Index>(wing.structure.primer_slots.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    omega(0) = displacements_mm[static_cast<std::size_t>(i)];
    design(i, 0) = 1.0;
    design(i, 1) = omega(0);
    angle(i) = rad2deg(elbow_angle(wing, wing.structure.steady_state(omega)));
  }
  const VecX fit = design.colPivHouseholderQr().solve(angle);
  return fit(1);
}

aero::StripGeometry wing_strips(const WingDesign& design, double aspect_ratio, std::size_t strips) {
  return aero::elliptic_wing(2.0 * design.length(), aspect_ratio, strips);
}

MatX aero_input_map(const Wing& wing, const aero::StripGeometry& strips, double airspeed) {
  if (!(airspeed > 0.0)) throw ConfigError("degenerate freestream");
  const auto& s = wing.structure;
  const std::size_t nodes = s.node_count;
  std::vector<double> station(nodes);
  for (std::size_t k = 0; k < nodes; ++k) {
    station[k] = k < s.reference_elements.size() ? s.reference_elements[k].x0_a.x()
                                                 : s.reference_elements.back().x0_b.x();
  }
  const auto dofs = static_cast<Eigen::Index>(s.dof_count());
  MatX p = MatX::Zero(static_cast<Eigen::Index>(strips.size()), static_cast<Eigen::Index>(s.state_dim()));
  for (std::size_t k = 0; k < strips.size(); ++k) {
    const double y = std::min(std::abs(strips.span_stations[k]), station.back());
    const auto it = std::upper_bound(station.begin(), station.end(), y);
    std::size_t hi = static_cast<std::size_t>(std::distance(station.begin(), it));
    hi = std::clamp<std::size_t>(hi, 1, nodes - 1);
    const std::size_t lo = hi - 1;
    const double t = (y - station[lo]) / (station[hi] - station[lo]);
    const Eigen::RowVectorXd twist =
        (1.0 - t) * s.dof_selector(lo, 3) + t * s.dof_selector(hi, 3);
    const Eigen::RowVectorXd heave =
        (1.0 - t) * s.dof_selector(lo, 2) + t * s.dof_selector(hi, 2);
    const auto row = static_cast<Eigen::Index>(k);
    p.row(row) += twist;
    // heave rate lives in the velocity half of the state
    p.row(row).tail(dofs) -= heave.head(dofs) / airspeed;
  }
  return p;
}

}  // namespace morphwing::wing
