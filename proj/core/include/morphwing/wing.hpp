#pragma once

#include "morphwing/aero.hpp"
#include "morphwing/common.hpp"
#include "morphwing/primer.hpp"
#include "morphwing/structure.hpp"

#include <cstddef>
#include <vector>

// Default compliant wing: arm, compliant elbow flexure, forearm and hand
// segments laid out along the local span axis x, clamped at the shoulder.
// The chord axis is y and the wing-plane normal is z. A primer slot spans
// the flexure with a chordwise offset, so contraction bends the elbow
// in-plane.
namespace morphwing::wing {

struct SegmentSpec {
  double length = 0.05;  // m
  std::size_t elements = 1;
  double youngs_modulus = 100e9;  // Pa
  double shear_modulus = 38e9;    // Pa
  double density = 1600.0;        // kg/m^3
  double radius = 1e-3;           // m
};

struct WingDesign {
  SegmentSpec arm{0.05, 2, 100e9, 38e9, 1600.0, 1.0e-3};
  SegmentSpec flexure{0.006, 1, 2.5e9, 0.9e9, 1150.0, 0.52e-3};
  SegmentSpec forearm{0.055, 2, 100e9, 38e9, 1600.0, 0.8e-3};
  SegmentSpec hand{0.05, 1, 100e9, 38e9, 1600.0, 0.6e-3};
  /// Chordwise lever of the primer force line about the flexure axis (m);
  /// negative so that contraction closes the elbow (negative angle).
  double slot_offset = -3e-3;
  structure::ElementOptions element_options{};

  std::size_t element_count() const {
    return arm.elements + flexure.elements + forearm.elements + hand.elements;
  }
  std::size_t flexure_element() const { return arm.elements; }
  double length() const { return arm.length + flexure.length + forearm.length + hand.length; }
  /// Four-element variant: one element per segment.
  static WingDesign coarse();
};

/// Primer force per mm of stroke: rated diagonal force over the full stroke.
double primer_gain(const primer::PrimerSpec& spec);

struct Wing {
  WingDesign design;
  structure::AssembledStructure structure;
  std::size_t elbow_node_a = 0;  // flexure start node
  std::size_t elbow_node_b = 0;  // flexure end node
  std::size_t tip_node = 0;
};

/// Primer slot across element `element` with the design's attachment geometry.
structure::PrimerSlot slot_on(const WingDesign& design, std::size_t element, double gain);
/// One slot per element, in element order.
std::vector<structure::PrimerSlot> candidate_slots(const WingDesign& design, double gain);

Wing build_wing(const WingDesign& design = {}, const primer::PrimerSpec& spec = {});
Wing build_wing(const WingDesign& design, const std::vector<structure::PrimerSlot>& slots);

/// In-plane elbow angle (rad): relative rotation across the flexure about the
/// wing-plane normal.
double elbow_angle(const Wing& wing, const VecX& state);
/// Row of d(elbow angle)/d(state) in the linear regime.
Eigen::RowVectorXd elbow_selector(const Wing& wing);
Vec3 tip_position(const Wing& wing, const VecX& state);

/// Mean elbow angle sensitivity (deg/mm) from a least-squares fit of the
/// static elbow angle over a sweep of primer displacements on channel 0.
double measure_elbow_sensitivity(const Wing& wing, const std::vector<double>& displacements_mm);

/// Strip geometry for a symmetric pair of these wings (tip to tip).
aero::StripGeometry wing_strips(const WingDesign& design, double aspect_ratio, std::size_t strips);

/// Map from structure state [y; y'] to strip angles of attack (rad): local
/// twist about the span axis minus heave rate over airspeed, interpolated at
/// each strip's spanwise station (mirrored wings deform alike).
MatX aero_input_map(const Wing& wing, const aero::StripGeometry& strips, double airspeed);

}  // namespace morphwing::wing
