#include "morphwing/linear_system.hpp"
#include "morphwing/wing.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace morphwing::wing {
namespace {

TEST(Design, DefaultLayout) {
  const WingDesign d;
  EXPECT_EQ(d.element_count(), 6u);
  EXPECT_EQ(d.flexure_element(), 2u);
  EXPECT_NEAR(d.length(), 0.161, 1e-15);
  EXPECT_EQ(WingDesign::coarse().element_count(), 4u);
}

TEST(Design, PrimerGainFromRatedForce) {
  EXPECT_NEAR(primer_gain({}), 0.440 * 9.80665 / 1.04, 1e-12);
}

TEST(Design, CandidateSlotsOnePerElement) {
  const WingDesign d;
  const auto slots = candidate_slots(d, 2.0);
  ASSERT_EQ(slots.size(), d.element_count());
  for (std::size_t e = 0; e < slots.size(); ++e) {
    EXPECT_EQ(slots[e].element, e);
    EXPECT_EQ(slots[e], slot_on(d, e, 2.0));
  }
}

TEST(Build, DefaultWingIsStableWithOneSlotAtTheFlexure) {
  const Wing w = build_wing();
  ASSERT_EQ(w.structure.primer_slots.size(), 1u);
  EXPECT_EQ(w.structure.primer_slots[0].element, w.design.flexure_element());
  EXPECT_EQ(w.elbow_node_b, w.elbow_node_a + 1);
  EXPECT_EQ(w.tip_node, w.design.element_count());
  EXPECT_LT(spectral_abscissa(w.structure.a_blocks), 0.0);
  EXPECT_NEAR((tip_position(w, VecX::Zero(static_cast<Eigen::Index>(w.structure.state_dim()))) -
               Vec3(w.design.length(), 0, 0)).norm(), 0.0, 1e-15);
}

TEST(Build, RejectsEmptySegment) {
  WingDesign d;
  d.forearm.elements = 0;
  EXPECT_THROW(build_wing(d), ConfigError);
}

TEST(Elbow, SensitivityNearNominal) {
  const double sens = measure_elbow_sensitivity(build_wing(), {0.0, 0.5, 1.04});
  EXPECT_LT(sens, 0.0);
  EXPECT_NEAR(sens / -31.0, 1.0, 0.3);
}

TEST(Elbow, SelectorAgreesWithAngleInLinearRegime) {
  const Wing w = build_wing();
  const VecX x = w.structure.steady_state(VecX::Constant(1, 0.01));
  const double exact = elbow_angle(w, x);
  EXPECT_NEAR(elbow_selector(w).dot(x), exact, 1e-3 * std::abs(exact));
}

TEST(Elbow, ContractionClosesInPlane) {
  const Wing w = build_wing();
  const VecX x = w.structure.steady_state(VecX::Constant(1, 1.0));
  EXPECT_LT(elbow_angle(w, x), 0.0);
  const Vec3 tip = tip_position(w, x);
  EXPECT_LT(tip.y(), 0.0);
  EXPECT_NEAR(tip.z(), 0.0, 1e-12);
}

TEST(Elbow, SensitivityNeedsTwoPoints) {
  EXPECT_THROW(measure_elbow_sensitivity(build_wing(), {0.5}), ConfigError);
}

TEST(Strips, SpanCoversBothWings) {
  const WingDesign d;
  const aero::StripGeometry g = wing_strips(d, 6.0, 10);
  EXPECT_NEAR(g.span, 2.0 * d.length(), 1e-15);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_NEAR(g.span_stations[k], -g.span_stations[9 - k], 1e-15);
  }
}

TEST(Strips, InputMapReadsTwistAndHeaveRate) {
  const Wing w = build_wing();
  const aero::StripGeometry g = wing_strips(w.design, 6.0, 8);
  const double speed = 4.0;
  const MatX p = aero_input_map(w, g, speed);
  const auto n = static_cast<Eigen::Index>(w.structure.state_dim());
  const auto dofs = static_cast<Eigen::Index>(w.structure.dof_count());
  ASSERT_EQ(p.rows(), 8);
  ASSERT_EQ(p.cols(), n);

  VecX twist = VecX::Zero(n);
  for (std::size_t node = 1; node <= w.tip_node; ++node) twist += 0.01 * w.structure.dof_selector(node, 3).transpose();
  const VecX a = p * twist;
  for (Eigen::Index k = 0; k < 8; ++k) {
    if (std::abs(g.span_stations[static_cast<std::size_t>(k)]) >= w.structure.reference_elements[0].x0_b.x()) {
      EXPECT_NEAR(a(k), 0.01, 1e-12);
    }
  }

  VecX heave = VecX::Zero(n);
  for (std::size_t node = 1; node <= w.tip_node; ++node) {
    heave.tail(dofs) += 0.2 * w.structure.dof_selector(node, 2).head(dofs).transpose();
  }
  const VecX b = p * heave;
  EXPECT_NEAR(b(0), -0.2 / speed, 1e-12);
  EXPECT_NEAR(b(7), -0.2 / speed, 1e-12);
  EXPECT_THROW(aero_input_map(w, g, 0.0), ConfigError);
}

}  // namespace
}  // namespace morphwing::wing
