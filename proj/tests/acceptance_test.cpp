#include "morphwing/aero.hpp"
#include "morphwing/config.hpp"
#include "morphwing/flightsim.hpp"
#include "morphwing/placement.hpp"
#include "morphwing/primer.hpp"
#include "morphwing/rgov.hpp"
#include "morphwing/rotation.hpp"
#include "morphwing/scenario.hpp"
#include "morphwing/structure.hpp"
#include "morphwing/wing.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace morphwing;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = MORPHWING_SOURCE_DIR;

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 1. Primer statics
Outcome primer_statics() {
  Outcome o;
  const primer::PrimerSpec spec;
  const double force = primer::total_compression_force(spec);
  const double stroke = primer::stroke(spec, force);
  o.check(force == 440.0, fmt("force %.6g gf (want 440)", force));
  o.check(stroke == 1.04, fmt("stroke %.6g mm (want 1.04)", stroke));
  return o;
}

// 2. Elbow sensitivity chain
Outcome elbow_chain() {
  Outcome o;
  const double shift = primer::elbow_angle_shift(1.04, -31.0);
  o.check(std::abs(shift + 32.24) <= 0.01, fmt("shift(1.04 mm) %.4f deg (want -32.24 +- 0.01)", shift));
  const double sens = wing::measure_elbow_sensitivity(wing::build_wing(), {0.0, 0.26, 0.52, 0.78, 1.04});
  o.check(std::abs(sens / -31.0 - 1.0) <= 0.3, fmt("measured %.3f deg/mm (want -31 +- 30%%)", sens));
  return o;
}

// 3. Aerodynamics
Outcome aerodynamics() {
  Outcome o;
  const double ar = 6.0, span = 0.3, speed = 5.0, rho = 1.225, alpha = deg2rad(5.0);
  const aero::StripGeometry g = aero::elliptic_wing(span, ar, 20);
  const aero::AeroModel m = aero::build_aero_model(g, {}, speed, rho);
  double area = 0.0;
  for (double a : g.area) area += a;
  const VecX y1 = VecX::Constant(20, alpha);
  const double steady = aero::split_output(m, m.steady_gain() * y1).per_strip_lift.sum();
  const double cl = steady / (0.5 * rho * speed * speed * area);
  const double theory = 2.0 * kPi * alpha / (1.0 + 2.0 / ar);
  const double err = std::abs(cl - theory) / theory;
  o.check(err <= 0.02, fmt("C_L %.5f vs lifting line %.5f", cl, theory) + fmt(" (error %.2e)", err));

  aero::WakeState xi = aero::WakeState::zero(m);
  const double initial = aero::evaluate_output(m, xi.lag_states, y1).per_strip_lift.sum() / steady;
  const double semichord = 0.5 * area / span;
  const double horizon = 1000.0 * semichord / speed;
  const int steps = 1000;
  double last = initial;
  for (int k = 0; k < steps; ++k) {
    const aero::StepResult r = aero::aero_step(m, xi, y1, horizon / steps);
    xi = r.xi;
    last = r.y2.per_strip_lift.sum() / steady;
  }
  o.check(std::abs(initial - 0.5) <= 0.01, fmt("Wagner at 0+ %.4f (want 0.50 +- 0.01)", initial));
  o.check(last >= 0.99, fmt("Wagner at 1000 semichords %.5f (want >= 0.99)", last));
  return o;
}

// 4. Structure law
structure::ElementState random_element(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  structure::ElementState e;
  e.x0_a = 0.1 * Vec3(u(rng), u(rng), u(rng));
  e.x0_b = e.x0_a + Vec3(0.05 + 0.02 * u(rng), 0.01 * u(rng), 0.01 * u(rng));
  e.psi_a = 0.5 * Vec3(u(rng), u(rng), u(rng));
  e.psi_b = e.psi_a + 0.2 * Vec3(u(rng), u(rng), u(rng));
  e.length_l = (e.x0_b - e.x0_a).norm();
  return e;
}

double cantilever_error(int elements) {
  const double young = 70e9, shear = 26e9, rho = 2700.0, r = 1e-3, length = 0.1;
  const double inertia = kPi * std::pow(r, 4) / 4.0, area = kPi * r * r;
  const double beta = 1.875104068711961;
  const double exact = beta * beta * std::sqrt(young * inertia / (rho * area * std::pow(length, 4)));
  std::vector<Vec3> nodes;
  for (int i = 0; i <= elements; ++i) nodes.emplace_back(length * i / elements, 0.0, 0.0);
  const auto s = structure::assemble(structure::straight_chain(nodes),
                                     structure::MaterialMatrix::circular_rod(young, shear, rho, r), {});
  return std::abs(s.natural_frequencies()(0) - exact) / exact;
}

Outcome structure_law() {
  Outcome o;
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto mat = structure::MaterialMatrix::circular_rod(2e9, 0.8e9, 1200.0, 1e-3);
  double asym = 0.0, min_eig = 1.0;
  for (int k = 0; k < 1000; ++k) {
    const auto e = random_element(rng);
    const structure::Mat12 k1 = structure::kappa1(e, mat, 0.5 * (1.0 + u(rng)) * e.length_l);
    asym = std::max(asym, (k1 - k1.transpose()).cwiseAbs().maxCoeff() / k1.cwiseAbs().maxCoeff());
    const Eigen::SelfAdjointEigenSolver<structure::Mat12> es(k1);
    min_eig = std::min(min_eig, es.eigenvalues().minCoeff() / es.eigenvalues().maxCoeff());
  }
  o.check(asym == 0.0 && min_eig >= -1e-10, fmt("kappa1 asymmetry %.1e, min eig ratio %.2e", asym, min_eig));

  double rigid = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const auto ref = random_element(rng);
    auto cur = ref;
    cur.x0_b += 1e-3 * Vec3(u(rng), u(rng), u(rng));
    cur.psi_b += 0.05 * Vec3(u(rng), u(rng), u(rng));
    const Mat3 q = rotation::exp_map(1.5 * Vec3(u(rng), u(rng), u(rng)));
    const Vec3 t(u(rng), u(rng), u(rng));
    auto moved = [&](structure::ElementState e) {
      e.x0_a = q * e.x0_a + t;
      e.x0_b = q * e.x0_b + t;
      e.psi_a = rotation::log_map(q * rotation::exp_map(e.psi_a));
      e.psi_b = rotation::log_map(q * rotation::exp_map(e.psi_b));
      return e;
    };
    const structure::Vec12 f = structure::internal_force(cur, ref, mat);
    structure::Vec12 rotated;
    rotated << q * f.segment<3>(0), q * f.segment<3>(3), q * f.segment<3>(6), q * f.segment<3>(9);
    rigid = std::max(rigid, (structure::internal_force(moved(cur), ref, mat) - rotated).norm() / f.norm());
    rigid = std::max(rigid, structure::internal_force(moved(ref), ref, mat).norm() / f.norm());
  }
  o.check(rigid < 1e-9, fmt("rigid-transform dF1 %.2e relative", rigid));

  const double e4 = cantilever_error(4), e8 = cantilever_error(8), e16 = cantilever_error(16);
  o.check(e8 <= 0.5 * e4 && e16 <= 0.5 * e8,
          fmt("clamped rod error 4->8 ratio %.2f", e4 / e8) + fmt(", 8->16 ratio %.2f", e8 / e16));
  return o;
}

// 5. RG model
struct RandomGoverned {
  rgov::RGModel model;
  aero::AeroModel aero;
  VecX requested;
};

RandomGoverned random_governed(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Eigen::Index dofs = 2 + static_cast<Eigen::Index>(rng() % 3);
  const Eigen::Index inputs = 1 + static_cast<Eigen::Index>(rng() % 2);
  const std::size_t strips = 2 + rng() % 4;
  MatX l = MatX::Random(dofs, dofs);
  const MatX stiffness = l * l.transpose() + 0.5 * MatX::Identity(dofs, dofs);
  const MatX damping = 0.5 * stiffness + (0.2 + u(rng)) * MatX::Identity(dofs, dofs);
  MatX a = MatX::Zero(2 * dofs, 2 * dofs), b = MatX::Zero(2 * dofs, inputs);
  a.topRightCorner(dofs, dofs).setIdentity();
  a.bottomLeftCorner(dofs, dofs) = -stiffness;
  a.bottomRightCorner(dofs, dofs) = -damping;
  b.bottomRows(dofs) = MatX::Random(dofs, inputs);

  RandomGoverned g;
  g.model = rgov::prestabilize(a, b, {});
  const auto geom = aero::elliptic_wing(0.2 + 0.2 * u(rng), 4.0 + 4.0 * u(rng), strips);
  MatX map = MatX::Zero(static_cast<Eigen::Index>(strips), 2 * dofs);
  map.leftCols(dofs) = 0.2 * MatX::Random(static_cast<Eigen::Index>(strips), dofs);
  g.aero = aero::with_input_map(aero::build_aero_model(geom, {}, 3.0 + 4.0 * u(rng)), map);
  const auto width = static_cast<Eigen::Index>(g.aero.output_dim());
  const std::size_t count = 1 + rng() % 3;
  for (std::size_t c = 0; c < count; ++c) {
    g.model.y2_constraints.push_back({VecX::Random(width), 0.01 + 0.1 * u(rng)});
  }
  g.requested = 5.0 * VecX::Random(inputs);
  return g;
}

Outcome rg_model() {
  Outcome o;
  const wing::Wing w = wing::build_wing();
  const rgov::RGModel wm = rgov::prestabilize(w.structure, rgov::PrestabilizerGains::from_gait(10.0));
  const VecX omega = VecX::Constant(1, 0.52);
  const VecX base = rgov::equilibrium_locus(wm, omega);
  double lin = 0.0;
  for (double alpha : {-3.0, -0.5, 0.25, 2.0, 7.5}) {
    lin = std::max(lin, (rgov::equilibrium_locus(wm, alpha * omega) - alpha * base).norm() /
                            (std::abs(alpha) * base.norm()));
  }
  o.check(lin <= 1e-12, fmt("locus alpha-scaling residual %.2e", lin));

  std::mt19937 rng(77);
  int violations = 0, not_idempotent = 0, infeasible = 0, false_refusals = 0, governed = 0;
  double worst = -1e300;
  const rgov::GovernorOptions opts;
  for (int k = 0; k < 100;) {
    const RandomGoverned g = random_governed(rng);
    const VecX rest = VecX::Zero(static_cast<Eigen::Index>(g.model.state_dim()));
    // start from the equilibrium of an admitted earlier command
    const rgov::GovernResult warm = rgov::govern(g.model, 0.3 * g.requested, rest, g.aero, opts);
    const VecX state = rgov::equilibrium_locus(g.model, warm.omega);
    const rgov::GovernResult r = rgov::govern(g.model, g.requested, state, g.aero, opts);
    double scale = 1.0;
    for (const auto& c : g.model.y2_constraints) scale = std::max(scale, c.bound);
    if (!r.feasible) {
      // releasing the command from this state must really leave the set
      ++infeasible;
      const VecX zero = VecX::Zero(g.requested.size());
      const auto y0 = rgov::predict_outputs(g.model, g.aero, zero, state, VecX(), opts);
      if (rgov::worst_violation(g.model.y2_constraints, y0) <= 1e-12 * scale) ++false_refusals;
      continue;
    }
    ++k;
    if (r.lambda < 1.0) ++governed;
    const auto y2 = rgov::predict_outputs(g.model, g.aero, r.omega, state, VecX(), opts);
    const double v = rgov::worst_violation(g.model.y2_constraints, y2);
    worst = std::max(worst, v);
    if (v > 1e-12 * scale) ++violations;
    const rgov::GovernResult again = rgov::govern(g.model, r.omega, state, g.aero, opts);
    if (again.lambda != 1.0 || again.omega != r.omega) ++not_idempotent;
  }
  o.check(violations == 0, "violations " + std::to_string(violations) + "/100 (worst excess " +
                               fmt("%.2e)", worst) + ", governed " + std::to_string(governed) +
                               ", inadmissible starts skipped " + std::to_string(infeasible));
  o.check(false_refusals == 0, "false refusals " + std::to_string(false_refusals));
  o.check(not_idempotent == 0, "non-idempotent " + std::to_string(not_idempotent));
  return o;
}

// 6. Placement
placement::PlacementProblem placement_fixture(const wing::WingDesign& design, std::size_t budget,
                                              const std::vector<placement::HarmonicLoad>& loads,
                                              double desired_deg) {
  const wing::Wing w = wing::build_wing(design, std::vector<structure::PrimerSlot>{});
  placement::PlacementProblem p;
  p.structure = w.structure;
  p.candidate_slots = wing::candidate_slots(design, wing::primer_gain({}));
  p.tip_node = w.tip_node;
  p.gait.frequency = 10.0;
  p.gait.loads = loads;
  p.v_desired = {Vec3::UnitX()};
  p.budget = budget;
  const placement::OmegaParams zero =
      placement::OmegaParams::Zero(static_cast<Eigen::Index>(1 + 2 * p.options.harmonics), 1);
  const Mat3 v = placement::evaluate_placement(p, {0}, zero).pcs.vectors;
  p.v_desired = {placement::rotate_about(v.col(0), v.col(2), deg2rad(desired_deg))};
  return p;
}

std::vector<placement::HarmonicLoad> default_loads(const wing::WingDesign& d) {
  return {{d.flexure_element() + 1, Vec3(0, 0, 0.05), Vec3::Zero(), 1, 0.0},
          {d.element_count(), Vec3(0, 0.02, 0), Vec3::Zero(), 1, kPi / 2}};
}

std::vector<placement::HarmonicLoad> random_loads(const wing::WingDesign& d, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t nodes = d.element_count();
  return {{1 + rng() % nodes, Vec3(0.0, 0.01 * u(rng), 0.03 + 0.04 * u(rng)), Vec3::Zero(), 1, 0.0},
          {nodes, Vec3(0.0, 0.01 + 0.02 * u(rng), 0.01 * u(rng)), Vec3::Zero(), 1, kPi * u(rng)}};
}

Outcome placement_check() {
  Outcome o;
  const wing::WingDesign full;
  const wing::WingDesign coarse = wing::WingDesign::coarse();
  std::mt19937 rng(99);
  std::vector<placement::PlacementProblem> fixtures;
  for (std::size_t budget : {1u, 2u}) {
    fixtures.push_back(placement_fixture(full, budget, default_loads(full), 20.0));
    fixtures.push_back(placement_fixture(coarse, budget, default_loads(coarse), 12.0));
    fixtures.push_back(placement_fixture(full, budget, random_loads(full, rng), 15.0));
  }
  int mismatches = 0;
  double worst = 0.0;
  for (const auto& p : fixtures) {
    const auto s = placement::optimize_placement(p);
    const auto b = placement::brute_force_placement(p);
    const double rel = std::abs(s.objective - b.objective) / std::max(1e-300, std::abs(b.objective));
    worst = std::max(worst, rel);
    if (s.chosen_slots != b.chosen_slots || rel > 1e-6) ++mismatches;
  }
  o.check(mismatches == 0, std::to_string(fixtures.size()) + " guarded fixtures, mismatches " +
                               std::to_string(mismatches) + fmt(", worst objective gap %.2e", worst));

  int breaks = 0, compared = 0;
  for (int k = 0; k < 20; ++k) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto loads = random_loads(full, rng);
    const double angle = 8.0 + 14.0 * u(rng);
    const auto one = placement::optimize_placement(placement_fixture(full, 1, loads, angle));
    const auto two = placement::optimize_placement(placement_fixture(full, 2, loads, angle));
    const bool met1 = !one.has_flag("pc_unmet"), met2 = !two.has_flag("pc_unmet");
    if (met1 && !met2) {
      ++breaks;
    } else if (met1 && met2) {
      ++compared;
      if (two.objective > one.objective * (1.0 + 1e-9)) ++breaks;
    }
  }
  o.check(breaks == 0, "budget monotonicity breaks " + std::to_string(breaks) + "/20 (" +
                           std::to_string(compared) + " with both budgets meeting the target)");
  return o;
}

// 7. Closed-loop flight
Outcome flight() {
  Outcome o;
  flightsim::SimConfig closed;
  const flightsim::SimOutput out = flightsim::simulate(closed);
  const auto s = flightsim::summarize(out, closed.controller.pitch_ref, deg2rad(5.0));
  o.check(s.settling_time >= 0.0 && s.settling_time <= 3.0,
          fmt("closed loop from %.0f deg settles in %.3f s", rad2deg(closed.initial_pitch_error), s.settling_time));
  o.check(s.bounded && out.time.back() >= closed.duration - 1e-9, fmt("bounded for %.1f s", out.time.back()));
  o.check(s.command_min >= 0.0 && s.command_max <= closed.primer.stroke_max,
          fmt("commands span [%.3f, %.3f] mm", s.command_min, s.command_max));

  flightsim::SimConfig open = closed;
  open.controller.closed_loop = false;
  open.controller.auto_trim = false;
  open.controller.gains.trim = out.trim_command;
  open.robot.incidence = out.trim_incidence;
  open.robot.body_drag_area = out.drag_area;
  open.initial_pitch_error = deg2rad(2.0);
  open.duration = 5.0;
  double open_peak = 0.0;
  bool diverged = false;
  try {
    const auto r = flightsim::simulate(open);
    for (double p : r.pitch) open_peak = std::max(open_peak, std::abs(p));
  } catch (const flightsim::SimulationDiverged& e) {
    diverged = true;
    for (double p : e.partial().pitch) open_peak = std::max(open_peak, std::abs(p));
  }
  o.check(diverged || open_peak > 5.0 * open.initial_pitch_error,
          std::string(diverged ? "open loop diverged" : "open loop grew") + fmt(" to %.1f deg from 2 deg", rad2deg(open_peak)));

  const double shift = rad2deg(flightsim::mean_elbow_angle(closed, 0.0) -
                               flightsim::mean_elbow_angle(closed, closed.primer.stroke_max));
  flightsim::SimConfig geared = closed;
  geared.gearing = geared.max_gearing;
  const double geared_shift = rad2deg(flightsim::mean_elbow_angle(geared, 0.0) -
                                      flightsim::mean_elbow_angle(geared, geared.primer.stroke_max));
  o.check(std::abs(shift) >= 30.0,
          fmt("trim sweep shifts mean elbow %.1f deg (%.1f deg at max gearing)", std::abs(shift), std::abs(geared_shift)));
  return o;
}

// 8. Determinism and energy
Outcome determinism() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "morphwing_acceptance";
  fs::remove_all(root);
  int differing = 0, files = 0;
  for (const char* name : {"aero_validate", "structure_march", "rg_analysis", "placement_optimize", "closed_loop"}) {
    const auto cfg = config::load(kSource / "configs" / (std::string(name) + ".yaml"));
    const auto a = scenario::run_scenario(cfg, root / name / "a");
    const auto b = scenario::run_scenario(cfg, root / name / "b");
    if (a.artifacts != b.artifacts) ++differing;
    for (const auto& f : a.artifacts) {
      ++files;
      if (slurp(root / name / "a" / f) != slurp(root / name / "b" / f)) ++differing;
    }
  }
  o.check(differing == 0, std::to_string(files) + " artifacts over 5 scenarios, differing " + std::to_string(differing));

  flightsim::RobotParams p;
  p.wrist_damping = 0.0;
  FullState x;
  x.pitch = 0.1;
  x.pitch_rate = 0.5;
  x.body_velocity = Vec3(1.0, 0.0, 0.3);
  x.q_active << 0.3, 0.2, 0.3, 0.2;
  x.active_rates << 2.0, -1.0, 2.0, -1.0;
  x.q_passive << 0.1, 0.1;
  x.passive_rates << 0.5, 0.5;
  const double dt = 1e-4;
  const double e0 = flightsim::total_energy(x, p, false);
  double drift = 0.0;
  for (int i = 1; i <= 100000; ++i) {
    x = flightsim::rk4_step(x, VecX::Zero(4), {}, p, dt, false);
    if (i % 100 == 0) drift = std::max(drift, std::abs(flightsim::total_energy(x, p, false) - e0) / e0);
  }
  o.check(drift < 1e-6, fmt("energy drift %.2e over 10 s at dt 1e-4", drift));
  return o;
}

struct Criterion {
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"primer statics", 1.0, primer_statics},
      {"elbow sensitivity chain", 30.0, elbow_chain},
      {"aerodynamics", 10.0, aerodynamics},
      {"structure law", 60.0, structure_law},
      {"reference governor", 120.0, rg_model},
      {"placement", 600.0, placement_check},
      {"closed-loop flight", 300.0, flight},
      {"determinism and energy", 120.0, determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_s) o.check(false, fmt("runtime %.1f s over budget %.0f s", secs, c.budget_s));
    if (!o.pass) ++failed;
    std::printf("%s [%zu] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
