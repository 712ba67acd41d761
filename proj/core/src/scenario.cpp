#include "morphwing/scenario.hpp"

#include "morphwing/aero.hpp"
#include "morphwing/csv.hpp"
#include "morphwing/linear_system.hpp"
#include "morphwing/rgov.hpp"
#include "morphwing/structure.hpp"
#include "morphwing/wing.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace morphwing::scenario {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw ConfigError("cannot create output directory " + dir_.string());
  }

  std::ofstream open(const std::string& name) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + (dir_ / name).string());
    names_.push_back(name);
    return out;
  }

  void text(const std::string& name, const std::string& content) {
    auto out = open(name);
    out << content;
  }

  const fs::path& dir() const { return dir_; }
  std::vector<std::string>& names() { return names_; }

 private:
  fs::path dir_;
  std::vector<std::string> names_;
};

ordered_json vec_json(const VecX& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

struct Panel {
  std::string file;
  std::string comment;
  std::vector<std::string> channels;
};

const std::vector<Panel>& panels() {
  static const std::vector<Panel> p{
      {"velocity.csv", "body velocity, world frame, m/s", {"vx", "vy", "vz"}},
      {"attitude.csv", "pitch (rad, nose up positive) and pitch rate (rad/s)", {"pitch", "pitch_rate"}},
      {"wrench.csv", "aerodynamic wrench about the body origin, N and N*m", {"fx", "fy", "fz", "mx", "my", "mz"}},
      {"joints.csv", "wing joint angles, rad",
       {"flap_l", "elbow_l", "flap_r", "elbow_r", "wrist_l", "wrist_r"}},
      {"primer.csv", "primer command and displacement (mm), flight elbow shift (rad)",
       {"command_mm", "displacement_mm", "elbow_shift"}},
  };
  return p;
}

std::vector<double> panel_values(const flightsim::SimOutput& out, std::size_t panel, std::size_t k) {
  switch (panel) {
    case 0: return {out.body_velocity[k](0), out.body_velocity[k](1), out.body_velocity[k](2)};
    case 1: return {out.pitch[k], out.pitch_rate[k]};
    case 2: {
      const Vec6& w = out.wrench[k];
      return {w(0), w(1), w(2), w(3), w(4), w(5)};
    }
    case 3: {
      const VecX& j = out.joints[k];
      return std::vector<double>(j.data(), j.data() + j.size());
    }
    default: return {out.primer[k](0), out.primer[k](1), out.primer[k](2)};
  }
}

std::vector<std::string> write_flight(const flightsim::SimOutput& out, Artifacts& art) {
  if (out.size() == 0) throw NumericalError("no samples");
  const std::size_t start = art.names().size();
  for (std::size_t p = 0; p < panels().size(); ++p) {
    const Panel& panel = panels()[p];
    auto f = art.open(panel.file);
    std::vector<std::string> header{"time"};
    header.insert(header.end(), panel.channels.begin(), panel.channels.end());
    csv::Writer w(f, header, {panel.comment, "time in s from release"});
    for (std::size_t k = 0; k < out.size(); ++k) {
      std::vector<double> row{out.time[k]};
      const auto v = panel_values(out, p, k);
      row.insert(row.end(), v.begin(), v.end());
      w.row(row);
    }
  }
  {
    auto f = art.open("flight.csv");
    csv::Writer w(f, combined_header(), {"all panels, one row per sample; units as in the panel files"});
    for (std::size_t k = 0; k < out.size(); ++k) {
      std::vector<double> row{out.time[k]};
      for (std::size_t p = 0; p < panels().size(); ++p) {
        const auto v = panel_values(out, p, k);
        row.insert(row.end(), v.begin(), v.end());
      }
      w.row(row);
    }
  }
  {
    auto f = art.open("flight_long.csv");
    f << "# long format for plotting: one row per sample and channel\n";
    f << "time,series,value\n";
    for (std::size_t k = 0; k < out.size(); ++k) {
      for (std::size_t p = 0; p < panels().size(); ++p) {
        const auto v = panel_values(out, p, k);
        for (std::size_t c = 0; c < v.size(); ++c) {
          f << csv::format(out.time[k]) << ',' << panels()[p].channels[c] << ',' << csv::format(v[c]) << '\n';
        }
      }
    }
  }
  return {art.names().begin() + static_cast<std::ptrdiff_t>(start), art.names().end()};
}

std::vector<std::string> write_placement(const placement::PlacementSolution& s,
                                         const placement::PlacementProblem& problem, Artifacts& art) {
  const std::size_t start = art.names().size();
  std::vector<std::size_t> elements;
  for (std::size_t i : s.chosen_slots) elements.push_back(problem.candidate_slots.at(i).element);
  {
    auto f = art.open("report.txt");
    const auto list = [](const auto& v, auto fmt) {
      std::string out = "[";
      for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
      return out + "]";
    };
    const auto num = [](double x) { return csv::format(x); };
    const auto idx = [](std::size_t x) { return std::to_string(x); };
    std::vector<double> residual_deg;
    for (Eigen::Index i = 0; i < s.pc_residual.size(); ++i) residual_deg.push_back(rad2deg(s.pc_residual(i)));
    f << "objective: " << csv::format(s.objective) << '\n';
    f << "slots: " << list(s.chosen_slots, idx) << '\n';
    f << "slot_elements: " << list(elements, idx) << '\n';
    f << "pc_residual_deg: " << list(residual_deg, num) << '\n';
    f << "flags: " << list(s.flags, [](const std::string& x) { return x; }) << '\n';
    f << "dynamics_residual: " << csv::format(s.evaluation.dynamics_residual) << '\n';
    f << "aero_residual: " << csv::format(s.evaluation.aero_residual) << '\n';
    f << "harmonics: " << problem.options.harmonics << '\n';
    f << "omega_coefficients_mm:\n";
    for (Eigen::Index c = 0; c < s.params.cols(); ++c) {
      std::vector<double> col(s.params.rows());
      for (Eigen::Index r = 0; r < s.params.rows(); ++r) col[static_cast<std::size_t>(r)] = s.params(r, c);
      f << "  - " << list(col, num) << '\n';
    }
  }
  const auto& ev = s.evaluation;
  {
    auto f = art.open("omega.csv");
    std::vector<std::string> header{"time"};
    for (std::size_t e : elements) header.push_back("omega_element_" + std::to_string(e));
    csv::Writer w(f, header, {"optimal primer command per chosen slot over one gait period, mm"});
    for (std::size_t k = 0; k < ev.times.size(); ++k) {
      std::vector<double> row{ev.times[k]};
      for (Eigen::Index c = 0; c < ev.omega_samples.cols(); ++c) row.push_back(ev.omega_samples(static_cast<Eigen::Index>(k), c));
      w.row(row);
    }
  }
  {
    auto f = art.open("tip.csv");
    csv::Writer w(f, {"time", "x", "y", "z"}, {"wingtip loop under the optimal command, m"});
    for (std::size_t k = 0; k < ev.times.size(); ++k) {
      const auto r = static_cast<Eigen::Index>(k);
      w.row({ev.times[k], ev.tip(r, 0), ev.tip(r, 1), ev.tip(r, 2)});
    }
  }
  return {art.names().begin() + static_cast<std::ptrdiff_t>(start), art.names().end()};
}

// --- aero-validate -------------------------------------------------------

ordered_json run_aero(const config::ScenarioConfig& cfg, Artifacts& art) {
  const auto& a = cfg.aero;
  const aero::StripGeometry geom = aero::elliptic_wing(a.span, a.aspect_ratio, a.strips);
  const aero::AeroModel model = aero::build_aero_model(geom, {}, a.airspeed, a.air_density, a.wagner);
  const VecX y1 = VecX::Constant(static_cast<Eigen::Index>(a.strips), a.alpha);
  const aero::ForceOutput steady = aero::split_output(model, model.steady_gain() * y1);

  const double q = 0.5 * a.air_density * a.airspeed * a.airspeed;
  const double area = a.span * a.span / a.aspect_ratio;
  const double lift = steady.per_strip_lift.sum();
  const double cl = lift / (q * area);
  const double cl_theory = 2.0 * kPi * a.alpha * a.aspect_ratio / (a.aspect_ratio + 2.0);

  {
    auto f = art.open("spanwise.csv");
    csv::Writer w(f, {"station", "chord", "lift", "lift_per_span", "elliptic_lift_per_span"},
                  {"steady spanwise loading: station and chord in m, lift in N, loading in N/m"});
    const double l0 = 4.0 * lift / (kPi * a.span);
    for (std::size_t i = 0; i < geom.size(); ++i) {
      const double width = geom.area[i] / geom.chord[i];
      const double eta = 2.0 * geom.span_stations[i] / a.span;
      const double lps = steady.per_strip_lift(static_cast<Eigen::Index>(i)) / width;
      w.row({geom.span_stations[i], geom.chord[i], steady.per_strip_lift(static_cast<Eigen::Index>(i)), lps,
             l0 * std::sqrt(std::max(0.0, 1.0 - eta * eta))});
    }
  }

  // Indicial response to a step in angle of attack, normalized by the
  // settled lift, against the two-dimensional Wagner function.
  const double semichord = 0.5 * area / a.span;
  const double horizon = a.step_semichords * semichord / a.airspeed;
  const double dt = horizon / static_cast<double>(a.samples);
  aero::WakeState xi = aero::WakeState::zero(model);
  double initial = aero::evaluate_output(model, xi.lag_states, y1).per_strip_lift.sum() / lift;
  double final_value = initial;
  {
    auto f = art.open("wagner.csv");
    csv::Writer w(f, {"semichords", "lift_ratio", "wagner"},
                  {"lift after a step in angle of attack over the settled lift"});
    w.row({0.0, initial, a.wagner.phi(0.0)});
    for (std::size_t k = 1; k <= a.samples; ++k) {
      const aero::StepResult r = aero::aero_step(model, xi, y1, dt);
      xi = r.xi;
      final_value = r.y2.per_strip_lift.sum() / lift;
      const double s = static_cast<double>(k) * dt * a.airspeed / semichord;
      w.row({s, final_value, a.wagner.phi(s)});
    }
  }
  return {{"lift_coefficient", cl},
          {"lift_coefficient_theory", cl_theory},
          {"lift_coefficient_error", std::abs(cl - cl_theory) / std::abs(cl_theory)},
          {"response_initial", initial},
          {"response_final", final_value},
          {"response_final_semichords", a.step_semichords}};
}

// --- structure-march -----------------------------------------------------

wing::Wing march_wing(const config::ScenarioConfig& cfg) {
  if (cfg.march.slots.empty()) return wing::build_wing(cfg.wing, cfg.primer);
  std::vector<structure::PrimerSlot> slots;
  const double gain = wing::primer_gain(cfg.primer);
  for (std::size_t e : cfg.march.slots) slots.push_back(wing::slot_on(cfg.wing, e, gain));
  return wing::build_wing(cfg.wing, slots);
}

double profile_command(const config::MarchSettings& m, double t) {
  if (m.profile == "sine") return m.command * 0.5 * (1.0 - std::cos(2.0 * kPi * m.frequency * t));
  if (m.profile == "ramp") return m.command * std::min(1.0, t / m.duration);
  return m.command;
}

ordered_json run_march(const config::ScenarioConfig& cfg, Artifacts& art) {
  const auto& m = cfg.march;
  const wing::Wing wing = march_wing(cfg);
  const auto slots = static_cast<Eigen::Index>(wing.structure.primer_slots.size());
  const auto steps = static_cast<std::size_t>(std::llround(m.duration / m.dt));

  // Primer displacement held over each step.
  std::vector<double> disp(steps + 1);
  primer::PrimerState ps;
  for (std::size_t k = 0; k <= steps; ++k) {
    disp[k] = ps.displacement;
    ps = primer::step_dynamics(ps, profile_command(m, static_cast<double>(k) * m.dt), m.dt, cfg.primer);
  }
  const auto schedule = [&](double t) {
    const auto k = std::min<std::size_t>(steps, static_cast<std::size_t>(std::llround(t / m.dt)));
    return VecX::Constant(slots, disp[k]);
  };
  structure::MarchOptions opts;
  opts.sample_every = m.sample_every;
  const structure::Trajectory traj = structure::march(wing.structure, schedule, m.duration, m.dt, opts);

  double peak = 0.0;
  {
    auto f = art.open("trajectory.csv");
    csv::Writer w(f, {"time", "command_mm", "displacement_mm", "elbow_angle_deg", "tip_x", "tip_y", "tip_z"},
                  {"structure march: time in s, primer in mm, tip position in m"});
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      const double angle = rad2deg(wing::elbow_angle(wing, traj.states[k]));
      peak = std::abs(angle) > std::abs(peak) ? angle : peak;
      const Vec3 tip = wing::tip_position(wing, traj.states[k]);
      w.row({traj.times[k], profile_command(m, traj.times[k]), traj.commands[k](0), angle, tip(0), tip(1), tip(2)});
    }
  }
  {
    auto f = art.open("sensitivity.csv");
    csv::Writer w(f, {"displacement_mm", "elbow_angle_deg"}, {"static elbow angle per primer displacement"});
    for (double d : m.sensitivity_points) {
      VecX omega = VecX::Zero(slots);
      omega(0) = d;
      w.row({d, rad2deg(wing::elbow_angle(wing, wing.structure.steady_state(omega)))});
    }
  }
  const double sensitivity = wing::measure_elbow_sensitivity(wing, m.sensitivity_points);
  const double final_angle = rad2deg(wing::elbow_angle(wing, traj.states.back()));
  return {{"elbow_sensitivity_deg_per_mm", sensitivity},
          {"elbow_shift_at_stroke_max_deg", primer::elbow_angle_shift(cfg.primer.stroke_max, sensitivity)},
          {"final_elbow_angle_deg", final_angle},
          {"peak_elbow_angle_deg", peak},
          {"natural_frequency_hz", wing.structure.natural_frequencies()(0) / (2.0 * kPi)}};
}

// --- rg-analysis ---------------------------------------------------------

ordered_json run_governor(const config::ScenarioConfig& cfg, Artifacts& art) {
  const auto& g = cfg.governor;
  const wing::Wing wing = wing::build_wing(cfg.wing, cfg.primer);
  rgov::PrestabilizerGains gains = rgov::PrestabilizerGains::from_gait(cfg.flight.gait.frequency, g.zeta);
  gains.channels = g.channels;
  rgov::RGModel rg = rgov::prestabilize(wing.structure, gains);

  const aero::StripGeometry strips = wing::wing_strips(cfg.wing, cfg.aero.aspect_ratio, cfg.aero.strips);
  aero::AeroModel model = aero::with_input_map(
      aero::build_aero_model(strips, {}, cfg.aero.airspeed, cfg.aero.air_density, cfg.aero.wagner),
      wing::aero_input_map(wing, strips, cfg.aero.airspeed));
  // Extra monitored row after the wrench and strip lifts: the elbow angle
  // (rad), which the in-plane primer drives directly.
  const Eigen::Index rows = model.c_xi.rows();
  model.c_xi.conservativeResize(rows + 1, Eigen::NoChange);
  model.c_xi.row(rows).setZero();
  model.d_xi.conservativeResize(rows + 1, Eigen::NoChange);
  model.d_xi.row(rows) = wing::elbow_selector(wing);
  const auto outputs = static_cast<Eigen::Index>(model.output_dim());
  for (const auto& cs : g.constraints) {
    if (static_cast<Eigen::Index>(cs.output) >= outputs) {
      throw ConfigError("governor constraint output " + std::to_string(cs.output) + " exceeds the " +
                        std::to_string(outputs) + " monitored outputs");
    }
    rgov::Constraint c;
    c.c = VecX::Zero(outputs);
    c.c(static_cast<Eigen::Index>(cs.output)) = cs.coefficient;
    c.bound = cs.bound;
    rg.y2_constraints.push_back(c);
  }

  // Coupled structure and wake, omega held between governor updates.
  const auto ny = static_cast<Eigen::Index>(rg.state_dim());
  const auto nx = static_cast<Eigen::Index>(model.state_dim());
  const auto nu = static_cast<Eigen::Index>(rg.input_dim());
  MatX a = MatX::Zero(ny + nx, ny + nx);
  a.topLeftCorner(ny, ny) = rg.a_y;
  a.bottomLeftCorner(nx, ny) = model.b_xi;
  a.bottomRightCorner(nx, nx) = model.a_xi;
  MatX b = MatX::Zero(ny + nx, nu);
  b.topRows(ny) = rg.b_y;
  const Discretization d = discretize(a, b, g.dt);

  const VecX requested = VecX::Constant(nu, g.requested);
  VecX z = VecX::Zero(ny + nx);
  const auto per_update = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(g.update / g.dt)));
  const auto steps = static_cast<std::size_t>(std::llround(g.duration / g.dt));

  std::vector<std::string> header{"time", "requested_mm", "admitted_mm", "lambda", "elbow_angle_deg"};
  for (std::size_t i = 0; i < g.constraints.size(); ++i) header.push_back("constraint_" + std::to_string(i));
  auto f = art.open("governor.csv");
  csv::Writer w(f, header, {"reference governor history: constraint columns are c.y2 (bound in summary)"});

  rgov::GovernResult gr;
  double worst = -std::numeric_limits<double>::infinity();
  double lambda_min = 1.0;
  bool feasible = true;
  for (std::size_t k = 0; k <= steps; ++k) {
    const VecX y = z.head(ny);
    const VecX xi = z.tail(nx);
    if (k % per_update == 0) {
      gr = rgov::govern(rg, requested, y, model, g.options, xi);
      feasible = feasible && gr.feasible;
      lambda_min = std::min(lambda_min, gr.lambda);
    }
    const VecX y2 = model.c_xi * xi + model.d_xi * y;
    std::vector<double> cvals;
    for (const auto& c : rg.y2_constraints) {
      const double v = c.c.dot(y2);
      cvals.push_back(v);
      worst = std::max(worst, v - c.bound);
    }
    if (k % g.sample_every == 0) {
      std::vector<double> row{static_cast<double>(k) * g.dt, g.requested, gr.omega(0), gr.lambda,
                              rad2deg(wing::elbow_angle(wing, y))};
      row.insert(row.end(), cvals.begin(), cvals.end());
      w.row(row);
    }
    if (k < steps) z = d.phi * z + d.gamma * gr.omega;
  }

  const VecX locus1 = rgov::equilibrium_locus(rg, requested);
  const VecX locus2 = rgov::equilibrium_locus(rg, 2.0 * requested);
  const double scale = std::max(locus2.norm(), 1e-300);
  return {{"requested_mm", g.requested},
          {"final_admitted_mm", gr.omega(0)},
          {"min_lambda", lambda_min},
          {"max_constraint_excess", rg.y2_constraints.empty() ? 0.0 : worst},
          {"feasible", feasible},
          {"locus_linearity_residual", (locus2 - 2.0 * locus1).norm() / scale},
          {"spectral_abscissa", spectral_abscissa(rg.a_y)}};
}

// --- placement-optimize --------------------------------------------------

ordered_json run_placement(const config::ScenarioConfig& cfg, Artifacts& art) {
  const placement::PlacementProblem problem = placement_problem(cfg);
  const placement::PlacementSolution s = placement::optimize_placement(problem);
  write_placement(s, problem, art);
  ordered_json out{{"objective", s.objective},
                   {"slots", s.chosen_slots},
                   {"pc_residual_deg", vec_json(s.pc_residual * (180.0 / kPi))},
                   {"flags", s.flags}};
  if (cfg.placement.verify) {
    const placement::PlacementSolution bf = placement::brute_force_placement(problem);
    out["brute_force_objective"] = bf.objective;
    out["brute_force_slots"] = bf.chosen_slots;
    out["relative_gap"] = std::abs(s.objective - bf.objective) / std::max(1.0, std::abs(bf.objective));
  }
  return out;
}

// --- closed-loop-sim -----------------------------------------------------

ordered_json flight_summary(const flightsim::SimOutput& out, const flightsim::SimConfig& sim) {
  const flightsim::SimSummary s = flightsim::summarize(out, sim.controller.pitch_ref, deg2rad(5.0));
  return {{"settling_time_s", s.settling_time},
          {"max_pitch_error_deg", rad2deg(s.max_pitch_error)},
          {"command_min_mm", s.command_min},
          {"command_max_mm", s.command_max},
          {"bounded", s.bounded},
          {"saturated", out.saturated},
          {"trim_command_mm", out.trim_command},
          {"trim_incidence_deg", rad2deg(out.trim_incidence)},
          {"drag_area_m2", out.drag_area},
          {"samples", out.size()}};
}

}  // namespace

std::vector<std::string> combined_header() {
  std::vector<std::string> h{"time"};
  for (const auto& p : panels()) h.insert(h.end(), p.channels.begin(), p.channels.end());
  return h;
}

std::vector<std::string> emit_report(const flightsim::SimOutput& out, const fs::path& dir) {
  if (out.size() == 0) throw NumericalError("no samples");
  Artifacts art(dir);
  return write_flight(out, art);
}

std::vector<std::string> emit_report(const placement::PlacementSolution& solution,
                                     const placement::PlacementProblem& problem, const fs::path& dir) {
  Artifacts art(dir);
  return write_placement(solution, problem, art);
}

placement::PlacementProblem placement_problem(const config::ScenarioConfig& cfg) {
  const auto& ps = cfg.placement;
  const wing::Wing wing = wing::build_wing(cfg.wing, std::vector<structure::PrimerSlot>{});
  placement::PlacementProblem p;
  p.structure = wing.structure;
  const auto all = wing::candidate_slots(cfg.wing, wing::primer_gain(cfg.primer));
  if (ps.candidates.empty()) {
    p.candidate_slots = all;
  } else {
    for (std::size_t e : ps.candidates) p.candidate_slots.push_back(all.at(e));
  }
  p.tip_node = wing.tip_node;
  p.gait = ps.gait;
  p.budget = ps.budget;
  p.options = ps.options;
  p.options.seed = cfg.seed;
  if (ps.aero_coupled) {
    const aero::StripGeometry strips = wing::wing_strips(cfg.wing, cfg.aero.aspect_ratio, cfg.aero.strips);
    p.aero = aero::with_input_map(
        aero::build_aero_model(strips, {}, cfg.aero.airspeed, cfg.aero.air_density, cfg.aero.wagner),
        wing::aero_input_map(wing, strips, cfg.aero.airspeed));
  }

  p.v_desired = {Vec3::UnitX()};  // placeholder for the baseline evaluation
  const auto coeffs = static_cast<Eigen::Index>(1 + 2 * p.options.harmonics);
  const placement::Evaluation base = placement::evaluate_placement(p, {0}, MatX::Zero(coeffs, 1));
  const Mat3& v = base.pcs.vectors;
  p.v_desired.clear();
  for (const auto& d : ps.desired) {
    if (d.vector.norm() > 0.0) {
      p.v_desired.push_back(d.vector.normalized());
    } else {
      p.v_desired.push_back(placement::rotate_about(v.col(static_cast<Eigen::Index>(d.component - 1)),
                                                    v.col(static_cast<Eigen::Index>(d.axis - 1)), d.angle));
    }
  }
  return p;
}

RunResult run_scenario(const config::ScenarioConfig& cfg, const fs::path& dir) {
  Artifacts art(dir);
  art.text("config.normalized.yaml", config::emit(cfg));

  ordered_json summary{{"kind", std::string(config::kind_name(cfg.kind))}, {"seed", cfg.seed}};
  const auto finish = [&](const std::string& status, ordered_json metrics, const std::string& message = {}) {
    summary["status"] = status;
    if (!message.empty()) summary["message"] = message;
    summary["metrics"] = std::move(metrics);
    std::vector<std::string> files = art.names();
    files.push_back("summary.json");
    summary["artifacts"] = files;
    art.text("summary.json", summary.dump(2) + "\n");
  };

  switch (cfg.kind) {
    case config::ScenarioKind::aero_validate: finish("ok", run_aero(cfg, art)); break;
    case config::ScenarioKind::structure_march: finish("ok", run_march(cfg, art)); break;
    case config::ScenarioKind::rg_analysis: finish("ok", run_governor(cfg, art)); break;
    case config::ScenarioKind::placement_optimize: finish("ok", run_placement(cfg, art)); break;
    case config::ScenarioKind::closed_loop_sim: {
      const flightsim::SimConfig sim = cfg.flight_config();
      try {
        const flightsim::SimOutput out = flightsim::simulate(sim);
        write_flight(out, art);
        finish("ok", flight_summary(out, sim));
      } catch (const flightsim::SimulationDiverged& e) {
        ordered_json metrics = ordered_json::object();
        if (e.partial().size() > 0) {
          write_flight(e.partial(), art);
          metrics = flight_summary(e.partial(), sim);
        }
        finish("diverged", metrics, e.what());
        throw;
      }
      break;
    }
  }
  return {art.dir(), art.names()};
}

int exit_code(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return static_cast<int>(err->category());
  return static_cast<int>(ErrorCategory::numerical);
}

}  // namespace morphwing::scenario
