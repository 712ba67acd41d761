#include "morphwing/flightsim.hpp"

#include "morphwing/linear_system.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>

namespace morphwing::flightsim {

namespace {

constexpr std::size_t kBody = 2;
const std::vector<std::size_t> kActive{kFlapL, kElbowL, kFlapR, kElbowR};
const std::vector<std::size_t> kBaseAndActive{kX, kZ, kPitch, kFlapL, kElbowL, kFlapR, kElbowR};

Vec3 gravity_vector(bool on) { return on ? Vec3(0.0, 0.0, -kGravity) : Vec3::Zero(); }

multibody::Link wing_link(const std::string& name, int parent, const Vec3& axis, const Vec3& origin,
                          const LinkSpec& spec, double side) {
  multibody::Link l;
  l.name = name;
  l.parent = parent;
  l.axis = axis;
  l.origin = origin;
  l.mass = spec.mass;
  l.com = Vec3(0.0, side * 0.5 * spec.length, 0.0);
  const double ll = spec.length * spec.length;
  const double cc = spec.chord * spec.chord;
  l.inertia = (spec.mass / 12.0 * Vec3(ll, cc, ll + cc)).asDiagonal();
  return l;
}

struct Strip {
  std::size_t link = 0;
  Vec3 point = Vec3::Zero();  // link frame
  double side = 1.0;
  double chord = 0.0;
  double width = 0.0;
};

struct Geometry {
  std::vector<Strip> strips;  // tip to tip (right tip first)
  aero::StripGeometry strip_geometry;
  MatX coupling;
};

Geometry make_geometry(const RobotParams& p) {
  Geometry g;
  struct Segment {
    std::size_t left, right;
    const LinkSpec* spec;
    double root;  // spanwise station of the segment root
  };
  const double y0 = p.shoulder.y();
  const std::vector<Segment> segments{
      {kFlapL, kFlapR, &p.arm, y0},
      {kElbowL, kElbowR, &p.forearm, y0 + p.arm.length},
      {kWristL, kWristR, &p.hand, y0 + p.arm.length + p.forearm.length}};
  std::vector<std::pair<double, Strip>> all;
  for (const Segment& seg : segments) {
    const double w = seg.spec->length / static_cast<double>(seg.spec->strips);
    for (std::size_t j = 0; j < seg.spec->strips; ++j) {
      const double local = w * (static_cast<double>(j) + 0.5);
      for (double side : {1.0, -1.0}) {
        Strip s;
        s.link = side > 0.0 ? seg.left : seg.right;
        s.point = Vec3(0.0, side * local, 0.0);
        s.side = side;
        s.chord = seg.spec->chord;
        s.width = w;
        all.emplace_back(side * (seg.root + local), s);
      }
    }
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  aero::StripGeometry& sg = g.strip_geometry;
  sg.span = 2.0 * (y0 + p.arm.length + p.forearm.length + p.hand.length);
  for (const auto& [station, s] : all) {
    g.strips.push_back(s);
    sg.span_stations.push_back(station);
    sg.chord.push_back(s.chord);
    sg.area.push_back(s.chord * s.width);
    aero::StationFrame f;
    f.position = Vec3(0.0, station, 0.0);
    sg.station_frames.push_back(f);
  }
  sg.validate();
  g.coupling = aero::lifting_line_coupling(sg);
  return g;
}

/// Per-strip flow quantities at one configuration.
struct StripFlow {
  Vec3 point;            // world
  Vec3 lift_direction;   // world, unit
  double alpha = 0.0;    // rad
  double speed = 0.0;    // m/s, normal to span
};

StripFlow strip_flow(const multibody::Tree& tree, const multibody::Kinematics& k, const Strip& s,
                     double incidence) {
  const Mat3& r = k.rotation[s.link];
  StripFlow f;
  f.point = k.position[s.link] + r * s.point;
  const Vec3 v = tree.point_velocity(k, s.link, f.point);
  const Vec3 chord = r.col(0);
  const Vec3 normal = r.col(2);
  const Vec3 span = r.col(1);
  const Vec3 vp = v - v.dot(span) * span;
  f.speed = vp.norm();
  f.alpha = std::atan2(-vp.dot(normal), vp.dot(chord)) + incidence;
  Vec3 lift = normal;
  if (f.speed > 1e-9) {
    const Vec3 w = vp / f.speed;
    lift -= normal.dot(w) * w;
  }
  const double n = lift.norm();
  f.lift_direction = n > 1e-12 ? Vec3(lift / n) : normal;
  return f;
}

VecX wrench_forces(const multibody::Tree& tree, const multibody::Kinematics& k, const Vec3& force,
                   const Vec3& moment) {
  return tree.point_force(k, kBody, k.position[kBody], force) +
         tree.angular_jacobian(k, kBody).transpose() * moment;
}

/// Quadratic extrapolation of the primer-driven elbow shift over a step.
struct ElbowShift {
  double value = 0.0, rate = 0.0, accel = 0.0;
  double at(double tau) const { return value + rate * tau + 0.5 * accel * tau * tau; }
  double rate_at(double tau) const { return rate + accel * tau; }
};

struct PeriodMean {
  Vec3 load = Vec3::Zero();
  double elbow = 0.0;
};

class Simulator {
 public:
  explicit Simulator(const SimConfig& cfg)
      : cfg_(cfg),
        tree_(build_tree(cfg.robot)),
        geo_(make_geometry(cfg.robot)),
        gait_(gait::make_gait(cfg.gait)),
        wing_(wing::build_wing(cfg.wing, cfg.primer)) {
    const auto& st = wing_.structure;
    disc_ = discretize(st.a_blocks, st.b_blocks, cfg.dt);
    const Eigen::RowVectorXd sel = wing::elbow_selector(wing_);
    const Eigen::Index n = static_cast<Eigen::Index>(st.dof_count());
    angle_sel_ = sel;
    rate_sel_ = Eigen::RowVectorXd::Zero(2 * n);
    rate_sel_.tail(n) = sel.head(n);
    control_interval_ = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(1.0 / (cfg.controller.rate * cfg.dt))));
    filter_size_ = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(cfg.controller.rate / cfg.gait.frequency)));
  }

  struct State {
    double t = 0.0;  // absolute time (gait phase)
    VecX q, qd;
    VecX xi;
    primer::PrimerState primer;
    VecX structure;
    double command = 0.0;
    std::deque<double> pitch_window, rate_window;
  };

  State initial(double command, double pitch = 0.0) const {
    State s;
    s.q = VecX::Zero(kCoordinates);
    s.qd = VecX::Zero(kCoordinates);
    const VecX qa = gait_.position(0.0);
    const VecX va = gait_.velocity(0.0);
    s.qd(kX) = cfg_.aero.airspeed;
    s.q(kPitch) = pitch;
    s.command = std::clamp(command, 0.0, cfg_.primer.stroke_max);
    s.primer.command = s.command;
    s.primer.displacement = s.command;
    s.primer.activation = s.command / cfg_.primer.stroke_max;
    s.structure = wing_.structure.steady_state(omega(s.primer));
    const double shift = cfg_.gearing * angle_sel_.dot(s.structure);
    for (std::size_t c = 0; c < gait::kChannels; ++c) {
      const auto ci = static_cast<Eigen::Index>(c);
      s.q(static_cast<Eigen::Index>(kActive[c])) = qa(ci) + (is_elbow(c) ? shift : 0.0);
      s.qd(static_cast<Eigen::Index>(kActive[c])) = va(ci);
    }
    if (cfg_.aero.enabled) {
      const Flow f = flow(s.q, s.qd);
      const aero::AeroModel m = model(f);
      // Start the wake settled for the initial angles.
      s.xi = -Eigen::PartialPivLU<MatX>(m.a_xi).solve(m.b_xi * f.alpha);
    }
    return s;
  }

  /// One fixed step. Returns the sampled outputs at the step start.
  struct Sample {
    Vec6 wrench = Vec6::Zero();
    Vec3 base_load = Vec3::Zero();  // net generalized load on x, z, pitch (captive)
    double shift = 0.0;
    double y1 = 0.0;
  };

  Sample step(State& s, bool captive) const {
    const double dt = cfg_.dt;
    Sample out;

    // Aerodynamic block frozen at the step start.
    std::optional<aero::AeroModel> m;
    Flow f0;
    if (cfg_.aero.enabled) {
      f0 = flow(s.q, s.qd);
      m = model(f0);
      out.wrench = aero::evaluate_output(*m, s.xi, f0.alpha).wrench;
    }

    // Primer-driven elbow shift from the structure state.
    const VecX w = omega(s.primer);
    ElbowShift shift;
    shift.value = cfg_.gearing * angle_sel_.dot(s.structure);
    shift.rate = cfg_.gearing * rate_sel_.dot(s.structure);
    out.shift = shift.value;

    const auto deriv = [&](double tau, const VecX& q, const VecX& qd, Vec3* load) {
      return accelerations(s.t + tau, q, qd, m ? &*m : nullptr, s.xi, shift, tau, captive, load);
    };

    // Classic RK4 on (q, q').
    Vec3 load;
    const VecX a1 = deriv(0.0, s.q, s.qd, &load);
    out.base_load = load;
    const VecX q2 = s.q + 0.5 * dt * s.qd, v2 = s.qd + 0.5 * dt * a1;
    const VecX a2 = deriv(0.5 * dt, q2, v2, nullptr);
    const VecX q3 = s.q + 0.5 * dt * v2, v3 = s.qd + 0.5 * dt * a2;
    const VecX a3 = deriv(0.5 * dt, q3, v3, nullptr);
    const VecX q4 = s.q + dt * v3, v4 = s.qd + dt * a3;
    const VecX a4 = deriv(dt, q4, v4, nullptr);

    VecX ref_err = VecX::Zero(gait::kChannels);
    const VecX qa_ref = gait_.position(s.t);
    for (std::size_t c = 0; c < gait::kChannels; ++c) {
      const auto ci = static_cast<Eigen::Index>(c);
      ref_err(ci) = s.q(static_cast<Eigen::Index>(kActive[c])) - qa_ref(ci) -
                    (is_elbow(c) ? shift.value : 0.0);
    }
    out.y1 = ref_err.norm();

    s.q += dt / 6.0 * (s.qd + 2.0 * v2 + 2.0 * v3 + v4);
    s.qd += dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    if (m) s.xi = aero::aero_step(*m, aero::WakeState{s.xi, m->n_lag}, f0.alpha, dt).xi.lag_states;
    s.structure = disc_.phi * s.structure + disc_.gamma * w;
    s.primer = primer::step_dynamics(s.primer, s.command, dt, cfg_.primer);
    s.t += dt;
    return out;
  }

  /// Mean net base load and left elbow angle over one period after `warmup`.
  PeriodMean captive_mean(double command, double warmup, double pitch = 0.0) const {
    State s = initial(command, pitch);
    run_captive(s, warmup);
    const auto steps = period_steps();
    PeriodMean pm;
    for (std::size_t i = 0; i < steps; ++i) {
      pm.elbow += s.q(kElbowL);
      pm.load += step(s, true).base_load;
    }
    pm.load /= static_cast<double>(steps);
    pm.elbow /= static_cast<double>(steps);
    return pm;
  }

  /// Mean pitch acceleration over the second gait period after release
  /// from a captive warm-up at `command`.
  double released_pitch_acceleration(double command) const {
    State s = initial(command);
    run_captive(s, cfg_.warmup);
    const auto steps = period_steps();
    for (std::size_t i = 0; i < steps; ++i) step(s, false);
    const double r0 = s.qd(kPitch);
    for (std::size_t i = 0; i < steps; ++i) step(s, false);
    return (s.qd(kPitch) - r0) * cfg_.gait.frequency;
  }

  void run_captive(State& s, double duration) const {
    const auto n = static_cast<std::size_t>(std::lround(duration / cfg_.dt));
    for (std::size_t i = 0; i < n; ++i) step(s, true);
  }

  std::size_t period_steps() const {
    return static_cast<std::size_t>(std::lround(1.0 / (cfg_.gait.frequency * cfg_.dt)));
  }

  SimOutput run(const TrimResult& trim) const {
    SimOutput out;
    out.trim_command = trim.command;
    out.trim_incidence = trim.incidence;
    out.drag_area = trim.drag_area;

    State s = initial(trim.command);
    run_captive(s, cfg_.warmup);
    const double t0 = s.t;
    s.q(kPitch) += cfg_.initial_pitch_error;

    PitchGains gains = cfg_.controller.gains;
    gains.trim = trim.command;
    gains.sign = trim.sign;
    gains.stroke_max = cfg_.primer.stroke_max;
    s.pitch_window.assign(filter_size_, s.q(kPitch));
    s.rate_window.assign(filter_size_, s.qd(kPitch));

    std::optional<rgov::RGModel> rg;
    aero::AeroModel rg_aero;
    if (cfg_.controller.governor) {
      rg = rgov::prestabilize(wing_.structure, rgov::PrestabilizerGains::from_gait(cfg_.gait.frequency));
      rg->y2_constraints = cfg_.controller.governor_constraints;
      const aero::StripGeometry strips = wing::wing_strips(cfg_.wing, 6.0, 8);
      rg_aero = aero::with_input_map(
          aero::build_aero_model(strips, {}, cfg_.aero.airspeed, cfg_.aero.air_density, cfg_.aero.wagner),
          wing::aero_input_map(wing_, strips, cfg_.aero.airspeed));
    }

    const auto steps = static_cast<std::size_t>(std::lround(cfg_.duration / cfg_.dt));
    FullState last_good = from_coordinates(s.q, s.qd);
    for (std::size_t n = 0; n <= steps; ++n) {
      if (n % control_interval_ == 0 && cfg_.controller.closed_loop) {
        FullState meas = from_coordinates(s.q, s.qd);
        if (cfg_.controller.period_filter) {
          s.pitch_window.pop_front();
          s.pitch_window.push_back(s.q(kPitch));
          s.rate_window.pop_front();
          s.rate_window.push_back(s.qd(kPitch));
          meas.pitch = mean(s.pitch_window);
          meas.pitch_rate = mean(s.rate_window);
        }
        const PitchCommand pc = pitch_controller(meas, cfg_.controller.pitch_ref, gains);
        out.saturated = out.saturated || pc.saturated;
        double cmd = pc.command;
        if (rg) {
          VecX req(1);
          req(0) = cmd;
          cmd = rgov::govern(*rg, req, s.structure, rg_aero).omega(0);
        }
        s.command = cmd;
      }
      const bool record = n % cfg_.sample_every == 0;
      const VecX q_before = s.q, qd_before = s.qd;
      const double t_rel = s.t - t0;
      const double cmd = s.command, disp = s.primer.displacement;
      if (n == steps) {
        if (record) push(out, t_rel, q_before, qd_before, Sample{}, cmd, disp, true, s);
        break;
      }
      Sample smp;
      try {
        smp = step(s, false);
      } catch (const NumericalError& e) {
        throw SimulationDiverged(e.what(), out, last_good);
      }
      if (record) push(out, t_rel, q_before, qd_before, smp, cmd, disp, false, s);
      if (!s.q.allFinite() || !s.qd.allFinite() ||
          std::abs(s.q(kPitch) - cfg_.controller.pitch_ref) > cfg_.pitch_limit ||
          s.q.norm() + s.qd.norm() > cfg_.state_bound) {
        throw SimulationDiverged("simulation diverged at t = " + std::to_string(s.t - t0) + " s", out,
                                 last_good);
      }
      last_good = from_coordinates(s.q, s.qd);
    }
    return out;
  }

  const gait::GaitReference& gait() const { return gait_; }

 private:
  struct Flow {
    Vec3 body = Vec3::Zero();
    std::vector<StripFlow> strips;
    VecX alpha;
  };

  static bool is_elbow(std::size_t channel) {
    return channel == gait::elbow_left || channel == gait::elbow_right;
  }

  static double mean(const std::deque<double>& d) {
    double acc = 0.0;
    for (double v : d) acc += v;
    return acc / static_cast<double>(d.size());
  }

  VecX omega(const primer::PrimerState& p) const {
    return VecX::Constant(static_cast<Eigen::Index>(wing_.structure.primer_slots.size()), p.displacement);
  }

  Flow flow(const VecX& q, const VecX& qd) const {
    const multibody::Kinematics k = tree_.kinematics(q, qd);
    Flow f;
    f.body = k.position[kBody];
    f.alpha.resize(static_cast<Eigen::Index>(geo_.strips.size()));
    for (std::size_t i = 0; i < geo_.strips.size(); ++i) {
      f.strips.push_back(strip_flow(tree_, k, geo_.strips[i], cfg_.robot.incidence));
      f.alpha(static_cast<Eigen::Index>(i)) = f.strips.back().alpha;
    }
    return f;
  }

  aero::AeroModel model(const Flow& f) const {
    aero::KinematicSnapshot snap(f.strips.size());
    const double floor = 0.05 * cfg_.aero.airspeed;
    for (std::size_t i = 0; i < f.strips.size(); ++i) {
      snap[i].position = f.strips[i].point - f.body;
      snap[i].lift_direction = f.strips[i].lift_direction;
      snap[i].flow_speed = std::max(f.strips[i].speed, floor);
    }
    return aero::build_aero_model(geo_.strip_geometry, geo_.coupling, snap, cfg_.aero.airspeed,
                                  cfg_.aero.air_density, cfg_.aero.wagner);
  }

  VecX accelerations(double t, const VecX& q, const VecX& qd, const aero::AeroModel* m,
                     const VecX& xi, const ElbowShift& shift, double tau, bool captive,
                     Vec3* load) const {
    const multibody::Kinematics k = tree_.kinematics(q, qd);
    VecX forces = VecX::Zero(kCoordinates);
    const auto n = static_cast<Eigen::Index>(geo_.strips.size());
    if (m) {
      VecX alpha(n);
      std::vector<StripFlow> fl;
      fl.reserve(geo_.strips.size());
      for (std::size_t i = 0; i < geo_.strips.size(); ++i) {
        fl.push_back(strip_flow(tree_, k, geo_.strips[i], cfg_.robot.incidence));
        alpha(static_cast<Eigen::Index>(i)) = fl.back().alpha;
      }
      const VecX lift = m->c_xi.bottomRows(n) * xi + m->d_xi.bottomRows(n) * alpha;
      for (std::size_t i = 0; i < geo_.strips.size(); ++i) {
        forces += tree_.point_force(k, geo_.strips[i].link, fl[i].point,
                                    lift(static_cast<Eigen::Index>(i)) * fl[i].lift_direction);
      }
    }
    const Vec3 com = tree_.com_position(k, kBody);
    if (cfg_.robot.body_drag_area > 0.0) {
      const Vec3 vc = tree_.point_velocity(k, kBody, com);
      const Vec3 drag = -0.5 * cfg_.aero.air_density * cfg_.robot.body_drag_area * vc.norm() * vc;
      forces += tree_.point_force(k, kBody, com, drag);
    }
    if (!cfg_.stabilizer_wrench.isZero(0.0)) {
      forces += wrench_forces(tree_, k, cfg_.stabilizer_wrench.head<3>(), cfg_.stabilizer_wrench.tail<3>());
    }
    const MatX mass = tree_.mass_matrix(k);
    const VecX bias = tree_.bias(k, q, qd, gravity_vector(cfg_.gravity));

    const VecX pos = gait_.position(t), vel = gait_.velocity(t), acc = gait_.acceleration(t);
    const std::vector<std::size_t>& prescribed = captive ? kBaseAndActive : kActive;
    VecX target = VecX::Zero(static_cast<Eigen::Index>(prescribed.size()));
    const Eigen::Index off = captive ? 3 : 0;
    for (std::size_t c = 0; c < gait::kChannels; ++c) {
      const auto ci = static_cast<Eigen::Index>(c);
      const auto qi = static_cast<Eigen::Index>(kActive[c]);
      const bool e = is_elbow(c);
      const double r = pos(ci) + (e ? shift.at(tau) : 0.0);
      const double rv = vel(ci) + (e ? shift.rate_at(tau) : 0.0);
      const double ra = acc(ci) + (e ? shift.accel : 0.0);
      target(off + ci) = ra + cfg_.joints.kd * (rv - qd(qi)) + cfg_.joints.kp * (r - q(qi));
    }
    const multibody::PartialSolution sol =
        multibody::solve_prescribed(mass, bias, forces, prescribed, target);
    if (load) *load = captive ? Vec3(-sol.required.head<3>()) : Vec3::Zero();
    return sol.qdd;
  }

  void push(SimOutput& out, double t, const VecX& q, const VecX& qd, const Sample& smp, double cmd,
            double disp, bool last, const State& s) const {
    out.time.push_back(t);
    out.body_velocity.emplace_back(qd(kX), 0.0, qd(kZ));
    out.pitch.push_back(q(kPitch));
    out.pitch_rate.push_back(qd(kPitch));
    Vec6 w = smp.wrench;
    double shift = smp.shift;
    double y1 = smp.y1;
    if (last) {
      // Terminal sample: evaluate outputs without stepping.
      if (cfg_.aero.enabled) {
        const Flow f = flow(q, qd);
        w = aero::evaluate_output(model(f), s.xi, f.alpha).wrench;
      }
      shift = cfg_.gearing * angle_sel_.dot(s.structure);
      const VecX qa_ref = gait_.position(s.t);
      VecX e(gait::kChannels);
      for (std::size_t c = 0; c < gait::kChannels; ++c) {
        const auto ci = static_cast<Eigen::Index>(c);
        e(ci) = q(static_cast<Eigen::Index>(kActive[c])) - qa_ref(ci) - (is_elbow(c) ? shift : 0.0);
      }
      y1 = e.norm();
    }
    out.wrench.push_back(w);
    out.joints.push_back(q.tail(6));
    out.primer.emplace_back(cmd, disp, shift);
    out.zero_dynamics.push_back(y1);
  }

  SimConfig cfg_;
  multibody::Tree tree_;
  Geometry geo_;
  gait::GaitReference gait_;
  wing::Wing wing_;
  Discretization disc_;
  Eigen::RowVectorXd angle_sel_, rate_sel_;
  std::size_t control_interval_ = 100;
  std::size_t filter_size_ = 10;
};

TrimResult fixed_trim(const SimConfig& cfg) {
  TrimResult t;
  t.command = cfg.controller.gains.trim;
  t.incidence = cfg.robot.incidence;
  t.drag_area = cfg.robot.body_drag_area;
  t.sign = cfg.controller.gains.sign;
  return t;
}

}  // namespace

void RobotParams::validate() const {
  if (!(body_mass > 0.0)) throw ConfigError("body mass must be positive");
  if (!(body_inertia.minCoeff() > 0.0)) throw ConfigError("body inertia must be positive definite");
  for (const LinkSpec* l : {&arm, &forearm, &hand}) {
    if (!(l->length > 0.0)) throw ConfigError("length must be positive");
    if (!(l->chord > 0.0)) throw ConfigError("chord must be positive");
    if (!(l->mass > 0.0)) throw ConfigError("link mass must be positive");
    if (l->strips == 0) throw ConfigError("every wing link needs at least one strip");
  }
  if (!(shoulder.y() > 0.0)) throw ConfigError("shoulder must sit on the left side (y > 0)");
  if (wrist_stiffness < 0.0 || wrist_damping < 0.0) {
    throw ConfigError("wrist stiffness and damping must be non-negative");
  }
  if (body_drag_area < 0.0) throw ConfigError("drag area must be non-negative");
  if (!(flap_limit > 0.0) || !(elbow_limit > 0.0) || !(wrist_limit > 0.0)) {
    throw ConfigError("joint limits must be positive");
  }
}

void SimConfig::validate() const {
  robot.validate();
  primer.validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time step must be positive");
  if (!(duration > 0.0)) throw ConfigError("duration must be positive");
  if (warmup < 0.0) throw ConfigError("warmup must be non-negative");
  if (sample_every == 0) throw ConfigError("sample_every must be positive");
  if (!(gait.frequency > 0.0)) throw ConfigError("gait frequency must be positive");
  if (!(controller.rate > 0.0) || controller.rate * dt > 1.0) {
    throw ConfigError("controller rate must be positive and no faster than the time step");
  }
  if (aero.enabled && !(aero.airspeed > 0.0)) throw NumericalError("degenerate freestream");
  if (gearing < 0.0 || gearing > max_gearing) throw ConfigError("gearing must lie in [0, max_gearing]");
  if (!(pitch_limit > 0.0)) throw ConfigError("pitch limit must be positive");
}

multibody::Tree build_tree(const RobotParams& p) {
  p.validate();
  std::vector<multibody::Link> links(kCoordinates);
  links[kX].name = "x";
  links[kX].joint = multibody::JointType::prismatic;
  links[kX].axis = Vec3::UnitX();
  links[kZ].name = "z";
  links[kZ].parent = kX;
  links[kZ].joint = multibody::JointType::prismatic;
  links[kZ].axis = Vec3::UnitZ();
  multibody::Link& body = links[kPitch];
  body.name = "body";
  body.parent = kZ;
  body.axis = Vec3(0.0, -1.0, 0.0);  // nose up
  body.mass = p.body_mass;
  body.com = p.body_com;
  body.inertia = p.body_inertia.asDiagonal();

  const Vec3 sl = p.shoulder;
  const Vec3 sr(sl.x(), -sl.y(), sl.z());
  links[kFlapL] = wing_link("arm_left", kPitch, Vec3::UnitX(), sl, p.arm, 1.0);
  links[kElbowL] = wing_link("forearm_left", kFlapL, Vec3::UnitZ(), Vec3(0, p.arm.length, 0), p.forearm, 1.0);
  links[kFlapR] = wing_link("arm_right", kPitch, -Vec3::UnitX(), sr, p.arm, -1.0);
  links[kElbowR] = wing_link("forearm_right", kFlapR, -Vec3::UnitZ(), Vec3(0, -p.arm.length, 0), p.forearm, -1.0);
  links[kWristL] = wing_link("hand_left", kElbowL, Vec3::UnitZ(), Vec3(0, p.forearm.length, 0), p.hand, 1.0);
  links[kWristR] = wing_link("hand_right", kElbowR, -Vec3::UnitZ(), Vec3(0, -p.forearm.length, 0), p.hand, -1.0);
  for (std::size_t i : {std::size_t{kWristL}, std::size_t{kWristR}}) {
    links[i].stiffness = p.wrist_stiffness;
    links[i].damping = p.wrist_damping;
  }
  return multibody::Tree(std::move(links));
}

VecX positions(const FullState& x) {
  VecX q(kCoordinates);
  q << x.body_position.x(), x.body_position.z(), x.pitch, x.q_active, x.q_passive;
  return q;
}

VecX velocities(const FullState& x) {
  VecX v(kCoordinates);
  v << x.body_velocity.x(), x.body_velocity.z(), x.pitch_rate, x.active_rates, x.passive_rates;
  return v;
}

FullState from_coordinates(const VecX& q, const VecX& qd) {
  if (q.size() != kCoordinates || qd.size() != kCoordinates) {
    throw ConfigError("coordinate vector size mismatch");
  }
  FullState x;
  x.body_position = Vec3(q(kX), 0.0, q(kZ));
  x.body_velocity = Vec3(qd(kX), 0.0, qd(kZ));
  x.pitch = q(kPitch);
  x.pitch_rate = qd(kPitch);
  x.q_active = q.segment(kFlapL, 4);
  x.q_passive = q.segment(kWristL, 2);
  x.active_rates = qd.segment(kFlapL, 4);
  x.passive_rates = qd.segment(kWristL, 2);
  return x;
}

VecX full_dynamics(const FullState& x, const VecX& u, const aero::ForceOutput& y2,
                   const RobotParams& params, bool gravity) {
  if (u.size() != static_cast<Eigen::Index>(gait::kChannels)) {
    throw ConfigError("joint torque vector needs one entry per active joint");
  }
  const multibody::Tree tree = build_tree(params);
  const VecX q = positions(x), qd = velocities(x);
  const multibody::Kinematics k = tree.kinematics(q, qd);
  VecX forces = wrench_forces(tree, k, y2.wrench.head<3>(), y2.wrench.tail<3>());
  for (std::size_t c = 0; c < gait::kChannels; ++c) {
    forces(static_cast<Eigen::Index>(kActive[c])) += u(static_cast<Eigen::Index>(c));
  }
  const MatX m = tree.mass_matrix(k);
  Eigen::LLT<MatX> llt(m);
  if (llt.info() != Eigen::Success) throw NumericalError("singular inertia matrix");
  VecX out(2 * kCoordinates);
  out << qd, llt.solve(forces - tree.bias(k, q, qd, gravity_vector(gravity)));
  return out;
}

double total_energy(const FullState& x, const RobotParams& params, bool gravity) {
  const multibody::Tree tree = build_tree(params);
  const VecX q = positions(x);
  return tree.energy(tree.kinematics(q, velocities(x)), q, gravity_vector(gravity));
}

FullState rk4_step(const FullState& x, const VecX& u, const aero::ForceOutput& y2,
                   const RobotParams& params, double dt, bool gravity) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  const VecX z = (VecX(2 * kCoordinates) << positions(x), velocities(x)).finished();
  const auto f = [&](const VecX& s) {
    return full_dynamics(from_coordinates(s.head(kCoordinates), s.tail(kCoordinates)), u, y2, params,
                         gravity);
  };
  const VecX k1 = f(z);
  const VecX k2 = f(z + 0.5 * dt * k1);
  const VecX k3 = f(z + 0.5 * dt * k2);
  const VecX k4 = f(z + dt * k3);
  const VecX next = z + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  return from_coordinates(next.head(kCoordinates), next.tail(kCoordinates));
}

VecX gait_output(const FullState& x, const gait::GaitReference& gait, double t) {
  return x.q_active - gait.position(t);
}

PitchCommand pitch_controller(const FullState& x, double pitch_ref, const PitchGains& gains) {
  const double raw = gains.trim + gains.sign * (gains.kp * (x.pitch - pitch_ref) + gains.kd * x.pitch_rate);
  PitchCommand c;
  c.command = std::clamp(raw, 0.0, gains.stroke_max);
  c.saturated = raw < 0.0 || raw > gains.stroke_max;
  return c;
}

Vec3 captive_mean_load(const SimConfig& config, double command, double pitch) {
  config.validate();
  return Simulator(config).captive_mean(command, config.warmup, pitch).load;
}

double released_pitch_acceleration(const SimConfig& config, double command) {
  config.validate();
  return Simulator(config).released_pitch_acceleration(command);
}

double mean_elbow_angle(const SimConfig& config, double displacement_mm) {
  config.validate();
  return Simulator(config).captive_mean(displacement_mm, config.warmup).elbow;
}

TrimResult trim(const SimConfig& config) {
  config.validate();
  SimConfig cfg = config;
  TrimResult r;
  const double stroke = cfg.primer.stroke_max;
  const double q_dyn = 0.5 * cfg.aero.air_density * cfg.aero.airspeed * cfg.aero.airspeed;
  double command = cfg.controller.gains.trim;

  const auto load = [&](double c) { return captive_mean_load(cfg, c); };

  for (int pass = 0; pass < (cfg.balance_trim ? 2 : 1); ++pass) {
    if (cfg.balance_trim) {
      // Secant on incidence for zero mean vertical load.
      cfg.robot.body_drag_area = 0.0;
      double i0 = cfg.robot.incidence, i1 = i0 + 0.02;
      double f0 = load(command).y();
      for (int it = 0; it < 8; ++it) {
        cfg.robot.incidence = i1;
        const double f1 = load(command).y();
        if (std::abs(f1) < 1e-5 * kGravity * cfg.robot.total_mass() || f1 == f0) break;
        const double i2 = i1 - f1 * (i1 - i0) / (f1 - f0);
        i0 = i1;
        f0 = f1;
        i1 = std::clamp(i2, -0.5, 0.8);
      }
      cfg.robot.incidence = i1;
      const double thrust = load(command).x();
      cfg.robot.body_drag_area = std::max(0.0, thrust / q_dyn);
    }
    // Bisection on the command for zero mean pitch moment.
    double lo = 0.0, hi = stroke;
    double mlo = load(lo).z(), mhi = load(hi).z();
    r.sign = mhi > mlo ? -1.0 : 1.0;
    if (mlo * mhi > 0.0) {
      command = std::abs(mlo) < std::abs(mhi) ? lo : hi;
    } else {
      while (hi - lo > 1e-4) {
        const double mid = 0.5 * (lo + hi);
        const double mm = load(mid).z();
        if ((mm > 0.0) == (mlo > 0.0)) {
          lo = mid;
          mlo = mm;
        } else {
          hi = mid;
        }
      }
      command = 0.5 * (lo + hi);
    }
  }
  // Captive balance ignores the body's heave within a stroke; finish the
  // command bisection on the released body.
  if (cfg.free_trim) {
    const Simulator sim(cfg);
    const auto acc = [&](double c) { return sim.released_pitch_acceleration(c); };
    double lo = std::max(0.0, command - 0.2), hi = std::min(stroke, command + 0.2);
    double alo = acc(lo), ahi = acc(hi);
    if (alo * ahi > 0.0) {
      lo = 0.0;
      hi = stroke;
      alo = acc(lo);
      ahi = acc(hi);
    }
    if (alo * ahi <= 0.0) {
      while (hi - lo > 1e-4) {
        const double mid = 0.5 * (lo + hi);
        const double am = acc(mid);
        if ((am > 0.0) == (alo > 0.0)) {
          lo = mid;
          alo = am;
        } else {
          hi = mid;
        }
      }
      command = 0.5 * (lo + hi);
    }
    r.pitch_acceleration = acc(command);
  }
  r.command = command;
  r.incidence = cfg.robot.incidence;
  r.drag_area = cfg.robot.body_drag_area;
  r.residual = load(command);
  return r;
}

SimOutput simulate(const SimConfig& config) {
  config.validate();
  SimConfig cfg = config;
  TrimResult t = fixed_trim(cfg);
  if (cfg.controller.auto_trim && cfg.aero.enabled) {
    t = trim(cfg);
    cfg.robot.incidence = t.incidence;
    cfg.robot.body_drag_area = t.drag_area;
  }
  return Simulator(cfg).run(t);
}

SimSummary summarize(const SimOutput& out, double pitch_ref, double band) {
  if (out.size() == 0) throw ConfigError("no samples");
  SimSummary s;
  s.command_min = std::numeric_limits<double>::infinity();
  s.command_max = -std::numeric_limits<double>::infinity();
  double last_outside = -1.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double e = std::abs(out.pitch[i] - pitch_ref);
    s.max_pitch_error = std::max(s.max_pitch_error, e);
    if (e > band) last_outside = out.time[i];
    s.command_min = std::min(s.command_min, out.primer[i].x());
    s.command_max = std::max(s.command_max, out.primer[i].x());
    if (!std::isfinite(out.pitch[i]) || !out.body_velocity[i].allFinite()) s.bounded = false;
  }
  s.settling_time = last_outside < 0.0 ? 0.0 : last_outside;
  if (last_outside >= out.time.back()) s.settling_time = -1.0;
  return s;
}

}  // namespace morphwing::flightsim
