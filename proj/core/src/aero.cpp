#include "morphwing/aero.hpp"

#include "morphwing/csv.hpp"

#include <Eigen/LU>

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace morphwing::aero {

void StripGeometry::validate() const {
  const std::size_t n = span_stations.size();
  if (n < 2) throw ConfigError("geometry underresolved");
  if (chord.size() != n || area.size() != n || station_frames.size() != n) {
    throw ConfigError("strip geometry arrays differ in length");
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!(chord[k] > 0.0)) throw ConfigError("strip chord must be positive");
    if (!(area[k] > 0.0)) throw ConfigError("strip area must be positive");
    if (k > 0 && !(span_stations[k] > span_stations[k - 1])) {
      throw ConfigError("span stations must be strictly increasing");
    }
  }
  if (!(span > 0.0) || std::abs(span_stations.front()) >= 0.5 * span ||
      std::abs(span_stations.back()) >= 0.5 * span) {
    throw ConfigError("span stations must lie strictly inside the span");
  }
}

StripGeometry elliptic_wing(double span, double aspect_ratio, std::size_t strips) {
  if (strips < 2) throw ConfigError("geometry underresolved");
  const double area_total = span * span / aspect_ratio;
  const double root_chord = 4.0 * area_total / (kPi * span);
  StripGeometry g;
  g.span = span;
  const double dtheta = kPi / static_cast<double>(strips);
  // integral of sin^2 over [t0, t1]
  auto sin2_integral = [](double t0, double t1) {
    return 0.5 * (t1 - t0) - 0.25 * (std::sin(2.0 * t1) - std::sin(2.0 * t0));
  };
  for (std::size_t k = 0; k < strips; ++k) {
    const double theta = (static_cast<double>(k) + 0.5) * dtheta;
    const double y = -0.5 * span * std::cos(theta);
    g.span_stations.push_back(y);
    g.chord.push_back(root_chord * std::sin(theta));
    g.area.push_back(root_chord * 0.5 * span *
                     sin2_integral(static_cast<double>(k) * dtheta,
                                   static_cast<double>(k + 1) * dtheta));
    StationFrame f;
    f.position = Vec3(0.0, y, 0.0);
    g.station_frames.push_back(f);
  }
  return g;
}

double WagnerApproximant::phi(double s) const {
  double v = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i) v -= a[i] * std::exp(-b[i] * s);
  return v;
}

MatX AeroModel::steady_gain() const {
  return d_xi - c_xi * a_xi.partialPivLu().solve(b_xi);
}

MatX lifting_line_coupling(const StripGeometry& geometry) {
  geometry.validate();
  const auto n = static_cast<Eigen::Index>(geometry.size());
  const double b = geometry.span;
  MatX p(n, n);
  MatX s(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double theta = std::acos(-2.0 * geometry.span_stations[k] / b);
    const double c = geometry.chord[k];
    const double st = std::sin(theta);
    for (Eigen::Index m = 0; m < n; ++m) {
      const double order = static_cast<double>(m + 1);
      const double sn = std::sin(order * theta);
      p(k, m) = sn * (2.0 * b / (kPi * c) + order / st);
      s(k, m) = 4.0 * b / c * sn;
    }
  }
  // sectional lift coefficient c_l = S P^-1 alpha; effective angle = c_l / 2pi
  const MatX sectional = s * p.partialPivLu().inverse();
  return sectional / (2.0 * kPi);
}

AeroModel build_aero_model(const StripGeometry& geometry, const KinematicSnapshot& snapshot,
                           double airspeed, double air_density,
                           const WagnerApproximant& wagner) {
  if (!(airspeed > 0.0) || !std::isfinite(airspeed)) throw NumericalError("degenerate freestream");
  if (geometry.size() < 2) throw ConfigError("geometry underresolved");
  geometry.validate();
  return build_aero_model(geometry, lifting_line_coupling(geometry), snapshot, airspeed, air_density,
                          wagner);
}

AeroModel build_aero_model(const StripGeometry& geometry, const MatX& coupling,
                           const KinematicSnapshot& snapshot, double airspeed, double air_density,
                           const WagnerApproximant& wagner) {
  if (!(airspeed > 0.0) || !std::isfinite(airspeed)) throw NumericalError("degenerate freestream");
  if (coupling.rows() != static_cast<Eigen::Index>(geometry.size()) || coupling.cols() != coupling.rows()) {
    throw ConfigError("lifting-line coupling does not match strip count");
  }
  if (!snapshot.empty() && snapshot.size() != geometry.size()) {
    throw ConfigError("kinematic snapshot does not match strip count");
  }
  if (wagner.a.size() != wagner.b.size() || wagner.a.empty()) {
    throw ConfigError("Wagner approximant needs matching, non-empty coefficient lists");
  }

  const auto n = static_cast<Eigen::Index>(geometry.size());
  const auto nl = static_cast<Eigen::Index>(wagner.lag_count());
  double direct = 1.0;
  for (double ai : wagner.a) direct -= ai;

  AeroModel m;
  m.airspeed = airspeed;
  m.air_density = air_density;
  m.n_lag = wagner.lag_count();
  m.strip_speed.resize(n);
  m.strip_width.resize(n);
  m.a_xi = MatX::Zero(n * nl, n * nl);
  m.b_xi = MatX::Zero(n * nl, n);
  m.c_xi = MatX::Zero(6 + n, n * nl);
  m.d_xi = MatX::Zero(6 + n, n);

  // Per-strip lift rows, then the wrench rows are a frame-weighted sum.
  MatX lift_c = MatX::Zero(n, n * nl);
  MatX lift_d = MatX::Zero(n, n);
  MatX wrench_of_lift = MatX::Zero(6, n);

  for (Eigen::Index k = 0; k < n; ++k) {
    Vec3 pos = geometry.station_frames[k].position;
    Vec3 dir = geometry.station_frames[k].orientation.col(2);
    double speed = airspeed;
    if (!snapshot.empty()) {
      pos = snapshot[k].position;
      dir = snapshot[k].lift_direction;
      speed = snapshot[k].flow_speed;
    }
    if (!(speed > 0.0) || !std::isfinite(speed)) throw NumericalError("degenerate freestream");
    if (!pos.allFinite() || !dir.allFinite() || dir.norm() < 1e-12) {
      throw NumericalError("non-finite state");
    }
    dir.normalize();
    m.strip_speed(k) = speed;
    m.strip_width(k) = geometry.area[k] / geometry.chord[k];

    const double semichord = 0.5 * geometry.chord[k];
    const double rate = speed / semichord;
    const double lift_per_cl = 0.5 * air_density * speed * speed * geometry.area[k];
    for (Eigen::Index i = 0; i < nl; ++i) {
      const Eigen::Index row = k * nl + i;
      const double bi = wagner.b[static_cast<std::size_t>(i)];
      m.a_xi(row, row) = -rate * bi;
      m.b_xi.row(row) = rate * bi * coupling.row(k);
      lift_c(k, row) = lift_per_cl * 2.0 * kPi * wagner.a[static_cast<std::size_t>(i)];
    }
    lift_d.row(k) = lift_per_cl * 2.0 * kPi * direct * coupling.row(k);
    wrench_of_lift.block<3, 1>(0, k) = dir;
    wrench_of_lift.block<3, 1>(3, k) = pos.cross(dir);
  }

  m.c_xi.topRows(6) = wrench_of_lift * lift_c;
  m.c_xi.bottomRows(n) = lift_c;
  m.d_xi.topRows(6) = wrench_of_lift * lift_d;
  m.d_xi.bottomRows(n) = lift_d;
  return m;
}

AeroModel with_input_map(const AeroModel& model, const MatX& input_map) {
  if (input_map.rows() != model.b_xi.cols()) {
    throw ConfigError("aero input map rows must equal the strip count");
  }
  AeroModel out = model;
  out.b_xi = model.b_xi * input_map;
  out.d_xi = model.d_xi * input_map;
  return out;
}

WakeState WakeState::zero(const AeroModel& model) {
  return WakeState{VecX::Zero(model.a_xi.rows()), model.n_lag};
}

ForceOutput split_output(const AeroModel& model, const VecX& y2) {
  ForceOutput f;
  f.wrench = y2.head<6>();
  f.per_strip_lift = y2.tail(static_cast<Eigen::Index>(model.strip_count()));
  return f;
}

ForceOutput evaluate_output(const AeroModel& model, const VecX& xi, const VecX& y1) {
  return split_output(model, model.c_xi * xi + model.d_xi * y1);
}

StepResult aero_step(const AeroModel& model, const WakeState& xi, const VecX& y1, double dt) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  if (!xi.lag_states.allFinite() || !y1.allFinite() || !std::isfinite(dt)) {
    throw NumericalError("non-finite state");
  }
  if (xi.lag_states.size() != model.a_xi.rows() || y1.size() != model.b_xi.cols()) {
    throw ConfigError("aero state or input dimension mismatch");
  }
  const Discretization d = discretize(model.a_xi, model.b_xi, dt);
  StepResult r;
  r.xi.n_lag = model.n_lag;
  r.xi.lag_states = d.phi * xi.lag_states + d.gamma * y1;
  r.y2 = evaluate_output(model, r.xi.lag_states, y1);
  return r;
}

VecX bound_circulation(const AeroModel& model, const ForceOutput& y2) {
  const auto n = static_cast<Eigen::Index>(model.strip_count());
  VecX g(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    g(k) = y2.per_strip_lift(k) / (model.air_density * model.strip_speed(k) * model.strip_width(k));
  }
  return g;
}

VecX WakeHistory::total_shed() const {
  if (shed.empty()) return bound.empty() ? VecX() : VecX::Zero(bound.front().size());
  VecX s = VecX::Zero(shed.front().size());
  for (const auto& v : shed) s += v;
  return s;
}

double WakeHistory::kelvin_residual() const {
  if (bound.empty()) return 0.0;
  double scale = 0.0;
  for (const auto& v : bound) scale = std::max(scale, v.cwiseAbs().maxCoeff());
  const VecX r = bound.front() - bound.back() - total_shed();
  return scale > 0.0 ? r.cwiseAbs().maxCoeff() / scale : r.cwiseAbs().maxCoeff();
}

WakeHistory wake_circulation_history(const std::vector<VecX>& y1_trajectory,
                                     const RebuildPolicy& policy, double dt) {
  if (y1_trajectory.empty()) throw ConfigError("trajectory must be non-empty");
  if (!policy.build) throw ConfigError("rebuild policy has no model builder");
  const std::size_t interval = std::max<std::size_t>(1, policy.interval);

  AeroModel model = policy.build(0);
  WakeState xi = WakeState::zero(model);
  WakeHistory h;
  h.bound.push_back(bound_circulation(model, evaluate_output(model, xi.lag_states, y1_trajectory[0])));
  for (std::size_t n = 0; n < y1_trajectory.size(); ++n) {
    if (n > 0 && n % interval == 0) model = policy.build(n);
    const StepResult r = aero_step(model, xi, y1_trajectory[n], dt);
    xi = r.xi;
    VecX next = bound_circulation(model, r.y2);
    h.shed.push_back(h.bound.back() - next);
    h.bound.push_back(std::move(next));
  }
  return h;
}

WakeHistory wake_circulation_history(const std::vector<VecX>& y1_trajectory,
                                     const AeroModel& model, double dt) {
  RebuildPolicy p;
  p.build = [&model](std::size_t) { return model; };
  p.interval = y1_trajectory.size() + 1;
  return wake_circulation_history(y1_trajectory, p, dt);
}

void write_matrix_csv(std::ostream& out, const MatX& m) {
  out << "# " << m.rows() << ',' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << csv::format(m(i, j));
    }
    out << '\n';
  }
}

MatX read_matrix_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.size() < 2 || line[0] != '#') {
    throw ConfigError("matrix csv: missing '# rows,cols' header");
  }
  const auto dims = csv::split_line(std::string_view(line).substr(1));
  if (dims.size() != 2) throw ConfigError("matrix csv: malformed header");
  const auto rows = static_cast<Eigen::Index>(csv::parse(dims[0]));
  const auto cols = static_cast<Eigen::Index>(csv::parse(dims[1]));
  MatX m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) throw ConfigError("matrix csv: too few rows");
    const auto cells = csv::split_line(line);
    if (static_cast<Eigen::Index>(cells.size()) != cols) throw ConfigError("matrix csv: ragged row");
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = csv::parse(cells[static_cast<std::size_t>(j)]);
  }
  return m;
}

}  // namespace morphwing::aero
