#include "morphwing/config.hpp"

#include "morphwing/csv.hpp"
#include "morphwing/units.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace morphwing::config {

using units::Dimension;

std::string_view kind_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::aero_validate: return "aero-validate";
    case ScenarioKind::structure_march: return "structure-march";
    case ScenarioKind::rg_analysis: return "rg-analysis";
    case ScenarioKind::placement_optimize: return "placement-optimize";
    case ScenarioKind::closed_loop_sim: return "closed-loop-sim";
  }
  return "unknown";
}

std::string_view required_section(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::aero_validate: return "aero";
    case ScenarioKind::structure_march: return "march";
    case ScenarioKind::rg_analysis: return "governor";
    case ScenarioKind::placement_optimize: return "placement";
    case ScenarioKind::closed_loop_sim: return "flight";
  }
  return "";
}

std::string Issue::describe(const std::string& source) const {
  std::ostringstream os;
  os << source;
  if (line > 0) os << ':' << line << ':' << column;
  os << ": ";
  if (!key.empty()) os << key << ": ";
  os << message;
  return os.str();
}

namespace {

std::string join_issues(const std::string& source, const std::vector<Issue>& issues) {
  std::string out;
  for (const auto& i : issues) {
    if (!out.empty()) out += '\n';
    out += i.describe(source);
  }
  return out;
}

}  // namespace

ConfigErrors::ConfigErrors(std::string source, std::vector<Issue> issues)
    : ConfigError(join_issues(source, issues)), issues_(std::move(issues)) {}

namespace {

constexpr std::size_t kFlightGovernorStrips = 8;

using Issues = std::vector<Issue>;

Issue issue_at(const YAML::Node& node, const std::string& key, const std::string& message) {
  Issue i;
  const YAML::Mark m = node.Mark();
  if (!m.is_null()) {
    i.line = m.line + 1;
    i.column = m.column + 1;
  }
  i.key = key;
  i.message = message;
  return i;
}

enum class Check { any, positive, nonnegative };

void check_value(double v, Check check, const std::string& key) {
  const std::string leaf = key.substr(key.rfind('.') + 1);
  if (!std::isfinite(v)) throw ConfigError(leaf + " must be finite");
  if (check == Check::positive && !(v > 0.0)) throw ConfigError(leaf + " must be positive");
  if (check == Check::nonnegative && v < 0.0) throw ConfigError(leaf + " must be non-negative");
}

const std::string& scalar(const YAML::Node& node) {
  if (!node.IsScalar()) throw ConfigError("expected a single value");
  return node.Scalar();
}

std::uint64_t parse_count(const YAML::Node& node, std::uint64_t min) {
  const std::string& s = scalar(node);
  double v = 0.0;
  try {
    v = csv::parse(s);
  } catch (const Error&) {
    throw ConfigError("'" + s + "' is not an integer");
  }
  if (v != std::floor(v) || v < 0.0 || v > 9007199254740992.0) throw ConfigError("'" + s + "' is not a non-negative integer");
  if (v < static_cast<double>(min)) throw ConfigError("must be at least " + std::to_string(min));
  return static_cast<std::uint64_t>(v);
}

bool parse_bool(const YAML::Node& node) {
  const std::string& s = scalar(node);
  if (s == "true") return true;
  if (s == "false") return false;
  throw ConfigError("'" + s + "' is not true or false");
}

template <class T>
struct Field {
  std::string key;
  std::function<void(T&, const YAML::Node&, const std::string& path, Issues&)> read;
  std::function<void(const T&, YAML::Emitter&)> write;
};

template <class T>
using Schema = std::vector<Field<T>>;

template <class T>
void read_map(T& obj, const Schema<T>& schema, const YAML::Node& node, const std::string& path, Issues& issues) {
  if (!node || node.IsNull()) return;
  if (!node.IsMap()) {
    issues.push_back(issue_at(node, path, "expected a section of key: value pairs"));
    return;
  }
  std::set<std::string> seen;
  for (auto it = node.begin(); it != node.end(); ++it) {
    const std::string key = it->first.Scalar();
    const std::string full = path.empty() ? key : path + "." + key;
    if (!seen.insert(key).second) {
      issues.push_back(issue_at(it->first, full, "duplicate key"));
      continue;
    }
    const Field<T>* field = nullptr;
    for (const auto& f : schema) {
      if (f.key == key) field = &f;
    }
    if (!field) {
      issues.push_back(issue_at(it->first, full, "unknown key"));
      continue;
    }
    try {
      field->read(obj, it->second, full, issues);
    } catch (const ConfigError& e) {
      issues.push_back(issue_at(it->second, full, e.what()));
    }
  }
}

template <class T>
void write_map(const T& obj, const Schema<T>& schema, YAML::Emitter& out) {
  out << YAML::BeginMap;
  for (const auto& f : schema) {
    out << YAML::Key << f.key << YAML::Value;
    f.write(obj, out);
  }
  out << YAML::EndMap;
}

// Field builders. `get` returns a mutable reference into the owning struct.

template <class T, class Get>
Field<T> quantity(std::string key, Dimension dim, std::string unit, Get get, Check check = Check::any) {
  return {key,
          [=](T& obj, const YAML::Node& n, const std::string& path, Issues&) {
            const double v = units::parse(scalar(n), dim, unit);
            check_value(v, check, path);
            get(obj) = v;
          },
          [=](const T& obj, YAML::Emitter& out) { out << units::format(get(const_cast<T&>(obj)), unit); }};
}

template <class T, class Get>
Field<T> number(std::string key, Get get, Check check = Check::any) {
  return quantity<T>(std::move(key), Dimension::dimensionless, "", get, check);
}

template <class T, class Get>
Field<T> count(std::string key, Get get, std::uint64_t min = 0) {
  return {key,
          [=](T& obj, const YAML::Node& n, const std::string&, Issues&) {
            using V = std::remove_reference_t<decltype(get(obj))>;
            get(obj) = static_cast<V>(parse_count(n, min));
          },
          [=](const T& obj, YAML::Emitter& out) { out << std::to_string(get(const_cast<T&>(obj))); }};
}

template <class T, class Get>
Field<T> boolean(std::string key, Get get) {
  return {key, [=](T& obj, const YAML::Node& n, const std::string&, Issues&) { get(obj) = parse_bool(n); },
          [=](const T& obj, YAML::Emitter& out) { out << (get(const_cast<T&>(obj)) ? "true" : "false"); }};
}

template <class T, class Get>
Field<T> choice(std::string key, std::vector<std::string> allowed, Get get) {
  return {key,
          [=](T& obj, const YAML::Node& n, const std::string&, Issues&) {
            const std::string& s = scalar(n);
            for (const auto& a : allowed) {
              if (a == s) {
                get(obj) = s;
                return;
              }
            }
            std::string list;
            for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
            throw ConfigError("'" + s + "' is not one of: " + list);
          },
          [=](const T& obj, YAML::Emitter& out) { out << get(const_cast<T&>(obj)); }};
}

template <class T, class Get>
Field<T> quantity_list(std::string key, Dimension dim, std::string unit, Get get, Check check = Check::any) {
  return {key,
          [=](T& obj, const YAML::Node& n, const std::string& path, Issues&) {
            if (!n.IsSequence()) throw ConfigError("expected a list");
            std::vector<double> values;
            for (const auto& item : n) {
              const double v = units::parse(scalar(item), dim, unit);
              check_value(v, check, path);
              values.push_back(v);
            }
            get(obj) = std::move(values);
          },
          [=](const T& obj, YAML::Emitter& out) {
            out << YAML::Flow << YAML::BeginSeq;
            for (double v : get(const_cast<T&>(obj))) out << units::format(v, unit);
            out << YAML::EndSeq;
          }};
}

template <class T, class Get>
Field<T> count_list(std::string key, Get get) {
  return {key,
          [=](T& obj, const YAML::Node& n, const std::string&, Issues&) {
            if (!n.IsSequence()) throw ConfigError("expected a list");
            std::vector<std::size_t> values;
            for (const auto& item : n) values.push_back(static_cast<std::size_t>(parse_count(item, 0)));
            get(obj) = std::move(values);
          },
          [=](const T& obj, YAML::Emitter& out) {
            out << YAML::Flow << YAML::BeginSeq;
            for (std::size_t v : get(const_cast<T&>(obj))) out << std::to_string(v);
            out << YAML::EndSeq;
          }};
}

template <class T, class Get>
Field<T> vec3(std::string key, Dimension dim, std::string unit, Get get, Check check = Check::any) {
  return {key,
          [=](T& obj, const YAML::Node& n, const std::string& path, Issues&) {
            if (!n.IsSequence() || n.size() != 3) throw ConfigError("expected a list of 3 values");
            Vec3 v;
            for (std::size_t i = 0; i < 3; ++i) {
              v(static_cast<Eigen::Index>(i)) = units::parse(scalar(n[i]), dim, unit);
              check_value(v(static_cast<Eigen::Index>(i)), check, path);
            }
            get(obj) = v;
          },
          [=](const T& obj, YAML::Emitter& out) {
            const Vec3 v = get(const_cast<T&>(obj));
            out << YAML::Flow << YAML::BeginSeq;
            for (int i = 0; i < 3; ++i) out << units::format(v(i), unit);
            out << YAML::EndSeq;
          }};
}

template <class T, class U, class Get>
Field<T> section(std::string key, const Schema<U>& schema, Get get) {
  return {key,
          [=, &schema](T& obj, const YAML::Node& n, const std::string& path, Issues& issues) {
            read_map(get(obj), schema, n, path, issues);
          },
          [=, &schema](const T& obj, YAML::Emitter& out) { write_map(get(const_cast<T&>(obj)), schema, out); }};
}

template <class T, class U, class Get>
Field<T> records(std::string key, const Schema<U>& schema, Get get) {
  return {key,
          [=, &schema](T& obj, const YAML::Node& n, const std::string& path, Issues& issues) {
            if (n.IsNull()) {
              get(obj).clear();
              return;
            }
            if (!n.IsSequence()) throw ConfigError("expected a list of records");
            std::vector<U> items;
            std::size_t i = 0;
            for (const auto& item : n) {
              U u{};
              read_map(u, schema, item, path + "[" + std::to_string(i++) + "]", issues);
              items.push_back(std::move(u));
            }
            get(obj) = std::move(items);
          },
          [=, &schema](const T& obj, YAML::Emitter& out) {
            out << YAML::BeginSeq;
            for (const auto& u : get(const_cast<T&>(obj))) write_map(u, schema, out);
            out << YAML::EndSeq;
          }};
}

#define MW_REF(T, member) [](T& o) -> decltype(auto) { return (o.member); }

const Schema<primer::PrimerSpec>& primer_schema() {
  using P = primer::PrimerSpec;
  static const Schema<P> s{
      quantity<P>("wire_diameter", Dimension::length, "um", MW_REF(P, wire_diameter), Check::positive),
      quantity<P>("force_per_wire", Dimension::force, "gf", MW_REF(P, force_per_wire), Check::positive),
      count<P>("loop_count", MW_REF(P, loop_count), 1),
      count<P>("strands_per_loop", MW_REF(P, strands_per_loop), 1),
      quantity<P>("rhombus_width", Dimension::length, "mm", MW_REF(P, rhombus_width), Check::positive),
      quantity<P>("stroke_max", Dimension::length, "mm", MW_REF(P, stroke_max), Check::positive),
      quantity<P>("time_constant", Dimension::time, "s", MW_REF(P, time_constant), Check::positive),
      quantity<P>("drive_current", Dimension::current, "mA", MW_REF(P, drive_current), Check::nonnegative),
      number<P>("contraction_fraction", MW_REF(P, sma_contraction_fraction), Check::positive),
  };
  return s;
}

const Schema<wing::SegmentSpec>& segment_schema() {
  using S = wing::SegmentSpec;
  static const Schema<S> s{
      quantity<S>("length", Dimension::length, "m", MW_REF(S, length), Check::positive),
      count<S>("elements", MW_REF(S, elements), 1),
      quantity<S>("youngs_modulus", Dimension::pressure, "Pa", MW_REF(S, youngs_modulus), Check::positive),
      quantity<S>("shear_modulus", Dimension::pressure, "Pa", MW_REF(S, shear_modulus), Check::positive),
      quantity<S>("density", Dimension::density, "kg/m3", MW_REF(S, density), Check::positive),
      quantity<S>("radius", Dimension::length, "m", MW_REF(S, radius), Check::positive),
  };
  return s;
}

const Schema<structure::ElementOptions>& element_schema() {
  using E = structure::ElementOptions;
  static const Schema<E> s{
      count<E>("stiffness_points", MW_REF(E, stiffness_points), 1),
      count<E>("mass_points", MW_REF(E, mass_points), 1),
      quantity<E>("rayleigh_alpha", Dimension::rate_gain, "/s", MW_REF(E, rayleigh_alpha), Check::nonnegative),
      quantity<E>("rayleigh_beta", Dimension::time, "s", MW_REF(E, rayleigh_beta), Check::nonnegative),
      {"kappa4",
       [](E& o, const YAML::Node& n, const std::string&, Issues&) {
         const std::string& v = scalar(n);
         if (v == "zero") o.kappa4 = structure::ConfigurationStiffness::zero;
         else if (v == "geometric") o.kappa4 = structure::ConfigurationStiffness::geometric;
         else if (v == "centripetal") o.kappa4 = structure::ConfigurationStiffness::centripetal;
         else throw ConfigError("'" + v + "' is not one of: zero, geometric, centripetal");
       },
       [](const E& o, YAML::Emitter& out) {
         switch (o.kappa4) {
           case structure::ConfigurationStiffness::zero: out << "zero"; break;
           case structure::ConfigurationStiffness::geometric: out << "geometric"; break;
           case structure::ConfigurationStiffness::centripetal: out << "centripetal"; break;
         }
       }},
      vec3<E>("spin_axis", Dimension::dimensionless, "", MW_REF(E, spin_axis)),
      quantity<E>("spin_rate", Dimension::rate_gain, "/s", MW_REF(E, spin_rate)),
  };
  return s;
}

const Schema<wing::WingDesign>& wing_schema() {
  using W = wing::WingDesign;
  static const Schema<W> s{
      section<W>("arm", segment_schema(), MW_REF(W, arm)),
      section<W>("flexure", segment_schema(), MW_REF(W, flexure)),
      section<W>("forearm", segment_schema(), MW_REF(W, forearm)),
      section<W>("hand", segment_schema(), MW_REF(W, hand)),
      quantity<W>("slot_offset", Dimension::length, "m", MW_REF(W, slot_offset)),
      section<W>("elements", element_schema(), MW_REF(W, element_options)),
  };
  return s;
}

const Schema<aero::WagnerApproximant>& wagner_schema() {
  using A = aero::WagnerApproximant;
  static const Schema<A> s{
      quantity_list<A>("a", Dimension::dimensionless, "", MW_REF(A, a)),
      quantity_list<A>("b", Dimension::dimensionless, "", MW_REF(A, b), Check::positive),
  };
  return s;
}

const Schema<AeroSettings>& aero_schema() {
  using A = AeroSettings;
  static const Schema<A> s{
      quantity<A>("airspeed", Dimension::velocity, "m/s", MW_REF(A, airspeed), Check::positive),
      quantity<A>("air_density", Dimension::density, "kg/m3", MW_REF(A, air_density), Check::positive),
      number<A>("aspect_ratio", MW_REF(A, aspect_ratio), Check::positive),
      quantity<A>("span", Dimension::length, "m", MW_REF(A, span), Check::positive),
      count<A>("strips", MW_REF(A, strips), 2),
      quantity<A>("alpha", Dimension::angle, "rad", MW_REF(A, alpha)),
      section<A>("wagner", wagner_schema(), MW_REF(A, wagner)),
      number<A>("step_semichords", MW_REF(A, step_semichords), Check::positive),
      count<A>("samples", MW_REF(A, samples), 2),
  };
  return s;
}

const Schema<flightsim::LinkSpec>& link_schema() {
  using L = flightsim::LinkSpec;
  static const Schema<L> s{
      quantity<L>("length", Dimension::length, "m", MW_REF(L, length), Check::positive),
      quantity<L>("chord", Dimension::length, "m", MW_REF(L, chord), Check::positive),
      quantity<L>("mass", Dimension::mass, "kg", MW_REF(L, mass), Check::positive),
      count<L>("strips", MW_REF(L, strips), 1),
  };
  return s;
}

const Schema<flightsim::RobotParams>& robot_schema() {
  using R = flightsim::RobotParams;
  static const Schema<R> s{
      quantity<R>("body_mass", Dimension::mass, "kg", MW_REF(R, body_mass), Check::positive),
      vec3<R>("body_inertia", Dimension::inertia, "kg*m2", MW_REF(R, body_inertia), Check::positive),
      vec3<R>("body_com", Dimension::length, "m", MW_REF(R, body_com)),
      vec3<R>("shoulder", Dimension::length, "m", MW_REF(R, shoulder)),
      section<R>("arm", link_schema(), MW_REF(R, arm)),
      section<R>("forearm", link_schema(), MW_REF(R, forearm)),
      section<R>("hand", link_schema(), MW_REF(R, hand)),
      quantity<R>("wrist_stiffness", Dimension::rotational_stiffness, "N*m/rad", MW_REF(R, wrist_stiffness),
                  Check::nonnegative),
      quantity<R>("wrist_damping", Dimension::rotational_damping, "N*m*s/rad", MW_REF(R, wrist_damping),
                  Check::nonnegative),
      quantity<R>("incidence", Dimension::angle, "rad", MW_REF(R, incidence)),
      quantity<R>("body_drag_area", Dimension::area, "m2", MW_REF(R, body_drag_area), Check::nonnegative),
      quantity<R>("flap_limit", Dimension::angle, "rad", MW_REF(R, flap_limit), Check::positive),
      quantity<R>("elbow_limit", Dimension::angle, "rad", MW_REF(R, elbow_limit), Check::positive),
      quantity<R>("wrist_limit", Dimension::angle, "rad", MW_REF(R, wrist_limit), Check::positive),
  };
  return s;
}

const Schema<gait::GaitShape>& gait_schema() {
  using G = gait::GaitShape;
  static const Schema<G> s{
      quantity<G>("frequency", Dimension::frequency, "Hz", MW_REF(G, frequency), Check::positive),
      quantity<G>("flap_amplitude", Dimension::angle, "rad", MW_REF(G, flap_amplitude), Check::nonnegative),
      quantity<G>("flap_mean", Dimension::angle, "rad", MW_REF(G, flap_mean)),
      quantity<G>("elbow_mean", Dimension::angle, "rad", MW_REF(G, elbow_mean)),
      quantity<G>("elbow_amplitude", Dimension::angle, "rad", MW_REF(G, elbow_amplitude), Check::nonnegative),
      quantity<G>("elbow_phase", Dimension::angle, "rad", MW_REF(G, elbow_phase)),
      count<G>("knots", MW_REF(G, knots), 4),
  };
  return s;
}

const Schema<flightsim::JointGains>& joint_schema() {
  using J = flightsim::JointGains;
  static const Schema<J> s{
      quantity<J>("kp", Dimension::acceleration_gain, "/s2", MW_REF(J, kp), Check::positive),
      quantity<J>("kd", Dimension::rate_gain, "/s", MW_REF(J, kd), Check::nonnegative),
  };
  return s;
}

const Schema<flightsim::ControllerConfig>& controller_schema() {
  using C = flightsim::ControllerConfig;
  static const Schema<C> s{
      boolean<C>("closed_loop", MW_REF(C, closed_loop)),
      quantity<C>("kp", Dimension::stroke_per_angle, "mm/rad", MW_REF(C, gains.kp)),
      quantity<C>("kd", Dimension::stroke_per_rate, "mm*s/rad", MW_REF(C, gains.kd)),
      quantity<C>("trim", Dimension::length, "mm", MW_REF(C, gains.trim), Check::nonnegative),
      number<C>("sign", MW_REF(C, gains.sign)),
      quantity<C>("pitch_ref", Dimension::angle, "rad", MW_REF(C, pitch_ref)),
      quantity<C>("rate", Dimension::frequency, "Hz", MW_REF(C, rate), Check::positive),
      boolean<C>("period_filter", MW_REF(C, period_filter)),
      boolean<C>("auto_trim", MW_REF(C, auto_trim)),
      boolean<C>("governor", MW_REF(C, governor)),
  };
  return s;
}

struct Wrench {
  Vec3 force = Vec3::Zero();
  Vec3 moment = Vec3::Zero();
};

const Schema<flightsim::SimConfig>& flight_schema() {
  using F = flightsim::SimConfig;
  static const Schema<F> s{
      section<F>("robot", robot_schema(), MW_REF(F, robot)),
      section<F>("gait", gait_schema(), MW_REF(F, gait)),
      section<F>("joints", joint_schema(), MW_REF(F, joints)),
      section<F>("controller", controller_schema(), MW_REF(F, controller)),
      number<F>("gearing", MW_REF(F, gearing), Check::nonnegative),
      number<F>("max_gearing", MW_REF(F, max_gearing), Check::positive),
      boolean<F>("aero_enabled", MW_REF(F, aero.enabled)),
      quantity<F>("duration", Dimension::time, "s", MW_REF(F, duration), Check::positive),
      quantity<F>("dt", Dimension::time, "s", MW_REF(F, dt), Check::positive),
      count<F>("sample_every", MW_REF(F, sample_every), 1),
      quantity<F>("initial_pitch_error", Dimension::angle, "rad", MW_REF(F, initial_pitch_error)),
      boolean<F>("gravity", MW_REF(F, gravity)),
      quantity<F>("pitch_limit", Dimension::angle, "rad", MW_REF(F, pitch_limit), Check::positive),
      number<F>("state_bound", MW_REF(F, state_bound), Check::positive),
      quantity<F>("warmup", Dimension::time, "s", MW_REF(F, warmup), Check::nonnegative),
      boolean<F>("balance_trim", MW_REF(F, balance_trim)),
      boolean<F>("free_trim", MW_REF(F, free_trim)),
      vec3<F>("stabilizer_force", Dimension::force, "N",
              [](F& o) -> decltype(auto) { return o.stabilizer_wrench.head<3>(); }),
      vec3<F>("stabilizer_moment", Dimension::torque, "N*m",
              [](F& o) -> decltype(auto) { return o.stabilizer_wrench.tail<3>(); }),
  };
  return s;
}

const Schema<MarchSettings>& march_schema() {
  using M = MarchSettings;
  static const Schema<M> s{
      quantity<M>("duration", Dimension::time, "s", MW_REF(M, duration), Check::positive),
      quantity<M>("dt", Dimension::time, "s", MW_REF(M, dt), Check::positive),
      choice<M>("profile", {"step", "sine", "ramp"}, MW_REF(M, profile)),
      quantity<M>("command", Dimension::length, "mm", MW_REF(M, command)),
      quantity<M>("frequency", Dimension::frequency, "Hz", MW_REF(M, frequency), Check::positive),
      count<M>("sample_every", MW_REF(M, sample_every), 1),
      quantity_list<M>("sensitivity_points", Dimension::length, "mm", MW_REF(M, sensitivity_points)),
      count_list<M>("slots", MW_REF(M, slots)),
  };
  return s;
}

const Schema<ConstraintSettings>& constraint_schema() {
  using C = ConstraintSettings;
  static const Schema<C> s{
      count<C>("output", MW_REF(C, output)),
      number<C>("coefficient", MW_REF(C, coefficient)),
      number<C>("bound", MW_REF(C, bound)),
  };
  return s;
}

const Schema<GovernorSettings>& governor_schema() {
  using G = GovernorSettings;
  static const Schema<G> s{
      quantity<G>("horizon", Dimension::time, "s", MW_REF(G, options.horizon), Check::positive),
      count<G>("horizon_steps", MW_REF(G, options.horizon_steps), 1),
      number<G>("tolerance", MW_REF(G, options.tolerance), Check::positive),
      boolean<G>("check_steady_state", MW_REF(G, options.check_steady_state)),
      number<G>("zeta", MW_REF(G, zeta), Check::positive),
      count_list<G>("channels", MW_REF(G, channels)),
      quantity<G>("requested", Dimension::length, "mm", MW_REF(G, requested)),
      quantity<G>("duration", Dimension::time, "s", MW_REF(G, duration), Check::positive),
      quantity<G>("update", Dimension::time, "s", MW_REF(G, update), Check::positive),
      quantity<G>("dt", Dimension::time, "s", MW_REF(G, dt), Check::positive),
      count<G>("sample_every", MW_REF(G, sample_every), 1),
      records<G>("constraints", constraint_schema(), MW_REF(G, constraints)),
  };
  return s;
}

const Schema<placement::HarmonicLoad>& load_schema() {
  using L = placement::HarmonicLoad;
  static const Schema<L> s{
      count<L>("node", MW_REF(L, node)),
      vec3<L>("force", Dimension::force, "N", MW_REF(L, force)),
      vec3<L>("moment", Dimension::torque, "N*m", MW_REF(L, moment)),
      count<L>("harmonic", MW_REF(L, harmonic), 1),
      quantity<L>("phase", Dimension::angle, "rad", MW_REF(L, phase)),
  };
  return s;
}

const Schema<DesiredSettings>& desired_schema() {
  using D = DesiredSettings;
  static const Schema<D> s{
      count<D>("component", MW_REF(D, component), 1),
      count<D>("axis", MW_REF(D, axis), 1),
      quantity<D>("angle", Dimension::angle, "rad", MW_REF(D, angle)),
      vec3<D>("vector", Dimension::dimensionless, "", MW_REF(D, vector)),
  };
  return s;
}

const Schema<PlacementSettings>& placement_schema() {
  using P = PlacementSettings;
  static const Schema<P> s{
      quantity<P>("gait_frequency", Dimension::frequency, "Hz", MW_REF(P, gait.frequency), Check::positive),
      records<P>("loads", load_schema(), MW_REF(P, gait.loads)),
      records<P>("desired", desired_schema(), MW_REF(P, desired)),
      count<P>("budget", MW_REF(P, budget), 1),
      count<P>("harmonics", MW_REF(P, options.harmonics), 1),
      count<P>("samples", MW_REF(P, options.samples), 8),
      quantity<P>("angle_tolerance", Dimension::angle, "rad", MW_REF(P, options.angle_tolerance), Check::positive),
      count<P>("random_starts", MW_REF(P, options.random_starts), 1),
      quantity<P>("start_radius", Dimension::length, "mm", MW_REF(P, options.start_radius), Check::positive),
      count<P>("grid_points", MW_REF(P, options.grid_points), 2),
      quantity<P>("grid_radius", Dimension::length, "mm", MW_REF(P, options.grid_radius), Check::positive),
      count<P>("exhaustive_limit", MW_REF(P, options.exhaustive_limit), 1),
      boolean<P>("aero_coupled", MW_REF(P, aero_coupled)),
      count_list<P>("candidates", MW_REF(P, candidates)),
      boolean<P>("verify", MW_REF(P, verify)),
  };
  return s;
}

ScenarioKind parse_kind(const std::string& s) {
  for (auto k : {ScenarioKind::aero_validate, ScenarioKind::structure_march, ScenarioKind::rg_analysis,
                 ScenarioKind::placement_optimize, ScenarioKind::closed_loop_sim}) {
    if (kind_name(k) == s) return k;
  }
  throw ConfigError("'" + s +
                    "' is not one of: aero-validate, structure-march, rg-analysis, placement-optimize, "
                    "closed-loop-sim");
}

const Schema<ScenarioConfig>& scenario_schema() {
  using S = ScenarioConfig;
  static const Schema<S> s{
      {"kind", [](S& o, const YAML::Node& n, const std::string&, Issues&) { o.kind = parse_kind(scalar(n)); },
       [](const S& o, YAML::Emitter& out) { out << std::string(kind_name(o.kind)); }},
      {"output_dir", [](S& o, const YAML::Node& n, const std::string&, Issues&) { o.output_dir = scalar(n); },
       [](const S& o, YAML::Emitter& out) { out << YAML::DoubleQuoted << o.output_dir; }},
      count<S>("seed", MW_REF(S, seed)),
      section<S>("primer", primer_schema(), MW_REF(S, primer)),
      section<S>("wing", wing_schema(), MW_REF(S, wing)),
      section<S>("aero", aero_schema(), MW_REF(S, aero)),
      section<S>("flight", flight_schema(), MW_REF(S, flight)),
      section<S>("march", march_schema(), MW_REF(S, march)),
      section<S>("governor", governor_schema(), MW_REF(S, governor)),
      section<S>("placement", placement_schema(), MW_REF(S, placement)),
  };
  return s;
}

#undef MW_REF

std::vector<std::string> semantic_problems(const ScenarioConfig& c, const std::string& sec) {
  std::vector<std::string> out;
  const auto guard = [&](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      out.emplace_back(e.what());
    }
  };
  if (sec == "primer") guard([&] { (void)c.primer.validate(); });
  if (sec == "wing") guard([&] { (void)wing::build_wing(c.wing, c.primer); });
  if (sec == "flight") guard([&] { c.flight_config().validate(); });
  if (sec == "aero") {
    if (c.aero.wagner.a.size() != c.aero.wagner.b.size()) out.emplace_back("wagner a and b must have the same length");
  }
  if (sec == "march") {
    for (std::size_t e : c.march.slots) {
      if (e >= c.wing.element_count()) out.push_back("slot element " + std::to_string(e) + " does not exist");
    }
    if (c.march.sensitivity_points.size() < 2) out.emplace_back("sensitivity_points needs two or more values");
  }
  if (sec == "governor") {
    const std::size_t dofs = 6 * c.wing.element_count();
    for (std::size_t ch : c.governor.channels) {
      if (ch >= dofs) out.push_back("channel " + std::to_string(ch) + " exceeds the " + std::to_string(dofs) + " structure DOFs");
    }
    if (c.governor.update < c.governor.dt) out.emplace_back("update must not be shorter than dt");
  }
  if (sec == "placement") {
    const std::size_t nodes = c.wing.element_count() + 1;
    for (const auto& l : c.placement.gait.loads) {
      if (l.node >= nodes) out.push_back("load node " + std::to_string(l.node) + " exceeds the wing's " + std::to_string(nodes) + " nodes");
    }
    for (const auto& d : c.placement.desired) {
      if (d.vector.norm() > 0.0) continue;
      if (d.component > 3 || d.axis > 3) out.emplace_back("desired component and axis must lie in 1..3");
      else if (d.component == d.axis && d.angle != 0.0) out.emplace_back("desired axis must differ from component");
    }
    if (c.placement.desired.empty() || c.placement.desired.size() > 3) out.emplace_back("desired must list 1 to 3 directions");
    for (std::size_t e : c.placement.candidates) {
      if (e >= c.wing.element_count()) out.push_back("candidate element " + std::to_string(e) + " does not exist");
    }
    const std::size_t slots = c.placement.candidates.empty() ? c.wing.element_count() : c.placement.candidates.size();
    if (c.placement.budget > slots) out.emplace_back("budget exceeds the number of candidate slots");
  }
  return out;
}

}  // namespace

flightsim::SimConfig ScenarioConfig::flight_config() const {
  flightsim::SimConfig f = flight;
  f.primer = primer;
  f.wing = wing;
  f.aero.airspeed = aero.airspeed;
  f.aero.air_density = aero.air_density;
  f.aero.wagner = aero.wagner;
  f.controller.gains.stroke_max = primer.stroke_max;
  f.controller.governor_constraints.clear();
  for (const auto& cs : governor.constraints) {
    rgov::Constraint c;
    c.c = VecX::Zero(static_cast<Eigen::Index>(6 + kFlightGovernorStrips));
    if (cs.output < static_cast<std::size_t>(c.c.size())) c.c(static_cast<Eigen::Index>(cs.output)) = cs.coefficient;
    c.bound = cs.bound;
    f.controller.governor_constraints.push_back(c);
  }
  return f;
}

PlacementSettings default_placement() {
  PlacementSettings p;
  const wing::WingDesign design;
  p.gait.frequency = 10.0;
  p.gait.loads = {{3, Vec3(0.0, 0.0, 0.05), Vec3::Zero(), 1, 0.0},
                  {design.element_count(), Vec3(0.0, 0.02, 0.0), Vec3::Zero(), 1, kPi / 2.0}};
  return p;
}

ScenarioConfig parse(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    Issue i;
    if (!e.mark.is_null()) {
      i.line = e.mark.line + 1;
      i.column = e.mark.column + 1;
    }
    i.message = e.msg;
    throw ConfigErrors(source, {i});
  }

  ScenarioConfig config;
  config.placement = default_placement();
  Issues issues;
  if (!root || root.IsNull()) throw ConfigErrors(source, {Issue{0, 0, "", "empty configuration"}});
  read_map(config, scenario_schema(), root, "", issues);
  if (!issues.empty()) throw ConfigErrors(source, issues);
  if (!root.IsMap()) throw ConfigErrors(source, issues);

  if (!root["kind"]) issues.push_back(issue_at(root, "kind", "missing required key"));
  const std::string need(required_section(config.kind));
  if (root["kind"] && !root[need]) {
    issues.push_back(issue_at(root["kind"], need,
                              "section required for kind " + std::string(kind_name(config.kind))));
  }
  for (const char* sec : {"primer", "wing", "aero", "flight", "march", "governor", "placement"}) {
    for (const auto& msg : semantic_problems(config, sec)) {
      const YAML::Node n = root[sec];
      issues.push_back(n ? issue_at(n, sec, msg) : Issue{0, 0, sec, msg});
    }
  }
  if (!issues.empty()) throw ConfigErrors(source, issues);
  return config;
}

ScenarioConfig load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

std::string emit(const ScenarioConfig& config) {
  YAML::Emitter out;
  write_map(config, scenario_schema(), out);
  return std::string(out.c_str()) + "\n";
}

void validate(const ScenarioConfig& config) {
  Issues issues;
  for (const char* sec : {"primer", "wing", "aero", "flight", "march", "governor", "placement"}) {
    for (const auto& msg : semantic_problems(config, sec)) issues.push_back(Issue{0, 0, sec, msg});
  }
  if (!issues.empty()) throw ConfigErrors("<config>", issues);
}

}  // namespace morphwing::config
