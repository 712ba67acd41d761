#include "morphwing/units.hpp"

#include "morphwing/common.hpp"
#include "morphwing/csv.hpp"

#include <cctype>
#include <utility>

namespace morphwing::units {

namespace {

using Table = std::vector<std::pair<std::string, double>>;

const Table& table(Dimension d) {
  static const Table none{{"", 1.0}, {"%", 0.01}};
  static const Table length{{"m", 1.0}, {"mm", 1e-3}, {"cm", 1e-2}, {"um", 1e-6}};
  static const Table mass{{"kg", 1.0}, {"g", 1e-3}, {"mg", 1e-6}};
  static const Table time{{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}};
  static const Table frequency{{"Hz", 1.0}, {"kHz", 1e3}};
  static const Table angle{{"rad", 1.0}, {"deg", kPi / 180.0}};
  static const Table force{{"N", 1.0}, {"mN", 1e-3}, {"gf", kGramForce}};
  static const Table load{{"N", 1.0}, {"mN", 1e-3}, {"gf", kGramForce}, {"N*m", 1.0}, {"N*mm", 1e-3}};
  static const Table pressure{{"Pa", 1.0}, {"kPa", 1e3}, {"MPa", 1e6}, {"GPa", 1e9}};
  static const Table density{{"kg/m3", 1.0}, {"g/cm3", 1e3}};
  static const Table current{{"A", 1.0}, {"mA", 1e-3}};
  static const Table velocity{{"m/s", 1.0}, {"mm/s", 1e-3}};
  static const Table area{{"m2", 1.0}, {"cm2", 1e-4}, {"mm2", 1e-6}};
  static const Table inertia{{"kg*m2", 1.0}, {"g*cm2", 1e-7}, {"g*mm2", 1e-9}};
  static const Table torque{{"N*m", 1.0}, {"N*mm", 1e-3}};
  static const Table rot_stiffness{{"N*m/rad", 1.0}, {"N*mm/rad", 1e-3}};
  static const Table rot_damping{{"N*m*s/rad", 1.0}, {"N*mm*s/rad", 1e-3}};
  static const Table rate_gain{{"/s", 1.0}};
  static const Table accel_gain{{"/s2", 1.0}};
  static const Table stroke_angle{{"m/rad", 1.0}, {"mm/rad", 1e-3}, {"mm/deg", 1e-3 * 180.0 / kPi}};
  static const Table stroke_rate{{"m*s/rad", 1.0}, {"mm*s/rad", 1e-3}};
  switch (d) {
    case Dimension::dimensionless: return none;
    case Dimension::length: return length;
    case Dimension::mass: return mass;
    case Dimension::time: return time;
    case Dimension::frequency: return frequency;
    case Dimension::angle: return angle;
    case Dimension::force: return force;
    case Dimension::load: return load;
    case Dimension::pressure: return pressure;
    case Dimension::density: return density;
    case Dimension::current: return current;
    case Dimension::velocity: return velocity;
    case Dimension::area: return area;
    case Dimension::inertia: return inertia;
    case Dimension::torque: return torque;
    case Dimension::rotational_stiffness: return rot_stiffness;
    case Dimension::rotational_damping: return rot_damping;
    case Dimension::rate_gain: return rate_gain;
    case Dimension::acceleration_gain: return accel_gain;
    case Dimension::stroke_per_angle: return stroke_angle;
    case Dimension::stroke_per_rate: return stroke_rate;
  }
  return none;
}

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::string expected(Dimension d) {
  std::string out;
  for (const auto& [suffix, scale] : table(d)) {
    if (suffix.empty()) continue;
    if (!out.empty()) out += ", ";
    out += suffix;
  }
  return out;
}

}  // namespace

std::string_view name(Dimension d) {
  switch (d) {
    case Dimension::dimensionless: return "dimensionless";
    case Dimension::length: return "length";
    case Dimension::mass: return "mass";
    case Dimension::time: return "time";
    case Dimension::frequency: return "frequency";
    case Dimension::angle: return "angle";
    case Dimension::force: return "force";
    case Dimension::load: return "load";
    case Dimension::pressure: return "pressure";
    case Dimension::density: return "density";
    case Dimension::current: return "current";
    case Dimension::velocity: return "velocity";
    case Dimension::area: return "area";
    case Dimension::inertia: return "inertia";
    case Dimension::torque: return "torque";
    case Dimension::rotational_stiffness: return "rotational stiffness";
    case Dimension::rotational_damping: return "rotational damping";
    case Dimension::rate_gain: return "rate gain";
    case Dimension::acceleration_gain: return "acceleration gain";
    case Dimension::stroke_per_angle: return "stroke per angle";
    case Dimension::stroke_per_rate: return "stroke per rate";
  }
  return "unknown";
}

std::string_view si_suffix(Dimension d) { return table(d).front().first; }

std::vector<std::string> suffixes(Dimension d) {
  std::vector<std::string> out;
  for (const auto& entry : table(d)) out.push_back(entry.first);
  return out;
}

namespace {

struct Split {
  double value = 0.0;
  std::string suffix;
};

Split split(std::string_view text) {
  const std::string s = trim(text);
  // Split at the end of the numeric prefix.
  std::size_t i = 0;
  const auto digit = [&](std::size_t k) { return k < s.size() && std::isdigit(static_cast<unsigned char>(s[k])); };
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
  while (digit(i)) ++i;
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (digit(i)) ++i;
  }
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E') &&
      (digit(i + 1) || ((i + 1 < s.size()) && (s[i + 1] == '+' || s[i + 1] == '-') && digit(i + 2)))) {
    i += 2;
    while (digit(i)) ++i;
  }
  const std::string number = s.substr(s.size() > 0 && s[0] == '+' ? 1 : 0, s[0] == '+' ? i - 1 : i);
  const std::string suffix = trim(std::string_view(s).substr(i));
  if (number.empty() || number == "-") throw ConfigError("'" + s + "' is not a number");
  Split out;
  try {
    out.value = csv::parse(number);
  } catch (const Error&) {
    throw ConfigError("'" + s + "' is not a number");
  }
  out.suffix = suffix;
  return out;
}

[[noreturn]] void unit_error(const std::string& s, const std::string& suffix, Dimension d) {
  if (d == Dimension::dimensionless) {
    throw ConfigError("'" + s + "' must be a plain number");
  }
  if (suffix.empty()) {
    throw ConfigError("missing unit suffix, expected " + std::string(name(d)) + " in one of: " + expected(d));
  }
  throw ConfigError("unit '" + suffix + "' is not a " + std::string(name(d)) + " unit, expected one of: " +
                    expected(d));
}

double scale_of(Dimension d, std::string_view suffix) {
  for (const auto& [sfx, scale] : table(d)) {
    if (sfx == suffix) return scale;
  }
  return -1.0;
}

}  // namespace

double parse(std::string_view text, Dimension d) {
  return parse(text, d, si_suffix(d));
}

double parse(std::string_view text, Dimension d, std::string_view target) {
  const Split sp = split(text);
  const double from = scale_of(d, sp.suffix);
  if (from < 0.0) unit_error(trim(text), sp.suffix, d);
  if (sp.suffix == target) return sp.value;
  const double to = scale_of(d, target);
  if (to < 0.0) throw ConfigError("internal unit '" + std::string(target) + "' is not a " + std::string(name(d)) + " unit");
  return sp.value * from / to;
}

std::string format(double si_value, Dimension d) {
  return csv::format(si_value) + std::string(si_suffix(d));
}

std::string format(double value, std::string_view suffix) {
  return csv::format(value) + std::string(suffix);
}

}  // namespace morphwing::units
