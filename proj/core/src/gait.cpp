#include "morphwing/gait.hpp"

#include <Eigen/LU>

#include <cmath>

namespace morphwing::gait {

PeriodicSpline::PeriodicSpline(std::vector<double> knots, double period)
    : knots_(std::move(knots)), period_(period) {
  if (knots_.size() < 3) throw ConfigError("periodic spline needs at least three knots");
  if (!(period_ > 0.0)) throw ConfigError("spline period must be positive");
  const auto n = static_cast<Eigen::Index>(knots_.size());
  h_ = period_ / static_cast<double>(n);
  MatX a = MatX::Zero(n, n);
  VecX rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index prev = (i + n - 1) % n;
    const Eigen::Index next = (i + 1) % n;
    a(i, prev) += 1.0;
    a(i, i) += 4.0;
    a(i, next) += 1.0;
    rhs(i) = 6.0 / (h_ * h_) *
             (knots_[static_cast<std::size_t>(next)] - 2.0 * knots_[static_cast<std::size_t>(i)] +
              knots_[static_cast<std::size_t>(prev)]);
  }
  const VecX m = a.partialPivLu().solve(rhs);
  moments_.assign(m.data(), m.data() + m.size());
}

std::size_t PeriodicSpline::segment(double t, double& u) const {
  double phase = std::fmod(t, period_);
  if (phase < 0.0) phase += period_;
  auto i = static_cast<std::size_t>(phase / h_);
  if (i >= knots_.size()) i = knots_.size() - 1;
  u = phase - static_cast<double>(i) * h_;
  return i;
}

double PeriodicSpline::value(double t) const {
  double u = 0.0;
  const std::size_t i = segment(t, u);
  const std::size_t j = (i + 1) % knots_.size();
  const double a = (h_ - u) / h_;
  const double b = u / h_;
  return a * knots_[i] + b * knots_[j] +
         ((a * a * a - a) * moments_[i] + (b * b * b - b) * moments_[j]) * h_ * h_ / 6.0;
}

double PeriodicSpline::derivative(double t) const {
  double u = 0.0;
  const std::size_t i = segment(t, u);
  const std::size_t j = (i + 1) % knots_.size();
  const double a = (h_ - u) / h_;
  const double b = u / h_;
  return (knots_[j] - knots_[i]) / h_ +
         (-(3.0 * a * a - 1.0) * moments_[i] + (3.0 * b * b - 1.0) * moments_[j]) * h_ / 6.0;
}

double PeriodicSpline::second_derivative(double t) const {
  double u = 0.0;
  const std::size_t i = segment(t, u);
  const std::size_t j = (i + 1) % knots_.size();
  return ((h_ - u) * moments_[i] + u * moments_[j]) / h_;
}

namespace {
template <typename F>
VecX evaluate(const GaitReference& g, F f) {
  VecX out(static_cast<Eigen::Index>(g.channels.size()));
  for (std::size_t i = 0; i < g.channels.size(); ++i) out(static_cast<Eigen::Index>(i)) = f(g.channels[i]);
  return out;
}
}  // namespace

VecX GaitReference::position(double t) const {
  return evaluate(*this, [t](const PeriodicSpline& s) { return s.value(t); });
}

VecX GaitReference::velocity(double t) const {
  return evaluate(*this, [t](const PeriodicSpline& s) { return s.derivative(t); });
}

VecX GaitReference::acceleration(double t) const {
  return evaluate(*this, [t](const PeriodicSpline& s) { return s.second_derivative(t); });
}

GaitReference make_gait(const GaitShape& shape) {
  if (!(shape.frequency > 0.0)) throw ConfigError("gait frequency must be positive");
  const double period = 1.0 / shape.frequency;
  std::vector<double> flap(shape.knots);
  std::vector<double> elbow(shape.knots);
  for (std::size_t k = 0; k < shape.knots; ++k) {
    const double phase = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(shape.knots);
    flap[k] = shape.flap_mean + shape.flap_amplitude * std::cos(phase);
    elbow[k] = shape.elbow_mean + shape.elbow_amplitude * std::cos(phase - shape.elbow_phase);
  }
  GaitReference g;
  g.frequency = shape.frequency;
  const PeriodicSpline f(flap, period);
  const PeriodicSpline e(elbow, period);
  g.channels = {f, e, f, e};
  return g;
}

}  // namespace morphwing::gait
