#include "morphwing/rgov.hpp"

#include "morphwing/linear_system.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace morphwing::rgov {

PrestabilizerGains PrestabilizerGains::from_gait(double gait_frequency_hz, double zeta) {
  const double wn = 2.0 * 2.0 * kPi * gait_frequency_hz;
  PrestabilizerGains g;
  g.kp = wn * wn;
  g.kd = 2.0 * zeta * wn;
  return g;
}

RGModel prestabilize(const MatX& a, const MatX& b, const PrestabilizerGains& gains) {
  if (a.rows() != a.cols() || a.rows() % 2 != 0) {
    throw ConfigError("state matrix must be square over [y1; y1']");
  }
  if (b.rows() != a.rows()) throw ConfigError("input matrix row count mismatch");
  const Eigen::Index n = a.rows() / 2;
  RGModel m;
  m.a_y = a;
  m.b_y = b;
  std::vector<std::size_t> channels = gains.channels;
  if (channels.empty()) {
    for (Eigen::Index i = 0; i < n; ++i) channels.push_back(static_cast<std::size_t>(i));
  }
  for (std::size_t c : channels) {
    if (c >= static_cast<std::size_t>(n)) throw ConfigError("prestabilizer channel out of range");
    const auto i = static_cast<Eigen::Index>(c);
    m.a_y(n + i, i) -= gains.kp;
    m.a_y(n + i, n + i) -= gains.kd;
  }
  const Eigen::VectorXcd ev = eigenvalues(m.a_y);
  std::ostringstream bad;
  bool failed = false;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (!(ev(i).real() < 0.0)) {
      bad << (failed ? ", " : "") << ev(i).real() << (ev(i).imag() < 0 ? "" : "+") << ev(i).imag() << "i";
      failed = true;
    }
  }
  if (failed) throw NumericalError("pre-stabilization failed: " + bad.str());
  return m;
}

RGModel prestabilize(const structure::AssembledStructure& s, const PrestabilizerGains& gains) {
  return prestabilize(s.a_blocks, s.b_blocks, gains);
}

namespace {

// Rows of A_Y span ~16 decades (stiff axial modes against the identity
// block), so the rank test runs on the row-equilibrated matrix.
MatX solve_locus(const MatX& a, const MatX& rhs) {
  const VecX scale = a.cwiseAbs().rowwise().maxCoeff();
  if ((scale.array() <= 0.0).any()) throw NumericalError("singular A_Y");
  const VecX inv = scale.cwiseInverse();
  Eigen::FullPivLU<MatX> lu(inv.asDiagonal() * a);
  if (!lu.isInvertible()) throw NumericalError("singular A_Y");
  return lu.solve(inv.asDiagonal() * rhs);
}

}  // namespace

VecX equilibrium_locus(const RGModel& model, const VecX& omega) {
  if (omega.size() != model.b_y.cols()) throw ConfigError("omega dimension mismatch");
  return -solve_locus(model.a_y, model.b_y * omega);
}

MatX locus_direction(const RGModel& model) {
  return -solve_locus(model.a_y, model.b_y);
}

namespace {

struct Predictor {
  MatX phi;    // augmented transition over one prediction step
  MatX gamma;  // augmented input response
  MatX out;    // y2 = out * [Y; xi]
  MatX steady; // steady [Y; xi] per unit omega
  Eigen::Index ny = 0;
};

Predictor make_predictor(const RGModel& model, const aero::AeroModel& aero,
                         const GovernorOptions& options) {
  const Eigen::Index ny = model.a_y.rows();
  const Eigen::Index nx = aero.a_xi.rows();
  if (aero.b_xi.cols() != ny) throw ConfigError("aero input must be the governed state");
  if (!(options.horizon > 0.0) || options.horizon_steps == 0) {
    throw ConfigError("governor horizon must be positive");
  }
  MatX a = MatX::Zero(ny + nx, ny + nx);
  a.topLeftCorner(ny, ny) = model.a_y;
  a.bottomLeftCorner(nx, ny) = aero.b_xi;
  a.bottomRightCorner(nx, nx) = aero.a_xi;
  MatX b = MatX::Zero(ny + nx, model.b_y.cols());
  b.topRows(ny) = model.b_y;

  Predictor p;
  p.ny = ny;
  const Discretization d =
      discretize(a, b, options.horizon / static_cast<double>(options.horizon_steps));
  p.phi = d.phi;
  p.gamma = d.gamma;
  p.out.resize(aero.c_xi.rows(), ny + nx);
  p.out << aero.d_xi, aero.c_xi;
  p.steady = -a.partialPivLu().solve(b);
  return p;
}

VecX initial_augmented(const aero::AeroModel& aero, const VecX& state, const VecX& xi0) {
  const Eigen::Index ny = state.size();
  const Eigen::Index nx = aero.a_xi.rows();
  VecX z(ny + nx);
  z.head(ny) = state;
  if (xi0.size() == 0) {
    z.tail(nx) = -aero.a_xi.partialPivLu().solve(aero.b_xi * state);
  } else {
    if (xi0.size() != nx) throw ConfigError("wake state dimension mismatch");
    z.tail(nx) = xi0;
  }
  return z;
}

std::vector<VecX> run(const Predictor& p, const VecX& z0, const VecX& omega, std::size_t steps,
                      bool steady) {
  std::vector<VecX> y;
  y.reserve(steps + 2);
  VecX z = z0;
  const VecX forced = p.gamma * omega;
  y.push_back(p.out * z);
  for (std::size_t k = 0; k < steps; ++k) {
    z = p.phi * z + forced;
    y.push_back(p.out * z);
  }
  if (steady) y.push_back(p.out * (p.steady * omega));
  return y;
}

double scale_of(const std::vector<Constraint>& cs) {
  double s = 1.0;
  for (const auto& c : cs) s = std::max(s, std::abs(c.bound));
  return s;
}

bool admissible(const std::vector<Constraint>& cs, const std::vector<VecX>& y2) {
  return worst_violation(cs, y2) <= 1e-12 * scale_of(cs);
}

}  // namespace

double worst_violation(const std::vector<Constraint>& constraints, const std::vector<VecX>& y2) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& c : constraints) {
    for (const VecX& y : y2) {
      if (c.c.size() != y.size()) throw ConfigError("constraint width does not match y2");
      worst = std::max(worst, c.c.dot(y) - c.bound);
    }
  }
  return worst;
}

std::vector<VecX> predict_outputs(const RGModel& model, const aero::AeroModel& aero,
                                  const VecX& omega, const VecX& state, const VecX& xi0,
                                  const GovernorOptions& options) {
  const Predictor p = make_predictor(model, aero, options);
  return run(p, initial_augmented(aero, state, xi0), omega, options.horizon_steps, false);
}

GovernResult govern(const RGModel& model, const VecX& requested_omega, const VecX& current_state,
                    const aero::AeroModel& aero, const GovernorOptions& options, const VecX& xi0) {
  if (requested_omega.size() != model.b_y.cols()) throw ConfigError("omega dimension mismatch");
  if (current_state.size() != model.a_y.rows()) throw ConfigError("state dimension mismatch");
  if (!requested_omega.allFinite() || !current_state.allFinite()) {
    throw NumericalError("non-finite state");
  }
  for (const auto& c : model.y2_constraints) {
    if (c.bound < 0.0) throw InfeasibleError("constraint set excludes rest");
  }
  GovernResult r;
  r.omega = requested_omega;
  if (model.y2_constraints.empty()) return r;

  const Predictor p = make_predictor(model, aero, options);
  const VecX z0 = initial_augmented(aero, current_state, xi0);
  auto ok = [&](double lambda) {
    return admissible(model.y2_constraints, run(p, z0, lambda * requested_omega,
                                                options.horizon_steps, options.check_steady_state));
  };
  if (ok(1.0)) return r;
  r.feasible = ok(0.0);
  double lo = 0.0;
  double hi = 1.0;
  if (r.feasible) {
    while (hi - lo > options.tolerance) {
      const double mid = 0.5 * (lo + hi);
      (ok(mid) ? lo : hi) = mid;
    }
  }
  r.lambda = lo;
  r.omega = lo * requested_omega;
  return r;
}

std::pair<VecX, VecX> zero_dynamics_residual(const FullState& x, const gait::GaitReference& gait,
                                             double t) {
  return {x.q_active - gait.position(t), x.active_rates - gait.velocity(t)};
}

}  // namespace morphwing::rgov
