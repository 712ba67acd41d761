#include "morphwing/placement.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <random>

namespace morphwing::placement {

namespace {

using MatXc = Eigen::MatrixXcd;
using VecXc = Eigen::VectorXcd;
using TipSamples = Eigen::Matrix<double, Eigen::Dynamic, 3>;
constexpr std::complex<double> kJ{0.0, 1.0};

PrincipalComponents principal_axes(const Mat3& cov) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  PrincipalComponents pc;
  for (int i = 0; i < 3; ++i) {
    Vec3 v = es.eigenvectors().col(2 - i);
    const double tiny = 1e-12 * v.cwiseAbs().maxCoeff();
    for (int k = 0; k < 3; ++k) {
      if (std::abs(v(k)) > tiny) {
        if (v(k) < 0.0) v = -v;
        break;
      }
    }
    pc.vectors.col(i) = v;
    pc.variances(i) = std::max(0.0, es.eigenvalues()(2 - i));
  }
  return pc;
}

}  // namespace

PrincipalComponents wingtip_pca(const TipSamples& samples) {
  if (samples.rows() < 3) throw ConfigError("wingtip PCA needs at least three samples");
  if (!samples.allFinite()) throw NumericalError("non-finite state");
  const Eigen::RowVector3d mean = samples.colwise().mean();
  const TipSamples centered = samples.rowwise() - mean;
  const Mat3 cov = centered.transpose() * centered / static_cast<double>(samples.rows());
  const double scale = std::max(1.0, mean.norm() * mean.norm());
  if (!(cov.trace() > 1e-28 * scale)) throw NumericalError("degenerate trajectory");

  return principal_axes(cov);
}

Vec3 rotate_about(const Vec3& v, const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()) * v;
}

void PlacementProblem::validate() const {
  if (candidate_slots.empty()) throw ConfigError("placement needs at least one candidate slot");
  if (budget < 1) throw ConfigError("placement budget must be at least 1");
  if (v_desired.empty() || v_desired.size() > 3) {
    throw ConfigError("placement needs one to three desired directions");
  }
  for (const Vec3& v : v_desired) {
    if (std::abs(v.norm() - 1.0) > 1e-9) throw ConfigError("desired directions must be unit vectors");
  }
  if (tip_node >= structure.node_count) throw ConfigError("tip node out of range");
  if (!(gait.frequency > 0.0)) throw ConfigError("gait frequency must be positive");
  if (gait.loads.empty()) throw ConfigError("gait excitation needs at least one load");
  for (const auto& l : gait.loads) {
    if (l.node >= structure.node_count) throw ConfigError("gait load node out of range");
    if (l.harmonic < 1) throw ConfigError("gait load harmonic must be at least 1");
  }
  if (options.samples < 3) throw ConfigError("wingtip PCA needs at least three samples");
  if (!(options.angle_tolerance > 0.0)) throw ConfigError("angle tolerance must be positive");
  if (aero.state_dim() > 0 && aero.input_dim() != structure.state_dim()) {
    throw ConfigError("aero block must take the structure state as input");
  }
}

bool PlacementSolution::has_flag(const std::string& f) const {
  return std::find(flags.begin(), flags.end(), f) != flags.end();
}

namespace {

// Periodic steady-state machinery shared by evaluation and search.
class Engine {
 public:
  explicit Engine(const PlacementProblem& p) : problem_(p) {
    p.validate();
    const rgov::RGModel m = rgov::prestabilize(p.structure.a_blocks, p.structure.b_blocks, p.gains);
    a_ = m.a_y;
    n_ = a_.rows();
    w_ = 2.0 * kPi * p.gait.frequency;
    harmonics_ = p.options.harmonics;
    samples_ = p.options.samples;

    int hmax = static_cast<int>(harmonics_);
    for (const auto& l : p.gait.loads) hmax = std::max(hmax, l.harmonic);
    lu_.resize(static_cast<std::size_t>(hmax) + 1);
    for (int h = 0; h <= hmax; ++h) {
      MatXc s = -a_.cast<std::complex<double>>();
      s.diagonal().array() += kJ * (w_ * h);
      lu_[static_cast<std::size_t>(h)] = Eigen::PartialPivLU<MatXc>(s);
    }

    // gait forcing amplitudes in state coordinates, per harmonic
    gait_input_.assign(static_cast<std::size_t>(hmax) + 1, VecXc::Zero(n_));
    const auto dofs = static_cast<Eigen::Index>(p.structure.dof_count());
    Eigen::LLT<MatX> mass(p.structure.mass);
    for (const auto& l : p.gait.loads) {
      VecX f = VecX::Zero(dofs);
      for (int c = 0; c < 6; ++c) {
        const Eigen::Index k = p.structure.dof_map[l.node * 6 + static_cast<std::size_t>(c)];
        if (k >= 0) f(k) += c < 3 ? l.force(c) : l.moment(c - 3);
      }
      VecXc u = VecXc::Zero(n_);
      u.tail(dofs) = mass.solve(f).cast<std::complex<double>>() * std::exp(kJ * l.phase);
      gait_input_[static_cast<std::size_t>(l.harmonic)] += u;
    }
    base_amp_.resize(gait_input_.size());
    for (std::size_t h = 0; h < gait_input_.size(); ++h) base_amp_[h] = lu_[h].solve(gait_input_[h]);

    // slot input columns
    const structure::AssembledStructure s = structure::with_slots(p.structure, p.candidate_slots);
    slot_b_ = s.b_blocks;
    slot_amp_.resize(p.candidate_slots.size());
    for (std::size_t c = 0; c < p.candidate_slots.size(); ++c) {
      const VecXc b = slot_b_.col(static_cast<Eigen::Index>(c)).cast<std::complex<double>>();
      for (std::size_t h = 0; h <= harmonics_; ++h) slot_amp_[c].push_back(lu_[h].solve(b));
    }

    times_.resize(samples_);
    for (std::size_t k = 0; k < samples_; ++k) {
      times_[k] = static_cast<double>(k) / static_cast<double>(samples_) / p.gait.frequency;
    }
    const Eigen::Index np = params_per_slot();
    basis_.resize(static_cast<Eigen::Index>(samples_), np);
    for (std::size_t k = 0; k < samples_; ++k) {
      const auto r = static_cast<Eigen::Index>(k);
      basis_(r, 0) = 1.0;
      for (std::size_t h = 1; h <= harmonics_; ++h) {
        const double arg = w_ * static_cast<double>(h) * times_[k];
        basis_(r, static_cast<Eigen::Index>(2 * h - 1)) = std::cos(arg);
        basis_(r, static_cast<Eigen::Index>(2 * h)) = std::sin(arg);
      }
    }
    gram_ = basis_.transpose() * basis_;

    tip_rows_.resize(3, n_);
    for (int c = 0; c < 3; ++c) tip_rows_.row(c) = p.structure.dof_selector(p.tip_node, c);
    tip_ref_ = p.structure.node_position(VecX::Zero(n_), p.tip_node);

    tip0_ = tip_samples(base_amp_);
    tip_gain_.resize(p.candidate_slots.size());
    for (std::size_t c = 0; c < p.candidate_slots.size(); ++c) {
      MatX g(3 * static_cast<Eigen::Index>(samples_), np);
      for (Eigen::Index j = 0; j < np; ++j) {
        std::vector<VecXc> amp(harmonics_ + 1, VecXc::Zero(n_));
        add_param(amp, c, j, 1.0);
        g.col(j) = tip_samples(amp) - tip_samples(std::vector<VecXc>(harmonics_ + 1, VecXc::Zero(n_)));
      }
      tip_gain_[c] = g;
    }
  }

  Eigen::Index params_per_slot() const { return static_cast<Eigen::Index>(2 * harmonics_ + 1); }
  const MatX& gram() const { return gram_; }
  const VecX& tip0() const { return tip0_; }
  const MatX& tip_gain(std::size_t slot) const { return tip_gain_[slot]; }
  std::size_t samples() const { return samples_; }
  const PlacementProblem& problem() const { return problem_; }

  Evaluation evaluate(const std::vector<std::size_t>& slots, const MatX& params) const {
    const Eigen::Index np = params_per_slot();
    if (params.rows() != np || params.cols() != static_cast<Eigen::Index>(slots.size())) {
      throw ConfigError("omega parameters must have one column of " + std::to_string(np) +
                        " coefficients per slot");
    }
    std::vector<VecXc> amp = base_amp_;
    for (std::size_t c = 0; c < slots.size(); ++c) {
      for (Eigen::Index j = 0; j < np; ++j) {
        add_param(amp, slots[c], j, params(j, static_cast<Eigen::Index>(c)));
      }
    }

    Evaluation ev;
    ev.times = times_;
    ev.omega_samples = basis_ * params;
    ev.objective = ev.omega_samples.squaredNorm();

    const auto ns = static_cast<Eigen::Index>(samples_);
    MatX y(n_, ns), yd(n_, ns);
    for (Eigen::Index k = 0; k < ns; ++k) {
      const double t = times_[static_cast<std::size_t>(k)];
      VecX v = VecX::Zero(n_), vd = VecX::Zero(n_);
      for (std::size_t h = 0; h < amp.size(); ++h) {
        const std::complex<double> e = std::exp(kJ * (w_ * static_cast<double>(h) * t));
        v += (amp[h] * e).real();
        vd += (amp[h] * (kJ * (w_ * static_cast<double>(h))) * e).real();
      }
      y.col(k) = v;
      yd.col(k) = vd;
    }

    // Recompute the defining residual Y' - A_Y Y - B_Y omega - gait.
    MatX b(n_, static_cast<Eigen::Index>(slots.size()));
    for (std::size_t c = 0; c < slots.size(); ++c) {
      b.col(static_cast<Eigen::Index>(c)) = slot_b_.col(static_cast<Eigen::Index>(slots[c]));
    }
    // Residuals are reported as backward errors: |r| / (|A| |Y| + |Y'| + |B w| + |g|).
    const double a_norm = a_.cwiseAbs().rowwise().sum().maxCoeff();
    double worst = 0.0, scale = 0.0;
    for (Eigen::Index k = 0; k < ns; ++k) {
      const double t = times_[static_cast<std::size_t>(k)];
      VecX g = VecX::Zero(n_);
      for (std::size_t h = 0; h < gait_input_.size(); ++h) {
        g += (gait_input_[h] * std::exp(kJ * (w_ * static_cast<double>(h) * t))).real();
      }
      const VecX bw = b * ev.omega_samples.row(k).transpose();
      const VecX r = yd.col(k) - a_ * y.col(k) - bw - g;
      worst = std::max(worst, r.cwiseAbs().maxCoeff());
      scale = std::max(scale, a_norm * y.col(k).cwiseAbs().maxCoeff() + yd.col(k).cwiseAbs().maxCoeff() +
                                  bw.cwiseAbs().maxCoeff() + g.cwiseAbs().maxCoeff());
    }
    ev.dynamics_residual = scale > 0.0 ? worst / scale : worst;

    ev.tip.resize(ns, 3);
    for (Eigen::Index k = 0; k < ns; ++k) {
      ev.tip.row(k) = (tip_ref_ + tip_rows_ * y.col(k)).transpose();
    }
    ev.pcs = wingtip_pca(ev.tip);
    ev.pc_residual = angles(ev.pcs);

    const aero::AeroModel& aero = problem_.aero;
    if (aero.state_dim() > 0) {
      const auto nx = static_cast<Eigen::Index>(aero.state_dim());
      MatX xi(nx, ns), xid(nx, ns);
      xi.setZero();
      xid.setZero();
      for (std::size_t h = 0; h < amp.size(); ++h) {
        MatXc s = -aero.a_xi.cast<std::complex<double>>();
        s.diagonal().array() += kJ * (w_ * static_cast<double>(h));
        const VecXc xa = s.partialPivLu().solve(aero.b_xi.cast<std::complex<double>>() * amp[h]);
        for (Eigen::Index k = 0; k < ns; ++k) {
          const std::complex<double> e =
              std::exp(kJ * (w_ * static_cast<double>(h) * times_[static_cast<std::size_t>(k)]));
          xi.col(k) += (xa * e).real();
          xid.col(k) += (xa * (kJ * (w_ * static_cast<double>(h))) * e).real();
        }
      }
      const double ax_norm = aero.a_xi.cwiseAbs().rowwise().sum().maxCoeff();
      const double bx_norm = aero.b_xi.cwiseAbs().rowwise().sum().maxCoeff();
      double aw = 0.0, as = 0.0;
      for (Eigen::Index k = 0; k < ns; ++k) {
        const VecX r = xid.col(k) - aero.a_xi * xi.col(k) - aero.b_xi * y.col(k);
        aw = std::max(aw, r.cwiseAbs().maxCoeff());
        as = std::max(as, ax_norm * xi.col(k).cwiseAbs().maxCoeff() +
                              bx_norm * y.col(k).cwiseAbs().maxCoeff() +
                              xid.col(k).cwiseAbs().maxCoeff());
      }
      ev.aero_residual = as > 0.0 ? aw / as : aw;
      ev.y2 = (aero.c_xi * xi + aero.d_xi * y).transpose();
    }
    return ev;
  }

  VecX angles(const PrincipalComponents& pcs) const {
    VecX r(static_cast<Eigen::Index>(problem_.v_desired.size()));
    for (std::size_t i = 0; i < problem_.v_desired.size(); ++i) {
      const double c = std::min(1.0, std::abs(pcs.vectors.col(static_cast<Eigen::Index>(i)).dot(
                                         problem_.v_desired[i])));
      r(static_cast<Eigen::Index>(i)) = std::acos(c);
    }
    return r;
  }

 private:
  void add_param(std::vector<VecXc>& amp, std::size_t slot, Eigen::Index j, double value) const {
    if (value == 0.0) return;
    if (j == 0) {
      amp[0] += slot_amp_[slot][0] * value;
      return;
    }
    const auto h = static_cast<std::size_t>((j + 1) / 2);
    const std::complex<double> phase = (j % 2 == 1) ? std::complex<double>(1.0) : -kJ;
    amp[h] += slot_amp_[slot][h] * (phase * value);
  }

  VecX tip_samples(const std::vector<VecXc>& amp) const {
    const auto ns = static_cast<Eigen::Index>(samples_);
    VecX out(3 * ns);
    for (Eigen::Index k = 0; k < ns; ++k) {
      const double t = times_[static_cast<std::size_t>(k)];
      Vec3 p = tip_ref_;
      for (std::size_t h = 0; h < amp.size(); ++h) {
        const std::complex<double> e = std::exp(kJ * (w_ * static_cast<double>(h) * t));
        p += (tip_rows_.cast<std::complex<double>>() * amp[h] * e).real();
      }
      for (int c = 0; c < 3; ++c) out(c * ns + k) = p(c);
    }
    return out;
  }

  const PlacementProblem& problem_;
  MatX a_;
  Eigen::Index n_ = 0;
  double w_ = 0.0;
  std::size_t harmonics_ = 0;
  std::size_t samples_ = 0;
  std::vector<Eigen::PartialPivLU<MatXc>> lu_;
  std::vector<VecXc> gait_input_;
  std::vector<VecXc> base_amp_;
  MatX slot_b_;
  std::vector<std::vector<VecXc>> slot_amp_;
  std::vector<double> times_;
  MatX basis_;
  MatX gram_;
  MatX tip_rows_;
  Vec3 tip_ref_ = Vec3::Zero();
  VecX tip0_;
  std::vector<MatX> tip_gain_;
};

// Inner problem over a fixed subset of slots: min p^T W p subject to
// angle_i(p) <= tol, with p stacking each slot's Fourier coefficients.
class Inner {
 public:
  Inner(const Engine& engine, const std::vector<std::size_t>& slots) : engine_(engine) {
    const Eigen::Index np = engine.params_per_slot();
    const auto k = static_cast<Eigen::Index>(slots.size());
    dim_ = np * k;
    const auto ns = static_cast<Eigen::Index>(engine.samples());
    MatX g(engine.tip0().size(), dim_ + 1);
    g.col(0) = engine.tip0();
    w_ = MatX::Zero(dim_, dim_);
    for (Eigen::Index c = 0; c < k; ++c) {
      g.middleCols(1 + c * np, np) = engine.tip_gain(slots[static_cast<std::size_t>(c)]);
      w_.block(c * np, c * np, np, np) = engine.gram();
    }
    // Covariance is quadratic in [1; p]: cov_ab = z^T (U_a^T U_b) z / N with
    // U_a the centered samples of coordinate a per basis column.
    std::array<MatX, 3> u;
    for (int a = 0; a < 3; ++a) {
      u[a] = g.middleRows(a * ns, ns);
      u[a].rowwise() -= u[a].colwise().mean();
    }
    for (int a = 0; a < 3; ++a) {
      for (int b = a; b < 3; ++b) {
        cross_[a][b] = u[a].transpose() * u[b] / static_cast<double>(ns);
      }
    }
    w_inv_ = w_.inverse();
    tol_ = engine.problem().options.angle_tolerance;
  }

  Eigen::Index dim() const { return dim_; }
  double objective(const VecX& p) const { return p.dot(w_ * p); }

  VecX excess(const VecX& p) const {
    VecX z(dim_ + 1);
    z(0) = 1.0;
    z.tail(dim_) = p;
    Mat3 cov;
    for (int a = 0; a < 3; ++a) {
      for (int b = a; b < 3; ++b) cov(a, b) = cov(b, a) = z.dot(cross_[a][b] * z);
    }
    return engine_.angles(principal_axes(cov)).array() - tol_;
  }

  double merit(const VecX& p, double mu) const {
    const VecX e = excess(p).cwiseMax(0.0);
    return objective(p) + mu * e.squaredNorm();
  }

  bool feasible(const VecX& p) const { return excess(p).maxCoeff() <= 1e-10; }

  // Derivative-free coordinate search on the penalized merit.
  VecX coordinate_search(VecX p, double mu, double step, double min_step,
                         std::size_t max_evals) const {
    double best = merit(p, mu);
    std::size_t evals = 1;
    while (step > min_step && evals < max_evals) {
      bool improved = false;
      for (Eigen::Index i = 0; i < dim_ && evals < max_evals; ++i) {
        for (double dir : {1.0, -1.0}) {
          VecX q = p;
          q(i) += dir * step;
          const double m = merit(q, mu);
          ++evals;
          if (m < best) {
            best = m;
            p = q;
            improved = true;
            break;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    return p;
  }

  VecX penalty_descent(VecX p, double step) const {
    const double scale = static_cast<double>(engine_.samples());
    for (double mu : {1e2, 1e4, 1e6}) {
      p = coordinate_search(p, mu * scale, step, 1e-4, 1500);
      step = std::max(step * 0.25, 1e-3);
    }
    return p;
  }

  // Rows of the constraint Jacobian on `rows`, central differences.
  MatX jacobian(const VecX& p, const std::vector<Eigen::Index>& rows, double h) const {
    MatX jac(static_cast<Eigen::Index>(rows.size()), dim_);
    for (Eigen::Index j = 0; j < dim_; ++j) {
      VecX a = p, b = p;
      a(j) += h;
      b(j) -= h;
      const VecX ea = excess(a), eb = excess(b);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        jac(static_cast<Eigen::Index>(r), j) = (ea(rows[r]) - eb(rows[r])) / (2.0 * h);
      }
    }
    return jac;
  }

  // Newton iterations on the KKT system of min p^T W p s.t. c_A(p) = 0, with
  // an active-set update on the multiplier signs.
  bool polish(VecX& p) const {
    VecX e0 = excess(p);
    const VecX zero = VecX::Zero(dim_);
    if (e0.maxCoeff() <= -1e-3 && !feasible(zero)) {
      // strictly feasible: shrink toward the origin onto the boundary
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid * p) ? hi : lo) = mid;
      }
      p = hi * p;
      e0 = excess(p);
    }
    std::vector<Eigen::Index> active;
    for (Eigen::Index i = 0; i < e0.size(); ++i) {
      if (e0(i) > -1e-3) active.push_back(i);
    }
    VecX q = p;
    for (int round = 0; round < 4; ++round) {
      if (active.empty()) {
        const VecX z = VecX::Zero(dim_);
        if (!feasible(z)) return false;
        p = z;
        return true;
      }
      const auto m = static_cast<Eigen::Index>(active.size());
      MatX jac = jacobian(q, active, 1e-6);
      VecX nu = -(jac * jac.transpose()).completeOrthogonalDecomposition().solve(jac * (2.0 * w_ * q));
      bool converged = false;
      int flat = 0;
      for (int it = 0; it < 60; ++it) {
        MatX hess = 2.0 * w_;
        const double hh = 1e-4;
        for (Eigen::Index j = 0; j < dim_; ++j) {
          VecX a = q, b = q;
          a(j) += hh;
          b(j) -= hh;
          const MatX d = (jacobian(a, active, 1e-6) - jacobian(b, active, 1e-6)) / (2.0 * hh);
          hess.col(j) += d.transpose() * nu;
        }
        hess = 0.5 * (hess + hess.transpose()).eval();
        const VecX e = excess(q);
        VecX c(m);
        for (Eigen::Index r = 0; r < m; ++r) c(r) = e(active[static_cast<std::size_t>(r)]);
        MatX kkt = MatX::Zero(dim_ + m, dim_ + m);
        kkt.topLeftCorner(dim_, dim_) = hess;
        kkt.topRightCorner(dim_, m) = jac.transpose();
        kkt.bottomLeftCorner(m, dim_) = jac;
        VecX rhs(dim_ + m);
        rhs.head(dim_) = -(2.0 * w_ * q + jac.transpose() * nu);
        rhs.tail(m) = -c;
        const VecX step = kkt.fullPivLu().solve(rhs);
        if (!step.allFinite()) return false;

        // backtrack on an exact-penalty merit
        const double rho = 2.0 * nu.cwiseAbs().maxCoeff() + 1.0;
        auto merit_of = [&](const VecX& x) {
          const VecX ex = excess(x);
          double viol = 0.0;
          for (Eigen::Index r : active) viol += std::abs(ex(r));
          return objective(x) + rho * viol;
        };
        const double m0 = merit_of(q);
        double alpha = 1.0;
        VecX next = q + step.head(dim_);
        while (alpha > 1e-6 && merit_of(next) > m0 + 1e-14 * (1.0 + std::abs(m0))) {
          alpha *= 0.5;
          next = q + alpha * step.head(dim_);
        }
        const double change = (next - q).norm();
        const double before = objective(q);
        q = next;
        nu += alpha * step.tail(m);
        jac = jacobian(q, active, 1e-6);
        const VecX ex = excess(q);
        double viol = 0.0;
        for (Eigen::Index r : active) viol = std::max(viol, std::abs(ex(r)));
        // steps along directions that move neither objective nor bound are
        // finite-difference noise
        const double after = objective(q);
        flat = std::abs(after - before) <= 1e-13 * (1.0 + after) ? flat + 1 : 0;
        if ((change <= 1e-11 * (1.0 + q.norm()) || flat >= 3) && viol <= 1e-11) {
          converged = true;
          break;
        }
      }
      if (!converged) return false;
      // a negative multiplier means the bound is not binding: release it
      std::vector<Eigen::Index> keep;
      for (std::size_t r = 0; r < active.size(); ++r) {
        if (nu(static_cast<Eigen::Index>(r)) >= 0.0) keep.push_back(active[r]);
      }
      const VecX e = excess(q);
      for (Eigen::Index i = 0; i < e.size(); ++i) {
        if (e(i) > 1e-10 && std::find(keep.begin(), keep.end(), i) == keep.end()) keep.push_back(i);
      }
      std::sort(keep.begin(), keep.end());
      if (keep == active) {
        if (e.maxCoeff() > 1e-10) return false;
        p = q;
        return true;
      }
      active = keep;
    }
    return false;
  }

 private:
  const Engine& engine_;
  Eigen::Index dim_ = 0;
  std::array<std::array<MatX, 3>, 3> cross_;
  MatX w_;
  MatX w_inv_;
  double tol_ = 0.0;
};

struct SubsetResult {
  std::vector<std::size_t> slots;
  VecX p;
  double objective = std::numeric_limits<double>::infinity();
  double worst_excess = std::numeric_limits<double>::infinity();
  bool feasible = false;
};

// Keep the better of two candidates; feasibility first, then objective,
// then worst excess. Earlier candidates win ties.
void consider(SubsetResult& best, const Inner& inner, const VecX& p,
              const std::vector<std::size_t>& slots) {
  SubsetResult r;
  r.slots = slots;
  r.p = p;
  r.objective = inner.objective(p);
  r.worst_excess = inner.excess(p).maxCoeff();
  r.feasible = r.worst_excess <= 1e-10;
  const double tie = 1e-9 * (1.0 + std::min(r.objective, best.objective));
  bool better = false;
  if (r.feasible != best.feasible) {
    better = r.feasible;
  } else if (r.feasible) {
    better = r.objective < best.objective - tie;
  } else {
    better = r.worst_excess < best.worst_excess - 1e-12;
  }
  if (better) best = r;
}

VecX polished_or(const Inner& inner, const VecX& p) {
  VecX q = p;
  if (inner.polish(q)) return q;
  return p;
}

SubsetResult solve_subset(const Engine& engine, const std::vector<std::size_t>& slots) {
  const Inner inner(engine, slots);
  SubsetResult best;
  best.slots = slots;
  const VecX zero = VecX::Zero(inner.dim());
  if (inner.feasible(zero)) {
    consider(best, inner, zero, slots);
    return best;
  }
  const PlacementOptions& opt = engine.problem().options;
  std::vector<VecX> starts{zero};
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> u(-opt.start_radius, opt.start_radius);
  for (std::size_t s = 0; s < opt.random_starts; ++s) {
    VecX p(inner.dim());
    for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = u(rng);
    starts.push_back(p);
  }
  for (const VecX& s : starts) {
    const VecX p = inner.penalty_descent(s, std::max(0.25, opt.start_radius * 0.5));
    consider(best, inner, polished_or(inner, p), slots);
  }
  return best;
}

SubsetResult grid_subset(const Engine& engine, const std::vector<std::size_t>& slots) {
  const Inner inner(engine, slots);
  SubsetResult best;
  best.slots = slots;
  const VecX zero = VecX::Zero(inner.dim());
  if (inner.feasible(zero)) {
    consider(best, inner, zero, slots);
    return best;
  }
  const PlacementOptions& opt = engine.problem().options;
  const Eigen::Index np = engine.params_per_slot();
  const std::size_t axes = 2 * slots.size();  // (a1, b1) per slot
  const std::size_t g = std::max<std::size_t>(2, opt.grid_points);
  std::size_t total = 1;
  for (std::size_t a = 0; a < axes; ++a) total *= g;

  const double mu = 1e6 * static_cast<double>(engine.samples());
  std::vector<std::pair<double, VecX>> ranked;
  for (std::size_t idx = 0; idx < total; ++idx) {
    VecX p = VecX::Zero(inner.dim());
    std::size_t rem = idx;
    for (std::size_t a = 0; a < axes; ++a) {
      const double v =
          -opt.grid_radius + 2.0 * opt.grid_radius * static_cast<double>(rem % g) / static_cast<double>(g - 1);
      rem /= g;
      p(static_cast<Eigen::Index>(a / 2) * np + 1 + static_cast<Eigen::Index>(a % 2)) = v;
    }
    ranked.emplace_back(inner.merit(p, mu), p);
  }
  // discrete local minima of the grid merit, best first
  std::vector<std::size_t> minima;
  for (std::size_t idx = 0; idx < total; ++idx) {
    bool lowest = true;
    std::size_t stride = 1;
    for (std::size_t a = 0; a < axes && lowest; ++a, stride *= g) {
      const std::size_t coord = (idx / stride) % g;
      if (coord > 0 && ranked[idx - stride].first < ranked[idx].first) lowest = false;
      if (coord + 1 < g && ranked[idx + stride].first < ranked[idx].first) lowest = false;
    }
    if (lowest) minima.push_back(idx);
  }
  std::stable_sort(minima.begin(), minima.end(),
                   [&](std::size_t x, std::size_t y) { return ranked[x].first < ranked[y].first; });
  if (minima.size() > 6) minima.resize(6);
  const double step = opt.grid_radius / static_cast<double>(g - 1);
  std::vector<VecX> starts{zero};
  for (std::size_t idx : minima) starts.push_back(ranked[idx].second);
  for (const VecX& s : starts) {
    const VecX p = inner.penalty_descent(s, step);
    consider(best, inner, polished_or(inner, p), slots);
  }
  return best;
}

std::vector<std::vector<std::size_t>> subsets(std::size_t n, std::size_t budget) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur;
  auto rec = [&](auto&& self, std::size_t start) -> void {
    if (!cur.empty()) out.push_back(cur);
    if (cur.size() == budget) return;
    for (std::size_t i = start; i < n; ++i) {
      cur.push_back(i);
      self(self, i + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t subset_count(std::size_t n, std::size_t budget) {
  std::size_t total = 0;
  double c = 1.0;
  for (std::size_t k = 1; k <= std::min(n, budget); ++k) {
    c = c * static_cast<double>(n - k + 1) / static_cast<double>(k);
    total += static_cast<std::size_t>(c);
  }
  return total;
}

// Subset-level choice: feasibility, objective with the tie tolerance, then
// lexicographically smallest index list.
bool subset_better(const SubsetResult& a, const SubsetResult& b) {
  if (a.feasible != b.feasible) return a.feasible;
  if (a.feasible) {
    const double tie = 1e-9 * (1.0 + std::min(a.objective, b.objective));
    if (std::abs(a.objective - b.objective) > tie) return a.objective < b.objective;
  } else if (std::abs(a.worst_excess - b.worst_excess) > 1e-12) {
    return a.worst_excess < b.worst_excess;
  }
  return a.slots < b.slots;
}

PlacementSolution finish(const Engine& engine, const SubsetResult& best, bool baseline_meets) {
  PlacementSolution sol;
  sol.chosen_slots = best.slots;
  const Eigen::Index np = engine.params_per_slot();
  sol.params = Eigen::Map<const MatX>(best.p.data(), np, static_cast<Eigen::Index>(best.slots.size()));
  sol.evaluation = engine.evaluate(sol.chosen_slots, sol.params);
  sol.objective = sol.evaluation.objective;
  sol.pc_residual = sol.evaluation.pc_residual;
  if (!best.feasible) sol.flags.emplace_back("pc_unmet");
  if (baseline_meets) sol.flags.emplace_back("degenerate");
  return sol;
}

template <typename Solve>
PlacementSolution search(const PlacementProblem& problem, Solve solve, bool allow_greedy) {
  const Engine engine(problem);
  const std::size_t n = problem.candidate_slots.size();
  const std::size_t budget = std::min(problem.budget, n);

  SubsetResult best;
  if (!allow_greedy || subset_count(n, budget) <= problem.options.exhaustive_limit) {
    for (const auto& s : subsets(n, budget)) {
      const SubsetResult r = solve(engine, s);
      if (best.slots.empty() || subset_better(r, best)) best = r;
    }
  } else {
    std::vector<std::size_t> chosen;
    for (std::size_t round = 0; round < budget; ++round) {
      SubsetResult round_best;
      for (std::size_t i = 0; i < n; ++i) {
        if (std::find(chosen.begin(), chosen.end(), i) != chosen.end()) continue;
        std::vector<std::size_t> s = chosen;
        s.push_back(i);
        std::sort(s.begin(), s.end());
        const SubsetResult r = solve(engine, s);
        if (round_best.slots.empty() || subset_better(r, round_best)) round_best = r;
      }
      if (best.slots.empty() || subset_better(round_best, best)) best = round_best;
      chosen = round_best.slots;
    }
  }
  const Inner any(engine, {best.slots.front()});
  const bool baseline_meets = any.feasible(VecX::Zero(any.dim()));
  return finish(engine, best, baseline_meets);
}

}  // namespace

Evaluation evaluate_placement(const PlacementProblem& problem, const std::vector<std::size_t>& slots,
                              const OmegaParams& params) {
  if (slots.empty()) throw ConfigError("placement needs at least one slot");
  if (params.cols() != static_cast<Eigen::Index>(slots.size())) {
    throw ConfigError("one omega parameter column per listed slot is required");
  }
  std::vector<std::size_t> unique;
  std::vector<Eigen::Index> columns;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i] >= problem.candidate_slots.size()) throw ConfigError("slot index out of range");
    if (std::find(unique.begin(), unique.end(), slots[i]) == unique.end()) {
      unique.push_back(slots[i]);
      columns.push_back(static_cast<Eigen::Index>(i));
    }
  }
  MatX p(params.rows(), static_cast<Eigen::Index>(unique.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) p.col(static_cast<Eigen::Index>(c)) = params.col(columns[c]);
  const Engine engine(problem);
  return engine.evaluate(unique, p);
}

PlacementSolution optimize_placement(const PlacementProblem& problem) {
  return search(problem, solve_subset, true);
}

PlacementSolution brute_force_placement(const PlacementProblem& problem) {
  if (problem.candidate_slots.size() > 12 || problem.budget > 2) {
    throw ConfigError("oracle scale exceeded");
  }
  return search(problem, grid_subset, false);
}

}  // namespace morphwing::placement
