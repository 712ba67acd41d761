#include "morphwing/linear_system.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace morphwing {

namespace {

// Osborne balancing with power-of-two factors: x <- D^-1 x D, returns diag(D).
VecX balance(MatX& x) {
  VecX d = VecX::Ones(x.rows());
  for (int sweep = 0; sweep < 50; ++sweep) {
    bool changed = false;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double c = x.col(i).cwiseAbs().sum() - std::abs(x(i, i));
      const double r = x.row(i).cwiseAbs().sum() - std::abs(x(i, i));
      if (c == 0.0 || r == 0.0) continue;
      const double f = std::exp2(std::round(0.5 * std::log2(r / c)));
      if (f == 1.0) continue;
      changed = true;
      x.col(i) *= f;
      x.row(i) /= f;
      d(i) *= f;
    }
    if (!changed) break;
  }
  return d;
}

}  // namespace

Discretization discretize(const MatX& a, const MatX& b, double dt) {
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.cols();
  Discretization d;
  const bool diagonal = (a - MatX(a.diagonal().asDiagonal())).isZero(0.0);
  if (diagonal) {
    d.phi = MatX::Zero(n, n);
    d.gamma.resize(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double ai = a(i, i);
      d.phi(i, i) = std::exp(ai * dt);
      // (e^{a dt} - 1) / a, tending to dt as a -> 0
      const double g = std::abs(ai * dt) < 1e-12 ? dt : std::expm1(ai * dt) / ai;
      d.gamma.row(i) = g * b.row(i);
    }
    return d;
  }
  MatX aug = MatX::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = a * dt;
  aug.topRightCorner(n, m) = b * dt;
  const VecX scale = balance(aug);
  const MatX e = scale.asDiagonal() * aug.exp() * scale.cwiseInverse().asDiagonal();
  d.phi = e.topLeftCorner(n, n);
  d.gamma = e.topRightCorner(n, m);
  return d;
}

Eigen::VectorXcd eigenvalues(const MatX& a) {
  Eigen::EigenSolver<MatX> es(a, false);
  return es.eigenvalues();
}

double spectral_abscissa(const MatX& a) {
  if (a.size() == 0) return -HUGE_VAL;
  return eigenvalues(a).real().maxCoeff();
}

}  // namespace morphwing
