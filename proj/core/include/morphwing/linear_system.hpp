#pragma once

#include "morphwing/common.hpp"

#include <Eigen/Eigenvalues>

namespace morphwing {

/// Zero-order-hold discretization x+ = phi x + gamma u, computed exactly
/// (closed form for diagonal A, augmented matrix exponential otherwise).
struct Discretization {
  MatX phi;
  MatX gamma;
};
Discretization discretize(const MatX& a, const MatX& b, double dt);

Eigen::VectorXcd eigenvalues(const MatX& a);

/// Largest real part of the spectrum.
double spectral_abscissa(const MatX& a);

inline bool is_hurwitz(const MatX& a) { return spectral_abscissa(a) < 0.0; }

}  // namespace morphwing
