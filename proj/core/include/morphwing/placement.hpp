#pragma once

#include "morphwing/aero.hpp"
#include "morphwing/common.hpp"
#include "morphwing/rgov.hpp"
#include "morphwing/structure.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

// Primer placement: pick a subset of candidate slots and a periodic primer
// command that rotates the principal components of the wingtip loop onto
// desired directions with least actuation effort sum_k omega(t_k)^2.
namespace morphwing::placement {

/// Ordered principal components of a point cloud.
struct PrincipalComponents {
  Mat3 vectors = Mat3::Identity();  // column i is V_i
  Vec3 variances = Vec3::Zero();    // descending
};

/// PCA of wingtip samples (one row per sample). Components sorted by
/// descending variance; each is signed so its first nonzero coordinate is
/// positive.
PrincipalComponents wingtip_pca(const Eigen::Matrix<double, Eigen::Dynamic, 3>& samples);

/// Periodic load applied at a structure node: force/moment * cos(h W t + phase).
struct HarmonicLoad {
  std::size_t node = 0;
  Vec3 force = Vec3::Zero();   // N
  Vec3 moment = Vec3::Zero();  // N m
  int harmonic = 1;
  double phase = 0.0;  // rad
};

struct GaitExcitation {
  double frequency = 10.0;  // Hz
  std::vector<HarmonicLoad> loads;
};

struct PlacementOptions {
  std::size_t harmonics = 3;
  std::size_t samples = 200;                    // per gait period
  double angle_tolerance = 0.03490658503988659;  // rad (2 deg)
  std::uint64_t seed = 1;
  std::size_t random_starts = 4;
  double start_radius = 1.0;       // mm, random start box
  std::size_t grid_points = 9;     // per axis, brute-force oracle
  double grid_radius = 2.0;        // mm, brute-force oracle
  std::size_t exhaustive_limit = 5000;  // subsets; greedy beyond
};

struct PlacementProblem {
  structure::AssembledStructure structure;
  std::vector<structure::PrimerSlot> candidate_slots;
  std::vector<Vec3> v_desired;
  /// Aerodynamic block driven by the structure state (empty for none).
  aero::AeroModel aero;
  GaitExcitation gait;
  std::size_t tip_node = 0;
  std::size_t budget = 1;
  rgov::PrestabilizerGains gains;
  PlacementOptions options;

  void validate() const;
};

/// Per-slot Fourier coefficients [mean, a1, b1, a2, b2, ...] (mm), one
/// column per chosen slot: omega(t) = mean + sum a_h cos(h W t) + b_h sin(h W t).
using OmegaParams = MatX;

struct Evaluation {
  double objective = 0.0;
  VecX pc_residual;  // rad, one per desired direction
  PrincipalComponents pcs;
  double dynamics_residual = 0.0;  // max |Y' - A_Y Y - B_Y omega - gait| relative
  double aero_residual = 0.0;      // max |xi' - A xi - B Y| relative
  std::vector<double> times;
  MatX omega_samples;  // samples x slots
  Eigen::Matrix<double, Eigen::Dynamic, 3> tip;
  MatX y2;             // samples x outputs (empty without aero)
};

/// Pure evaluation of a placement; repeated slot indices are dropped (first
/// occurrence kept, with its parameter column).
Evaluation evaluate_placement(const PlacementProblem& problem, const std::vector<std::size_t>& slots,
                              const OmegaParams& params);

struct PlacementSolution {
  std::vector<std::size_t> chosen_slots;  // indices into candidate_slots
  OmegaParams params;
  double objective = 0.0;
  VecX pc_residual;
  std::vector<std::string> flags;  // "pc_unmet", "degenerate"
  Evaluation evaluation;

  bool has_flag(const std::string& f) const;
};

PlacementSolution optimize_placement(const PlacementProblem& problem);

/// Exhaustive verification search on a dense grid of first-harmonic
/// profiles refined by local descent. Guarded to 12 slots and budget 2.
PlacementSolution brute_force_placement(const PlacementProblem& problem);

/// Rotate `v` by `angle` about `axis` (Rodrigues).
Vec3 rotate_about(const Vec3& v, const Vec3& axis, double angle);

}  // namespace morphwing::placement
