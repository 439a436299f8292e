#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <vector>

#include "cssense/rng.hpp"

namespace cssense {

struct SnrEstimate {
  double snr_db = 0.0;
  double noise_variance_hat = 0.0;
  double total_power_hat = 0.0;
  std::size_t mdl_order = 0;
  std::size_t smoothing_L = 0;
  std::size_t grid_K = 0;
  double goodness_D = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  bool clamped = false;          // snr_db hit the floor
  bool bracket_swapped = false;  // lower bracket end exceeded the upper one
};

inline constexpr double kSnrFloorDb = -40.0;
/// Points used to discretise the noise-eigenvalue law and the common CDF grid.
inline constexpr std::size_t kMpPoints = 256;

/// Eigenvalues (descending) of (1/Nc) X X^H, where row i of the L x Nc data
/// matrix is the record delayed by i samples and Nc = N - L + 1.
Eigen::VectorXd smoothed_eigenvalues(const Eigen::VectorXcd& samples, std::size_t L);

/// Minimum-description-length split of `eigs` (descending) into signal and
/// noise groups. Ties go to the smaller order.
std::size_t mdl_order(const Eigen::VectorXd& eigs, std::size_t L, std::size_t N);
/// The criterion being minimised, for each order 0..L-1.
std::vector<double> mdl_scores(const Eigen::VectorXd& eigs, std::size_t L, std::size_t N);

/// Marchenko-Pastur density for aspect ratio `ratio` and noise variance
/// `variance`. Support is variance * (1 +- sqrt(ratio))^2.
double mp_density(double v, double ratio, double variance);

struct MpFit {
  double noise_variance = 0.0;
  double goodness_D = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  bool swapped = false;
  std::vector<double> candidates;
  std::vector<double> distances;
};

/// `eigs` is the full descending spectrum; the noise group is eigs[M_hat..L-1].
MpFit mp_fit(const Eigen::VectorXd& eigs, std::size_t L, std::size_t N, std::size_t M_hat,
             std::size_t K);

SnrEstimate estimate_snr(const Eigen::VectorXcd& samples, std::size_t L, std::size_t K);
SnrEstimate estimate_snr(const Eigen::VectorXd& samples, std::size_t L, std::size_t K);

// ---------------------------------------------------------------------------
// Particle-swarm tuning of (L, K)

struct IntRange {
  long lo = 0;
  long hi = 0;
};

struct PsoOpts {
  std::size_t swarm = 8;
  std::size_t iters = 20;
  Seed seed = 1;
  double inertia = 0.72;
  double cognitive = 1.49;
  double social = 1.49;
  /// When set, fitness is |snr_hat - known| in dB instead of the blind fit distance.
  std::optional<double> known_snr_db;
};

struct PsoResult {
  std::size_t L = 0;
  std::size_t K = 0;
  double best_fitness = 0.0;
  std::vector<double> gbest_trace;  // one entry per iteration, after the update
  std::size_t evaluations = 0;      // distinct (L, K) pairs scored
};

PsoResult pso_tune(const Eigen::VectorXcd& samples, IntRange L_bounds, IntRange K_bounds,
                   const PsoOpts& opts = {});

}  // namespace cssense
