#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cssense/errors.hpp"
#include "cssense/sensing.hpp"

namespace cssense {

struct RecoveryResult {
  Eigen::VectorXd x_hat;
  std::size_t iterations = 0;
  std::size_t measurements_used = 0;
  bool converged = false;
  std::chrono::duration<double> recovery_time{0.0};
  std::vector<double> objective_trace;
  bool warning = false;  // dependent column skipped, or solver used outside its regime

  double time_ms() const { return recovery_time.count() * 1e3; }
};

struct BayesianResult {
  RecoveryResult base;
  double noise_variance_hat = 0.0;
  Eigen::VectorXd signal_variance_hat;  // posterior variance per coefficient, 0 when pruned
  Eigen::VectorXd hyper_a;              // per-coefficient precision, +inf when pruned
  double hyper_b = 0.0;                 // noise precision
};

struct SignVector {
  Eigen::VectorXd signs;
  std::size_t size() const { return static_cast<std::size_t>(signs.size()); }
};

struct SolverOpts {
  double tol = 1e-8;
  std::size_t max_iter = 5000;
  std::size_t power_iterations = 20;
  Seed seed = 0x5eed;
};

struct BayesOpts {
  double tol = 1e-6;
  std::size_t max_iter = 500;
  double prune_threshold = 1e12;
  /// Log-evidence charged per active coefficient (a geometric prior on
  /// support size). Negative selects ln(n)/2.
  double size_cost = -1.0;
};

/// OMP stops after `max_atoms` selections or when ||r|| <= rel_tol * ||y||,
/// whichever comes first.
struct StoppingRule {
  std::size_t max_atoms = 0;
  double rel_tol = 0.0;

  static StoppingRule sparsity(std::size_t k) { return {k, 1e-12}; }
  static StoppingRule tolerance(double rel, std::size_t cap) { return {cap, rel}; }
};

/// Largest squared singular value of A by power iteration.
double spectral_norm_sq(const SensingMatrix& a, std::size_t iterations, Seed seed);

/// min ||y - Ax||^2 + z ||x||_1 by proximal gradient.
RecoveryResult basis_pursuit(const MeasurementVector& y, const SensingMatrix& a, double z,
                             const SolverOpts& opts = {});
double bp_objective(const MeasurementVector& y, const SensingMatrix& a, const Eigen::VectorXd& x,
                    double z);

RecoveryResult omp(const MeasurementVector& y, const SensingMatrix& a, StoppingRule rule);

RecoveryResult cosamp(const MeasurementVector& y, const SensingMatrix& a, std::size_t k,
                      SolverOpts opts = {.tol = 1e-10, .max_iter = 100});

BayesianResult bayesian_recover(const MeasurementVector& y, const SensingMatrix& a,
                                const BayesOpts& opts = {});

SignVector one_bit_quantize(const MeasurementVector& y);
SignVector one_bit_quantize(const Eigen::VectorXd& values);

/// Number of i where signs[i] differs from sign((A x)[i]), with sign(0) = +1.
std::size_t sign_violations(const SignVector& signs, const Eigen::VectorXd& ax);

RecoveryResult biht_recover(const SignVector& signs, const SensingMatrix& a, std::size_t k,
                            SolverOpts opts = {.tol = 0.0, .max_iter = 300});

}  // namespace cssense
