#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "cssense/rng.hpp"

namespace cssense {

enum class AmplitudeLaw { unit, gaussian, uniform };

AmplitudeLaw parse_amplitude_law(std::string_view name);

/// Length-n real vector with exactly `support.size()` nonzero spikes.
struct SparseSignal {
  Eigen::VectorXd samples;
  std::vector<std::size_t> support;  // sorted ascending
  Seed seed = 0;

  std::size_t size() const { return static_cast<std::size_t>(samples.size()); }
  std::size_t sparsity() const { return support.size(); }
};

/// QPSK pilot with symbols from {(+-1 +-j)/sqrt(2)}.
struct PilotSignal {
  Eigen::VectorXcd samples;
  double energy = 0.0;  // sum |x_p|^2
};

/// Received samples y = h s + w. Real-valued inputs keep a zero imaginary part
/// and `complex_valued == false`.
struct NoisySignal {
  Eigen::VectorXcd samples;
  double snr_db = 0.0;
  double noise_variance = 0.0;
  std::complex<double> channel_gain{1.0, 0.0};
  bool complex_valued = false;

  std::size_t size() const { return static_cast<std::size_t>(samples.size()); }
  Eigen::VectorXd real() const { return samples.real(); }
};

SparseSignal gen_sparse_signal(std::size_t n, std::size_t k, AmplitudeLaw law, Seed seed);

PilotSignal gen_pilot_qpsk(std::size_t n, Seed seed);

/// Unit-variance flat Rayleigh scalar (CN(0,1)).
std::complex<double> rayleigh_gain(Seed seed);

/// Adds white Gaussian noise at `snr_db` relative to the mean signal power.
/// snr_db = +inf returns a noiseless copy with noise_variance = 0.
NoisySignal add_awgn(const Eigen::VectorXd& signal, double snr_db, Seed seed,
                     std::complex<double> gain = {1.0, 0.0});
/// Circular complex noise: each of I/Q carries half the noise variance.
NoisySignal add_awgn(const Eigen::VectorXcd& signal, double snr_db, Seed seed,
                     std::complex<double> gain = {1.0, 0.0});

/// Noise-only record with the given total variance per sample.
Eigen::VectorXd white_noise(std::size_t n, double variance, Rng& rng);
Eigen::VectorXcd complex_white_noise(std::size_t n, double variance, Rng& rng);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double ratio) { return 10.0 * std::log10(ratio); }

// ---------------------------------------------------------------------------
// Metrics

struct MetricBundle {
  double recovery_error = 0.0;  // ||x_hat - x|| / ||x||
  double mse = 0.0;
  double correlation = 0.0;  // Pearson, in [-1, 1]
  double rsnr = 0.0;         // ||x||^2 / ||x - x_hat||^2 (linear)
  std::size_t hamming = 0;
  std::size_t recovered_sparsity = 0;
};

struct MetricOptions {
  /// Magnitude above which x_hat entries count as recovered spikes.
  /// Unset means 1e-6 * max|x_hat|.
  std::optional<double> zero_tol;
  /// When false, undefined quantities (zero-norm x, constant vectors) become
  /// NaN instead of throwing.
  bool strict = true;
};

double recovery_error(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat);
double mean_squared_error(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat);
double correlation_coefficient(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat);
double reconstruction_snr(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat);
std::size_t hamming_distance(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat);
std::size_t count_nonzero(const Eigen::VectorXd& x_hat, std::optional<double> zero_tol = {});

MetricBundle evaluate_metrics(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat,
                              const Eigen::VectorXd* y = nullptr,
                              const Eigen::VectorXd* y_hat = nullptr,
                              const MetricOptions& opts = {});

}  // namespace cssense
