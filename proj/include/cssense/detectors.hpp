#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <string_view>

#include "cssense/errors.hpp"
#include "cssense/sensing.hpp"
#include "cssense/signal.hpp"

namespace cssense {

enum class Technique { energy, autocorrelation, euclidean, wavelet, matched_filter, compressive };
enum class Decision { idle, occupied };

std::string_view to_string(Technique t);
Technique parse_technique(std::string_view name);

struct DetectionOutcome {
  double statistic = 0.0;
  double threshold = 0.0;
  Decision decision = Decision::idle;
  Technique technique = Technique::energy;
  std::size_t edge_count = 0;  // wavelet only: local maxima of |W|

  bool occupied() const { return decision == Decision::occupied; }
};

struct RocPoint {
  double pd = 0.0;
  double pfa = 0.0;
  double pmd = 0.0;
  double threshold = 0.0;
  double snr_db = 0.0;
  bool regime_warning = false;  // energy form used with n <= 250
};

/// Wrap raw samples without channel metadata.
NoisySignal observed(const Eigen::VectorXd& samples);
NoisySignal observed(const Eigen::VectorXcd& samples);

double q_function(double x);
double q_inverse(double p);

// ---------------------------------------------------------------------------
// Narrowband detectors

DetectionOutcome energy_detect(const NoisySignal& y, double lambda);

/// lambda = (Q^-1(pfa) sqrt(2n) + n) * noise_variance
double energy_threshold(double pfa_target, std::size_t n, double noise_variance);

/// Statistic |R(1)| / R(0) from the biased sample autocorrelation.
DetectionOutcome autocorr_detect(const NoisySignal& y, double margin_lambda);

/// Normalised sample autocorrelation at lags -max_lag..max_lag. Real part for
/// real signals, magnitude for complex ones.
Eigen::VectorXd normalized_acf(const NoisySignal& y, std::size_t max_lag);

/// Distance between the normalised autocorrelation and the triangle
/// 1 - 2|lag|/M. Idle when the distance reaches lambda.
DetectionOutcome euclid_detect(const NoisySignal& y, double lambda, std::size_t lag_count = 64);

struct WaveletOpts {
  double scale = 4.0;
  double support = 5.0;  // half-width of the kernel in units of `scale`
  bool invert = false;   // occupied when the edge reaches lambda
};

/// |FFT|^2 / N; bins 0..N/2 for real signals, all N bins for complex ones.
Eigen::VectorXd periodogram(const NoisySignal& y);
double mexican_hat(double t);
/// Single-scale Mexican-hat transform with zero padding at the edges.
Eigen::VectorXd wavelet_transform(const Eigen::VectorXd& psd, const WaveletOpts& opts);

/// Largest |W| over the transformed periodogram. Idle when it reaches lambda
/// unless opts.invert.
DetectionOutcome wavelet_detect(const NoisySignal& y, double lambda, const WaveletOpts& opts = {});

/// T = Re sum y(n) conj(x_p(n)).
DetectionOutcome matched_filter_detect(const NoisySignal& y, const PilotSignal& pilot,
                                       double lambda);

/// factor * mean over `runs` noise records of |sum w(n) conj(x_p(n))|. `noise`
/// holds the records back to back (runs * N samples).
double quiet_time_threshold(const Eigen::VectorXcd& noise, const PilotSignal& pilot,
                            double factor, std::size_t runs);
/// Draws the quiet-time records: circular complex noise of the given variance.
double quiet_time_threshold(double noise_variance, const PilotSignal& pilot, double factor,
                            std::size_t runs, Rng& rng);

// ---------------------------------------------------------------------------
// Compressive detector: T = y^T (Omega Omega^T)^-1 Omega S

class CompressiveDetector {
 public:
  CompressiveDetector(const SensingMatrix& omega, const Eigen::VectorXd& tmpl);
  double statistic(const Eigen::VectorXd& y) const;
  DetectionOutcome detect(const MeasurementVector& y, double lambda) const;
  const Eigen::VectorXd& weights() const { return weights_; }

 private:
  Eigen::VectorXd weights_;
};

DetectionOutcome compressive_detect(const MeasurementVector& y, const SensingMatrix& omega,
                                    const Eigen::VectorXd& tmpl, double lambda);

// ---------------------------------------------------------------------------
// Closed-form operating points

enum class RocTechnique { energy, matched_filter };

struct RocInputs {
  std::size_t n = 0;
  double noise_variance = 1.0;
  std::optional<double> snr_db;        // energy: signal variance = snr * noise variance
  std::optional<double> pilot_energy;  // matched filter
  double lambda = 0.0;
  /// Matched filter with circular complex noise: Re part carries half the variance.
  bool complex_noise = false;
};

RocPoint closed_form_roc(RocTechnique technique, const RocInputs& in);

}  // namespace cssense
