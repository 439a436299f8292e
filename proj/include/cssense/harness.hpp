#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "cssense/detectors.hpp"
#include "cssense/rng.hpp"
#include "cssense/sensing.hpp"

namespace cssense {

// ---------------------------------------------------------------------------
// Detection Monte Carlo

struct DetectionConfig {
  std::vector<Technique> techniques{Technique::energy};
  std::size_t n = 1000;
  std::size_t trials = 1000;
  std::vector<double> snr_grid_db{0.0};
  std::vector<double> threshold_factors{1.0};
  Seed base_seed = 1;
  double noise_variance = 1.0;
  /// Energy and compressive thresholds are set for this false-alarm rate.
  double pfa_target = 0.1;
  /// Quiet-time records averaged per threshold estimate (matched filter).
  std::size_t quiet_runs = 32;
  /// Re-estimate the quiet-time threshold inside every trial.
  bool threshold_per_trial = false;
  /// One loop with a random hypothesis per trial instead of separate H0/H1 runs.
  bool single_loop = false;
  /// Base thresholds for detectors without a closed-form calibration.
  double autocorr_threshold = 0.90;
  double euclid_threshold = 0.95;
  double wavelet_threshold = 1.0;
  std::size_t euclid_lags = 64;
  std::size_t symbol_len = 32;  // PU waveform symbol length (samples)
  double compress_ratio = 0.25;
  double density = 0.1;
};

struct DetectionRow {
  std::string technique;
  double snr_db = 0.0;
  double threshold_factor = 1.0;
  std::size_t n = 0;
  std::size_t trials = 0;
  std::size_t nd = 0;
  std::size_t nf = 0;
  double pd = 0.0;
  double pfa = 0.0;
};

struct PdPfaCurve {
  std::vector<DetectionRow> points;
};

PdPfaCurve run_detection_mc(const DetectionConfig& cfg);

/// Random-binary NRZ waveform: +-amplitude held for `symbol_len` samples.
Eigen::VectorXd nrz_waveform(std::size_t n, std::size_t symbol_len, double amplitude, Rng& rng);

// ---------------------------------------------------------------------------
// Recovery Monte Carlo

struct RecoveryConfig {
  std::vector<std::string> solvers{"bp", "omp", "bayesian"};
  Scheme scheme = Scheme::gaussian;
  std::vector<std::size_t> n_grid{256};
  /// Explicit measurement counts; when empty, m = round(m_ratio * n).
  std::vector<std::size_t> m_grid;
  double m_ratio = 0.5;
  /// Explicit sparsity; when 0, k = max(1, round(k_ratio * n)).
  std::size_t k = 0;
  double k_ratio = 0.05;
  /// +inf means noiseless.
  std::vector<double> snr_grid_db{30.0};
  std::size_t trials = 10;
  Seed base_seed = 1;
  MatrixOptions matrix;
  AmplitudeLaw amplitude = AmplitudeLaw::unit;
  bool record_timing = false;
  /// Basis pursuit penalty as a fraction of ||2 A^T y||_inf.
  double bp_penalty = 0.01;
  /// OMP stops at this relative residual; its atom cap is floor(m/2).
  double omp_rel_tol = 1e-6;
};

struct RecoveryRow {
  std::string solver;
  std::string scheme;
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t m = 0;
  double snr_db = 0.0;
  std::size_t trials = 0;
  double mean_re = 0.0;
  double mean_mse = 0.0;
  double mean_cc = 0.0;
  double mean_rsnr = 0.0;
  double mean_hd = 0.0;
  double mean_tr_ms = 0.0;
  double mean_tp_ms = 0.0;
  std::size_t failures = 0;     // not serialised
  double median_re = 0.0;       // not serialised
  double mean_sparsity = 0.0;   // not serialised
};

struct RecoveryReport {
  std::vector<RecoveryRow> rows;
};

RecoveryReport run_recovery_mc(const RecoveryConfig& cfg);

/// Outcome of one solver on one planted instance.
struct TrialOutcome {
  MetricBundle metrics;
  double recovery_ms = 0.0;
  double processing_ms = 0.0;
};

/// y = A x + w. The noise variance comes from the per-sample power of x,
/// ||x||^2 / (n * snr), the same reference add_awgn uses.
MeasurementVector measure(const SensingMatrix& a, const Eigen::VectorXd& x, double snr_db,
                          Seed noise_seed);

TrialOutcome run_solver(const std::string& solver, const SensingMatrix& a,
                        const SparseSignal& x, const MeasurementVector& y,
                        const RecoveryConfig& cfg);

// ---------------------------------------------------------------------------
// Wideband scan simulation

struct Band {
  std::string name;
  double f_low_mhz = 0.0;
  double f_high_mhz = 0.0;
  double spacing_mhz = 0.0;
  std::size_t channel_count = 0;

  std::size_t implied_count() const;
};

struct BandPlan {
  std::vector<Band> bands;
  std::size_t total_channels() const;
};

/// The four survey bands with their declared channel counts.
BandPlan default_band_plan();

struct TrafficModel {
  double busy_probability = 0.5;
  /// Multiplies busy_probability by profile[slot % size]; empty means flat.
  std::vector<double> diurnal_profile;

  double busy_at(std::size_t slot) const;
};

struct ScanConfig {
  std::size_t slots = 10;
  std::size_t n = 3072;
  double compress_ratio = 0.25;
  double density = 0.1;
  double energy_threshold = 1e-10;  // times the record length
  double autocorr_threshold = 0.90;
  double euclid_threshold = 0.95;
  std::size_t euclid_lags = 64;
  std::size_t symbol_len = 32;
  std::vector<double> snr_grid_db{-20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0};
  double noise_variance = 1.0;
  std::size_t snr_L = 10;
  std::size_t snr_K = 50;
  bool estimate_snr = true;
  std::size_t sample_budget = 3072 * 1000;
  double survey_period = 81.0;
  Seed base_seed = 1;
};

struct ScanRecord {
  std::size_t slot = 0;
  std::size_t channel = 0;
  std::string technique;  // "<path>:<detector>"
  bool occupied = false;
  bool truth = false;
  double true_snr_db = 0.0;  // not serialised
  double est_snr_db = 0.0;
};

struct TechniqueSummary {
  std::vector<double> occupancy_pct;  // per slot
  double detection_rate = 0.0;
  double false_rate = 0.0;
  std::map<double, double> detection_rate_by_snr;
  std::map<double, double> false_rate_by_snr;
};

struct BandCheck {
  std::string name;
  std::size_t declared = 0;
  std::size_t implied = 0;
  bool consistent() const { return declared == implied; }
};

struct OccupancyReport {
  std::vector<ScanRecord> records;
  std::map<std::string, TechniqueSummary> techniques;
  std::vector<BandCheck> band_checks;
  std::size_t channels_scanned = 0;
  std::size_t channels_per_budget_compressive = 0;
  std::size_t channels_per_budget_conventional = 0;
  double survey_period = 0.0;
  double scan_time = 0.0;  // survey period / (techniques * channels)
};

OccupancyReport run_scan_sim(const ScanConfig& cfg, const BandPlan& plan,
                             const TrafficModel& traffic);

/// Survey period split over every technique and channel.
double scan_time_per_channel(double survey_period, std::size_t techniques, std::size_t channels);

}  // namespace cssense
