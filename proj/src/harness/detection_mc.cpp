#include <cmath>
#include <optional>
#include <stdexcept>

#include "cssense/harness.hpp"
#include "cssense/parallel.hpp"

namespace cssense {

Eigen::VectorXd nrz_waveform(std::size_t n, std::size_t symbol_len, double amplitude, Rng& rng) {
  if (symbol_len < 1) throw std::invalid_argument("nrz_waveform: symbol length must be >= 1");
  std::bernoulli_distribution coin(0.5);
  Eigen::VectorXd s(static_cast<Eigen::Index>(n));
  double level = amplitude;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % symbol_len == 0) level = coin(rng) ? amplitude : -amplitude;
    s[static_cast<Eigen::Index>(i)] = level;
  }
  return s;
}

namespace {

// Idle-when-large rules flip the comparison.
bool decide(Technique t, double stat, double lambda) {
  if (t == Technique::euclidean || t == Technique::wavelet) return stat < lambda;
  return stat >= lambda;
}

struct Trial {
  double stat = 0.0;
  double base_threshold = 0.0;
  bool h1 = false;
};

class Experiment {
 public:
  Experiment(const DetectionConfig& cfg, Technique tech, std::size_t tech_index)
      : cfg_(cfg), tech_(tech), seed_(derive_seed(cfg.base_seed, 1000 + tech_index)) {
    Rng rng = make_rng(derive_seed(seed_, 0xfeed));
    switch (tech_) {
      case Technique::energy:
        base_ = energy_threshold(cfg_.pfa_target, cfg_.n, cfg_.noise_variance);
        break;
      case Technique::autocorrelation: base_ = cfg_.autocorr_threshold; break;
      case Technique::euclidean: base_ = cfg_.euclid_threshold; break;
      case Technique::wavelet: base_ = cfg_.wavelet_threshold; break;
      case Technique::matched_filter:
        pilot_ = gen_pilot_qpsk(cfg_.n, derive_seed(seed_, 0xb11d));
        if (!cfg_.threshold_per_trial) {
          base_ = quiet_time_threshold(cfg_.noise_variance, *pilot_, 1.0, cfg_.quiet_runs, rng);
        }
        break;
      case Technique::compressive: {
        const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                    std::lround(cfg_.compress_ratio * static_cast<double>(cfg_.n))));
        omega_ = SensingMatrix::build(Scheme::circulant, m, cfg_.n, derive_seed(seed_, 0x0e9a),
                                      {.density = cfg_.density});
        tmpl_ = nrz_waveform(cfg_.n, cfg_.symbol_len, 1.0, rng);
        detector_.emplace(*omega_, tmpl_);
        // T under H0 is Gaussian with variance noise * S^T P S, P the row-space projector
        const double spread = std::sqrt(cfg_.noise_variance * omega_->apply(tmpl_).dot(detector_->weights()));
        base_ = q_inverse(cfg_.pfa_target) * spread;
        break;
      }
    }
  }

  Trial run(double snr_db, bool h1, Seed seed) const {
    Rng rng = make_rng(seed);
    const double noise = cfg_.noise_variance;
    const double sig_var = db_to_linear(snr_db) * noise;
    const auto n = cfg_.n;
    Trial t;
    t.h1 = h1;
    t.base_threshold = base_;
    switch (tech_) {
      case Technique::energy: {
        Eigen::VectorXd y = white_noise(n, noise, rng);
        if (h1) y += white_noise(n, sig_var, rng);
        t.stat = energy_detect(observed(y), 0.0).statistic;
        break;
      }
      case Technique::autocorrelation:
      case Technique::euclidean:
      case Technique::wavelet: {
        Eigen::VectorXd y = white_noise(n, noise, rng);
        if (h1) y += nrz_waveform(n, cfg_.symbol_len, std::sqrt(sig_var), rng);
        const NoisySignal obs = observed(y);
        if (tech_ == Technique::autocorrelation) t.stat = autocorr_detect(obs, 0.0).statistic;
        else if (tech_ == Technique::euclidean) t.stat = euclid_detect(obs, 0.0, cfg_.euclid_lags).statistic;
        else t.stat = wavelet_detect(obs, 0.0).statistic;
        break;
      }
      case Technique::matched_filter: {
        if (cfg_.threshold_per_trial) {
          t.base_threshold = quiet_time_threshold(noise, *pilot_, 1.0, cfg_.quiet_runs, rng);
        }
        NoisySignal y;
        y.complex_valued = true;
        y.samples = complex_white_noise(n, noise, rng);
        if (h1) y.samples += std::sqrt(sig_var) * pilot_->samples;
        t.stat = matched_filter_detect(y, *pilot_, 0.0).statistic;
        break;
      }
      case Technique::compressive: {
        Eigen::VectorXd x = white_noise(n, noise, rng);
        if (h1) x += std::sqrt(sig_var) * tmpl_;
        t.stat = detector_->statistic(omega_->apply(x));
        break;
      }
    }
    return t;
  }

  Seed seed() const { return seed_; }

 private:
  const DetectionConfig& cfg_;
  Technique tech_;
  Seed seed_;
  double base_ = 0.0;
  std::optional<PilotSignal> pilot_;
  std::optional<SensingMatrix> omega_;
  Eigen::VectorXd tmpl_;
  std::optional<CompressiveDetector> detector_;
};

}  // namespace

PdPfaCurve run_detection_mc(const DetectionConfig& cfg) {
  if (cfg.techniques.empty()) throw std::invalid_argument("detection experiment: no techniques");
  if (cfg.trials < 1) throw std::invalid_argument("detection experiment: trials must be >= 1");
  if (cfg.snr_grid_db.empty() || cfg.threshold_factors.empty()) {
    throw std::invalid_argument("detection experiment: empty grid");
  }
  if (cfg.n < 1) throw std::invalid_argument("detection experiment: n must be >= 1");
  if (!(cfg.noise_variance > 0.0)) throw std::invalid_argument("detection experiment: noise variance must be > 0");

  PdPfaCurve curve;
  for (std::size_t ti = 0; ti < cfg.techniques.size(); ++ti) {
    const Technique tech = cfg.techniques[ti];
    const Experiment exp(cfg, tech, ti);
    for (std::size_t si = 0; si < cfg.snr_grid_db.size(); ++si) {
      const double snr = cfg.snr_grid_db[si];
      const Seed h1_base = derive_seed(exp.seed(), 2 * si + 1);
      const Seed h0_base = derive_seed(exp.seed(), 2 * si);
      std::vector<Trial> h1(cfg.trials), h0(cfg.single_loop ? 0 : cfg.trials);
      parallel_for(cfg.trials, [&](std::size_t i) {
        if (cfg.single_loop) {
          const Seed s = derive_seed(h1_base, i);
          h1[i] = exp.run(snr, (splitmix64(s) & 1u) != 0, s);
        } else {
          h1[i] = exp.run(snr, true, derive_seed(h1_base, i));
          h0[i] = exp.run(snr, false, derive_seed(h0_base, i));
        }
      });
      for (const double factor : cfg.threshold_factors) {
        DetectionRow row;
        row.technique = std::string(to_string(tech));
        row.snr_db = snr;
        row.threshold_factor = factor;
        row.n = cfg.n;
        row.trials = cfg.trials;
        std::size_t n_h1 = 0, n_h0 = 0;
        auto tally = [&](const Trial& t) {
          const bool occ = decide(tech, t.stat, factor * t.base_threshold);
          if (t.h1) {
            ++n_h1;
            row.nd += occ;
          } else {
            ++n_h0;
            row.nf += occ;
          }
        };
        for (const auto& t : h1) tally(t);
        for (const auto& t : h0) tally(t);
        row.pd = n_h1 ? static_cast<double>(row.nd) / static_cast<double>(n_h1) : 0.0;
        row.pfa = n_h0 ? static_cast<double>(row.nf) / static_cast<double>(n_h0) : 0.0;
        curve.points.push_back(row);
      }
    }
  }
  return curve;
}

}  // namespace cssense
