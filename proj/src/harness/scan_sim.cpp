#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cssense/harness.hpp"
#include "cssense/parallel.hpp"
#include "cssense/snr.hpp"

namespace cssense {

std::size_t Band::implied_count() const {
  if (!(spacing_mhz > 0.0) || !(f_high_mhz > f_low_mhz)) return 0;
  // small slack so exact multiples are not lost to rounding
  return static_cast<std::size_t>(std::floor((f_high_mhz - f_low_mhz) / spacing_mhz + 1e-9));
}

std::size_t BandPlan::total_channels() const {
  std::size_t total = 0;
  for (const auto& b : bands) total += b.channel_count;
  return total;
}

BandPlan default_band_plan() {
  return BandPlan{{
      {"GSM-850 (D/L)", 869.0, 894.0, 3.2, 11},
      {"GSM-1900 (D/L)", 1930.0, 1990.0, 3.2, 25},
      {"Wi-Fi 2.4 GHz", 2402.0, 2497.0, 5.0, 20},
      {"Wi-Fi 5.8 GHz", 5725.0, 5875.0, 5.0, 31},
  }};
}

double TrafficModel::busy_at(std::size_t slot) const {
  double p = busy_probability;
  if (!diurnal_profile.empty()) p *= diurnal_profile[slot % diurnal_profile.size()];
  return std::clamp(p, 0.0, 1.0);
}

double scan_time_per_channel(double survey_period, std::size_t techniques, std::size_t channels) {
  if (techniques == 0 || channels == 0) throw std::invalid_argument("scan time: zero techniques or channels");
  return survey_period / static_cast<double>(techniques * channels);
}

namespace {

constexpr std::array<Technique, 3> kScanDetectors{Technique::energy, Technique::autocorrelation,
                                                  Technique::euclidean};

std::string tag(bool compressive, Technique t) {
  return std::string(compressive ? "compressive:" : "conventional:") + std::string(to_string(t));
}

bool run_detector(Technique t, const NoisySignal& y, const ScanConfig& cfg) {
  switch (t) {
    case Technique::energy:
      return energy_detect(y, cfg.energy_threshold * static_cast<double>(y.size())).occupied();
    case Technique::autocorrelation: return autocorr_detect(y, cfg.autocorr_threshold).occupied();
    case Technique::euclidean: return euclid_detect(y, cfg.euclid_threshold, cfg.euclid_lags).occupied();
    default: throw std::logic_error("scan detector");
  }
}

}  // namespace

OccupancyReport run_scan_sim(const ScanConfig& cfg, const BandPlan& plan,
                             const TrafficModel& traffic) {
  const std::size_t channels = plan.total_channels();
  if (channels == 0) throw std::invalid_argument("scan simulation: band plan has no channels");
  if (cfg.slots < 1) throw std::invalid_argument("scan simulation: slots must be >= 1");
  if (cfg.snr_grid_db.empty()) throw std::invalid_argument("scan simulation: empty SNR grid");
  const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(cfg.compress_ratio * static_cast<double>(cfg.n))));
  if (cfg.n <= cfg.euclid_lags || m <= cfg.euclid_lags) {
    throw std::invalid_argument("scan simulation: records must exceed the lag window");
  }

  const SensingMatrix omega = SensingMatrix::build(Scheme::circulant, m, cfg.n,
                                                   derive_seed(cfg.base_seed, 0x0e9a),
                                                   {.density = cfg.density, .random_rows = false});
  constexpr std::size_t per_cell = 2 * kScanDetectors.size();
  const std::size_t cells = cfg.slots * channels;
  std::vector<ScanRecord> records(cells * per_cell);

  parallel_for(cells, [&](std::size_t c) {
    const std::size_t slot = c / channels;
    const std::size_t ch = c % channels;
    Rng rng = make_rng(derive_seed(cfg.base_seed, c));
    const bool busy = std::bernoulli_distribution(traffic.busy_at(slot))(rng);
    const double snr = cfg.snr_grid_db[std::uniform_int_distribution<std::size_t>(0, cfg.snr_grid_db.size() - 1)(rng)];
    Eigen::VectorXd x = white_noise(cfg.n, cfg.noise_variance, rng);
    if (busy) x += nrz_waveform(cfg.n, cfg.symbol_len, std::sqrt(db_to_linear(snr) * cfg.noise_variance), rng);
    const double est = cfg.estimate_snr ? estimate_snr(x, cfg.snr_L, cfg.snr_K).snr_db
                                        : std::numeric_limits<double>::quiet_NaN();
    const NoisySignal full = observed(x);
    const NoisySignal compressed = observed(omega.apply(x));
    std::size_t r = c * per_cell;
    for (const bool comp : {true, false}) {
      for (const Technique t : kScanDetectors) {
        ScanRecord& rec = records[r++];
        rec.slot = slot;
        rec.channel = ch;
        rec.technique = tag(comp, t);
        rec.occupied = run_detector(t, comp ? compressed : full, cfg);
        rec.truth = busy;
        rec.true_snr_db = snr;
        rec.est_snr_db = est;
      }
    }
  });

  OccupancyReport rep;
  rep.records = std::move(records);
  rep.channels_scanned = channels;
  rep.survey_period = cfg.survey_period;
  rep.scan_time = scan_time_per_channel(cfg.survey_period, kScanDetectors.size(), channels);
  rep.channels_per_budget_conventional = cfg.sample_budget / cfg.n;
  rep.channels_per_budget_compressive = cfg.sample_budget / m;
  for (const auto& b : plan.bands) rep.band_checks.push_back({b.name, b.channel_count, b.implied_count()});

  struct Count {
    std::size_t hit = 0, busy = 0, fa = 0, idle = 0;
  };
  for (const bool comp : {true, false}) {
    for (const Technique t : kScanDetectors) {
      const std::string name = tag(comp, t);
      TechniqueSummary s;
      s.occupancy_pct.assign(cfg.slots, 0.0);
      Count total;
      std::map<double, Count> by_snr;
      for (const auto& rec : rep.records) {
        if (rec.technique != name) continue;
        if (rec.occupied) s.occupancy_pct[rec.slot] += 1.0;
        Count& bucket = by_snr[rec.true_snr_db];
        for (Count* k : {&total, &bucket}) {
          if (rec.truth) {
            ++k->busy;
            k->hit += rec.occupied;
          } else {
            ++k->idle;
            k->fa += rec.occupied;
          }
        }
      }
      for (double& o : s.occupancy_pct) o = 100.0 * o / static_cast<double>(channels);
      auto ratio = [](std::size_t a, std::size_t b) {
        return b ? static_cast<double>(a) / static_cast<double>(b) : std::numeric_limits<double>::quiet_NaN();
      };
      s.detection_rate = ratio(total.hit, total.busy);
      s.false_rate = ratio(total.fa, total.idle);
      for (const auto& [snr, k] : by_snr) {
        s.detection_rate_by_snr[snr] = ratio(k.hit, k.busy);
        s.false_rate_by_snr[snr] = ratio(k.fa, k.idle);
      }
      rep.techniques[name] = std::move(s);
    }
  }
  return rep;
}

}  // namespace cssense
