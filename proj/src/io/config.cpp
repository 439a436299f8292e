#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

#include "cssense/io.hpp"

namespace cssense::io {

namespace {

// Reads typed fields and rejects keys nobody asked for.
class Reader {
 public:
  explicit Reader(const Json& doc, std::string where) : doc_(doc), where_(std::move(where)) {
    if (!doc_.is_object()) throw std::invalid_argument(where_ + ": expected an object");
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return doc_.contains(key);
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    try {
      return doc_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw std::invalid_argument(where_ + ": bad value for '" + key + "'");
    }
  }

  std::size_t count(const std::string& key, std::size_t fallback) {
    if (!has(key)) return fallback;
    const Json& v = doc_.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      throw std::invalid_argument(where_ + ": '" + key + "' must be a nonnegative integer");
    }
    return v.get<std::size_t>();
  }

  double real(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    return to_real(doc_.at(key), key);
  }

  std::vector<double> reals(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    const Json& v = doc_.at(key);
    if (!v.is_array()) throw std::invalid_argument(where_ + ": '" + key + "' must be an array");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(to_real(e, key));
    return out;
  }

  std::vector<std::size_t> counts(const std::string& key, std::vector<std::size_t> fallback) {
    if (!has(key)) return fallback;
    const Json& v = doc_.at(key);
    if (!v.is_array()) throw std::invalid_argument(where_ + ": '" + key + "' must be an array");
    std::vector<std::size_t> out;
    for (const auto& e : v) {
      if (!e.is_number_integer() || e.get<long long>() < 0) {
        throw std::invalid_argument(where_ + ": '" + key + "' entries must be nonnegative integers");
      }
      out.push_back(e.get<std::size_t>());
    }
    return out;
  }

  std::vector<std::string> strings(const std::string& key, std::vector<std::string> fallback) {
    return get<std::vector<std::string>>(key, std::move(fallback));
  }

  void finish() const {
    for (const auto& [key, value] : doc_.items()) {
      if (!used_.count(key)) throw std::invalid_argument(where_ + ": unknown key '" + key + "'");
    }
  }

 private:
  // null and "inf" stand for +infinity (noiseless)
  double to_real(const Json& v, const std::string& key) const {
    if (v.is_number()) return v.get<double>();
    if (v.is_null()) return std::numeric_limits<double>::infinity();
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
      if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    throw std::invalid_argument(where_ + ": '" + key + "' must be numeric");
  }

  const Json& doc_;
  std::string where_;
  std::set<std::string> used_;
};

void check_schema(Reader& r) {
  if (!r.has("schema")) throw std::invalid_argument("config: missing 'schema'");
  if (r.get<int>("schema", 0) != kSchemaVersion) {
    throw std::invalid_argument("config: unsupported schema version");
  }
  r.has("kind");
}

}  // namespace

Json load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config: " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config " + path.string() + ": " + e.what());
  }
}

std::string canonical_dump(const Json& doc) { return doc.dump(); }

std::string config_hash(const Json& doc) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : canonical_dump(doc)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentKind experiment_kind(const Json& doc) {
  if (!doc.is_object() || !doc.contains("kind") || !doc["kind"].is_string()) {
    throw std::invalid_argument("config: missing 'kind'");
  }
  const auto k = doc["kind"].get<std::string>();
  if (k == "detection_mc") return ExperimentKind::detection_mc;
  if (k == "recovery_mc") return ExperimentKind::recovery_mc;
  if (k == "scan_sim") return ExperimentKind::scan_sim;
  throw std::invalid_argument("config: unknown kind '" + k + "'");
}

DetectionConfig detection_config(const Json& doc) {
  Reader r(doc, "detection config");
  check_schema(r);
  DetectionConfig c;
  c.techniques.clear();
  for (const auto& t : r.strings("techniques", {"energy"})) c.techniques.push_back(parse_technique(t));
  c.n = r.count("n", c.n);
  c.trials = r.count("trials", c.trials);
  c.snr_grid_db = r.reals("snr_grid_db", c.snr_grid_db);
  c.threshold_factors = r.reals("threshold_factors", c.threshold_factors);
  c.base_seed = r.get<Seed>("base_seed", c.base_seed);
  c.noise_variance = r.real("noise_variance", c.noise_variance);
  c.pfa_target = r.real("pfa_target", c.pfa_target);
  c.quiet_runs = r.count("quiet_runs", c.quiet_runs);
  c.threshold_per_trial = r.get<bool>("threshold_per_trial", c.threshold_per_trial);
  c.single_loop = r.get<bool>("single_loop", c.single_loop);
  c.autocorr_threshold = r.real("autocorr_threshold", c.autocorr_threshold);
  c.euclid_threshold = r.real("euclid_threshold", c.euclid_threshold);
  c.wavelet_threshold = r.real("wavelet_threshold", c.wavelet_threshold);
  c.euclid_lags = r.count("euclid_lags", c.euclid_lags);
  c.symbol_len = r.count("symbol_len", c.symbol_len);
  c.compress_ratio = r.real("compress_ratio", c.compress_ratio);
  c.density = r.real("density", c.density);
  r.finish();
  if (c.techniques.empty()) throw std::invalid_argument("detection config: no techniques");
  if (c.trials < 1) throw std::invalid_argument("detection config: trials must be >= 1");
  if (c.snr_grid_db.empty() || c.threshold_factors.empty()) throw std::invalid_argument("detection config: empty grid");
  return c;
}

RecoveryConfig recovery_config(const Json& doc) {
  Reader r(doc, "recovery config");
  check_schema(r);
  RecoveryConfig c;
  c.solvers = r.strings("solvers", c.solvers);
  c.scheme = parse_scheme(r.get<std::string>("scheme", "gaussian"));
  if (r.has("n")) c.n_grid = {r.count("n", 0)};
  c.n_grid = r.counts("n_grid", c.n_grid);
  if (r.has("m")) c.m_grid = {r.count("m", 0)};
  c.m_grid = r.counts("m_grid", c.m_grid);
  c.m_ratio = r.real("m_ratio", c.m_ratio);
  c.k = r.count("k", c.k);
  c.k_ratio = r.real("k_ratio", c.k_ratio);
  c.snr_grid_db = r.reals("snr_grid_db", c.snr_grid_db);
  c.trials = r.count("trials", c.trials);
  c.base_seed = r.get<Seed>("base_seed", c.base_seed);
  c.matrix.density = r.real("density", c.matrix.density);
  c.matrix.random_rows = r.get<bool>("random_rows", c.matrix.random_rows);
  c.amplitude = parse_amplitude_law(r.get<std::string>("amplitude", "unit"));
  c.record_timing = r.get<bool>("record_timing", c.record_timing);
  c.bp_penalty = r.real("bp_penalty", c.bp_penalty);
  c.omp_rel_tol = r.real("omp_rel_tol", c.omp_rel_tol);
  r.finish();
  if (c.solvers.empty()) throw std::invalid_argument("recovery config: no solvers");
  if (c.trials < 1) throw std::invalid_argument("recovery config: trials must be >= 1");
  if (c.n_grid.empty() || c.snr_grid_db.empty()) throw std::invalid_argument("recovery config: empty grid");
  return c;
}

ScanSetup scan_setup(const Json& doc) {
  Reader r(doc, "scan config");
  check_schema(r);
  ScanSetup s;
  ScanConfig& c = s.config;
  c.slots = r.count("slots", c.slots);
  c.n = r.count("n", c.n);
  c.compress_ratio = r.real("compress_ratio", c.compress_ratio);
  c.density = r.real("density", c.density);
  c.energy_threshold = r.real("energy_threshold", c.energy_threshold);
  c.autocorr_threshold = r.real("autocorr_threshold", c.autocorr_threshold);
  c.euclid_threshold = r.real("euclid_threshold", c.euclid_threshold);
  c.euclid_lags = r.count("euclid_lags", c.euclid_lags);
  c.symbol_len = r.count("symbol_len", c.symbol_len);
  c.snr_grid_db = r.reals("snr_grid_db", c.snr_grid_db);
  c.noise_variance = r.real("noise_variance", c.noise_variance);
  c.snr_L = r.count("snr_L", c.snr_L);
  c.snr_K = r.count("snr_K", c.snr_K);
  c.estimate_snr = r.get<bool>("estimate_snr", c.estimate_snr);
  c.sample_budget = r.count("sample_budget", c.sample_budget);
  c.survey_period = r.real("survey_period", c.survey_period);
  c.base_seed = r.get<Seed>("base_seed", c.base_seed);
  s.traffic.busy_probability = r.real("busy_probability", s.traffic.busy_probability);
  s.traffic.diurnal_profile = r.reals("diurnal_profile", {});
  s.plan = default_band_plan();
  if (r.has("bands")) {
    s.plan.bands.clear();
    const Json& arr = doc.at("bands");
    if (!arr.is_array()) throw std::invalid_argument("scan config: 'bands' must be an array");
    for (const auto& b : arr) {
      Reader br(b, "band");
      Band band;
      band.name = br.get<std::string>("name", "");
      band.f_low_mhz = br.real("f_low_mhz", 0.0);
      band.f_high_mhz = br.real("f_high_mhz", 0.0);
      band.spacing_mhz = br.real("spacing_mhz", 0.0);
      band.channel_count = br.count("channel_count", 0);
      br.finish();
      s.plan.bands.push_back(band);
    }
  }
  r.finish();
  if (s.plan.total_channels() == 0) throw std::invalid_argument("scan config: band plan has no channels");
  return s;
}

}  // namespace cssense::io
