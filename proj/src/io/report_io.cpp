#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "cssense/io.hpp"

namespace cssense::io {

const std::vector<std::string> kDetectionColumns{"technique", "snr_db", "threshold_factor", "n",
                                                 "trials", "nd", "nf", "pd", "pfa"};
const std::vector<std::string> kRecoveryColumns{
    "solver", "scheme", "n", "k", "m", "snr_db", "trials", "mean_re", "mean_mse",
    "mean_cc", "mean_rsnr", "mean_hd", "mean_tr_ms", "mean_tp_ms"};
const std::vector<std::string> kScanColumns{"slot", "channel", "technique", "decision", "truth",
                                            "est_snr_db"};

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 9);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  }
  return v;
}

namespace {

std::size_t parse_count(std::string_view s) {
  std::size_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("not a count: '" + std::string(s) + "'");
  }
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << fields[i];
  }
  out << '\n';
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

void expect_header(const Table& t, const std::vector<std::string>& cols,
                   const std::filesystem::path& path) {
  if (t.header != cols) throw std::runtime_error("unexpected CSV header in " + path.string());
  for (const auto& r : t.rows) {
    if (r.size() != cols.size()) throw std::runtime_error("ragged row in " + path.string());
  }
}

}  // namespace

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  Table t;
  std::string line;
  if (std::getline(in, line)) t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    t.rows.push_back(split(line));
  }
  return t;
}

void write_detection_csv(const PdPfaCurve& curve, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_row(out, kDetectionColumns);
  for (const auto& p : curve.points) {
    write_row(out, {p.technique, format_double(p.snr_db), format_double(p.threshold_factor),
                    std::to_string(p.n), std::to_string(p.trials), std::to_string(p.nd),
                    std::to_string(p.nf), format_double(p.pd), format_double(p.pfa)});
  }
  finish(out, path);
}

void write_recovery_csv(const RecoveryReport& report, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_row(out, kRecoveryColumns);
  for (const auto& r : report.rows) {
    write_row(out, {r.solver, r.scheme, std::to_string(r.n), std::to_string(r.k), std::to_string(r.m),
                    format_double(r.snr_db), std::to_string(r.trials), format_double(r.mean_re),
                    format_double(r.mean_mse), format_double(r.mean_cc), format_double(r.mean_rsnr),
                    format_double(r.mean_hd), format_double(r.mean_tr_ms), format_double(r.mean_tp_ms)});
  }
  finish(out, path);
}

void write_scan_csv(const OccupancyReport& report, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_row(out, kScanColumns);
  for (const auto& r : report.records) {
    write_row(out, {std::to_string(r.slot), std::to_string(r.channel), r.technique,
                    r.occupied ? "occupied" : "idle", r.truth ? "occupied" : "idle",
                    format_double(r.est_snr_db)});
  }
  finish(out, path);
}

PdPfaCurve read_detection_csv(const std::filesystem::path& path) {
  const Table t = read_table(path);
  expect_header(t, kDetectionColumns, path);
  PdPfaCurve c;
  for (const auto& f : t.rows) {
    DetectionRow r;
    r.technique = f[0];
    r.snr_db = parse_double(f[1]);
    r.threshold_factor = parse_double(f[2]);
    r.n = parse_count(f[3]);
    r.trials = parse_count(f[4]);
    r.nd = parse_count(f[5]);
    r.nf = parse_count(f[6]);
    r.pd = parse_double(f[7]);
    r.pfa = parse_double(f[8]);
    c.points.push_back(r);
  }
  return c;
}

RecoveryReport read_recovery_csv(const std::filesystem::path& path) {
  const Table t = read_table(path);
  expect_header(t, kRecoveryColumns, path);
  RecoveryReport rep;
  for (const auto& f : t.rows) {
    RecoveryRow r;
    r.solver = f[0];
    r.scheme = f[1];
    r.n = parse_count(f[2]);
    r.k = parse_count(f[3]);
    r.m = parse_count(f[4]);
    r.snr_db = parse_double(f[5]);
    r.trials = parse_count(f[6]);
    r.mean_re = parse_double(f[7]);
    r.mean_mse = parse_double(f[8]);
    r.mean_cc = parse_double(f[9]);
    r.mean_rsnr = parse_double(f[10]);
    r.mean_hd = parse_double(f[11]);
    r.mean_tr_ms = parse_double(f[12]);
    r.mean_tp_ms = parse_double(f[13]);
    rep.rows.push_back(r);
  }
  return rep;
}

std::vector<ScanRecord> read_scan_csv(const std::filesystem::path& path) {
  const Table t = read_table(path);
  expect_header(t, kScanColumns, path);
  std::vector<ScanRecord> out;
  for (const auto& f : t.rows) {
    ScanRecord r;
    r.slot = parse_count(f[0]);
    r.channel = parse_count(f[1]);
    r.technique = f[2];
    r.occupied = f[3] == "occupied";
    r.truth = f[4] == "occupied";
    r.est_snr_db = parse_double(f[5]);
    out.push_back(r);
  }
  return out;
}

namespace {

// JSON has no inf/nan; emit them as strings like the CSV does
Json num(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

}  // namespace

Json to_json(const PdPfaCurve& curve) {
  Json arr = Json::array();
  for (const auto& p : curve.points) {
    arr.push_back({{"technique", p.technique}, {"snr_db", num(p.snr_db)},
                   {"threshold_factor", num(p.threshold_factor)}, {"n", p.n}, {"trials", p.trials},
                   {"nd", p.nd}, {"nf", p.nf}, {"pd", num(p.pd)}, {"pfa", num(p.pfa)}});
  }
  return {{"kind", "detection_mc"}, {"points", arr}};
}

Json to_json(const RecoveryReport& report) {
  Json arr = Json::array();
  for (const auto& r : report.rows) {
    arr.push_back({{"solver", r.solver}, {"scheme", r.scheme}, {"n", r.n}, {"k", r.k}, {"m", r.m},
                   {"snr_db", num(r.snr_db)}, {"trials", r.trials}, {"mean_re", num(r.mean_re)},
                   {"mean_mse", num(r.mean_mse)}, {"mean_cc", num(r.mean_cc)},
                   {"mean_rsnr", num(r.mean_rsnr)}, {"mean_hd", num(r.mean_hd)},
                   {"mean_tr_ms", num(r.mean_tr_ms)}, {"mean_tp_ms", num(r.mean_tp_ms)}});
  }
  return {{"kind", "recovery_mc"}, {"rows", arr}};
}

Json to_json(const OccupancyReport& report) {
  Json techniques = Json::object();
  for (const auto& [name, s] : report.techniques) {
    Json by_snr = Json::array();
    for (const auto& [snr, rate] : s.detection_rate_by_snr) {
      by_snr.push_back({{"snr_db", num(snr)}, {"detection_rate", num(rate)},
                        {"false_rate", num(s.false_rate_by_snr.at(snr))}});
    }
    Json occ = Json::array();
    for (double o : s.occupancy_pct) occ.push_back(num(o));
    techniques[name] = {{"occupancy_pct", occ}, {"detection_rate", num(s.detection_rate)},
                        {"false_rate", num(s.false_rate)}, {"by_snr", by_snr}};
  }
  Json bands = Json::array();
  for (const auto& b : report.band_checks) {
    bands.push_back({{"name", b.name}, {"declared_channels", b.declared},
                     {"implied_channels", b.implied}, {"consistent", b.consistent()}});
  }
  return {{"kind", "scan_sim"},
          {"channels_scanned", report.channels_scanned},
          {"channels_per_budget", {{"compressive", report.channels_per_budget_compressive},
                                   {"conventional", report.channels_per_budget_conventional}}},
          {"survey_period", num(report.survey_period)},
          {"scan_time_per_channel", num(report.scan_time)},
          {"band_checks", bands},
          {"techniques", techniques}};
}

void write_json(const Json& doc, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
  finish(out, path);
}

Eigen::VectorXcd read_samples(const std::filesystem::path& path, bool* complex_valued) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read samples: " + path.string());
  std::vector<std::complex<double>> vals;
  bool any_complex = false;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line);
    try {
      if (f.size() == 1) {
        vals.emplace_back(parse_double(f[0]), 0.0);
      } else if (f.size() == 2) {
        vals.emplace_back(parse_double(f[0]), parse_double(f[1]));
        any_complex = true;
      } else {
        throw std::invalid_argument("expected 1 or 2 columns");
      }
    } catch (const std::invalid_argument&) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw std::invalid_argument("bad sample line in " + path.string() + ": " + line);
    }
    first = false;
  }
  if (complex_valued) *complex_valued = any_complex;
  Eigen::VectorXcd v(static_cast<Eigen::Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) v[static_cast<Eigen::Index>(i)] = vals[i];
  return v;
}

void write_vector_csv(const Eigen::VectorXd& v, const std::filesystem::path& path,
                      std::string_view column) {
  auto out = open_out(path);
  out << column << '\n';
  for (Eigen::Index i = 0; i < v.size(); ++i) out << format_double(v[i]) << '\n';
  finish(out, path);
}

}  // namespace cssense::io
