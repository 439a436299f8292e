// Acceptance report: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cssense/detectors.hpp"
#include "cssense/harness.hpp"
#include "cssense/io.hpp"
#include "cssense/parallel.hpp"
#include "cssense/recovery.hpp"
#include "cssense/snr.hpp"

using namespace cssense;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double d : v) s += d;
  return s / static_cast<double>(v.size());
}

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

Verdict closed_form_vs_monte_carlo() {
  Verdict v;
  double worst = 0.0;
  for (double pfa : {0.01, 0.1}) {
    DetectionConfig c;
    c.techniques = {Technique::energy};
    c.n = 1000;
    c.trials = 10000;
    c.snr_grid_db = {-10.0, -5.0, 0.0};
    c.pfa_target = pfa;
    c.base_seed = 101;
    for (const auto& p : run_detection_mc(c).points) {
      RocInputs in;
      in.n = 1000;
      in.snr_db = p.snr_db;
      in.lambda = energy_threshold(pfa, 1000, 1.0);
      const RocPoint ref = closed_form_roc(RocTechnique::energy, in);
      worst = std::max({worst, std::fabs(p.pd - ref.pd), std::fabs(p.pfa - ref.pfa)});
    }
  }
  v.require(worst <= 0.02, "max |MC - closed form| = " + fmt("%.4f", worst));
  return v;
}

Verdict matched_filter_dynamic_threshold() {
  Verdict v;
  DetectionConfig c;
  c.techniques = {Technique::matched_filter};
  c.n = 1000;
  c.trials = 1000;
  c.snr_grid_db = {-20.0, -16.0, -12.0, -8.0, -4.0};
  c.threshold_factors = {1.0, 2.0, 3.0, 4.0};
  c.threshold_per_trial = true;
  c.quiet_runs = 1;
  c.base_seed = 202;
  const auto rows = run_detection_mc(c).points;
  auto at = [&](double snr, double f) {
    for (const auto& r : rows)
      if (r.snr_db == snr && r.threshold_factor == f) return r;
    throw std::logic_error("missing row");
  };
  const double pd_hi = at(-4.0, 1.0).pd, pd_lo = at(-20.0, 1.0).pd;
  v.require(pd_hi >= 0.95, "Pd(-4 dB) = " + fmt("%.3f", pd_hi));
  v.require(pd_hi > pd_lo, "Pd(-20 dB) = " + fmt("%.3f", pd_lo) + " < Pd(-4 dB)");
  bool mono = true;
  for (double snr : c.snr_grid_db) {
    for (std::size_t i = 1; i < c.threshold_factors.size(); ++i) {
      const auto a = at(snr, c.threshold_factors[i - 1]), b = at(snr, c.threshold_factors[i]);
      auto band = [&](double p, double q) {
        const double pp = std::max(p, q);
        return 2.0 * std::sqrt(pp * (1 - pp) / static_cast<double>(c.trials));
      };
      mono = mono && b.pd <= a.pd + band(a.pd, b.pd) && b.pfa <= a.pfa + band(a.pfa, b.pfa);
    }
  }
  v.require(mono, "Pd and Pfa nonincreasing in factor within 2 sigma");
  return v;
}

Verdict exact_recovery() {
  Verdict v;
  auto success_rate = [](bool use_cosamp, std::size_t m, bool& oracle_ok) {
    std::size_t ok = 0;
    oracle_ok = true;
    for (int s = 0; s < 100; ++s) {
      auto a = SensingMatrix::build(Scheme::gaussian, m, 256, derive_seed(301, s));
      auto x = gen_sparse_signal(256, 10, AmplitudeLaw::gaussian, derive_seed(302, s));
      MeasurementVector y{a.apply(x.samples), 0.0, false};
      // least squares on the planted support
      Eigen::MatrixXd d = a.dense(), sub(m, 10);
      for (int j = 0; j < 10; ++j) sub.col(j) = d.col(x.support[j]);
      Eigen::VectorXd coef = sub.colPivHouseholderQr().solve(y.values);
      Eigen::VectorXd oracle = Eigen::VectorXd::Zero(256);
      for (int j = 0; j < 10; ++j) oracle[x.support[j]] = coef[j];
      oracle_ok = oracle_ok && recovery_error(x.samples, oracle) < 1e-6;
      auto r = use_cosamp ? cosamp(y, a, 10) : omp(y, a, StoppingRule::sparsity(10));
      ok += recovery_error(x.samples, r.x_hat) < 1e-6 && (r.x_hat - oracle).norm() < 1e-6 * x.samples.norm();
    }
    return static_cast<double>(ok) / 100.0;
  };
  bool o1 = false, o2 = false;
  const double omp_rate = success_rate(false, 100, o1);
  const double cosamp_rate = success_rate(true, 120, o2);
  v.require(o1 && o2, "support oracle exact");
  v.require(omp_rate >= 0.95, "OMP " + fmt("%.2f", omp_rate));
  v.require(cosamp_rate >= 0.90, "CoSaMP " + fmt("%.2f", cosamp_rate));
  return v;
}

struct Instance {
  Scheme scheme;
  std::size_t n, k, m;
};

Verdict bayesian_ordering() {
  Verdict v;
  const Instance insts[] = {{Scheme::circulant, 200, 15, 80}, {Scheme::toeplitz, 400, 20, 123}};
  RecoveryConfig cfg;
  for (const auto& in : insts) {
    std::vector<double> re_bp, re_omp, re_bay;
    std::size_t within = 0;
    for (int s = 0; s < 50; ++s) {
      auto a = SensingMatrix::build(in.scheme, in.m, in.n, derive_seed(401, s));
      auto x = gen_sparse_signal(in.n, in.k, AmplitudeLaw::unit, derive_seed(402, s));
      auto y = measure(a, x.samples, 2.0, derive_seed(403, s));
      re_bp.push_back(run_solver("bp", a, x, y, cfg).metrics.recovery_error);
      re_omp.push_back(run_solver("omp", a, x, y, cfg).metrics.recovery_error);
      const auto b = run_solver("bayesian", a, x, y, cfg).metrics;
      re_bay.push_back(b.recovery_error);
      within += b.recovered_sparsity + 2 >= in.k && b.recovered_sparsity <= in.k + 2;
    }
    const std::string tag = std::string(to_string(in.scheme)) + " n=" + std::to_string(in.n) + " m=" +
                            std::to_string(in.m) + ": ";
    const double mb = median(re_bay), mp = median(re_bp), mo = median(re_omp);
    v.require(mb < mp && mb < mo, tag + "median Re bayes/bp/omp = " + fmt("%.3f", mb) + "/" +
                                      fmt("%.3f", mp) + "/" + fmt("%.3f", mo));
    v.require(within >= 40, tag + "sparsity within 2 in " + std::to_string(within) + "/50");
    if (in.m == 123) v.require(mb < 0.05, tag + "bayes median Re < 5%");
  }
  return v;
}

Verdict noise_robustness() {
  Verdict v;
  RecoveryConfig c;
  c.scheme = Scheme::toeplitz;
  c.n_grid = {400};
  c.m_grid = {123};
  c.k = 20;
  c.trials = 20;
  c.base_seed = 501;
  c.snr_grid_db.clear();
  for (double s = -10; s <= 10; s += 2) c.snr_grid_db.push_back(s);
  const auto rows = run_recovery_mc(c).rows;
  auto re = [&](const std::string& solver, double snr) {
    for (const auto& r : rows)
      if (r.solver == solver && r.snr_db == snr) return r.mean_re;
    throw std::logic_error("missing row");
  };
  for (const std::string solver : {"bp", "omp", "bayesian"}) {
    bool mono = true;
    for (std::size_t i = 1; i < c.snr_grid_db.size(); ++i)
      mono = mono && re(solver, c.snr_grid_db[i]) <= re(solver, c.snr_grid_db[i - 1]);
    v.require(mono, solver + " Re nonincreasing in SNR");
  }
  std::string losses;
  for (double snr : c.snr_grid_db) {
    if (snr > 4.0) continue;
    const double b = re("bayesian", snr);
    if (b > re("bp", snr) || b > re("omp", snr)) losses += fmt(" %g", snr);
  }
  v.require(losses.empty(), "bayes <= bp, omp for SNR <= 4 dB" + (losses.empty() ? "" : " (loses at" + losses + ")"));

  // Fixed 15-spike signal as in the circulant study; only N and m = N/2 grow.
  RecoveryConfig g;
  g.scheme = Scheme::circulant;
  g.solvers = {"bp", "bayesian"};
  g.n_grid = {50, 100, 200, 400};
  g.m_ratio = 0.5;
  g.k = 15;
  g.snr_grid_db = {10.0};
  g.trials = 20;
  g.base_seed = 502;
  const auto grows = run_recovery_mc(g).rows;
  for (const std::string solver : {"bp", "bayesian"}) {
    std::vector<double> mse;
    for (const auto& r : grows)
      if (r.solver == solver) mse.push_back(r.mean_mse);
    v.require(std::is_sorted(mse.rbegin(), mse.rend()), solver + " MSE nonincreasing in N");
  }
  return v;
}

Verdict structured_performance() {
  Verdict v;
  std::mt19937_64 rng(601);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    const std::size_t n = 8 + rng() % 1000, m = 1 + rng() % n;
    MatrixOptions opt;
    opt.random_rows = c % 2 == 0;
    auto a = SensingMatrix::build(c % 4 < 2 ? Scheme::circulant : Scheme::toeplitz, m, n, derive_seed(602, c), opt);
    Eigen::VectorXd x(n);
    for (auto& e : x) e = g(rng);
    worst = std::max(worst, (a.apply(x) - a.dense() * x).cwiseAbs().maxCoeff());
  }
  v.require(worst <= 1e-10, "max |FFT apply - dense| = " + fmt("%.2e", worst));

  for (Scheme s : {Scheme::circulant, Scheme::toeplitz}) {
    const std::size_t n = 4096, m = n / 4;
    auto a = SensingMatrix::build(s, m, n, 603);
    auto dense = SensingMatrix::from_dense(a.dense());
    Eigen::VectorXd x(n);
    for (auto& e : x) e = g(rng);
    std::vector<double> ts, td;
    double sink = 0;
    for (int r = 0; r < 20; ++r) {
      auto t0 = Clock::now();
      sink += a.apply(x)[0];
      ts.push_back(ms_since(t0));
      t0 = Clock::now();
      sink += dense.apply(x)[0];
      td.push_back(ms_since(t0));
    }
    const double ratio = median(td) / median(ts);
    v.require(ratio >= 5.0 && std::isfinite(sink),
              std::string(to_string(s)) + " dense/structured median time = " + fmt("%.1f", ratio) + "x");
  }
  return v;
}

Verdict one_bit() {
  Verdict v;
  double norm_dev = 0.0;
  std::vector<double> corr;
  for (int s = 0; s < 50; ++s) {
    auto a = SensingMatrix::build(Scheme::gaussian, 500, 2000, derive_seed(701, s));
    auto x = gen_sparse_signal(2000, 50, AmplitudeLaw::gaussian, derive_seed(702, s));
    auto r = biht_recover(one_bit_quantize(a.apply(x.samples)), a, 50);
    norm_dev = std::max(norm_dev, std::fabs(r.x_hat.norm() - 1.0));
    corr.push_back(r.x_hat.dot(x.samples) / x.samples.norm());
  }

  // Fixed measurement budget, growing ambient dimension, noisy signs.
  const std::size_t m = 200, k = 10;
  std::vector<double> hd, t_biht, t_bpd;
  for (std::size_t n : {500u, 1000u, 2000u}) {
    std::vector<double> h, tb, tp;
    for (int s = 0; s < 20; ++s) {
      auto a = SensingMatrix::build(Scheme::gaussian, m, n, derive_seed(703, s));
      auto x = gen_sparse_signal(n, k, AmplitudeLaw::gaussian, derive_seed(704, s));
      auto y = measure(a, x.samples, 10.0, derive_seed(705, s));
      auto signs = one_bit_quantize(y);
      auto t0 = Clock::now();
      auto r = biht_recover(signs, a, k);
      tb.push_back(ms_since(t0));
      norm_dev = std::max(norm_dev, std::fabs(r.x_hat.norm() - 1.0));
      h.push_back(static_cast<double>(sign_violations(signs, a.apply(r.x_hat))));
      const double z = 0.01 * (2.0 * a.apply_transpose(y.values)).cwiseAbs().maxCoeff();
      t0 = Clock::now();
      auto bp = basis_pursuit(y, a, z);
      tp.push_back(ms_since(t0));
      (void)bp;
    }
    hd.push_back(mean(h));
    t_biht.push_back(median(tb));
    t_bpd.push_back(median(tp));
  }
  v.require(norm_dev <= 1e-12, "max | ||x_hat|| - 1 | = " + fmt("%.1e", norm_dev));
  v.require(median(corr) >= 0.9, "median correlation = " + fmt("%.3f", median(corr)));
  v.require(hd[1] <= hd[0] && hd[2] <= hd[1],
            "mean H_d over n = " + fmt("%.1f", hd[0]) + "/" + fmt("%.1f", hd[1]) + "/" + fmt("%.1f", hd[2]));
  const double g_biht = t_biht[2] / t_biht[0], g_bpd = t_bpd[2] / t_bpd[0];
  v.require(g_biht < g_bpd, "time growth 500->2000 biht " + fmt("%.2f", g_biht) + "x vs bpd " + fmt("%.2f", g_bpd) + "x");
  return v;
}

std::size_t brute_mdl(const Eigen::VectorXd& e, std::size_t L, std::size_t N) {
  std::size_t best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < L; ++m) {
    const double cnt = static_cast<double>(L - m);
    double lg = 0, ar = 0;
    for (std::size_t i = m; i < L; ++i) {
      lg += std::log(e[i] + 1e-15);
      ar += e[i];
    }
    const double score = -cnt * static_cast<double>(N) * (lg / cnt - std::log(ar / cnt)) +
                         0.5 * static_cast<double>(m * (2 * L - m)) * std::log(static_cast<double>(N));
    if (score < best_score) {
      best_score = score;
      best = m;
    }
  }
  return best;
}

Verdict snr_estimator() {
  Verdict v;
  for (double snr : {0.0, 5.0, 10.0}) {
    std::vector<double> err;
    for (int s = 0; s < 50; ++s) {
      Rng rng = make_rng(derive_seed(801, s));
      Eigen::VectorXd sig = nrz_waveform(5000, 32, std::sqrt(db_to_linear(snr)), rng);
      Eigen::VectorXd rec = sig + white_noise(5000, 1.0, rng);
      err.push_back(std::fabs(estimate_snr(rec, 10, 50).snr_db - snr));
    }
    v.require(median(err) <= 1.5, fmt("median |err| at %g dB", snr) + " = " + fmt("%.2f", median(err)));
  }

  Rng rng = make_rng(802);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t agree = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t L = 2 + static_cast<std::size_t>(t) % 15, N = 20 + 13 * static_cast<std::size_t>(t);
    Eigen::VectorXd e(L);
    for (auto& x : e) x = std::pow(10.0, 4.0 * u(rng) - 2.0);
    std::sort(e.data(), e.data() + L, std::greater<>());
    agree += mdl_order(e, L, N) == brute_mdl(e, L, N);
  }
  v.require(agree == 1000, "MDL matches brute force on " + std::to_string(agree) + "/1000");

  std::size_t match = 0;
  for (int s = 0; s < 100; ++s) {
    Rng r = make_rng(derive_seed(803, s));
    Eigen::VectorXcd rec = complex_white_noise(2000, 1.0, r);
    rec.real() += nrz_waveform(2000, 32, std::sqrt(db_to_linear(5.0)), r);
    std::size_t best_L = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t L = 8; L <= 12; ++L) {
      const double d = estimate_snr(rec, L, 50).goodness_D;
      if (d < best) {
        best = d;
        best_L = L;
      }
    }
    PsoOpts opts;
    opts.seed = derive_seed(804, s);
    const auto p = pso_tune(rec, {8, 12}, {50, 50}, opts);
    match += p.L == best_L || p.best_fitness == best;
  }
  v.require(match >= 90, "PSO matches grid search in " + std::to_string(match) + "/100");
  return v;
}

Verdict scan_simulator() {
  Verdict v;
  ScanConfig cfg;
  const auto rep = run_scan_sim(cfg, default_band_plan(), TrafficModel{});
  const auto& energy = rep.techniques.at("conventional:energy");
  v.require(mean(energy.occupancy_pct) >= 99.0, "energy occupancy " + fmt("%.1f%%", mean(energy.occupancy_pct)));
  for (const std::string path : {"conventional", "compressive"}) {
    const auto& eu = rep.techniques.at(path + ":euclidean");
    const auto& ac = rep.techniques.at(path + ":autocorrelation");
    bool ordered = true;
    double worst_pfa = 0.0;
    for (const auto& [snr, rate] : eu.detection_rate_by_snr) {
      if (snr <= -10.0) ordered = ordered && rate >= ac.detection_rate_by_snr.at(snr);
      worst_pfa = std::max(worst_pfa, eu.false_rate_by_snr.at(snr));
    }
    v.require(ordered, path + " euclidean >= autocorrelation at SNR <= -10 dB");
    v.require(worst_pfa <= 0.05, path + " euclidean Pfa max " + fmt("%.3f", worst_pfa));
  }
  const double ratio = static_cast<double>(rep.channels_per_budget_compressive) /
                       static_cast<double>(rep.channels_per_budget_conventional);
  v.require(ratio >= 1.5, "channels per budget ratio " + fmt("%.2f", ratio));
  return v;
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict determinism() {
  Verdict v;
  const fs::path root = fs::temp_directory_path() / "cssense_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const char* docs[] = {
      R"({"schema":1,"kind":"detection_mc","techniques":["energy","autocorrelation","euclidean","wavelet","matched_filter","compressive"],"n":512,"trials":60,"snr_grid_db":[-10,0],"threshold_factors":[1,2],"base_seed":9})",
      R"({"schema":1,"kind":"recovery_mc","solvers":["bp","omp","bayesian"],"scheme":"toeplitz","n_grid":[128],"snr_grid_db":[5,20],"trials":6,"base_seed":9})",
      R"({"schema":1,"kind":"scan_sim","slots":2,"n":1024,"snr_grid_db":[-10,5],"base_seed":9})",
  };
  const char* commands[] = {"experiment", "experiment", "scan-sim"};
  for (int d = 0; d < 3; ++d) {
    const fs::path cfg = root / ("cfg" + std::to_string(d) + ".json");
    std::ofstream(cfg) << docs[d];
    std::vector<std::string> outputs;
    for (const char* threads : {"1", "4"}) {
      const fs::path out = root / ("out" + std::to_string(d) + "_" + threads);
      const int code = io::run_cli({"--threads", threads, commands[d], "--config", cfg.string(), "--out", out.string()});
      std::string all;
      for (const auto& e : fs::directory_iterator(out))
        if (e.path().extension() == ".csv") all += e.path().filename().string() + "\n" + read_all(e.path());
      outputs.push_back(code == 0 ? all : std::string());
    }
    v.require(!outputs[0].empty() && outputs[0] == outputs[1],
              std::string(d == 0 ? "detection" : d == 1 ? "recovery" : "scan") + " CSV identical for 1 and 4 threads");
  }
  set_thread_count(0);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  struct Entry {
    int id;
    double budget_s;
    std::function<Verdict()> run;
  };
  const std::vector<Entry> all = {
      {1, 30, closed_form_vs_monte_carlo}, {2, 60, matched_filter_dynamic_threshold},
      {3, 60, exact_recovery},             {4, 300, bayesian_ordering},
      {5, 600, noise_robustness},          {6, 60, structured_performance},
      {7, 300, one_bit},                   {8, 180, snr_estimator},
      {9, 300, scan_simulator},            {10, 600, determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& e : all) {
    if (!only.empty() && !only.count(e.id)) continue;
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = e.run();
    } catch (const std::exception& ex) {
      v.pass = false;
      v.detail = std::string("exception: ") + ex.what();
    }
    const double secs = ms_since(t0) / 1e3;
    if (secs > e.budget_s) v.require(false, "runtime over " + fmt("%.0f s", e.budget_s));
    failures += !v.pass;
    std::printf("criterion %d: %s  %s (%.1f s)\n", e.id, v.pass ? "PASS" : "FAIL", v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
