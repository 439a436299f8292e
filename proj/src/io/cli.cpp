#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <stdexcept>

#include "cssense/detectors.hpp"
#include "cssense/io.hpp"
#include "cssense/parallel.hpp"
#include "cssense/recovery.hpp"
#include "cssense/snr.hpp"

namespace cssense::io {

namespace {

namespace fs = std::filesystem;

struct Run {
  fs::path out_dir;
  RunManifest manifest;

  Run(std::string command, const fs::path& dir, const Json& config, Seed seed) : out_dir(dir) {
    manifest.command = std::move(command);
    manifest.config_hash = config_hash(config);
    manifest.base_seed = seed;
    manifest.started_at = utc_timestamp();
    fs::create_directories(out_dir);
  }

  fs::path output(const std::string& name) {
    manifest.output_paths.push_back(name);
    return out_dir / name;
  }

  void finish() {
    manifest.finished_at = utc_timestamp();
    write_manifest(manifest, out_dir);
  }
};

Json matrix_descriptor(const SensingMatrix& a) {
  return {{"scheme", std::string(to_string(a.scheme()))}, {"m", a.rows()}, {"n", a.cols()},
          {"seed", a.seed()}, {"density", a.options().density},
          {"random_rows", a.options().random_rows}};
}

SensingMatrix matrix_from_descriptor(const fs::path& path) {
  const Json d = load_config(path);
  try {
    return SensingMatrix::build(parse_scheme(d.at("scheme").get<std::string>()),
                                d.at("m").get<std::size_t>(), d.at("n").get<std::size_t>(),
                                d.at("seed").get<Seed>(),
                                {.density = d.value("density", 1.0),
                                 .random_rows = d.value("random_rows", false)});
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("matrix descriptor " + path.string() + ": " + e.what());
  }
}

Eigen::VectorXd real_samples(const fs::path& path) {
  bool cplx = false;
  const Eigen::VectorXcd v = read_samples(path, &cplx);
  if (cplx) throw std::invalid_argument(path.string() + ": expected real samples");
  return v.real();
}

RecoveryResult solve(const std::string& solver, const MeasurementVector& y, const SensingMatrix& a,
                     std::size_t k, double bp_penalty) {
  if (solver == "bp") {
    return basis_pursuit(y, a, bp_penalty * (2.0 * a.apply_transpose(y.values)).lpNorm<Eigen::Infinity>());
  }
  if (solver == "omp") {
    return k > 0 ? omp(y, a, StoppingRule::sparsity(k))
                 : omp(y, a, StoppingRule::tolerance(1e-6, std::max<std::size_t>(1, a.rows() / 2)));
  }
  if (solver == "cosamp") return cosamp(y, a, k);
  if (solver == "bayesian") return bayesian_recover(y, a).base;
  if (solver == "biht") return biht_recover(one_bit_quantize(y), a, k);
  throw std::invalid_argument("unknown solver: " + solver);
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Compressive spectrum sensing toolkit"};
  app.require_subcommand(1);
  std::string out_dir = "out";
  std::size_t threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: CS_TOOLKIT_THREADS or all cores)");

  // generate
  auto* gen = app.add_subcommand("generate", "Write a planted sparse signal");
  std::size_t g_n = 256, g_k = 10;
  std::string g_amp = "unit";
  Seed g_seed = 1;
  gen->add_option("--n", g_n)->check(CLI::PositiveNumber);
  gen->add_option("--k", g_k);
  gen->add_option("--amplitude", g_amp)->check(CLI::IsMember({"unit", "gaussian", "uniform"}));
  gen->add_option("--seed", g_seed);
  gen->add_option("--out", out_dir);

  // compress
  auto* comp = app.add_subcommand("compress", "Measure a signal with a generated sensing matrix");
  std::string c_input, c_scheme = "gaussian";
  std::size_t c_m = 0;
  Seed c_seed = 1;
  double c_density = 1.0, c_snr = std::numeric_limits<double>::infinity();
  bool c_random_rows = false;
  comp->add_option("--input", c_input)->required();
  comp->add_option("--scheme", c_scheme);
  comp->add_option("--m", c_m)->required();
  comp->add_option("--seed", c_seed);
  comp->add_option("--density", c_density);
  comp->add_flag("--random-rows", c_random_rows);
  comp->add_option("--snr", c_snr, "Measurement SNR in dB (default noiseless)");
  comp->add_option("--out", out_dir);

  // recover
  auto* rec = app.add_subcommand("recover", "Recover a sparse signal");
  std::string r_solver = "omp", r_scheme = "gaussian", r_meas, r_matrix, r_amp = "unit";
  std::size_t r_n = 256, r_k = 10, r_m = 100;
  Seed r_seed = 1;
  double r_snr = std::numeric_limits<double>::infinity(), r_density = 1.0, r_bp = 0.01;
  rec->add_option("--solver", r_solver)->check(CLI::IsMember({"bp", "omp", "cosamp", "bayesian", "biht"}));
  rec->add_option("--scheme", r_scheme);
  rec->add_option("--n", r_n);
  rec->add_option("--k", r_k);
  rec->add_option("--m", r_m);
  rec->add_option("--seed", r_seed);
  rec->add_option("--snr", r_snr);
  rec->add_option("--density", r_density);
  rec->add_option("--amplitude", r_amp);
  rec->add_option("--bp-penalty", r_bp);
  rec->add_option("--measurements", r_meas, "Measurement CSV (needs --matrix)");
  rec->add_option("--matrix", r_matrix, "Matrix descriptor JSON");
  rec->add_option("--out", out_dir);

  // detect
  auto* det = app.add_subcommand("detect", "Run one detector on a sample record");
  std::string d_tech, d_input;
  double d_threshold = 0.0;
  std::size_t d_lags = 64;
  Seed d_pilot_seed = 1;
  bool d_invert = false;
  det->add_option("--technique", d_tech)->required();
  det->add_option("--threshold", d_threshold)->required();
  det->add_option("--input", d_input)->required();
  det->add_option("--lags", d_lags);
  det->add_option("--pilot-seed", d_pilot_seed, "Matched filter: seed of the QPSK pilot");
  det->add_flag("--invert", d_invert, "Wavelet: occupied when the edge reaches the threshold");
  det->add_option("--out", out_dir);

  // estimate-snr
  auto* est = app.add_subcommand("estimate-snr", "Blind eigenvalue SNR estimate");
  std::string e_input;
  std::size_t e_L = 10, e_K = 50;
  bool e_pso = false;
  Seed e_seed = 1;
  est->add_option("--input", e_input)->required();
  est->add_option("--L", e_L);
  est->add_option("--K", e_K);
  est->add_flag("--pso", e_pso, "Tune L in [2, 2L] and K in [10, 2K] first");
  est->add_option("--seed", e_seed);
  est->add_option("--out", out_dir);

  // experiment / scan-sim
  auto* exp = app.add_subcommand("experiment", "Monte-Carlo experiment from a config document");
  std::string x_config;
  exp->add_option("--config", x_config)->required();
  exp->add_option("--out", out_dir);
  auto* scan = app.add_subcommand("scan-sim", "Simulated wideband scanning survey");
  std::string s_config;
  scan->add_option("--config", s_config);
  scan->add_option("--out", out_dir);

  // report
  auto* rep = app.add_subcommand("report", "Summarise a result CSV as JSON");
  std::string p_input;
  rep->add_option("--input", p_input)->required();
  rep->add_option("--out", out_dir);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, std::cout, std::cerr);
    return code == 0 ? 0 : 2;
  }
  if (threads > 0) set_thread_count(threads);

  try {
    if (gen->parsed()) {
      const Json cfg{{"n", g_n}, {"k", g_k}, {"amplitude", g_amp}, {"seed", g_seed}};
      Run run("generate", out_dir, cfg, g_seed);
      const SparseSignal x = gen_sparse_signal(g_n, g_k, parse_amplitude_law(g_amp), g_seed);
      write_vector_csv(x.samples, run.output("signal.csv"));
      run.finish();
    } else if (comp->parsed()) {
      const Eigen::VectorXd x = real_samples(c_input);
      const SensingMatrix a = SensingMatrix::build(parse_scheme(c_scheme), c_m, static_cast<std::size_t>(x.size()),
                                                   c_seed, {.density = c_density, .random_rows = c_random_rows});
      const Json desc = matrix_descriptor(a);
      Json cfg = desc;
      cfg["snr_db"] = format_double(c_snr);
      Run run("compress", out_dir, cfg, c_seed);
      const MeasurementVector y = measure(a, x, c_snr, derive_seed(c_seed, 3));
      write_vector_csv(y.values, run.output("measurements.csv"));
      write_json(desc, run.output("matrix.json"));
      run.finish();
    } else if (rec->parsed()) {
      Json cfg{{"solver", r_solver}, {"seed", r_seed}};
      std::optional<SparseSignal> truth;
      std::optional<SensingMatrix> a;
      MeasurementVector y;
      if (!r_meas.empty()) {
        if (r_matrix.empty()) throw std::invalid_argument("--measurements needs --matrix");
        a = matrix_from_descriptor(r_matrix);
        y.values = real_samples(r_meas);
        cfg["matrix"] = matrix_descriptor(*a);
      } else {
        a = SensingMatrix::build(parse_scheme(r_scheme), r_m, r_n, derive_seed(r_seed, 1), {.density = r_density});
        truth = gen_sparse_signal(r_n, r_k, parse_amplitude_law(r_amp), derive_seed(r_seed, 2));
        y = measure(*a, truth->samples, r_snr, derive_seed(r_seed, 3));
        cfg.update({{"scheme", r_scheme}, {"n", r_n}, {"k", r_k}, {"m", r_m}, {"density", r_density},
                    {"amplitude", r_amp}, {"snr_db", format_double(r_snr)}});
      }
      cfg["bp_penalty"] = r_bp;
      Run run("recover", out_dir, cfg, r_seed);
      const RecoveryResult res = solve(r_solver, y, *a, r_k, r_bp);
      const Eigen::VectorXd signs = one_bit_quantize(y).signs;
      const Eigen::VectorXd fitted = one_bit_quantize(a->apply(res.x_hat)).signs;
      {
        std::ofstream out(run.output("recovered.csv"), std::ios::binary);
        out << (truth ? "index,x_true,x_hat\n" : "index,x_hat\n");
        for (Eigen::Index i = 0; i < res.x_hat.size(); ++i) {
          out << i << ',';
          if (truth) out << format_double(truth->samples[i]) << ',';
          out << format_double(res.x_hat[i]) << '\n';
        }
        if (!out) throw std::runtime_error("write failed: recovered.csv");
      }
      {
        MetricBundle mb;
        const double nan = std::numeric_limits<double>::quiet_NaN();
        mb.recovery_error = mb.mse = mb.correlation = mb.rsnr = nan;
        if (truth) {
          Eigen::VectorXd ref = truth->samples;
          if (r_solver == "biht" && ref.norm() > 0.0) ref.normalize();
          mb = evaluate_metrics(ref, res.x_hat, &signs, &fitted, {.zero_tol = std::nullopt, .strict = false});
        } else {
          mb.hamming = hamming_distance(signs, fitted);
          mb.recovered_sparsity = count_nonzero(res.x_hat);
        }
        std::ofstream out(run.output("metrics.csv"), std::ios::binary);
        out << "solver,scheme,n,k,m,snr_db,re,mse,cc,rsnr,hd,recovered_sparsity,iterations,converged\n";
        out << r_solver << ',' << to_string(a->scheme()) << ',' << a->cols() << ',' << r_k << ','
            << a->rows() << ',' << format_double(truth ? r_snr : nan) << ','
            << format_double(mb.recovery_error) << ',' << format_double(mb.mse) << ','
            << format_double(mb.correlation) << ',' << format_double(mb.rsnr) << ',' << mb.hamming
            << ',' << mb.recovered_sparsity << ',' << res.iterations << ','
            << (res.converged ? "true" : "false") << '\n';
        if (!out) throw std::runtime_error("write failed: metrics.csv");
      }
      run.finish();
    } else if (det->parsed()) {
      const Technique tech = parse_technique(d_tech);
      bool cplx = false;
      const Eigen::VectorXcd samples = read_samples(d_input, &cplx);
      NoisySignal y = cplx ? observed(samples) : observed(Eigen::VectorXd(samples.real()));
      const Json cfg{{"technique", d_tech}, {"threshold", d_threshold}, {"input", fs::path(d_input).filename().string()},
                     {"lags", d_lags}, {"pilot_seed", d_pilot_seed}, {"invert", d_invert}};
      Run run("detect", out_dir, cfg, d_pilot_seed);
      DetectionOutcome o;
      switch (tech) {
        case Technique::energy: o = energy_detect(y, d_threshold); break;
        case Technique::autocorrelation: o = autocorr_detect(y, d_threshold); break;
        case Technique::euclidean: o = euclid_detect(y, d_threshold, d_lags); break;
        case Technique::wavelet: o = wavelet_detect(y, d_threshold, {.scale = 4.0, .support = 5.0, .invert = d_invert}); break;
        case Technique::matched_filter:
          o = matched_filter_detect(y, gen_pilot_qpsk(y.size(), d_pilot_seed), d_threshold);
          break;
        case Technique::compressive:
          throw std::invalid_argument("detect: the compressive detector runs inside experiments");
      }
      std::ofstream out(run.output("decision.csv"), std::ios::binary);
      out << "technique,statistic,threshold,decision\n"
          << to_string(tech) << ',' << format_double(o.statistic) << ',' << format_double(o.threshold)
          << ',' << (o.occupied() ? "occupied" : "idle") << '\n';
      if (!out) throw std::runtime_error("write failed: decision.csv");
      out.close();
      run.finish();
    } else if (est->parsed()) {
      const Eigen::VectorXcd samples = read_samples(e_input);
      const Json cfg{{"input", fs::path(e_input).filename().string()}, {"L", e_L}, {"K", e_K},
                     {"pso", e_pso}, {"seed", e_seed}};
      Run run("estimate-snr", out_dir, cfg, e_seed);
      std::size_t L = e_L, K = e_K;
      if (e_pso) {
        PsoOpts po;
        po.seed = e_seed;
        const PsoResult p = pso_tune(samples, {2, static_cast<long>(2 * e_L)},
                                     {10, static_cast<long>(std::max<std::size_t>(10, 2 * e_K))}, po);
        L = p.L;
        K = p.K;
      }
      const SnrEstimate s = estimate_snr(samples, L, K);
      std::ofstream out(run.output("snr.csv"), std::ios::binary);
      out << "snr_db,noise_variance,total_power,mdl_order,L,K,goodness_d,clamped\n"
          << format_double(s.snr_db) << ',' << format_double(s.noise_variance_hat) << ','
          << format_double(s.total_power_hat) << ',' << s.mdl_order << ',' << s.smoothing_L << ','
          << s.grid_K << ',' << format_double(s.goodness_D) << ',' << (s.clamped ? "true" : "false") << '\n';
      if (!out) throw std::runtime_error("write failed: snr.csv");
      out.close();
      run.finish();
    } else if (exp->parsed()) {
      const Json doc = load_config(x_config);
      switch (experiment_kind(doc)) {
        case ExperimentKind::detection_mc: {
          const DetectionConfig cfg = detection_config(doc);
          Run run("experiment", out_dir, doc, cfg.base_seed);
          const PdPfaCurve curve = run_detection_mc(cfg);
          write_detection_csv(curve, run.output("detection.csv"));
          write_json(to_json(curve), run.output("detection.json"));
          run.finish();
          break;
        }
        case ExperimentKind::recovery_mc: {
          const RecoveryConfig cfg = recovery_config(doc);
          Run run("experiment", out_dir, doc, cfg.base_seed);
          const RecoveryReport rpt = run_recovery_mc(cfg);
          write_recovery_csv(rpt, run.output("recovery.csv"));
          write_json(to_json(rpt), run.output("recovery.json"));
          run.finish();
          break;
        }
        case ExperimentKind::scan_sim:
          throw std::invalid_argument("experiment: use the scan-sim subcommand for scan_sim configs");
      }
    } else if (scan->parsed()) {
      Json doc = s_config.empty() ? Json{{"schema", kSchemaVersion}, {"kind", "scan_sim"}} : load_config(s_config);
      if (experiment_kind(doc) != ExperimentKind::scan_sim) throw std::invalid_argument("scan-sim: config kind must be scan_sim");
      const ScanSetup setup = scan_setup(doc);
      Run run("scan-sim", out_dir, doc, setup.config.base_seed);
      const OccupancyReport rpt = run_scan_sim(setup.config, setup.plan, setup.traffic);
      write_scan_csv(rpt, run.output("scan.csv"));
      write_json(to_json(rpt), run.output("scan_summary.json"));
      run.finish();
    } else if (rep->parsed()) {
      const Table t = read_table(p_input);
      Json summary;
      if (t.header == kDetectionColumns) summary = to_json(read_detection_csv(p_input));
      else if (t.header == kRecoveryColumns) summary = to_json(read_recovery_csv(p_input));
      else if (t.header == kScanColumns) {
        std::map<std::string, std::pair<std::size_t, std::size_t>> occ;
        for (const auto& r : read_scan_csv(p_input)) {
          auto& c = occ[r.technique];
          c.first += r.occupied;
          ++c.second;
        }
        summary = {{"kind", "scan_sim"}, {"occupancy_pct", Json::object()}};
        for (const auto& [k, c] : occ) {
          summary["occupancy_pct"][k] = 100.0 * static_cast<double>(c.first) / static_cast<double>(c.second);
        }
      } else {
        throw std::invalid_argument("report: unrecognised CSV header in " + p_input);
      }
      const Json cfg{{"input", fs::path(p_input).filename().string()}};
      Run run("report", out_dir, cfg, 0);
      write_json(summary, run.output("report.json"));
      run.finish();
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace cssense::io
