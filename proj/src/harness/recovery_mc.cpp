#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cssense/harness.hpp"
#include "cssense/parallel.hpp"
#include "cssense/recovery.hpp"

namespace cssense {

MeasurementVector measure(const SensingMatrix& a, const Eigen::VectorXd& x, double snr_db,
                          Seed noise_seed) {
  const Eigen::VectorXd clean = a.apply(x);
  double variance = 0.0;
  if (std::isfinite(snr_db)) {
    // referenced to the per-sample power of the original signal
    variance = (x.squaredNorm() / static_cast<double>(x.size())) / db_to_linear(snr_db);
  } else if (snr_db < 0.0) {
    throw std::invalid_argument("measure: snr of -inf");
  }
  MeasurementVector y;
  y.values = clean;
  y.noise_variance = variance;
  if (variance > 0.0) {
    Rng rng = make_rng(noise_seed);
    y.values += white_noise(a.rows(), variance, rng);
  }
  return y;
}

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

TrialOutcome run_solver(const std::string& solver, const SensingMatrix& a, const SparseSignal& x,
                        const MeasurementVector& y, const RecoveryConfig& cfg) {
  const std::size_t k = x.sparsity();
  RecoveryResult res;
  Eigen::VectorXd reference = x.samples;
  Eigen::VectorXd signs = one_bit_quantize(y).signs;
  const auto t0 = std::chrono::steady_clock::now();
  if (solver == "bp") {
    const double z = cfg.bp_penalty * (2.0 * a.apply_transpose(y.values)).lpNorm<Eigen::Infinity>();
    res = basis_pursuit(y, a, z);
  } else if (solver == "omp") {
    res = omp(y, a, StoppingRule::tolerance(cfg.omp_rel_tol, std::max<std::size_t>(1, a.rows() / 2)));
  } else if (solver == "cosamp") {
    res = cosamp(y, a, std::max<std::size_t>(k, 1));
  } else if (solver == "bayesian") {
    res = bayesian_recover(y, a).base;
  } else if (solver == "biht") {
    res = biht_recover(one_bit_quantize(y), a, std::max<std::size_t>(k, 1));
    // magnitude is lost in the signs; compare directions
    const double nrm = reference.norm();
    if (nrm > 0.0) reference /= nrm;
  } else {
    throw std::invalid_argument("unknown solver: " + solver);
  }
  TrialOutcome out;
  out.recovery_ms = res.time_ms();
  out.processing_ms = ms_since(t0);
  const Eigen::VectorXd fitted = one_bit_quantize(a.apply(res.x_hat)).signs;
  out.metrics = evaluate_metrics(reference, res.x_hat, &signs, &fitted, {.zero_tol = std::nullopt, .strict = false});
  return out;
}

namespace {

double mean_finite(const std::vector<double>& v) {
  double s = 0.0;
  std::size_t c = 0;
  for (double d : v) {
    if (!std::isnan(d)) {
      s += d;
      ++c;
    }
  }
  return c ? s / static_cast<double>(c) : std::numeric_limits<double>::quiet_NaN();
}

double median_finite(std::vector<double> v) {
  std::erase_if(v, [](double d) { return std::isnan(d); });
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace

RecoveryReport run_recovery_mc(const RecoveryConfig& cfg) {
  if (cfg.solvers.empty()) throw std::invalid_argument("recovery experiment: no solvers");
  if (cfg.trials < 1) throw std::invalid_argument("recovery experiment: trials must be >= 1");
  if (cfg.n_grid.empty() || cfg.snr_grid_db.empty()) throw std::invalid_argument("recovery experiment: empty grid");
  if (cfg.scheme == Scheme::custom) throw std::invalid_argument("recovery experiment: scheme must be generated");
  for (const auto& s : cfg.solvers) {
    if (s != "bp" && s != "omp" && s != "cosamp" && s != "bayesian" && s != "biht") {
      throw std::invalid_argument("recovery experiment: unknown solver " + s);
    }
  }

  RecoveryReport report;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
    const std::size_t n = cfg.n_grid[ni];
    std::vector<std::size_t> ms = cfg.m_grid;
    if (ms.empty()) ms.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(cfg.m_ratio * static_cast<double>(n)))));
    const std::size_t k = cfg.k > 0 ? cfg.k
                                    : std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(cfg.k_ratio * static_cast<double>(n))));
    for (std::size_t mi = 0; mi < ms.size(); ++mi) {
      const std::size_t m = ms[mi];
      // same matrix, signal and unit noise draw for every SNR cell and solver
      const Seed cell = derive_seed(derive_seed(cfg.base_seed, n), m);
      for (const double snr : cfg.snr_grid_db) {
        const std::size_t ns = cfg.solvers.size();
        std::vector<TrialOutcome> outcomes(ns * cfg.trials);
        std::vector<char> failed(ns * cfg.trials, 0);
        parallel_for(cfg.trials, [&](std::size_t t) {
          const Seed ts = derive_seed(cell, t);
          const SensingMatrix a = SensingMatrix::build(cfg.scheme, m, n, derive_seed(ts, 1), cfg.matrix);
          const SparseSignal x = gen_sparse_signal(n, k, cfg.amplitude, derive_seed(ts, 2));
          const auto tp0 = std::chrono::steady_clock::now();
          const MeasurementVector y = measure(a, x.samples, snr, derive_seed(ts, 3));
          const double sample_ms = ms_since(tp0);
          for (std::size_t s = 0; s < ns; ++s) {
            try {
              outcomes[s * cfg.trials + t] = run_solver(cfg.solvers[s], a, x, y, cfg);
              outcomes[s * cfg.trials + t].processing_ms += sample_ms;
            } catch (const std::exception&) {
              failed[s * cfg.trials + t] = 1;
            }
          }
        });
        for (std::size_t s = 0; s < ns; ++s) {
          RecoveryRow row;
          row.solver = cfg.solvers[s];
          row.scheme = std::string(to_string(cfg.scheme));
          row.n = n;
          row.k = k;
          row.m = m;
          row.snr_db = snr;
          row.trials = cfg.trials;
          std::vector<double> re, mse, cc, rsnr, hd, tr, tp, sp;
          for (std::size_t t = 0; t < cfg.trials; ++t) {
            if (failed[s * cfg.trials + t]) {
              ++row.failures;
              continue;
            }
            const auto& o = outcomes[s * cfg.trials + t];
            re.push_back(o.metrics.recovery_error);
            mse.push_back(o.metrics.mse);
            cc.push_back(o.metrics.correlation);
            rsnr.push_back(o.metrics.rsnr);
            hd.push_back(static_cast<double>(o.metrics.hamming));
            sp.push_back(static_cast<double>(o.metrics.recovered_sparsity));
            tr.push_back(o.recovery_ms);
            tp.push_back(o.processing_ms);
          }
          row.mean_re = re.empty() ? nan : mean_finite(re);
          row.median_re = median_finite(re);
          row.mean_mse = mse.empty() ? nan : mean_finite(mse);
          row.mean_cc = cc.empty() ? nan : mean_finite(cc);
          row.mean_rsnr = rsnr.empty() ? nan : mean_finite(rsnr);
          row.mean_hd = hd.empty() ? nan : mean_finite(hd);
          row.mean_sparsity = sp.empty() ? nan : mean_finite(sp);
          row.mean_tr_ms = cfg.record_timing ? mean_finite(tr) : 0.0;
          row.mean_tp_ms = cfg.record_timing ? mean_finite(tp) : 0.0;
          report.rows.push_back(row);
        }
      }
    }
  }
  return report;
}

}  // namespace cssense
