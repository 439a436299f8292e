#include "cssense/signal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "cssense/simd.hpp"

namespace cssense {

AmplitudeLaw parse_amplitude_law(std::string_view name) {
  if (name == "unit") return AmplitudeLaw::unit;
  if (name == "gaussian") return AmplitudeLaw::gaussian;
  if (name == "uniform") return AmplitudeLaw::uniform;
  throw std::invalid_argument("unknown amplitude law: " + std::string(name));
}

SparseSignal gen_sparse_signal(std::size_t n, std::size_t k, AmplitudeLaw law, Seed seed) {
  if (n == 0) throw std::invalid_argument("gen_sparse_signal: n must be >= 1");
  if (k > n) throw std::invalid_argument("gen_sparse_signal: k must not exceed n");

  Rng rng = make_rng(seed);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // partial Fisher-Yates: the first k slots become the support
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  std::vector<std::size_t> support(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(support.begin(), support.end());

  SparseSignal s;
  s.samples = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  s.seed = seed;
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> mag(0.1, 1.0);
  for (std::size_t pos : support) {
    double v = 0.0;
    switch (law) {
      case AmplitudeLaw::unit:
        v = coin(rng) ? 1.0 : -1.0;
        break;
      case AmplitudeLaw::gaussian:
        do {
          v = gauss(rng);
        } while (v == 0.0);
        break;
      case AmplitudeLaw::uniform:
        v = (coin(rng) ? 1.0 : -1.0) * mag(rng);
        break;
    }
    s.samples[static_cast<Eigen::Index>(pos)] = v;
  }
  s.support = std::move(support);
  return s;
}

PilotSignal gen_pilot_qpsk(std::size_t n, Seed seed) {
  if (n == 0) throw std::invalid_argument("gen_pilot_qpsk: n must be >= 1");
  Rng rng = make_rng(seed);
  std::bernoulli_distribution coin(0.5);
  const double a = 1.0 / std::sqrt(2.0);
  PilotSignal p;
  p.samples.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < p.samples.size(); ++i) {
    const double re = coin(rng) ? a : -a;
    const double im = coin(rng) ? a : -a;
    p.samples[i] = {re, im};
  }
  p.energy = p.samples.squaredNorm();
  return p;
}

std::complex<double> rayleigh_gain(Seed seed) {
  Rng rng = make_rng(seed);
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  const double re = g(rng);
  const double im = g(rng);
  return {re, im};
}

Eigen::VectorXd white_noise(std::size_t n, double variance, Rng& rng) {
  std::normal_distribution<double> g(0.0, std::sqrt(variance));
  Eigen::VectorXd w(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = g(rng);
  return w;
}

Eigen::VectorXcd complex_white_noise(std::size_t n, double variance, Rng& rng) {
  std::normal_distribution<double> g(0.0, std::sqrt(variance / 2.0));
  Eigen::VectorXcd w(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double re = g(rng);
    const double im = g(rng);
    w[i] = {re, im};
  }
  return w;
}

namespace {

double noise_variance_for(double power, double snr_db) {
  if (std::isinf(snr_db) && snr_db > 0) return 0.0;
  if (std::isnan(snr_db)) throw std::invalid_argument("add_awgn: snr_db is NaN");
  if (!(power > 0.0)) {
    throw std::invalid_argument("add_awgn: signal has zero power at finite SNR");
  }
  return power / db_to_linear(snr_db);
}

}  // namespace

NoisySignal add_awgn(const Eigen::VectorXd& signal, double snr_db, Seed seed,
                     std::complex<double> gain) {
  if (signal.size() == 0) throw std::invalid_argument("add_awgn: empty signal");
  NoisySignal out;
  out.channel_gain = gain;
  out.snr_db = snr_db;
  out.complex_valued = gain.imag() != 0.0;
  out.samples = signal.cast<std::complex<double>>() * gain;
  const double power = out.samples.squaredNorm() / static_cast<double>(signal.size());
  out.noise_variance = noise_variance_for(power, snr_db);
  if (out.noise_variance > 0.0) {
    Rng rng = make_rng(seed);
    if (out.complex_valued) {
      out.samples += complex_white_noise(signal.size(), out.noise_variance, rng);
    } else {
      out.samples.real() += white_noise(signal.size(), out.noise_variance, rng);
    }
  }
  return out;
}

NoisySignal add_awgn(const Eigen::VectorXcd& signal, double snr_db, Seed seed,
                     std::complex<double> gain) {
  if (signal.size() == 0) throw std::invalid_argument("add_awgn: empty signal");
  NoisySignal out;
  out.channel_gain = gain;
  out.snr_db = snr_db;
  out.complex_valued = true;
  out.samples = signal * gain;
  const double power = out.samples.squaredNorm() / static_cast<double>(signal.size());
  out.noise_variance = noise_variance_for(power, snr_db);
  if (out.noise_variance > 0.0) {
    Rng rng = make_rng(seed);
    out.samples += complex_white_noise(signal.size(), out.noise_variance, rng);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void require_same_size(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const char* what) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(what) + ": length mismatch");
  }
}

double sq_diff(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat) {
  const Eigen::VectorXd d = x_hat - x;
  return simd::sum_squares({d.data(), static_cast<std::size_t>(d.size())});
}

}  // namespace

double recovery_error(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat) {
  require_same_size(x, x_hat, "recovery_error");
  const double nx = x.norm();
  if (nx == 0.0) throw std::domain_error("recovery_error: ||x|| = 0");
  return std::sqrt(sq_diff(x, x_hat)) / nx;
}

double mean_squared_error(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat) {
  require_same_size(x, x_hat, "mean_squared_error");
  if (x.size() == 0) throw std::invalid_argument("mean_squared_error: empty input");
  return sq_diff(x, x_hat) / static_cast<double>(x.size());
}

double correlation_coefficient(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat) {
  require_same_size(x, x_hat, "correlation_coefficient");
  const double n = static_cast<double>(x.size());
  // centred form; algebraically the same ratio as the raw-sum expression but
  // without the cancellation in N*sum(x^2) - (sum x)^2
  const Eigen::VectorXd xc = x.array() - x.mean();
  const Eigen::VectorXd yc = x_hat.array() - x_hat.mean();
  const double sxx = xc.squaredNorm();
  const double syy = yc.squaredNorm();
  if (n < 2 || sxx == 0.0 || syy == 0.0) {
    throw std::domain_error("correlation_coefficient: constant vector");
  }
  const double c = xc.dot(yc) / std::sqrt(sxx * syy);
  return std::clamp(c, -1.0, 1.0);
}

double reconstruction_snr(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat) {
  require_same_size(x, x_hat, "reconstruction_snr");
  const double err = sq_diff(x, x_hat);
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return x.squaredNorm() / err;
}

std::size_t hamming_distance(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat) {
  require_same_size(y, y_hat, "hamming_distance");
  std::size_t d = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) d += (y[i] != y_hat[i]) ? 1 : 0;
  return d;
}

std::size_t count_nonzero(const Eigen::VectorXd& x_hat, std::optional<double> zero_tol) {
  if (x_hat.size() == 0) return 0;
  const double tol = zero_tol.value_or(1e-6 * x_hat.cwiseAbs().maxCoeff());
  std::size_t c = 0;
  for (Eigen::Index i = 0; i < x_hat.size(); ++i) c += std::fabs(x_hat[i]) > tol ? 1 : 0;
  return c;
}

MetricBundle evaluate_metrics(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat,
                              const Eigen::VectorXd* y, const Eigen::VectorXd* y_hat,
                              const MetricOptions& opts) {
  require_same_size(x, x_hat, "evaluate_metrics");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto guarded = [&](auto&& fn) -> double {
    if (opts.strict) return fn();
    try {
      return fn();
    } catch (const std::domain_error&) {
      return nan;
    }
  };

  MetricBundle m;
  m.recovery_error = guarded([&] { return recovery_error(x, x_hat); });
  m.mse = mean_squared_error(x, x_hat);
  m.correlation = guarded([&] { return correlation_coefficient(x, x_hat); });
  m.rsnr = reconstruction_snr(x, x_hat);
  if (y != nullptr && y_hat != nullptr) m.hamming = hamming_distance(*y, *y_hat);
  m.recovered_sparsity = count_nonzero(x_hat, opts.zero_tol);
  return m;
}

}  // namespace cssense
