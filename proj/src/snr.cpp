#include "cssense/snr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace cssense {

Eigen::VectorXd smoothed_eigenvalues(const Eigen::VectorXcd& samples, std::size_t L) {
  const auto n = static_cast<std::size_t>(samples.size());
  if (L < 2) throw std::invalid_argument("smoothing factor L must be >= 2");
  if (n < 2 * L) throw std::invalid_argument("record too short for the smoothing factor");
  const std::size_t nc = n - L + 1;
  Eigen::MatrixXcd x(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(nc));
  for (std::size_t i = 0; i < L; ++i) {
    x.row(static_cast<Eigen::Index>(i)) =
        samples.segment(static_cast<Eigen::Index>(L - 1 - i), static_cast<Eigen::Index>(nc)).transpose();
  }
  const Eigen::MatrixXcd r = (x * x.adjoint()) / static_cast<double>(nc);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(r, Eigen::EigenvaluesOnly);
  Eigen::VectorXd eig = es.eigenvalues().reverse();
  return eig.cwiseMax(0.0);
}

std::vector<double> mdl_scores(const Eigen::VectorXd& eigs, std::size_t L, std::size_t N) {
  if (static_cast<std::size_t>(eigs.size()) != L || L < 1) {
    throw std::invalid_argument("mdl: need exactly L eigenvalues");
  }
  if (N < 1) throw std::invalid_argument("mdl: N must be >= 1");
  for (Eigen::Index i = 0; i < eigs.size(); ++i) {
    if (!(eigs[i] >= 0.0)) throw std::invalid_argument("mdl: negative eigenvalue");
  }
  const double nn = static_cast<double>(N);
  std::vector<double> score(L);
  for (std::size_t m = 0; m < L; ++m) {
    const double tail = static_cast<double>(L - m);
    double log_geo = 0.0;
    double arith = 0.0;
    for (std::size_t i = m; i < L; ++i) {
      const double v = eigs[static_cast<Eigen::Index>(i)] + 1e-15;
      log_geo += std::log(v);
      arith += v;
    }
    log_geo /= tail;
    arith /= tail;
    const double data = -tail * nn * (log_geo - std::log(arith));
    const double penalty = 0.5 * static_cast<double>(m) * (2.0 * static_cast<double>(L) - static_cast<double>(m)) * std::log(nn);
    score[m] = data + penalty;
  }
  return score;
}

std::size_t mdl_order(const Eigen::VectorXd& eigs, std::size_t L, std::size_t N) {
  const std::vector<double> s = mdl_scores(eigs, L, N);
  return static_cast<std::size_t>(std::min_element(s.begin(), s.end()) - s.begin());
}

double mp_density(double v, double ratio, double variance) {
  const double a = variance * (1.0 - std::sqrt(ratio)) * (1.0 - std::sqrt(ratio));
  const double b = variance * (1.0 + std::sqrt(ratio)) * (1.0 + std::sqrt(ratio));
  if (v <= a || v >= b || v <= 0.0) return 0.0;
  return std::sqrt((b - v) * (v - a)) / (2.0 * std::numbers::pi * variance * ratio * v);
}

namespace {

// CDF of the law on its own 256-point support grid (trapezoid, renormalised),
// then read off at t by linear interpolation.
struct MpCdf {
  double a = 0.0, b = 0.0;
  std::vector<double> v, cdf;

  MpCdf(double ratio, double variance) {
    a = variance * (1.0 - std::sqrt(ratio)) * (1.0 - std::sqrt(ratio));
    b = variance * (1.0 + std::sqrt(ratio)) * (1.0 + std::sqrt(ratio));
    v.resize(kMpPoints);
    cdf.resize(kMpPoints);
    for (std::size_t i = 0; i < kMpPoints; ++i) {
      v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(kMpPoints - 1);
    }
    cdf[0] = 0.0;
    double prev = mp_density(v[0], ratio, variance);
    for (std::size_t i = 1; i < kMpPoints; ++i) {
      const double cur = mp_density(v[i], ratio, variance);
      cdf[i] = cdf[i - 1] + 0.5 * (prev + cur) * (v[i] - v[i - 1]);
      prev = cur;
    }
    const double total = cdf.back();
    if (total > 0.0) {
      for (double& c : cdf) c /= total;
    }
  }

  double at(double t) const {
    if (t <= a) return 0.0;
    if (t >= b) return 1.0;
    const auto it = std::upper_bound(v.begin(), v.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - v.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - v[lo]) / (v[hi] - v[lo]);
    return cdf[lo] + w * (cdf[hi] - cdf[lo]);
  }
};

}  // namespace

MpFit mp_fit(const Eigen::VectorXd& eigs, std::size_t L, std::size_t N, std::size_t M_hat,
             std::size_t K) {
  if (static_cast<std::size_t>(eigs.size()) != L) throw std::invalid_argument("mp_fit: need L eigenvalues");
  if (M_hat >= L) throw std::invalid_argument("mp_fit: order must be < L");
  if (K < 2) throw std::invalid_argument("mp_fit: K must be >= 2");
  const double c = static_cast<double>(L) / static_cast<double>(N);
  if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("mp_fit: L/N must lie in (0, 1)");

  MpFit fit;
  const double sc = std::sqrt(c);
  double lo = eigs[static_cast<Eigen::Index>(L - 1)] / ((1.0 - sc) * (1.0 - sc));
  double hi = eigs[static_cast<Eigen::Index>(M_hat)] / ((1.0 + sc) * (1.0 + sc));
  if (lo > hi) {
    std::swap(lo, hi);
    fit.swapped = true;
  }
  fit.bracket_lo = lo;
  fit.bracket_hi = hi;

  const std::size_t n_noise = L - M_hat;
  const double ratio = static_cast<double>(n_noise) / static_cast<double>(N);
  std::vector<double> noise(eigs.data() + M_hat, eigs.data() + L);
  std::sort(noise.begin(), noise.end());

  fit.candidates.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    fit.candidates[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(K - 1);
  }

  // one evaluation grid shared by every candidate so the distances compare
  const double sr = std::sqrt(ratio);
  double g_lo = std::min(noise.front(), lo * (1.0 - sr) * (1.0 - sr));
  double g_hi = std::max(noise.back(), hi * (1.0 + sr) * (1.0 + sr));
  if (!(g_hi > g_lo)) g_hi = g_lo + 1.0;
  std::vector<double> grid(kMpPoints), ecdf(kMpPoints);
  for (std::size_t i = 0; i < kMpPoints; ++i) {
    grid[i] = g_lo + (g_hi - g_lo) * static_cast<double>(i) / static_cast<double>(kMpPoints - 1);
    const auto below = std::upper_bound(noise.begin(), noise.end(), grid[i]) - noise.begin();
    ecdf[i] = static_cast<double>(below) / static_cast<double>(n_noise);
  }

  fit.distances.resize(K);
  std::size_t best = 0;
  for (std::size_t k = 0; k < K; ++k) {
    if (!(fit.candidates[k] > 0.0)) {
      fit.distances[k] = std::numeric_limits<double>::infinity();
      continue;
    }
    const MpCdf law(ratio, fit.candidates[k]);
    double d2 = 0.0;
    for (std::size_t i = 0; i < kMpPoints; ++i) {
      const double diff = ecdf[i] - law.at(grid[i]);
      d2 += diff * diff;
    }
    fit.distances[k] = std::sqrt(d2);
    if (fit.distances[k] < fit.distances[best]) best = k;
  }
  fit.noise_variance = fit.candidates[best];
  fit.goodness_D = fit.distances[best];
  return fit;
}

SnrEstimate estimate_snr(const Eigen::VectorXcd& samples, std::size_t L, std::size_t K) {
  if (K < 2) throw std::invalid_argument("estimate_snr: K must be >= 2");
  const Eigen::VectorXd eigs = smoothed_eigenvalues(samples, L);
  const std::size_t nc = static_cast<std::size_t>(samples.size()) - L + 1;

  SnrEstimate est;
  est.smoothing_L = L;
  est.grid_K = K;
  est.mdl_order = mdl_order(eigs, L, nc);
  const MpFit fit = mp_fit(eigs, L, nc, est.mdl_order, K);
  est.noise_variance_hat = fit.noise_variance;
  est.goodness_D = fit.goodness_D;
  est.bracket_lo = fit.bracket_lo;
  est.bracket_hi = fit.bracket_hi;
  est.bracket_swapped = fit.swapped;

  // mean |x_ij|^2 over the data matrix: row i covers samples[L-1-i .. L-1-i+nc)
  double acc = 0.0;
  for (std::size_t i = 0; i < L; ++i) {
    acc += samples.segment(static_cast<Eigen::Index>(L - 1 - i), static_cast<Eigen::Index>(nc)).squaredNorm();
  }
  est.total_power_hat = acc / static_cast<double>(L * nc);

  const double gamma = (est.total_power_hat - est.noise_variance_hat) / est.noise_variance_hat;
  if (!(gamma > 0.0) || 10.0 * std::log10(gamma) < kSnrFloorDb) {
    est.snr_db = kSnrFloorDb;
    est.clamped = true;
  } else {
    est.snr_db = 10.0 * std::log10(gamma);
  }
  return est;
}

SnrEstimate estimate_snr(const Eigen::VectorXd& samples, std::size_t L, std::size_t K) {
  return estimate_snr(Eigen::VectorXcd(samples.cast<std::complex<double>>()), L, K);
}

}  // namespace cssense
