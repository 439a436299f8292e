#include <algorithm>
#include <cmath>
#include <numeric>

#include "cssense/recovery.hpp"

namespace cssense {

SignVector one_bit_quantize(const Eigen::VectorXd& values) {
  if (values.size() < 1) throw std::invalid_argument("one_bit_quantize: empty input");
  SignVector s;
  s.signs = values.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
  return s;
}

SignVector one_bit_quantize(const MeasurementVector& y) { return one_bit_quantize(y.values); }

std::size_t sign_violations(const SignVector& signs, const Eigen::VectorXd& ax) {
  if (ax.size() != signs.signs.size()) throw std::invalid_argument("sign_violations: length mismatch");
  std::size_t count = 0;
  // same zero rule as the quantizer: sign(0) = +1
  for (Eigen::Index i = 0; i < ax.size(); ++i) count += signs.signs[i] != (ax[i] >= 0.0 ? 1.0 : -1.0);
  return count;
}

namespace {

// Keep the k largest magnitudes (ties to the lower index), zero the rest.
void hard_threshold(Eigen::VectorXd& x, std::size_t k) {
  const auto n = static_cast<std::size_t>(x.size());
  if (k >= n) return;
  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                   [&](Eigen::Index l, Eigen::Index r) {
                     const double al = std::fabs(x[l]), ar = std::fabs(x[r]);
                     return al != ar ? al > ar : l < r;
                   });
  for (std::size_t i = k; i < n; ++i) x[idx[i]] = 0.0;
}

}  // namespace

RecoveryResult biht_recover(const SignVector& signs, const SensingMatrix& a, std::size_t k,
                            SolverOpts opts) {
  if (signs.size() != a.rows()) throw std::invalid_argument("biht_recover: signs length != m");
  if (k > a.cols()) throw std::invalid_argument("biht_recover: k exceeds n");
  if (k == 0) throw std::invalid_argument("biht_recover: k must be >= 1");
  for (Eigen::Index i = 0; i < signs.signs.size(); ++i) {
    if (signs.signs[i] != 1.0 && signs.signs[i] != -1.0) {
      throw std::invalid_argument("biht_recover: signs must be +1 or -1");
    }
  }
  const auto t0 = std::chrono::steady_clock::now();
  const double m = static_cast<double>(a.rows());

  RecoveryResult res;
  res.measurements_used = a.rows();

  // step 1/m is stated for unit-variance entries; rescale to the matrix at hand
  const double fro = frobenius_sq(a);
  const double entry_rms = fro > 0.0 ? std::sqrt(fro / (m * static_cast<double>(a.cols()))) : 1.0;
  const double step = (1.0 / m) / entry_rms;

  // Start from zero and let the iterate float; only the output is put on the
  // unit sphere. Renormalising every step stalls on worse consistent points.
  Eigen::VectorXd x = Eigen::VectorXd::Zero(a.cols());
  Eigen::VectorXd ax = Eigen::VectorXd::Zero(a.rows());
  std::size_t best_viol = sign_violations(signs, ax);
  Eigen::VectorXd best = x;
  res.objective_trace.push_back(static_cast<double>(best_viol));

  for (std::size_t it = 1; it <= opts.max_iter && best_viol > 0; ++it) {
    res.iterations = it;
    // half of (signs - sign(Ax)) is the one-sided l1 subgradient
    Eigen::VectorXd diff(ax.size());
    for (Eigen::Index i = 0; i < ax.size(); ++i) {
      const double s = ax[i] >= 0.0 ? 1.0 : -1.0;
      diff[i] = 0.5 * (signs.signs[i] - s);
    }
    x += step * a.apply_transpose(diff);
    hard_threshold(x, k);
    if (x.norm() == 0.0) break;
    ax = a.apply(x);
    const std::size_t viol = sign_violations(signs, ax);
    if (viol <= best_viol) {
      best_viol = viol;
      best = x;
      res.objective_trace.push_back(static_cast<double>(viol));
    }
  }
  if (best.norm() == 0.0) {
    // nothing beat the zero start; fall back to the thresholded back-projection
    best = a.apply_transpose(signs.signs);
    hard_threshold(best, k);
    if (best.norm() == 0.0) best[0] = 1.0;
  }
  res.converged = best_viol == 0;
  res.x_hat = best / best.norm();
  res.recovery_time = std::chrono::steady_clock::now() - t0;
  return res;
}

}  // namespace cssense
