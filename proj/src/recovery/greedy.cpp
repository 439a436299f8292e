#include <algorithm>
#include <cmath>
#include <numeric>

#include "cssense/recovery.hpp"
#include "cssense/simd.hpp"

namespace cssense {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Least squares on a column subset. Returns coefficients in `cols` order.
Eigen::VectorXd subset_lstsq(const Eigen::MatrixXd& a, const std::vector<Eigen::Index>& cols,
                             const Eigen::VectorXd& y) {
  Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = a.col(cols[j]);
  return sub.colPivHouseholderQr().solve(y);
}

std::vector<Eigen::Index> top_indices(const Eigen::VectorXd& v, std::size_t count) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(v.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  count = std::min(count, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count), idx.end(),
                    [&](Eigen::Index l, Eigen::Index r) {
                      const double al = std::fabs(v[l]), ar = std::fabs(v[r]);
                      return al != ar ? al > ar : l < r;
                    });
  idx.resize(count);
  return idx;
}

}  // namespace

RecoveryResult omp(const MeasurementVector& y, const SensingMatrix& a, StoppingRule rule) {
  if (y.size() != a.rows()) throw std::invalid_argument("omp: dimension mismatch");
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (rule.max_atoms > m) throw std::invalid_argument("omp: target sparsity exceeds m");
  if (!(rule.rel_tol >= 0.0)) throw std::invalid_argument("omp: tolerance must be >= 0");
  const auto t0 = std::chrono::steady_clock::now();

  RecoveryResult res;
  res.measurements_used = m;
  res.x_hat = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));

  const Eigen::MatrixXd dense = a.dense();
  Eigen::VectorXd col_norm = dense.colwise().norm().transpose();
  // column-major transpose gives contiguous rows for the correlation gemv
  const RowMat at = dense.transpose();
  std::vector<char> usable(n, 1);
  for (std::size_t j = 0; j < n; ++j) usable[j] = col_norm[static_cast<Eigen::Index>(j)] > 0.0;

  const double y_norm = y.values.norm();
  Eigen::VectorXd r = y.values;
  res.objective_trace.push_back(y_norm);
  if (y_norm == 0.0 || rule.max_atoms == 0) {
    res.converged = true;
    res.recovery_time = std::chrono::steady_clock::now() - t0;
    return res;
  }

  Eigen::MatrixXd q(static_cast<Eigen::Index>(m), 0);
  std::vector<Eigen::Index> support;
  Eigen::VectorXd corr(static_cast<Eigen::Index>(n));
  const auto& k = simd::active();

  while (support.size() < rule.max_atoms) {
    ++res.iterations;
    k.gemv(at.data(), n, m, r.data(), corr.data());
    Eigen::Index best = -1;
    double best_val = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!usable[j]) continue;
      const double v = std::fabs(corr[static_cast<Eigen::Index>(j)]) / col_norm[static_cast<Eigen::Index>(j)];
      if (v > best_val) {
        best_val = v;
        best = static_cast<Eigen::Index>(j);
      }
    }
    if (best < 0) break;
    usable[static_cast<std::size_t>(best)] = 0;

    // two passes of classical Gram-Schmidt
    Eigen::VectorXd v = dense.col(best);
    for (int pass = 0; pass < 2 && q.cols() > 0; ++pass) v -= q * (q.transpose() * v);
    const double vn = v.norm();
    if (vn <= 1e-10 * col_norm[best]) {
      res.warning = true;
      continue;
    }
    q.conservativeResize(Eigen::NoChange, q.cols() + 1);
    q.col(q.cols() - 1) = v / vn;
    support.push_back(best);

    const Eigen::VectorXd qc = q.col(q.cols() - 1);
    r -= qc * qc.dot(r);
    const double rn = r.norm();
    res.objective_trace.push_back(std::min(rn, res.objective_trace.back()));
    if (rn <= rule.rel_tol * y_norm) {
      res.converged = true;
      break;
    }
  }
  if (!res.converged) res.converged = support.size() == rule.max_atoms;

  if (!support.empty()) {
    const Eigen::VectorXd coef = subset_lstsq(dense, support, y.values);
    for (std::size_t j = 0; j < support.size(); ++j) res.x_hat[support[j]] = coef[static_cast<Eigen::Index>(j)];
  }
  res.recovery_time = std::chrono::steady_clock::now() - t0;
  return res;
}

RecoveryResult cosamp(const MeasurementVector& y, const SensingMatrix& a, std::size_t k,
                      SolverOpts opts) {
  if (y.size() != a.rows()) throw std::invalid_argument("cosamp: dimension mismatch");
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (k < 1 || k > n) throw std::invalid_argument("cosamp: need 1 <= k <= n");
  const auto t0 = std::chrono::steady_clock::now();

  RecoveryResult res;
  res.measurements_used = m;
  res.warning = 2 * k > m;
  res.x_hat = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));

  const Eigen::MatrixXd dense = a.dense();
  const RowMat at = dense.transpose();
  const double y_norm = y.values.norm();
  Eigen::VectorXd r = y.values;
  double r_norm = y_norm;
  Eigen::VectorXd proxy(static_cast<Eigen::Index>(n));
  std::vector<Eigen::Index> support;

  for (std::size_t it = 1; it <= std::max<std::size_t>(opts.max_iter, 1); ++it) {
    res.iterations = it;
    if (r_norm <= opts.tol * y_norm) {
      res.converged = true;
      res.objective_trace.push_back(r_norm);
      break;
    }
    simd::active().gemv(at.data(), n, m, r.data(), proxy.data());
    std::vector<Eigen::Index> merged = top_indices(proxy, 2 * k);
    merged.insert(merged.end(), support.begin(), support.end());
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    // keep the least-squares problem overdetermined
    if (merged.size() > m) {
      Eigen::VectorXd score = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
      for (auto j : merged) score[j] = std::fabs(proxy[j]) + std::fabs(res.x_hat[j]) * 1e6;
      merged = top_indices(score, m);
      std::sort(merged.begin(), merged.end());
    }

    const Eigen::VectorXd b = subset_lstsq(dense, merged, y.values);
    Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < merged.size(); ++j) full[merged[j]] = b[static_cast<Eigen::Index>(j)];
    std::vector<Eigen::Index> pruned = top_indices(full, k);
    std::sort(pruned.begin(), pruned.end());

    Eigen::VectorXd x_new = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (auto j : pruned) x_new[j] = full[j];
    Eigen::VectorXd r_new = y.values - dense * x_new;
    const double rn = r_new.norm();
    res.objective_trace.push_back(rn);
    if (it > 1 && rn >= r_norm * (1.0 - 1e-12)) {
      // stagnated; keep the better previous iterate
      if (rn < r_norm) {
        res.x_hat = x_new;
        r_norm = rn;
      }
      res.converged = r_norm <= opts.tol * y_norm;
      break;
    }
    res.x_hat = x_new;
    support = pruned;
    r = r_new;
    r_norm = rn;
    if (r_norm <= opts.tol * y_norm) {
      res.converged = true;
      break;
    }
  }
  res.recovery_time = std::chrono::steady_clock::now() - t0;
  return res;
}

}  // namespace cssense
