#include <algorithm>
#include <cmath>
#include <random>

#include "cssense/recovery.hpp"
#include "cssense/simd.hpp"

namespace cssense {

double spectral_norm_sq(const SensingMatrix& a, std::size_t iterations, Seed seed) {
  Rng rng = make_rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.cols()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = g(rng);
  v.normalize();
  double lambda = 0.0;
  for (std::size_t it = 0; it < std::max<std::size_t>(iterations, 1); ++it) {
    Eigen::VectorXd w = a.apply_transpose(a.apply(v));
    lambda = w.norm();
    if (lambda == 0.0) return 0.0;
    v = w / lambda;
  }
  return lambda;
}

double bp_objective(const MeasurementVector& y, const SensingMatrix& a, const Eigen::VectorXd& x,
                    double z) {
  const Eigen::VectorXd r = y.values - a.apply(x);
  return simd::sum_squares({r.data(), static_cast<std::size_t>(r.size())}) + z * x.lpNorm<1>();
}

namespace {

void soft(const Eigen::VectorXd& in, double t, Eigen::VectorXd& out) {
  out.resize(in.size());
  simd::active().soft_threshold(in.data(), t, out.data(), static_cast<std::size_t>(in.size()));
}

}  // namespace

RecoveryResult basis_pursuit(const MeasurementVector& y, const SensingMatrix& a, double z,
                             const SolverOpts& opts) {
  if (!(z >= 0.0)) throw std::invalid_argument("basis_pursuit: z must be >= 0");
  if (y.size() != a.rows()) throw std::invalid_argument("basis_pursuit: dimension mismatch");
  const auto t0 = std::chrono::steady_clock::now();
  const auto n = static_cast<Eigen::Index>(a.cols());

  RecoveryResult res;
  res.measurements_used = a.rows();
  res.x_hat = Eigen::VectorXd::Zero(n);

  // gradient of ||y - Ax||^2 is 2 A^T (Ax - y); Lipschitz constant 2 sigma_max^2
  double lip = 2.0 * spectral_norm_sq(a, opts.power_iterations, opts.seed);
  if (lip == 0.0) {
    res.converged = true;
    res.recovery_time = std::chrono::steady_clock::now() - t0;
    return res;
  }

  // monotone FISTA: the accepted iterate never raises the objective
  Eigen::VectorXd x = res.x_hat;
  Eigen::VectorXd x_prev = x;
  Eigen::VectorXd probe = x;
  Eigen::VectorXd cand;
  double f = bp_objective(y, a, x, z);
  res.objective_trace.push_back(f);
  double t = 1.0;

  for (std::size_t it = 1; it <= opts.max_iter; ++it) {
    res.iterations = it;
    const Eigen::VectorXd rp = y.values - a.apply(probe);
    const Eigen::VectorXd grad = -2.0 * a.apply_transpose(rp);
    const double smooth_p = rp.squaredNorm();
    double f_cand = 0.0;
    for (;;) {
      soft(probe - grad / lip, z / lip, cand);
      // sufficient-decrease check against the quadratic model at `probe`
      const Eigen::VectorXd d = cand - probe;
      const Eigen::VectorXd rc = y.values - a.apply(cand);
      const double smooth_c = rc.squaredNorm();
      const double model = smooth_p + grad.dot(d) + 0.5 * lip * d.squaredNorm();
      if (smooth_c <= model * (1.0 + 1e-12) + 1e-300) {
        f_cand = smooth_c + z * cand.lpNorm<1>();
        break;
      }
      lip *= 2.0;
    }

    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const bool accepted = f_cand <= f;
    x_prev = x;
    const double f_prev = f;
    if (accepted) {
      x = cand;
      f = f_cand;
    }
    probe = x + (t / t_next) * (cand - x) + ((t - 1.0) / t_next) * (x - x_prev);
    t = t_next;
    res.objective_trace.push_back(f);

    const double scale = std::max(std::fabs(f_prev), 1e-300);
    const double step = (cand - x_prev).norm();
    if (f_prev == 0.0 ||
        (accepted && std::fabs(f_prev - f) / scale < opts.tol) ||
        step <= opts.tol * std::max(1.0, x.norm())) {
      res.converged = true;
      break;
    }
  }
  res.x_hat = x;
  res.recovery_time = std::chrono::steady_clock::now() - t0;
  return res;
}

}  // namespace cssense
