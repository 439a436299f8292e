#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cssense/recovery.hpp"

using namespace cssense;

namespace {

MeasurementVector noiseless(const SensingMatrix& a, const Eigen::VectorXd& x) {
  return MeasurementVector{a.apply(x), 0.0, false};
}

// Least squares restricted to the planted support.
Eigen::VectorXd support_oracle(const SensingMatrix& a, const SparseSignal& x,
                               const Eigen::VectorXd& y) {
  Eigen::MatrixXd d = a.dense();
  Eigen::MatrixXd sub(d.rows(), x.support.size());
  for (std::size_t j = 0; j < x.support.size(); ++j) sub.col(j) = d.col(x.support[j]);
  Eigen::VectorXd coef = sub.colPivHouseholderQr().solve(y);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(a.cols());
  for (std::size_t j = 0; j < x.support.size(); ++j) out[x.support[j]] = coef[j];
  return out;
}

}  // namespace

TEST_CASE("omp recovers a noiseless sparse vector and agrees with the support oracle") {
  auto a = SensingMatrix::build(Scheme::gaussian, 60, 128, 1);
  auto x = gen_sparse_signal(128, 6, AmplitudeLaw::gaussian, 2);
  auto y = noiseless(a, x.samples);
  auto r = omp(y, a, StoppingRule::sparsity(6));
  CHECK(recovery_error(x.samples, r.x_hat) < 1e-10);
  CHECK((r.x_hat - support_oracle(a, x, y.values)).norm() < 1e-10);
  CHECK(r.converged);
  for (std::size_t i = 1; i < r.objective_trace.size(); ++i)
    CHECK(r.objective_trace[i] <= r.objective_trace[i - 1]);
}

TEST_CASE("omp tolerance rule stops early and respects the atom cap") {
  auto a = SensingMatrix::build(Scheme::gaussian, 40, 100, 3);
  auto x = gen_sparse_signal(100, 4, AmplitudeLaw::unit, 4);
  auto r = omp(noiseless(a, x.samples), a, StoppingRule::tolerance(1e-9, 20));
  CHECK(count_nonzero(r.x_hat) == 4);
  CHECK_THROWS_AS(omp(noiseless(a, x.samples), a, StoppingRule::sparsity(41)), std::invalid_argument);
}

TEST_CASE("cosamp recovers a noiseless sparse vector") {
  auto a = SensingMatrix::build(Scheme::gaussian, 80, 128, 5);
  auto x = gen_sparse_signal(128, 6, AmplitudeLaw::gaussian, 6);
  auto r = cosamp(noiseless(a, x.samples), a, 6);
  CHECK(recovery_error(x.samples, r.x_hat) < 1e-8);
  CHECK(count_nonzero(r.x_hat) <= 6);
}

TEST_CASE("basis pursuit is monotone and satisfies the optimality conditions") {
  auto a = SensingMatrix::build(Scheme::gaussian, 50, 120, 7);
  auto x = gen_sparse_signal(120, 5, AmplitudeLaw::unit, 8);
  auto y = compress(a, x.samples, 1e-3, 9);
  const double z = 0.05 * (2.0 * a.apply_transpose(y.values)).cwiseAbs().maxCoeff();
  auto r = basis_pursuit(y, a, z, {.tol = 1e-12, .max_iter = 20000});
  for (std::size_t i = 1; i < r.objective_trace.size(); ++i)
    CHECK(r.objective_trace[i] <= r.objective_trace[i - 1] + 1e-12);
  CHECK(bp_objective(y, a, r.x_hat, z) == doctest::Approx(r.objective_trace.back()));

  Eigen::VectorXd g = 2.0 * a.apply_transpose(y.values - a.apply(r.x_hat));
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (r.x_hat[i] != 0.0) CHECK(g[i] == doctest::Approx(z * (r.x_hat[i] > 0 ? 1 : -1)).epsilon(1e-3));
    else CHECK(std::fabs(g[i]) <= z * (1 + 1e-3));
  }
  CHECK(recovery_error(x.samples, r.x_hat) < 0.2);
}

TEST_CASE("basis pursuit with a huge penalty returns zero") {
  auto a = SensingMatrix::build(Scheme::gaussian, 20, 40, 1);
  auto x = gen_sparse_signal(40, 3, AmplitudeLaw::unit, 1);
  auto y = noiseless(a, x.samples);
  const double z = 1.01 * (2.0 * a.apply_transpose(y.values)).cwiseAbs().maxCoeff();
  auto r = basis_pursuit(y, a, z);
  CHECK(r.x_hat.cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(basis_pursuit(y, a, -1.0), std::invalid_argument);
}

TEST_CASE("spectral norm matches the largest singular value") {
  auto a = SensingMatrix::build(Scheme::toeplitz, 30, 70, 2);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a.dense());
  const double s = svd.singularValues()[0];
  // power iteration approaches the top singular value from below
  const double est = spectral_norm_sq(a, 200, 1);
  CHECK(est <= s * s * (1 + 1e-12));
  CHECK(est >= 0.98 * s * s);
}

TEST_CASE("bayesian recovery on a noisy sparse problem") {
  auto a = SensingMatrix::build(Scheme::gaussian, 80, 200, 11);
  auto x = gen_sparse_signal(200, 8, AmplitudeLaw::unit, 12);
  auto y = compress(a, x.samples, 1e-4, 13);
  auto r = bayesian_recover(y, a);
  CHECK(recovery_error(x.samples, r.base.x_hat) < 0.05);
  const auto found = count_nonzero(r.base.x_hat);
  CHECK(found >= 6);
  CHECK(found <= 10);
  CHECK(r.hyper_b == doctest::Approx(1.0 / r.noise_variance_hat));
  for (Eigen::Index i = 0; i < r.hyper_a.size(); ++i) {
    if (std::isinf(r.hyper_a[i])) {
      CHECK(r.base.x_hat[i] == 0.0);
      CHECK(r.signal_variance_hat[i] == 0.0);
    } else {
      CHECK(r.signal_variance_hat[i] > 0.0);
    }
  }
}

TEST_CASE("bayesian recovery of an all-zero measurement") {
  auto a = SensingMatrix::build(Scheme::gaussian, 10, 30, 1);
  MeasurementVector y{Eigen::VectorXd::Zero(10), 0.0, false};
  auto r = bayesian_recover(y, a);
  CHECK(r.base.converged);
  CHECK(r.base.x_hat.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("one-bit quantiser maps zero to +1") {
  Eigen::VectorXd v(4);
  v << -2, 0, 3, -0.0;
  auto s = one_bit_quantize(v);
  CHECK(s.signs[0] == -1);
  CHECK(s.signs[1] == 1);
  CHECK(s.signs[2] == 1);
  CHECK(s.signs[3] == 1);
  CHECK(sign_violations(s, v) == 0);
  CHECK(sign_violations(s, -v) == 2);
}

TEST_CASE("biht output is unit norm, k-sparse and scale invariant") {
  auto a = SensingMatrix::build(Scheme::gaussian, 200, 400, 21);
  for (int seed = 0; seed < 5; ++seed) {
    auto x = gen_sparse_signal(400, 10, AmplitudeLaw::gaussian, derive_seed(22, seed));
    auto s = one_bit_quantize(a.apply(x.samples));
    auto r = biht_recover(s, a, 10);
    CHECK(std::fabs(r.x_hat.norm() - 1.0) <= 1e-12);
    CHECK(count_nonzero(r.x_hat, 0.0) <= 10);
    auto r2 = biht_recover(one_bit_quantize(a.apply(7.5 * x.samples)), a, 10);
    CHECK(r2.x_hat == r.x_hat);
    CHECK(r.x_hat.dot(x.samples) / x.samples.norm() > 0.5);
    CHECK(r.objective_trace.back() == static_cast<double>(sign_violations(s, a.apply(r.x_hat))));
  }
}

TEST_CASE("biht rejects malformed input") {
  auto a = SensingMatrix::build(Scheme::gaussian, 5, 10, 1);
  SignVector s{Eigen::VectorXd::Ones(5)};
  CHECK_THROWS_AS(biht_recover(s, a, 0), std::invalid_argument);
  s.signs[2] = 0.5;
  CHECK_THROWS_AS(biht_recover(s, a, 2), std::invalid_argument);
}
