#include <doctest.h>

#include <cmath>
#include <random>

#include "cssense/sensing.hpp"

using namespace cssense;

namespace {

// Dense matrix rebuilt straight from the documented generator layout.
Eigen::MatrixXd dense_from_generator(Scheme scheme, std::size_t n, const Eigen::VectorXd& g,
                                     const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd d(rows.size(), n);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t r = rows[i];
      d(i, j) = scheme == Scheme::circulant ? g[(j + n - r % n) % n] : g[n - 1 + r - j];
    }
  }
  return d;
}

}  // namespace

TEST_CASE("structured apply matches the dense product") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> nd(2, 300);
  std::normal_distribution<double> g;
  for (int c = 0; c < 100; ++c) {
    const std::size_t n = nd(rng);
    const std::size_t m = 1 + rng() % n;
    const Scheme scheme = c % 2 ? Scheme::circulant : Scheme::toeplitz;
    MatrixOptions opt;
    opt.random_rows = c % 3 == 0;
    opt.density = c % 5 == 0 ? 0.3 : 1.0;
    auto a = SensingMatrix::build(scheme, m, n, derive_seed(5, c), opt);
    REQUIRE(a.structured());
    Eigen::MatrixXd d = a.dense();
    Eigen::VectorXd x(n), r(m);
    for (auto& v : x) v = g(rng);
    for (auto& v : r) v = g(rng);
    CHECK((a.apply(x) - d * x).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((a.apply_transpose(r) - d.transpose() * r).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("generator layout matches the documented formulas") {
  const std::size_t n = 7;
  Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(n, 1, 7);
  std::vector<std::size_t> rows{0, 2, 5};
  auto circ = SensingMatrix::from_generator(Scheme::circulant, 3, n, c, rows);
  CHECK((circ.dense() - dense_from_generator(Scheme::circulant, n, c, rows)).norm() == 0.0);
  CHECK(circ.stored_values() == n);

  Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(n + 5, 1, 12);
  auto toep = SensingMatrix::from_generator(Scheme::toeplitz, 3, n, t, rows);
  CHECK((toep.dense() - dense_from_generator(Scheme::toeplitz, n, t, rows)).norm() == 0.0);
  CHECK(toep.entry(1, 3) == t[n - 1 + 2 - 3]);
}

TEST_CASE("dense schemes store every entry and apply exactly") {
  for (auto s : {Scheme::gaussian, Scheme::bernoulli}) {
    auto a = SensingMatrix::build(s, 20, 50, 9);
    CHECK_FALSE(a.structured());
    CHECK(a.stored_values() == 1000);
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(50, -1, 1);
    CHECK((a.apply(x) - a.dense() * x).norm() <= 1e-12);
  }
  auto b = SensingMatrix::build(Scheme::bernoulli, 20, 50, 9).dense();
  const double mag = std::fabs(b(0, 0));
  CHECK((b.array().abs() - mag).abs().maxCoeff() < 1e-15);
}

TEST_CASE("build is reproducible from the seed") {
  auto a = SensingMatrix::build(Scheme::toeplitz, 30, 64, 77);
  auto b = SensingMatrix::build(Scheme::toeplitz, 30, 64, 77);
  CHECK(a.dense() == b.dense());
  CHECK(a.seed() == 77);
}

TEST_CASE("adjoint identity holds for every scheme") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (auto s : {Scheme::gaussian, Scheme::bernoulli, Scheme::circulant, Scheme::toeplitz}) {
    auto a = SensingMatrix::build(s, 40, 96, 4);
    Eigen::VectorXd x(96), r(40);
    for (auto& v : x) v = g(rng);
    for (auto& v : r) v = g(rng);
    CHECK(a.apply(x).dot(r) == doctest::Approx(x.dot(a.apply_transpose(r))).epsilon(1e-10));
  }
}

TEST_CASE("frobenius, coherence and rip on known operators") {
  auto id = SensingMatrix::from_dense(Eigen::MatrixXd::Identity(8, 8));
  CHECK(frobenius_sq(id) == doctest::Approx(8.0));
  CHECK(mutual_coherence(id) == doctest::Approx(0.0));
  CHECK(rip_estimate(id, 3, 50, 1) <= 1e-12);

  Eigen::MatrixXd dup(2, 3);
  dup << 1, 2, 1, 0, 0, 0;
  CHECK(mutual_coherence(SensingMatrix::from_dense(dup)) == doctest::Approx(1.0));

  auto a = SensingMatrix::build(Scheme::circulant, 16, 64, 2);
  CHECK(frobenius_sq(a) == doctest::Approx(a.dense().squaredNorm()));
  const double mu = mutual_coherence(a);
  CHECK(mu > 0.0);
  CHECK(mu <= 1.0 + 1e-12);
}

TEST_CASE("required measurement counts") {
  CHECK(required_measurements(2000, 50, MeasurementRule::multi_bit, 5.8175) == 1074);
  CHECK(required_measurements(1000, 10, MeasurementRule::one_bit, 2.0) == 10);
  CHECK(required_measurements(1000, 4, MeasurementRule::multi_bit, 1.5) == 34);
  CHECK(required_measurements(100, 100, MeasurementRule::multi_bit, 3.0) == 1);
  CHECK(required_measurements(10, 1, MeasurementRule::multi_bit, 100.0) == 10);
  CHECK_THROWS_AS(required_measurements(10, 0, MeasurementRule::one_bit, 1.0), std::invalid_argument);
}

TEST_CASE("compress adds noise of the requested variance") {
  auto a = SensingMatrix::build(Scheme::gaussian, 1000, 1000, 1);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(1000);
  auto y = compress(a, x, 0.25, 8);
  CHECK(y.noise_variance == 0.25);
  CHECK((y.values - a.apply(x)).squaredNorm() / 1000.0 == doctest::Approx(0.25).epsilon(0.08));
  auto y0 = compress(a, x, 0.0, 8);
  CHECK(y0.values == a.apply(x));
}
