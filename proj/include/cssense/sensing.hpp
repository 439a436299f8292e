#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "cssense/rng.hpp"
#include "cssense/signal.hpp"

namespace cssense {

enum class Scheme { gaussian, bernoulli, circulant, toeplitz, custom };

std::string_view to_string(Scheme s);
Scheme parse_scheme(std::string_view name);

struct MatrixOptions {
  /// Probability that a generator entry of a structured matrix is nonzero.
  double density = 1.0;
  /// Pick m distinct rows at random from the full square structure instead
  /// of the leading m rows.
  bool random_rows = false;
};

/// M x N measurement operator. Structured schemes keep only their generator
/// vector and apply through FFT-based correlation; dense schemes keep all m*n
/// entries. Copies share the immutable state.
class SensingMatrix {
 public:
  static SensingMatrix build(Scheme scheme, std::size_t m, std::size_t n, Seed seed,
                             const MatrixOptions& options = {});

  /// Structured matrix from an explicit generator. Circulant rows are
  /// entry(i, j) = c[(j - row_i) mod n] with len(c) = n. Toeplitz rows are
  /// entry(i, j) = t[n - 1 + row_i - j] with len(t) = n + max_row.
  /// `rows` defaults to 0..m-1.
  static SensingMatrix from_generator(Scheme scheme, std::size_t m, std::size_t n,
                                      Eigen::VectorXd generator,
                                      std::vector<std::size_t> rows = {});

  static SensingMatrix from_dense(Eigen::MatrixXd entries);

  std::size_t rows() const;
  std::size_t cols() const;
  Scheme scheme() const;
  Seed seed() const;
  const MatrixOptions& options() const;
  bool structured() const;

  /// Generator vector (structured) or empty.
  const Eigen::VectorXd& generator() const;
  /// Row indices into the full structure (structured) or empty.
  const std::vector<std::size_t>& row_indices() const;
  /// Number of doubles held: generator length for structured, m*n for dense.
  std::size_t stored_values() const;

  double entry(std::size_t i, std::size_t j) const;
  Eigen::MatrixXd dense() const;

  /// A x
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  /// A^T r
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& r) const;

  struct Impl;

 private:
  explicit SensingMatrix(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

struct MeasurementVector {
  Eigen::VectorXd values;
  double noise_variance = 0.0;
  bool quantized = false;

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
};

/// y = A x + w, w ~ N(0, noise_variance I).
MeasurementVector compress(const SensingMatrix& matrix, const Eigen::VectorXd& x,
                           double noise_variance, Seed seed);
inline MeasurementVector compress(const SensingMatrix& matrix, const SparseSignal& x,
                                  double noise_variance, Seed seed) {
  return compress(matrix, x.samples, noise_variance, seed);
}

/// Sum of squared entries.
double frobenius_sq(const SensingMatrix& matrix);

/// Largest |<a_i, a_j>| over distinct l2-normalised columns.
double mutual_coherence(const SensingMatrix& matrix);

/// Monte-Carlo lower bound on the order-k restricted isometry constant:
/// max over `trials` random k-sparse unit vectors u of | ||A u||^2 - 1 |.
double rip_estimate(const SensingMatrix& matrix, std::size_t k, std::size_t trials, Seed seed);

enum class MeasurementRule {
  multi_bit,  // ceil(c * k * ln(n/k))
  one_bit,    // ceil(c * ln(n/k)), independent of k
};

std::size_t required_measurements(std::size_t n, std::size_t k, MeasurementRule rule,
                                  double constant);

}  // namespace cssense
