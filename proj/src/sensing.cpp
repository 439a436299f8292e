#include "cssense/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>

#include "cssense/simd.hpp"
#include "fft.hpp"

namespace cssense {

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::gaussian: return "gaussian";
    case Scheme::bernoulli: return "bernoulli";
    case Scheme::circulant: return "circulant";
    case Scheme::toeplitz: return "toeplitz";
    case Scheme::custom: return "custom";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "gaussian") return Scheme::gaussian;
  if (name == "bernoulli") return Scheme::bernoulli;
  if (name == "circulant") return Scheme::circulant;
  if (name == "toeplitz") return Scheme::toeplitz;
  throw std::invalid_argument("unknown sensing scheme: " + std::string(name));
}

struct SensingMatrix::Impl {
  Scheme scheme = Scheme::custom;
  std::size_t m = 0;
  std::size_t n = 0;
  Seed seed = 0;
  MatrixOptions options;

  // dense schemes, row-major
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> entries;

  // structured schemes
  Eigen::VectorXd generator;
  std::vector<std::size_t> rows;
  std::unique_ptr<detail::RealFft> fft;
  std::vector<std::complex<double>> gen_spectrum;

  bool structured() const { return scheme == Scheme::circulant || scheme == Scheme::toeplitz; }

  void prepare_fft() {
    const std::size_t len = scheme == Scheme::circulant
                                ? n
                                : detail::good_fft_size(static_cast<std::size_t>(generator.size()));
    fft = std::make_unique<detail::RealFft>(len);
    std::vector<double> padded(len, 0.0);
    std::copy(generator.data(), generator.data() + generator.size(), padded.begin());
    gen_spectrum.resize(fft->spectrum_size());
    fft->forward(padded.data(), gen_spectrum.data());
  }

  // Full-structure product: out[r] for r in 0..(row count of the structure).
  // Circulant: out_r = sum_j c[(j - r) mod n] x_j   (circular cross-correlation)
  // Toeplitz:  out_r = sum_j t[n-1+r-j] x_j          (linear convolution tap)
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    const std::size_t len = fft->size();
    std::vector<double> buf(len, 0.0);
    std::copy(x.data(), x.data() + x.size(), buf.begin());
    std::vector<std::complex<double>> spec(fft->spectrum_size());
    fft->forward(buf.data(), spec.data());
    for (std::size_t k = 0; k < spec.size(); ++k) {
      spec[k] *= scheme == Scheme::circulant ? std::conj(gen_spectrum[k]) : gen_spectrum[k];
    }
    fft->inverse(spec.data(), buf.data());
    const double scale = 1.0 / static_cast<double>(len);
    const std::size_t offset = scheme == Scheme::circulant ? 0 : n - 1;
    Eigen::VectorXd y(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) y[static_cast<Eigen::Index>(i)] = buf[offset + rows[i]] * scale;
    return y;
  }

  // Circulant: out_j = sum_i c[(j - row_i) mod n] r_i   (circular convolution)
  // Toeplitz:  out_j = sum_i t[row_i + (n-1-j)] r_i     (correlation at lag n-1-j)
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& r) const {
    const std::size_t len = fft->size();
    std::vector<double> buf(len, 0.0);
    for (std::size_t i = 0; i < m; ++i) buf[rows[i]] += r[static_cast<Eigen::Index>(i)];
    std::vector<std::complex<double>> spec(fft->spectrum_size());
    fft->forward(buf.data(), spec.data());
    for (std::size_t k = 0; k < spec.size(); ++k) {
      spec[k] = scheme == Scheme::circulant ? spec[k] * gen_spectrum[k]
                                            : std::conj(spec[k]) * gen_spectrum[k];
    }
    fft->inverse(spec.data(), buf.data());
    const double scale = 1.0 / static_cast<double>(len);
    Eigen::VectorXd out(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t src = scheme == Scheme::circulant ? j : n - 1 - j;
      out[static_cast<Eigen::Index>(j)] = buf[src] * scale;
    }
    return out;
  }

  double entry(std::size_t i, std::size_t j) const {
    if (!structured()) return entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    const std::size_t r = rows[i];
    if (scheme == Scheme::circulant) return generator[static_cast<Eigen::Index>((j + n - r) % n)];
    return generator[static_cast<Eigen::Index>(n - 1 + r - j)];
  }
};

namespace {

void check_dims(std::size_t m, std::size_t n) {
  if (m == 0 || n == 0) throw std::invalid_argument("sensing matrix: dimensions must be >= 1");
  if (m > n) throw std::invalid_argument("sensing matrix: m must not exceed n");
}

Eigen::VectorXd rademacher_generator(std::size_t len, double density, double scale, Rng& rng) {
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution keep(std::clamp(density, 0.0, 1.0));
  Eigen::VectorXd g(static_cast<Eigen::Index>(len));
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double v = coin(rng) ? scale : -scale;
    g[i] = keep(rng) ? v : 0.0;
  }
  return g;
}

std::vector<std::size_t> choose_rows(std::size_t m, std::size_t total, bool random, Rng& rng) {
  std::vector<std::size_t> rows(total);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  if (random) {
    for (std::size_t i = 0; i < m; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, total - 1);
      std::swap(rows[i], rows[pick(rng)]);
    }
    rows.resize(m);
    std::sort(rows.begin(), rows.end());
  } else {
    rows.resize(m);
  }
  return rows;
}

}  // namespace

SensingMatrix SensingMatrix::build(Scheme scheme, std::size_t m, std::size_t n, Seed seed,
                                   const MatrixOptions& options) {
  check_dims(m, n);
  if (!(options.density > 0.0 && options.density <= 1.0)) {
    throw std::invalid_argument("sensing matrix: density must lie in (0, 1]");
  }
  auto impl = std::make_shared<Impl>();
  impl->scheme = scheme;
  impl->m = m;
  impl->n = n;
  impl->seed = seed;
  impl->options = options;
  Rng rng = make_rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));

  switch (scheme) {
    case Scheme::gaussian: {
      std::normal_distribution<double> g(0.0, scale);
      impl->entries.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
      for (Eigen::Index i = 0; i < impl->entries.size(); ++i) impl->entries.data()[i] = g(rng);
      break;
    }
    case Scheme::bernoulli: {
      std::bernoulli_distribution coin(0.5);
      impl->entries.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
      for (Eigen::Index i = 0; i < impl->entries.size(); ++i) {
        impl->entries.data()[i] = coin(rng) ? scale : -scale;
      }
      break;
    }
    case Scheme::circulant: {
      impl->generator = rademacher_generator(n, options.density, scale, rng);
      impl->rows = choose_rows(m, n, options.random_rows, rng);
      impl->prepare_fft();
      break;
    }
    case Scheme::toeplitz: {
      const std::size_t total_rows = options.random_rows ? n : m;
      impl->generator = rademacher_generator(n + total_rows - 1, options.density, scale, rng);
      impl->rows = choose_rows(m, total_rows, options.random_rows, rng);
      impl->prepare_fft();
      break;
    }
    case Scheme::custom:
      throw std::invalid_argument("sensing matrix: custom matrices come from from_dense()");
  }
  return SensingMatrix(std::move(impl));
}

SensingMatrix SensingMatrix::from_generator(Scheme scheme, std::size_t m, std::size_t n,
                                            Eigen::VectorXd generator,
                                            std::vector<std::size_t> rows) {
  if (m == 0 || n == 0) throw std::invalid_argument("sensing matrix: dimensions must be >= 1");
  if (scheme != Scheme::circulant && scheme != Scheme::toeplitz) {
    throw std::invalid_argument("from_generator: scheme must be circulant or toeplitz");
  }
  if (rows.empty()) {
    rows.resize(m);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
  }
  if (rows.size() != m) throw std::invalid_argument("from_generator: need exactly m row indices");
  const std::size_t max_row = *std::max_element(rows.begin(), rows.end());
  const std::size_t need = scheme == Scheme::circulant ? n : n + max_row;
  if (scheme == Scheme::circulant && max_row >= n) {
    throw std::invalid_argument("from_generator: circulant row index out of range");
  }
  if (static_cast<std::size_t>(generator.size()) != need) {
    throw std::invalid_argument("from_generator: generator has the wrong length");
  }
  auto impl = std::make_shared<Impl>();
  impl->scheme = scheme;
  impl->m = m;
  impl->n = n;
  impl->generator = std::move(generator);
  impl->rows = std::move(rows);
  impl->prepare_fft();
  return SensingMatrix(std::move(impl));
}

SensingMatrix SensingMatrix::from_dense(Eigen::MatrixXd entries) {
  if (entries.rows() == 0 || entries.cols() == 0) {
    throw std::invalid_argument("sensing matrix: dimensions must be >= 1");
  }
  auto impl = std::make_shared<Impl>();
  impl->scheme = Scheme::custom;
  impl->m = static_cast<std::size_t>(entries.rows());
  impl->n = static_cast<std::size_t>(entries.cols());
  impl->entries = entries;
  return SensingMatrix(std::move(impl));
}

std::size_t SensingMatrix::rows() const { return impl_->m; }
std::size_t SensingMatrix::cols() const { return impl_->n; }
Scheme SensingMatrix::scheme() const { return impl_->scheme; }
Seed SensingMatrix::seed() const { return impl_->seed; }
const MatrixOptions& SensingMatrix::options() const { return impl_->options; }
bool SensingMatrix::structured() const { return impl_->structured(); }
const Eigen::VectorXd& SensingMatrix::generator() const { return impl_->generator; }
const std::vector<std::size_t>& SensingMatrix::row_indices() const { return impl_->rows; }

std::size_t SensingMatrix::stored_values() const {
  return structured() ? static_cast<std::size_t>(impl_->generator.size())
                      : static_cast<std::size_t>(impl_->entries.size());
}

double SensingMatrix::entry(std::size_t i, std::size_t j) const {
  if (i >= impl_->m || j >= impl_->n) throw std::out_of_range("SensingMatrix::entry");
  return impl_->entry(i, j);
}

Eigen::MatrixXd SensingMatrix::dense() const {
  if (!structured()) return impl_->entries;
  Eigen::MatrixXd d(static_cast<Eigen::Index>(impl_->m), static_cast<Eigen::Index>(impl_->n));
  for (std::size_t i = 0; i < impl_->m; ++i) {
    for (std::size_t j = 0; j < impl_->n; ++j) {
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = impl_->entry(i, j);
    }
  }
  return d;
}

Eigen::VectorXd SensingMatrix::apply(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != impl_->n) {
    throw std::invalid_argument("SensingMatrix::apply: dimension mismatch");
  }
  if (structured()) return impl_->apply(x);
  Eigen::VectorXd y(static_cast<Eigen::Index>(impl_->m));
  simd::active().gemv(impl_->entries.data(), impl_->m, impl_->n, x.data(), y.data());
  return y;
}

Eigen::VectorXd SensingMatrix::apply_transpose(const Eigen::VectorXd& r) const {
  if (static_cast<std::size_t>(r.size()) != impl_->m) {
    throw std::invalid_argument("SensingMatrix::apply_transpose: dimension mismatch");
  }
  if (structured()) return impl_->apply_transpose(r);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(impl_->n));
  const auto& k = simd::active();
  for (std::size_t i = 0; i < impl_->m; ++i) {
    k.axpy(r[static_cast<Eigen::Index>(i)], impl_->entries.data() + i * impl_->n, out.data(),
           impl_->n);
  }
  return out;
}

MeasurementVector compress(const SensingMatrix& matrix, const Eigen::VectorXd& x,
                           double noise_variance, Seed seed) {
  if (static_cast<std::size_t>(x.size()) != matrix.cols()) {
    throw std::invalid_argument("compress: signal length does not match matrix columns");
  }
  if (!(noise_variance >= 0.0)) throw std::invalid_argument("compress: negative noise variance");
  MeasurementVector y;
  y.values = matrix.apply(x);
  y.noise_variance = noise_variance;
  if (noise_variance > 0.0) {
    Rng rng = make_rng(seed);
    y.values += white_noise(matrix.rows(), noise_variance, rng);
  }
  return y;
}

double frobenius_sq(const SensingMatrix& matrix) {
  if (!matrix.structured()) return matrix.dense().squaredNorm();
  const Eigen::VectorXd& g = matrix.generator();
  const std::size_t n = matrix.cols();
  if (matrix.scheme() == Scheme::circulant) return static_cast<double>(matrix.rows()) * g.squaredNorm();
  double total = 0.0;
  for (std::size_t r : matrix.row_indices()) {
    total += g.segment(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(n)).squaredNorm();
  }
  return total;
}

double mutual_coherence(const SensingMatrix& matrix) {
  if (matrix.cols() < 2) throw std::invalid_argument("mutual_coherence: need at least 2 columns");
  Eigen::MatrixXd a = matrix.dense();
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    const double nrm = a.col(j).norm();
    if (nrm == 0.0) throw std::invalid_argument("mutual_coherence: zero column");
    a.col(j) /= nrm;
  }
  const Eigen::MatrixXd gram = a.transpose() * a;
  double mu = 0.0;
  for (Eigen::Index j = 0; j < gram.cols(); ++j) {
    for (Eigen::Index i = 0; i < j; ++i) mu = std::max(mu, std::fabs(gram(i, j)));
  }
  return std::min(mu, 1.0);
}

double rip_estimate(const SensingMatrix& matrix, std::size_t k, std::size_t trials, Seed seed) {
  const std::size_t n = matrix.cols();
  if (k < 1 || k > n) throw std::invalid_argument("rip_estimate: need 1 <= k <= n");
  if (trials < 1) throw std::invalid_argument("rip_estimate: need trials >= 1");
  const Eigen::MatrixXd a = matrix.dense();
  Rng rng = make_rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Eigen::VectorXd u(static_cast<Eigen::Index>(k));
  Eigen::VectorXd au(a.rows());
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = g(rng);
    u.normalize();
    au.setZero();
    for (std::size_t i = 0; i < k; ++i) au += u[static_cast<Eigen::Index>(i)] * a.col(static_cast<Eigen::Index>(idx[i]));
    worst = std::max(worst, std::fabs(au.squaredNorm() - 1.0));
  }
  return worst;
}

std::size_t required_measurements(std::size_t n, std::size_t k, MeasurementRule rule,
                                  double constant) {
  if (k < 1 || k > n) throw std::invalid_argument("required_measurements: need 1 <= k <= n");
  const double log_ratio = std::log(static_cast<double>(n) / static_cast<double>(k));
  const double raw = rule == MeasurementRule::multi_bit
                         ? constant * static_cast<double>(k) * log_ratio
                         : constant * log_ratio;
  const double c = std::ceil(raw);
  if (!(c >= 1.0)) return 1;
  if (c >= static_cast<double>(n)) return n;
  return static_cast<std::size_t>(c);
}

}  // namespace cssense
