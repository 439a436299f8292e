#include "cssense/detectors.hpp"

#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "cssense/simd.hpp"
#include "fft.hpp"

namespace cssense {

std::string_view to_string(Technique t) {
  switch (t) {
    case Technique::energy: return "energy";
    case Technique::autocorrelation: return "autocorrelation";
    case Technique::euclidean: return "euclidean";
    case Technique::wavelet: return "wavelet";
    case Technique::matched_filter: return "matched_filter";
    case Technique::compressive: return "compressive";
  }
  return "unknown";
}

Technique parse_technique(std::string_view name) {
  for (Technique t : {Technique::energy, Technique::autocorrelation, Technique::euclidean,
                      Technique::wavelet, Technique::matched_filter, Technique::compressive}) {
    if (to_string(t) == name) return t;
  }
  throw std::invalid_argument("unknown detection technique: " + std::string(name));
}

NoisySignal observed(const Eigen::VectorXd& samples) {
  NoisySignal s;
  s.samples = samples.cast<std::complex<double>>();
  s.complex_valued = false;
  return s;
}

NoisySignal observed(const Eigen::VectorXcd& samples) {
  NoisySignal s;
  s.samples = samples;
  s.complex_valued = true;
  return s;
}

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double q_inverse(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("q_inverse: p must lie in (0, 1)");
  return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

namespace {

std::size_t n_of(const NoisySignal& y) { return y.size(); }

const double* interleaved(const NoisySignal& y) {
  return reinterpret_cast<const double*>(y.samples.data());
}

double total_energy(const NoisySignal& y) {
  return simd::active().sum_squares(interleaved(y), 2 * n_of(y));
}

DetectionOutcome outcome(Technique t, double stat, double lambda, bool occupied) {
  DetectionOutcome o;
  o.technique = t;
  o.statistic = stat;
  o.threshold = lambda;
  o.decision = occupied ? Decision::occupied : Decision::idle;
  return o;
}

// biased R(lag) = (1/N) sum_n y[n+lag] conj(y[n]), lag >= 0
std::complex<double> acf_at(const NoisySignal& y, std::size_t lag) {
  const std::size_t n = n_of(y);
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t i = 0; i + lag < n; ++i) acc += y.samples[static_cast<Eigen::Index>(i + lag)] * std::conj(y.samples[static_cast<Eigen::Index>(i)]);
  return acc / static_cast<double>(n);
}

}  // namespace

DetectionOutcome energy_detect(const NoisySignal& y, double lambda) {
  if (n_of(y) < 1) throw std::invalid_argument("energy_detect: empty signal");
  const double t = total_energy(y);
  return outcome(Technique::energy, t, lambda, t >= lambda);
}

double energy_threshold(double pfa_target, std::size_t n, double noise_variance) {
  if (!(pfa_target > 0.0 && pfa_target < 1.0)) {
    throw std::invalid_argument("energy_threshold: pfa_target must lie in (0, 1)");
  }
  const double nn = static_cast<double>(n);
  return (q_inverse(pfa_target) * std::sqrt(2.0 * nn) + nn) * noise_variance;
}

DetectionOutcome autocorr_detect(const NoisySignal& y, double margin_lambda) {
  if (n_of(y) < 2) throw std::invalid_argument("autocorr_detect: need at least 2 samples");
  const double r0 = total_energy(y) / static_cast<double>(n_of(y));
  if (r0 == 0.0) throw std::invalid_argument("autocorr_detect: zero-power input");
  const double stat = std::abs(acf_at(y, 1)) / r0;
  return outcome(Technique::autocorrelation, stat, margin_lambda, stat >= margin_lambda);
}

Eigen::VectorXd normalized_acf(const NoisySignal& y, std::size_t max_lag) {
  const double r0 = total_energy(y) / static_cast<double>(n_of(y));
  if (r0 == 0.0) throw std::invalid_argument("normalized_acf: zero-power input");
  const auto half = static_cast<Eigen::Index>(max_lag);
  Eigen::VectorXd out(2 * half + 1);
  for (Eigen::Index lag = 0; lag <= half; ++lag) {
    const std::complex<double> r = acf_at(y, static_cast<std::size_t>(lag)) / r0;
    const double v = y.complex_valued ? std::abs(r) : r.real();
    out[half + lag] = v;
    out[half - lag] = v;
  }
  return out;
}

DetectionOutcome euclid_detect(const NoisySignal& y, double lambda, std::size_t lag_count) {
  if (lag_count < 2 || lag_count % 2 != 0) {
    throw std::invalid_argument("euclid_detect: lag count must be even and >= 2");
  }
  if (n_of(y) <= lag_count) throw std::invalid_argument("euclid_detect: need N > lag count");
  const std::size_t half = lag_count / 2;
  const Eigen::VectorXd acf = normalized_acf(y, half);
  double d2 = 0.0;
  const double mm = static_cast<double>(lag_count);
  for (Eigen::Index i = 0; i < acf.size(); ++i) {
    const double lag = static_cast<double>(i) - static_cast<double>(half);
    const double ref = 1.0 - 2.0 * std::fabs(lag) / mm;
    d2 += (acf[i] - ref) * (acf[i] - ref);
  }
  const double d = std::sqrt(d2);
  return outcome(Technique::euclidean, d, lambda, d < lambda);
}

Eigen::VectorXd periodogram(const NoisySignal& y) {
  const std::size_t n = n_of(y);
  std::vector<std::complex<double>> spec(n);
  detail::complex_dft(y.samples.data(), spec.data(), n);
  const std::size_t bins = y.complex_valued ? n : n / 2 + 1;
  Eigen::VectorXd p(static_cast<Eigen::Index>(bins));
  for (std::size_t k = 0; k < bins; ++k) p[static_cast<Eigen::Index>(k)] = std::norm(spec[k]) / static_cast<double>(n);
  return p;
}

double mexican_hat(double t) {
  const double t2 = t * t;
  return (1.0 - t2) * std::exp(-0.5 * t2);
}

Eigen::VectorXd wavelet_transform(const Eigen::VectorXd& psd, const WaveletOpts& opts) {
  if (!(opts.scale > 0.0) || !(opts.support > 0.0)) {
    throw std::invalid_argument("wavelet_transform: scale and support must be positive");
  }
  const auto reach = static_cast<Eigen::Index>(std::floor(opts.support * opts.scale));
  std::vector<double> kernel(static_cast<std::size_t>(2 * reach + 1));
  for (Eigen::Index d = -reach; d <= reach; ++d) {
    kernel[static_cast<std::size_t>(d + reach)] = mexican_hat(static_cast<double>(d) / opts.scale);
  }
  const double norm = 1.0 / std::sqrt(opts.scale);
  const Eigen::Index len = psd.size();
  Eigen::VectorXd w(len);
  for (Eigen::Index k = 0; k < len; ++k) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, k - reach);
    const Eigen::Index hi = std::min<Eigen::Index>(len - 1, k + reach);
    double acc = 0.0;
    for (Eigen::Index j = lo; j <= hi; ++j) acc += psd[j] * kernel[static_cast<std::size_t>(j - k + reach)];
    w[k] = norm * acc;
  }
  return w;
}

DetectionOutcome wavelet_detect(const NoisySignal& y, double lambda, const WaveletOpts& opts) {
  if (n_of(y) < 16) throw std::invalid_argument("wavelet_detect: need at least 16 samples");
  const Eigen::VectorXd w = wavelet_transform(periodogram(y), opts).cwiseAbs();
  const double edge = w.maxCoeff();
  std::size_t peaks = 0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const bool left = i == 0 || w[i] > w[i - 1];
    const bool right = i + 1 == w.size() || w[i] >= w[i + 1];
    peaks += w[i] > 0.0 && left && right;
  }
  const bool reached = edge >= lambda;
  DetectionOutcome o = outcome(Technique::wavelet, edge, lambda, opts.invert ? reached : !reached);
  o.edge_count = peaks;
  return o;
}

DetectionOutcome matched_filter_detect(const NoisySignal& y, const PilotSignal& pilot,
                                       double lambda) {
  if (y.samples.size() != pilot.samples.size()) {
    throw std::invalid_argument("matched_filter_detect: length mismatch");
  }
  // Re(y conj(x)) = yr*xr + yi*xi, i.e. a plain dot over interleaved parts
  const double t = simd::active().dot(interleaved(y),
                                      reinterpret_cast<const double*>(pilot.samples.data()),
                                      2 * n_of(y));
  return outcome(Technique::matched_filter, t, lambda, t >= lambda);
}

double quiet_time_threshold(const Eigen::VectorXcd& noise, const PilotSignal& pilot,
                            double factor, std::size_t runs) {
  if (!(factor > 0.0)) throw std::invalid_argument("quiet_time_threshold: factor must be > 0");
  if (runs < 1) throw std::invalid_argument("quiet_time_threshold: runs must be >= 1");
  const Eigen::Index n = pilot.samples.size();
  if (noise.size() != n * static_cast<Eigen::Index>(runs)) {
    throw std::invalid_argument("quiet_time_threshold: noise must hold runs * N samples");
  }
  double acc = 0.0;
  for (std::size_t r = 0; r < runs; ++r) {
    const auto seg = noise.segment(static_cast<Eigen::Index>(r) * n, n);
    acc += std::abs((seg.array() * pilot.samples.array().conjugate()).sum());
  }
  return factor * acc / static_cast<double>(runs);
}

double quiet_time_threshold(double noise_variance, const PilotSignal& pilot, double factor,
                            std::size_t runs, Rng& rng) {
  if (runs < 1) throw std::invalid_argument("quiet_time_threshold: runs must be >= 1");
  const Eigen::VectorXcd noise = complex_white_noise(
      static_cast<std::size_t>(pilot.samples.size()) * runs, noise_variance, rng);
  return quiet_time_threshold(noise, pilot, factor, runs);
}

CompressiveDetector::CompressiveDetector(const SensingMatrix& omega, const Eigen::VectorXd& tmpl) {
  if (static_cast<std::size_t>(tmpl.size()) != omega.cols()) {
    throw std::invalid_argument("compressive detector: template length != n");
  }
  const Eigen::MatrixXd o = omega.dense();
  const Eigen::MatrixXd gram = o * o.transpose();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  const Eigen::VectorXd d = ldlt.vectorD().cwiseAbs();
  const double dmax = d.size() > 0 ? d.maxCoeff() : 0.0;
  if (ldlt.info() != Eigen::Success || dmax == 0.0 ||
      d.minCoeff() <= 1e-12 * dmax) {
    throw IllConditionedError("compressive detector: Omega Omega^T is singular");
  }
  weights_ = ldlt.solve(omega.apply(tmpl));
}

double CompressiveDetector::statistic(const Eigen::VectorXd& y) const {
  if (y.size() != weights_.size()) throw std::invalid_argument("compressive detector: length mismatch");
  return simd::active().dot(y.data(), weights_.data(), static_cast<std::size_t>(y.size()));
}

DetectionOutcome CompressiveDetector::detect(const MeasurementVector& y, double lambda) const {
  const double t = statistic(y.values);
  return outcome(Technique::compressive, t, lambda, t >= lambda);
}

DetectionOutcome compressive_detect(const MeasurementVector& y, const SensingMatrix& omega,
                                    const Eigen::VectorXd& tmpl, double lambda) {
  if (y.size() != omega.rows()) throw std::invalid_argument("compressive_detect: length mismatch");
  return CompressiveDetector(omega, tmpl).detect(y, lambda);
}

RocPoint closed_form_roc(RocTechnique technique, const RocInputs& in) {
  RocPoint p;
  p.threshold = in.lambda;
  p.snr_db = in.snr_db.value_or(std::numeric_limits<double>::quiet_NaN());
  if (!(in.noise_variance > 0.0)) throw std::invalid_argument("closed_form_roc: noise variance must be > 0");
  if (technique == RocTechnique::energy) {
    if (in.n < 1) throw std::invalid_argument("closed_form_roc: n must be >= 1");
    p.regime_warning = in.n <= 250;
    const double n = static_cast<double>(in.n);
    const double w = in.noise_variance;
    p.pfa = q_function((in.lambda - n * w) / std::sqrt(2.0 * n * w * w));
    if (in.snr_db) {
      const double total = w * (1.0 + db_to_linear(*in.snr_db));
      p.pd = q_function((in.lambda - n * total) / std::sqrt(2.0 * n * total * total));
    } else {
      p.pd = std::numeric_limits<double>::quiet_NaN();
    }
  } else {
    if (!in.pilot_energy || !(*in.pilot_energy > 0.0)) {
      throw std::invalid_argument("closed_form_roc: matched filter needs pilot energy > 0");
    }
    const double e = *in.pilot_energy;
    const double sd = std::sqrt(e * in.noise_variance * (in.complex_noise ? 0.5 : 1.0));
    p.pd = q_function((in.lambda - e) / sd);
    p.pfa = q_function(in.lambda / sd);
  }
  p.pmd = 1.0 - p.pd;
  return p;
}

}  // namespace cssense
