#include "fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>
#include <stdexcept>

namespace cssense::detail {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

constexpr unsigned kFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;

}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n == 0) throw std::invalid_argument("RealFft: size must be >= 1");
  std::vector<double> r(n);
  std::vector<fftw_complex> c(n / 2 + 1);
  const int len = static_cast<int>(n);
  std::lock_guard lock(planner_mutex());
  fwd_ = fftw_plan_dft_r2c_1d(len, r.data(), c.data(), kFlags);
  inv_ = fftw_plan_dft_c2r_1d(len, c.data(), r.data(), kFlags);
  if (fwd_ == nullptr || inv_ == nullptr) throw std::runtime_error("RealFft: planning failed");
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  if (fwd_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  if (inv_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(inv_));
}

void RealFft::forward(const double* in, std::complex<double>* out) const {
  std::vector<double> buf(in, in + n_);
  fftw_execute_dft_r2c(static_cast<fftw_plan>(fwd_), buf.data(),
                       reinterpret_cast<fftw_complex*>(out));
}

void RealFft::inverse(const std::complex<double>* in, double* out) const {
  // c2r overwrites its input
  std::vector<std::complex<double>> buf(in, in + spectrum_size());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inv_), reinterpret_cast<fftw_complex*>(buf.data()),
                       out);
}

void complex_dft(const std::complex<double>* in, std::complex<double>* out, std::size_t n) {
  if (n == 0) return;
  std::vector<std::complex<double>> buf(in, in + n);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(buf.data()),
                            reinterpret_cast<fftw_complex*>(out), FFTW_FORWARD, kFlags);
  }
  fftw_execute(plan);
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plan);
}

std::size_t good_fft_size(std::size_t n) {
  std::size_t best = 1;
  while (best < n) best <<= 1;
  for (std::size_t p5 = 1; p5 <= best; p5 *= 5) {
    for (std::size_t p35 = p5; p35 <= best; p35 *= 3) {
      std::size_t v = p35;
      while (v < n) v <<= 1;
      if (v < best) best = v;
    }
  }
  return best;
}

}  // namespace cssense::detail
