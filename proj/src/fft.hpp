#pragma once
// Thin RAII wrapper over FFTW plans. Planning is serialised (the FFTW planner
// is not thread-safe); execution uses the new-array interface and may run
// concurrently on one plan.

#include <complex>
#include <cstddef>
#include <vector>

namespace cssense::detail {

class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t spectrum_size() const { return n_ / 2 + 1; }

  /// out has spectrum_size() entries. Unnormalised.
  void forward(const double* in, std::complex<double>* out) const;
  /// in has spectrum_size() entries; out has size() entries. Unnormalised.
  void inverse(const std::complex<double>* in, double* out) const;

 private:
  std::size_t n_;
  void* fwd_ = nullptr;
  void* inv_ = nullptr;
};

/// Forward complex DFT of length n, unnormalised.
void complex_dft(const std::complex<double>* in, std::complex<double>* out, std::size_t n);

/// Smallest 2^a 3^b 5^c >= n.
std::size_t good_fft_size(std::size_t n);

}  // namespace cssense::detail
