#pragma once
// Runtime-dispatched arithmetic kernels. Every kernel has a scalar reference
// implementation; an AVX2/FMA variant is used when the CPU supports it.
// Set CS_TOOLKIT_SIMD=scalar to pin the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace cssense::simd {

enum class Isa { scalar, avx2 };

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum_squares)(const double* a, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out = sign(x) * max(|x| - t, 0)
  void (*soft_threshold)(const double* x, double t, double* out, std::size_t n);
  // y = A x for row-major A (rows x cols)
  void (*gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x,
               double* y);
  Isa isa;
};

const KernelTable& scalar_kernels();
/// nullptr when the binary was built without AVX2 support.
const KernelTable* avx2_kernels();
/// True when avx2_kernels() is non-null and the running CPU has AVX2+FMA.
bool avx2_available();

const KernelTable& active();
Isa active_isa();
void force_isa(Isa isa);
std::string_view isa_name(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}
inline double sum_squares(std::span<const double> a) {
  return active().sum_squares(a.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}
inline void soft_threshold(std::span<const double> x, double t, std::span<double> out) {
  active().soft_threshold(x.data(), t, out.data(), x.size());
}

}  // namespace cssense::simd
