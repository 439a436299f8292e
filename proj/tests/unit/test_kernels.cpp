#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "cssense/simd.hpp"

using namespace cssense;

namespace {

std::vector<double> random_vec(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (auto& e : v) e = g(rng);
  return v;
}

// Lengths chosen to hit the vector body, the tail and the empty case.
const std::size_t kLengths[] = {0, 1, 3, 4, 5, 7, 8, 15, 16, 17, 31, 64, 100, 1023};

}  // namespace

TEST_CASE("scalar kernels match naive loops") {
  const auto& k = simd::scalar_kernels();
  for (std::size_t n : kLengths) {
    auto a = random_vec(n, 1 + n);
    auto b = random_vec(n, 2 + n);
    double dot = 0, ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
      dot += a[i] * b[i];
      ss += a[i] * a[i];
    }
    CHECK(k.dot(a.data(), b.data(), n) == doctest::Approx(dot).epsilon(1e-12));
    CHECK(k.sum_squares(a.data(), n) == doctest::Approx(ss).epsilon(1e-12));

    auto y = b;
    k.axpy(0.75, a.data(), y.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == doctest::Approx(b[i] + 0.75 * a[i]));

    std::vector<double> out(n);
    k.soft_threshold(a.data(), 0.5, out.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      const double mag = std::max(std::fabs(a[i]) - 0.5, 0.0);
      CHECK(out[i] == doctest::Approx(std::copysign(mag, a[i])));
    }
  }
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
  if (!simd::avx2_available()) {
    MESSAGE("AVX2 not available on this machine; equivalence test skipped");
    return;
  }
  const auto& s = simd::scalar_kernels();
  const auto& v = *simd::avx2_kernels();
  CHECK(v.isa == simd::Isa::avx2);
  for (std::size_t n : kLengths) {
    auto a = random_vec(n, 10 + n);
    auto b = random_vec(n, 20 + n);
    const double scale = std::sqrt(static_cast<double>(n) + 1.0);
    CHECK(std::fabs(s.dot(a.data(), b.data(), n) - v.dot(a.data(), b.data(), n)) <= 1e-12 * scale * 10);
    CHECK(v.sum_squares(a.data(), n) == doctest::Approx(s.sum_squares(a.data(), n)).epsilon(1e-13));

    auto y1 = b, y2 = b;
    s.axpy(-1.25, a.data(), y1.data(), n);
    v.axpy(-1.25, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::fabs(y1[i] - y2[i]) <= 1e-14);

    std::vector<double> o1(n), o2(n);
    s.soft_threshold(a.data(), 0.3, o1.data(), n);
    v.soft_threshold(a.data(), 0.3, o2.data(), n);
    CHECK(o1 == o2);
  }
}

TEST_CASE("gemv variants agree on ragged shapes") {
  const auto& s = simd::scalar_kernels();
  for (std::size_t rows : {1u, 3u, 8u, 13u}) {
    for (std::size_t cols : {1u, 4u, 7u, 33u, 128u}) {
      auto a = random_vec(rows * cols, static_cast<unsigned>(rows * 1000 + cols));
      auto x = random_vec(cols, 5);
      std::vector<double> ref(rows, 0.0), y1(rows), y2(rows);
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) ref[i] += a[i * cols + j] * x[j];
      s.gemv(a.data(), rows, cols, x.data(), y1.data());
      for (std::size_t i = 0; i < rows; ++i) CHECK(y1[i] == doctest::Approx(ref[i]).epsilon(1e-12));
      if (simd::avx2_available()) {
        simd::avx2_kernels()->gemv(a.data(), rows, cols, x.data(), y2.data());
        for (std::size_t i = 0; i < rows; ++i) CHECK(y2[i] == doctest::Approx(ref[i]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("force_isa pins the dispatch table") {
  const auto before = simd::active_isa();
  simd::force_isa(simd::Isa::scalar);
  CHECK(simd::active_isa() == simd::Isa::scalar);
  CHECK(simd::isa_name(simd::Isa::scalar) == "scalar");
  if (simd::avx2_available()) {
    simd::force_isa(simd::Isa::avx2);
    CHECK(simd::active_isa() == simd::Isa::avx2);
  }
  simd::force_isa(before);
}
