#include "cssense/simd.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "kernels_impl.hpp"

namespace cssense::simd {
namespace {

const KernelTable kScalar{&scalar::dot,           &scalar::sum_squares, &scalar::axpy,
                          &scalar::soft_threshold, &scalar::gemv,        Isa::scalar};

#if defined(CSSENSE_HAVE_AVX2)
const KernelTable kAvx2{&avx2::dot,           &avx2::sum_squares, &avx2::axpy,
                        &avx2::soft_threshold, &avx2::gemv,        Isa::avx2};
#endif

bool cpu_has_avx2() {
#if defined(CSSENSE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* initial_table() {
  const char* env = std::getenv("CS_TOOLKIT_SIMD");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) return &kScalar;
  if (avx2_available()) return avx2_kernels();
  return &kScalar;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

const KernelTable& scalar_kernels() { return kScalar; }

const KernelTable* avx2_kernels() {
#if defined(CSSENSE_HAVE_AVX2)
  return &kAvx2;
#else
  return nullptr;
#endif
}

bool avx2_available() {
  static const bool ok = avx2_kernels() != nullptr && cpu_has_avx2();
  return ok;
}

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

Isa active_isa() { return active().isa; }

void force_isa(Isa isa) {
  if (isa == Isa::avx2 && avx2_available()) {
    current().store(avx2_kernels());
  } else {
    current().store(&kScalar);
  }
}

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

}  // namespace cssense::simd
