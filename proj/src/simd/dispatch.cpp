#include <cstdlib>
#include <cstring>

#include "lensless/simd/kernels.hpp"

namespace lensless::simd {

#if defined(LENSLESS_HAVE_AVX2)
namespace detail {
const KernelTable* avx2_table() noexcept;
}
#endif

const KernelTable* avx2_kernels() noexcept {
#if defined(LENSLESS_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? detail::avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active_kernels() noexcept {
  static const KernelTable* table = [] {
    const char* force = std::getenv("LENSLESS_SIMD");
    if (force != nullptr && std::strcmp(force, "scalar") == 0) return &scalar_kernels();
    const KernelTable* fast = avx2_kernels();
    return fast != nullptr ? fast : &scalar_kernels();
  }();
  return *table;
}

}  // namespace lensless::simd
