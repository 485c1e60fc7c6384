#include "rgcov/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace rgcov::kernels {

#if defined(RGCOV_HAVE_AVX2_TU)
const Kernels* avx2_kernels_impl();  // defined in kernels_avx2.cpp
#endif

const Kernels* avx2_kernels() {
#if defined(RGCOV_HAVE_AVX2_TU) && defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    return avx2_kernels_impl();
  }
#endif
  return nullptr;
}

namespace {

const Kernels* choose() {
  const char* env = std::getenv("RGCOV_KERNELS");
  if (env != nullptr) {
    if (std::strcmp(env, "scalar") == 0) return &scalar_kernels();
    if (std::strcmp(env, "avx2") == 0) {
      const Kernels* a = avx2_kernels();
      if (a != nullptr) return a;
      // Requested AVX2 on a machine without it: fall through to detection.
    }
  }
  const Kernels* a = avx2_kernels();
  return a != nullptr ? a : &scalar_kernels();
}

}  // namespace

const Kernels& active_kernels() {
  static const Kernels* chosen = choose();
  return *chosen;
}

std::string active_kernel_name() { return active_kernels().name; }

}  // namespace rgcov::kernels
