#include <cstdlib>

#include "umix/kernels.hpp"

namespace umix::kernels {

#ifndef UMIX_BUILD_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif

bool cpu_has_avx2_fma() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& active() {
  static const KernelTable& table = [] () -> const KernelTable& {
    if (std::getenv("UMIX_FORCE_SCALAR") == nullptr && cpu_has_avx2_fma()) {
      if (const KernelTable* t = avx2_table()) return *t;
    }
    return scalar_table();
  }();
  return table;
}

}  // namespace umix::kernels
