// Compiled with -mavx2 -mfma. Only reached through the dispatch table after
// a CPUID check, so nothing here may be inlined into baseline code.

#include <immintrin.h>

#include "umix/kernels.hpp"

namespace umix::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  std::size_t q = 0;
  for (; q + 8 <= n; q += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + q), _mm256_loadu_pd(y + q), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + q + 4), _mm256_loadu_pd(y + q + 4), s1);
  }
  for (; q + 4 <= n; q += 4) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + q), _mm256_loadu_pd(y + q), s0);
  }
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; q < n; ++q) s += x[q] * y[q];
  return s;
}

double wdot_avx2(const double* w, const double* x, const double* y, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  std::size_t q = 0;
  for (; q + 8 <= n; q += 8) {
    __m256d wx0 = _mm256_mul_pd(_mm256_loadu_pd(w + q), _mm256_loadu_pd(x + q));
    __m256d wx1 = _mm256_mul_pd(_mm256_loadu_pd(w + q + 4), _mm256_loadu_pd(x + q + 4));
    s0 = _mm256_fmadd_pd(wx0, _mm256_loadu_pd(y + q), s0);
    s1 = _mm256_fmadd_pd(wx1, _mm256_loadu_pd(y + q + 4), s1);
  }
  for (; q + 4 <= n; q += 4) {
    __m256d wx = _mm256_mul_pd(_mm256_loadu_pd(w + q), _mm256_loadu_pd(x + q));
    s0 = _mm256_fmadd_pd(wx, _mm256_loadu_pd(y + q), s0);
  }
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; q < n; ++q) s += w[q] * x[q] * y[q];
  return s;
}

// Two rows of `a` share each load of a row of `b`.
void gram_avx2(const double* a, std::size_t na, const double* b, std::size_t nb,
               const double* w, std::size_t n, double* out, std::size_t ldo) {
  std::size_t i = 0;
  for (; i + 2 <= na; i += 2) {
    const double* a0 = a + i * n;
    const double* a1 = a0 + n;
    for (std::size_t j = 0; j < nb; ++j) {
      const double* bj = b + j * n;
      __m256d s0 = _mm256_setzero_pd();
      __m256d s1 = _mm256_setzero_pd();
      std::size_t q = 0;
      for (; q + 4 <= n; q += 4) {
        __m256d wb = _mm256_mul_pd(_mm256_loadu_pd(w + q), _mm256_loadu_pd(bj + q));
        s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a0 + q), wb, s0);
        s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a1 + q), wb, s1);
      }
      double r0 = hsum(s0);
      double r1 = hsum(s1);
      for (; q < n; ++q) {
        const double wb = w[q] * bj[q];
        r0 += a0[q] * wb;
        r1 += a1[q] * wb;
      }
      out[i * ldo + j] += r0;
      out[(i + 1) * ldo + j] += r1;
    }
  }
  for (; i < na; ++i) {
    for (std::size_t j = 0; j < nb; ++j) out[i * ldo + j] += wdot_avx2(w, a + i * n, b + j * n, n);
  }
}

void moments_avx2(const double* a, std::size_t na, const double* f, const double* w,
                  std::size_t n, double* out) {
  for (std::size_t i = 0; i < na; ++i) out[i] += wdot_avx2(w, f, a + i * n, n);
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{"avx2", dot_avx2, wdot_avx2, gram_avx2, moments_avx2};
  return &table;
}

}  // namespace umix::kernels
