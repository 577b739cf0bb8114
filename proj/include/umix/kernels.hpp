#pragma once

// Quadrature contraction kernels.
//
// Every local matrix in the library is a weighted Gram product
//   out(i, j) = sum_q w[q] * a(i, q) * b(j, q)
// over quadrature points q, with basis values stored row-major (one
// contiguous row of samples per basis function). The scalar table is the
// reference; SIMD tables must agree with it up to summation order.

#include <cstddef>
#include <string_view>

namespace umix::kernels {

struct KernelTable {
  std::string_view name;

  // sum_q x[q] * y[q]
  double (*dot)(const double* x, const double* y, std::size_t n);

  // sum_q w[q] * x[q] * y[q]
  double (*wdot)(const double* w, const double* x, const double* y, std::size_t n);

  // out[i * ldo + j] += sum_q w[q] a[i * n + q] b[j * n + q]
  void (*gram)(const double* a, std::size_t na, const double* b, std::size_t nb,
               const double* w, std::size_t n, double* out, std::size_t ldo);

  // out[i] += sum_q w[q] f[q] a[i * n + q]
  void (*moments)(const double* a, std::size_t na, const double* f, const double* w,
                  std::size_t n, double* out);
};

const KernelTable& scalar_table();

// nullptr when the AVX2 table was not compiled in.
const KernelTable* avx2_table();

// Table picked at first use: AVX2+FMA when the CPU reports both and the
// environment variable UMIX_FORCE_SCALAR is unset, scalar otherwise.
const KernelTable& active();

bool cpu_has_avx2_fma();

}  // namespace umix::kernels
