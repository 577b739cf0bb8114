#include "umix/kernels.hpp"

namespace umix::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t q = 0; q < n; ++q) s += x[q] * y[q];
  return s;
}

double wdot_scalar(const double* w, const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t q = 0; q < n; ++q) s += w[q] * x[q] * y[q];
  return s;
}

void gram_scalar(const double* a, std::size_t na, const double* b, std::size_t nb,
                 const double* w, std::size_t n, double* out, std::size_t ldo) {
  for (std::size_t i = 0; i < na; ++i) {
    const double* ai = a + i * n;
    for (std::size_t j = 0; j < nb; ++j) {
      out[i * ldo + j] += wdot_scalar(w, ai, b + j * n, n);
    }
  }
}

void moments_scalar(const double* a, std::size_t na, const double* f, const double* w,
                    std::size_t n, double* out) {
  for (std::size_t i = 0; i < na; ++i) out[i] += wdot_scalar(w, f, a + i * n, n);
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{"scalar", dot_scalar, wdot_scalar, gram_scalar, moments_scalar};
  return table;
}

}  // namespace umix::kernels
