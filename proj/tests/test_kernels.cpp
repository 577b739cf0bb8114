#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "umix/kernels.hpp"

using namespace umix::kernels;

namespace {

std::vector<double> random_vector(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

void expect_tables_agree(const KernelTable& a, const KernelTable& b) {
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 13u, 64u, 101u}) {
    const auto x = random_vector(n, 1), y = random_vector(n, 2), w = random_vector(n, 3);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale += std::abs(x[i] * y[i] * (1.0 + std::abs(w[i])));
    const double tol = 1e-14 * (scale + 1.0);
    EXPECT_NEAR(a.dot(x.data(), y.data(), n), b.dot(x.data(), y.data(), n), tol) << "n=" << n;
    EXPECT_NEAR(a.wdot(w.data(), x.data(), y.data(), n), b.wdot(w.data(), x.data(), y.data(), n), tol) << "n=" << n;

    const std::size_t na = 5, nb = 3;
    const auto A = random_vector(na * n, 4), B = random_vector(nb * n, 5);
    std::vector<double> ga(na * nb, 0.5), gb(na * nb, 0.5);
    a.gram(A.data(), na, B.data(), nb, w.data(), n, ga.data(), nb);
    b.gram(A.data(), na, B.data(), nb, w.data(), n, gb.data(), nb);
    for (std::size_t i = 0; i < ga.size(); ++i) EXPECT_NEAR(ga[i], gb[i], 1e-13 * (n + 1)) << "n=" << n;

    std::vector<double> ma(na, 0.25), mb(na, 0.25);
    a.moments(A.data(), na, y.data(), w.data(), n, ma.data());
    b.moments(A.data(), na, y.data(), w.data(), n, mb.data());
    for (std::size_t i = 0; i < na; ++i) EXPECT_NEAR(ma[i], mb[i], 1e-13 * (n + 1)) << "n=" << n;
  }
}

}  // namespace

TEST(Kernels, ScalarGramMatchesNaiveSum) {
  const KernelTable& s = scalar_table();
  const std::size_t n = 9, na = 2, nb = 2;
  const auto A = random_vector(na * n, 7), B = random_vector(nb * n, 8), w = random_vector(n, 9);
  std::vector<double> out(na * nb, 0.0);
  s.gram(A.data(), na, B.data(), nb, w.data(), n, out.data(), nb);
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j) {
      double ref = 0.0;
      for (std::size_t q = 0; q < n; ++q) ref += w[q] * A[i * n + q] * B[j * n + q];
      EXPECT_NEAR(out[i * nb + j], ref, 1e-15);
    }
}

TEST(Kernels, Avx2MatchesScalar) {
  const KernelTable* t = avx2_table();
  if (t == nullptr || !cpu_has_avx2_fma()) GTEST_SKIP() << "AVX2 kernels unavailable";
  expect_tables_agree(scalar_table(), *t);
}

TEST(Kernels, ActiveTableIsOneOfTheCompiledTables) {
  const KernelTable& a = active();
  const KernelTable* t = avx2_table();
  EXPECT_TRUE(&a == &scalar_table() || (t != nullptr && &a == t));
}
