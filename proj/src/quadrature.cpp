#include "umix/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace umix {
namespace {

// n-point Gauss-Legendre on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

template <class Build>
const Rule& cached(std::map<int, Rule>& cache, std::mutex& mu, int degree, Build build) {
  std::lock_guard lock(mu);
  auto it = cache.find(degree);
  if (it == cache.end()) it = cache.emplace(degree, build(degree)).first;
  return it->second;
}

}  // namespace

const Rule& gauss_unit_interval(int degree) {
  static std::mutex mu;
  static std::map<int, Rule> cache;
  return cached(cache, mu, std::max(degree, 0), [](int d) {
    const int n = d / 2 + 1;
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    Rule r;
    r.points = Eigen::Matrix2Xd::Zero(2, n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
      r.points(0, i) = 0.5 * (x[i] + 1.0);
      r.weights[i] = 0.5 * w[i];
    }
    return r;
  });
}

const Rule& reference_triangle_rule(int degree) {
  static std::mutex mu;
  static std::map<int, Rule> cache;
  return cached(cache, mu, std::max(degree, 0), [](int d) {
    // Duffy collapse adds one degree in the collapsed direction.
    const int n = (d + 2) / 2 + 1;
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    Rule r;
    r.points.resize(2, n * n);
    r.weights.resize(n * n);
    int q = 0;
    for (int i = 0; i < n; ++i) {
      const double s = 0.5 * (x[i] + 1.0);
      for (int j = 0; j < n; ++j) {
        const double t = 0.5 * (x[j] + 1.0);
        r.points(0, q) = s;
        r.points(1, q) = t * (1.0 - s);
        r.weights[q] = 0.25 * w[i] * w[j] * (1.0 - s);
        ++q;
      }
    }
    return r;
  });
}

Rule triangle_rule(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c,
                   int degree) {
  const Rule& ref = reference_triangle_rule(degree);
  Eigen::Matrix2d J;
  J.col(0) = b - a;
  J.col(1) = c - a;
  Rule r;
  r.points = (J * ref.points).colwise() + a;
  r.weights = ref.weights * std::abs(J.determinant());
  return r;
}

Rule segment_rule(const Eigen::Vector2d& a, const Eigen::Vector2d& b, int degree) {
  const Rule& ref = gauss_unit_interval(degree);
  Rule r;
  r.points.resize(2, ref.size());
  for (Eigen::Index i = 0; i < ref.size(); ++i) r.points.col(i) = a + ref.points(0, i) * (b - a);
  r.weights = ref.weights * (b - a).norm();
  return r;
}

Rule merge(const std::vector<Rule>& parts) {
  Eigen::Index n = 0;
  for (const auto& p : parts) n += p.size();
  Rule r;
  r.points.resize(2, n);
  r.weights.resize(n);
  Eigen::Index o = 0;
  for (const auto& p : parts) {
    r.points.middleCols(o, p.size()) = p.points;
    r.weights.segment(o, p.size()) = p.weights;
    o += p.size();
  }
  return r;
}

}  // namespace umix
