#include "umix/polynomial.hpp"

#include <map>
#include <mutex>

namespace umix {

Eigen::VectorXd monomials(int degree, double x, double y) {
  Eigen::VectorXd m(monomial_count(degree));
  for (int d = 0; d <= degree; ++d) {
    for (int b = 0; b <= d; ++b) {
      const int a = d - b;
      double v = 1.0;
      for (int i = 0; i < a; ++i) v *= x;
      for (int i = 0; i < b; ++i) v *= y;
      m[monomial_index(a, b)] = v;
    }
  }
  return m;
}

Eigen::MatrixXd monomial_table(int degree, const Eigen::Matrix2Xd& pts) {
  const int n = monomial_count(degree);
  Eigen::MatrixXd t(n, pts.cols());
  for (Eigen::Index q = 0; q < pts.cols(); ++q) t.col(q) = monomials(degree, pts(0, q), pts(1, q));
  return t;
}

Eigen::MatrixXd derivative_x(int degree) {
  const int n = monomial_count(degree);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (int d = 1; d <= degree; ++d) {
    for (int b = 0; b <= d; ++b) {
      const int a = d - b;
      if (a > 0) D(monomial_index(a, b), monomial_index(a - 1, b)) = a;
    }
  }
  return D;
}

Eigen::MatrixXd derivative_y(int degree) {
  const int n = monomial_count(degree);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (int d = 1; d <= degree; ++d) {
    for (int b = 1; b <= d; ++b) D(monomial_index(d - b, b), monomial_index(d - b, b - 1)) = b;
  }
  return D;
}

Eigen::MatrixXd directional_derivative(int degree, double dx, double dy, int order) {
  const Eigen::MatrixXd step = dx * derivative_x(degree) + dy * derivative_y(degree);
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(step.rows(), step.cols());
  for (int i = 0; i < order; ++i) out = out * step;
  return out;
}

namespace {

long double factorial(int n) {
  long double f = 1.0L;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

long double monomial_integral_ld(int a, int b) { return factorial(a) * factorial(b) / factorial(a + b + 2); }

Eigen::MatrixXd build_orthonormal(int degree) {
  using MatLD = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const int n = monomial_count(degree);
  MatLD G(n, n);
  std::vector<std::pair<int, int>> exps(n);
  for (int d = 0; d <= degree; ++d)
    for (int b = 0; b <= d; ++b) exps[monomial_index(d - b, b)] = {d - b, b};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      G(i, j) = monomial_integral_ld(exps[i].first + exps[j].first, exps[i].second + exps[j].second);
  // G = L L^T, so the rows of L^{-1} are orthonormal coefficient vectors.
  Eigen::LLT<MatLD> llt(G);
  MatLD Linv = llt.matrixL().solve(MatLD::Identity(n, n));
  return Linv.cast<double>();
}

}  // namespace

double reference_monomial_integral(int a, int b) { return static_cast<double>(monomial_integral_ld(a, b)); }

const Eigen::MatrixXd& orthonormal_basis(int degree) {
  static std::mutex mu;
  static std::map<int, Eigen::MatrixXd> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(degree);
  if (it == cache.end()) it = cache.emplace(degree, build_orthonormal(degree)).first;
  return it->second;
}

}  // namespace umix
