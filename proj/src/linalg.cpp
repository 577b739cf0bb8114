#include "umix/linalg.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <string>

#include "umix/error.hpp"

namespace umix {

struct DirectSolver::Impl {
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  Eigen::VectorXd row_scale, col_scale;
};

namespace {

// Ruiz equilibration: alternately scale rows and columns by the inverse
// square root of their largest entry until all are close to one.
void equilibrate(SpMat& A, Eigen::VectorXd& r, Eigen::VectorXd& c) {
  const Eigen::Index n = A.rows();
  r = Eigen::VectorXd::Ones(n);
  c = Eigen::VectorXd::Ones(n);
  for (int sweep = 0; sweep < 10; ++sweep) {
    Eigen::VectorXd rmax = Eigen::VectorXd::Zero(n), cmax = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < A.outerSize(); ++j)
      for (SpMat::InnerIterator it(A, j); it; ++it) {
        const double a = std::abs(it.value());
        rmax[it.row()] = std::max(rmax[it.row()], a);
        cmax[j] = std::max(cmax[j], a);
      }
    double spread = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      rmax[i] = rmax[i] > 0.0 ? 1.0 / std::sqrt(rmax[i]) : 1.0;
      cmax[i] = cmax[i] > 0.0 ? 1.0 / std::sqrt(cmax[i]) : 1.0;
      spread = std::max({spread, std::abs(1.0 - rmax[i]), std::abs(1.0 - cmax[i])});
    }
    for (int j = 0; j < A.outerSize(); ++j)
      for (SpMat::InnerIterator it(A, j); it; ++it) it.valueRef() *= rmax[it.row()] * cmax[j];
    r.array() *= rmax.array();
    c.array() *= cmax.array();
    if (spread < 1e-2) break;
  }
}

}  // namespace

DirectSolver::DirectSolver(const SpMat& A) : impl_(std::make_unique<Impl>()), n_(static_cast<int>(A.rows())) {
  if (A.rows() != A.cols()) throw Error("direct solver needs a square matrix");
  SpMat C = A;
  C.makeCompressed();
  equilibrate(C, impl_->row_scale, impl_->col_scale);
  impl_->lu.compute(C);
  if (impl_->lu.info() != Eigen::Success) throw Error("singular matrix: " + impl_->lu.lastErrorMessage());
}

DirectSolver::~DirectSolver() = default;

Eigen::VectorXd DirectSolver::solve(const Eigen::VectorXd& b) const {
  const Eigen::VectorXd rb = impl_->row_scale.cwiseProduct(b);
  Eigen::VectorXd y = impl_->lu.solve(rb);
  if (impl_->lu.info() != Eigen::Success) throw Error("sparse LU solve failed");
  return impl_->col_scale.cwiseProduct(y);
}

double backward_error(const SpMat& A, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
  Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(A.rows());
  for (int c = 0; c < A.outerSize(); ++c)
    for (SpMat::InnerIterator it(A, c); it; ++it) row_sums[it.row()] += std::abs(it.value());
  const double denom = row_sums.maxCoeff() * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>();
  const double r = (A * x - b).lpNorm<Eigen::Infinity>();
  return denom > 0.0 ? r / denom : r;
}

Eigen::VectorXd factor_solve(const SpMat& A, const Eigen::VectorXd& b, SolveReport* report, int max_refine,
                             double tol) {
  DirectSolver lu(A);
  Eigen::VectorXd x = lu.solve(b);
  const double bn = b.norm();
  double res = bn > 0.0 ? (A * x - b).norm() / bn : (A * x).norm();
  int steps = 0;
  while (res > tol && steps < max_refine) {
    x += lu.solve(b - A * x);
    res = bn > 0.0 ? (A * x - b).norm() / bn : (A * x).norm();
    ++steps;
  }
  if (report) *report = {res, backward_error(A, x, b), steps, static_cast<long>(A.nonZeros()), static_cast<int>(A.rows())};
  return x;
}

Eigen::VectorXd solve_spd(const SpMat& A, const Eigen::VectorXd& b, SolveReport* report) {
  Eigen::SimplicialLLT<SpMat> llt(A);
  if (llt.info() != Eigen::Success) throw Error("matrix is not symmetric positive definite");
  Eigen::VectorXd x = llt.solve(b);
  int steps = 0;
  const double bn = b.norm();
  double res = bn > 0.0 ? (A * x - b).norm() / bn : 0.0;
  while (res > 1e-12 && steps < 3) {
    x += llt.solve(b - A * x);
    res = bn > 0.0 ? (A * x - b).norm() / bn : 0.0;
    ++steps;
  }
  if (report) *report = {res, backward_error(A, x, b), steps, static_cast<long>(A.nonZeros()), static_cast<int>(A.rows())};
  return x;
}

Condition condition_number(const SpMat& A, int dense_threshold) {
  if (A.rows() > dense_threshold) throw Error("matrix too large for dense eigen-decomposition");
  const Eigen::MatrixXd D(A);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = es.eigenvalues().cwiseAbs();
  const double mx = ev.maxCoeff(), mn = ev.minCoeff();
  if (mn < 1e-300) return {std::numeric_limits<double>::infinity(), true};
  return {mx / mn, false};
}

double lanczos_max_abs(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply, int n, int max_steps,
                       double rel_tol) {
  const int m = std::min(n, max_steps);
  Eigen::MatrixXd V(n, m + 1);
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = dist(rng);
  V.col(0) = v.normalized();
  std::vector<double> alpha, beta;
  double prev = 0.0;
  int stable = 0;
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXd w = apply(V.col(j));
    alpha.push_back(V.col(j).dot(w));
    // Two passes of classical Gram-Schmidt against the whole basis.
    for (int pass = 0; pass < 2; ++pass) w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
    const double b = w.norm();
    Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), j + 1);
    Eigen::VectorXd sub = Eigen::Map<const Eigen::VectorXd>(beta.data(), j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    const double cur = es.eigenvalues().cwiseAbs().maxCoeff();
    if (j > 0 && std::abs(cur - prev) <= rel_tol * cur) {
      if (++stable >= 3) return cur;
    } else {
      stable = 0;
    }
    prev = cur;
    if (b <= 1e-14 * std::max(cur, 1e-300)) return cur;  // invariant subspace
    beta.push_back(b);
    V.col(j + 1) = w / b;
  }
  return prev;
}

Condition condition_number_lanczos(const SpMat& A, int max_steps, double rel_tol) {
  const int n = static_cast<int>(A.rows());
  const double mx = lanczos_max_abs([&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return A * x; }, n,
                                    max_steps, rel_tol);
  std::unique_ptr<DirectSolver> lu;
  try {
    lu = std::make_unique<DirectSolver>(A);
  } catch (const Error&) {
    return {std::numeric_limits<double>::infinity(), true};
  }
  const double inv = lanczos_max_abs([&](const Eigen::VectorXd& x) { return lu->solve(x); }, n, max_steps, rel_tol);
  if (!std::isfinite(inv) || inv > 1e300) return {std::numeric_limits<double>::infinity(), true};
  return {mx * inv, false};
}

double count_nnz(const SpMat& A, const Eigen::VectorXd& weights, NnzAttribution mode) {
  double total = 0.0;
  for (int c = 0; c < A.outerSize(); ++c) {
    for (SpMat::InnerIterator it(A, c); it; ++it) {
      const double wr = weights[it.row()];
      total += mode == NnzAttribution::Product ? wr * weights[it.col()] : wr;
    }
  }
  return total;
}

void write_matrix_market(std::ostream& os, const SpMat& A) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << A.rows() << ' ' << A.cols() << ' ' << A.nonZeros() << '\n';
  os.precision(17);
  for (int c = 0; c < A.outerSize(); ++c)
    for (SpMat::InnerIterator it(A, c); it; ++it) os << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

}  // namespace umix
