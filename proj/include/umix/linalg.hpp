#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <iosfwd>
#include <memory>

namespace umix {

using SpMat = Eigen::SparseMatrix<double>;

struct SolveReport {
  double residual = 0.0;        // ||Ax - b|| / ||b||
  double backward_error = 0.0;  // ||Ax - b||_inf / (||A||_inf ||x||_inf + ||b||_inf)
  int refinement_steps = 0;
  long nnz = 0;
  int dimension = 0;
};

// Supernodal sparse LU with threshold partial pivoting and COLAMD ordering.
// Throws umix::Error when the factorization hits a zero pivot.
class DirectSolver {
 public:
  explicit DirectSolver(const SpMat& A);
  ~DirectSolver();
  DirectSolver(const DirectSolver&) = delete;
  DirectSolver& operator=(const DirectSolver&) = delete;

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  int dimension() const { return n_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int n_ = 0;
};

double backward_error(const SpMat& A, const Eigen::VectorXd& x, const Eigen::VectorXd& b);

// Solve with up to `max_refine` steps of iterative refinement until the
// relative residual drops below `tol`.
Eigen::VectorXd factor_solve(const SpMat& A, const Eigen::VectorXd& b, SolveReport* report = nullptr,
                             int max_refine = 3, double tol = 1e-12);

// Sparse Cholesky for symmetric positive definite systems.
Eigen::VectorXd solve_spd(const SpMat& A, const Eigen::VectorXd& b, SolveReport* report = nullptr);

struct Condition {
  double value = 1.0;  // max|lambda| / min|lambda|, +inf when singular
  bool singular = false;
};

// Dense symmetric eigen-decomposition; dimension must not exceed `dense_threshold`.
Condition condition_number(const SpMat& A, int dense_threshold = 6000);

// Extreme eigenvalue magnitudes by Lanczos with full reorthogonalization, on
// A for max|lambda| and on A^{-1} (via one LU) for min|lambda|.
Condition condition_number_lanczos(const SpMat& A, int max_steps = 400, double rel_tol = 1e-9);

// Largest |Ritz value| of a symmetric operator.
double lanczos_max_abs(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply, int n, int max_steps,
                       double rel_tol);

enum class NnzAttribution {
  Product,  // entry (i, j) counts w_i * w_j
  Row,      // entry (i, j) counts w_i
};

// Weighted count of the stored entries of A.
double count_nnz(const SpMat& A, const Eigen::VectorXd& weights, NnzAttribution mode = NnzAttribution::Product);

// "%%MatrixMarket matrix coordinate real general" header, size line, 1-based triplets.
void write_matrix_market(std::ostream& os, const SpMat& A);

}  // namespace umix
