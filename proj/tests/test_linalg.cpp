#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <sstream>

#include "umix/error.hpp"
#include "umix/harness.hpp"

using namespace umix;

namespace {

Eigen::VectorXd random_vector(Eigen::Index n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

SpMat random_symmetric(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, 4.0 + dist(rng));
    if (i + 1 < n) {
      const double v = dist(rng);
      t.emplace_back(i, i + 1, v);
      t.emplace_back(i + 1, i, v);
    }
    if (i + 7 < n) {
      const double v = dist(rng);
      t.emplace_back(i, i + 7, v);
      t.emplace_back(i + 7, i, v);
    }
  }
  SpMat A(n, n);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

}  // namespace

TEST(Linalg, FactorSolveRecoversSolutionOfAssembledSystems) {
  MeshHierarchy meshes;
  const Discretization d(meshes.level(0), make_domain(Geometry::Ring, 0), 1);
  for (Variant v : {Variant::V1, Variant::V2, Variant::V3, Variant::V4, Variant::V5}) {
    const SpMat K = build_variant_matrix(d, v);
    const Eigen::VectorXd x0 = random_vector(K.rows(), 2);
    SolveReport rep;
    const Eigen::VectorXd x = factor_solve(K, K * x0, &rep);
    EXPECT_LE((x - x0).norm() / x0.norm(), 1e-8);
    EXPECT_EQ(rep.dimension, K.rows());
  }
}

TEST(Linalg, FactorSolveMatchesDenseOracle) {
  const SpMat A = random_symmetric(60, 4);
  const Eigen::VectorXd b = random_vector(60, 5);
  const Eigen::VectorXd ref = Eigen::MatrixXd(A).fullPivLu().solve(b);
  EXPECT_LE((factor_solve(A, b) - ref).norm(), 1e-12 * ref.norm());
}

TEST(Linalg, SingularMatrixThrows) {
  SpMat A(3, 3);
  A.insert(0, 0) = 1.0;
  A.insert(1, 1) = 1.0;
  EXPECT_THROW(DirectSolver{A}, Error);
}

TEST(Linalg, BackwardErrorOfExactSolutionIsRoundoff) {
  const SpMat A = random_symmetric(40, 6);
  const Eigen::VectorXd x = random_vector(40, 7);
  const Eigen::VectorXd b = A * x;
  EXPECT_LE(backward_error(A, x, b), 1e-15);
  EXPECT_NEAR(backward_error(A, Eigen::VectorXd::Zero(40), b), 1.0, 1e-15);
}

TEST(Linalg, ConditionNumberIsPermutationInvariant) {
  const SpMat A = random_symmetric(50, 8);
  std::vector<int> perm(50);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937(9));
  Eigen::PermutationMatrix<Eigen::Dynamic> P(50);
  for (int i = 0; i < 50; ++i) P.indices()[i] = perm[i];
  const SpMat B = SpMat(P * A * P.transpose());
  EXPECT_NEAR(condition_number(A).value, condition_number(B).value, 1e-9 * condition_number(A).value);
}

TEST(Linalg, LanczosMatchesDenseCondition) {
  MeshHierarchy meshes;
  const Discretization d(meshes.level(0), make_domain(Geometry::Ring, 0), 0);
  const SpMat K = build_variant_matrix(d, Variant::V2, 1.0);
  const Condition dense = condition_number(K), lanczos = condition_number_lanczos(K);
  EXPECT_FALSE(lanczos.singular);
  EXPECT_NEAR(lanczos.value / dense.value, 1.0, 1e-6);
}

TEST(Linalg, CountNnzWeights) {
  SpMat A(3, 3);
  A.insert(0, 0) = 1.0;
  A.insert(0, 2) = 0.0;
  A.insert(2, 1) = 3.0;
  A.makeCompressed();
  const Eigen::Vector3d w(1.0, 1.0, 0.0);
  EXPECT_EQ(count_nnz(A, w, NnzAttribution::Product), 1.0);
  EXPECT_EQ(count_nnz(A, w, NnzAttribution::Row), 2.0);
}

TEST(Linalg, MatrixMarketFormat) {
  SpMat A(2, 3);
  A.insert(1, 2) = 2.5;
  std::ostringstream os;
  write_matrix_market(os, A);
  EXPECT_EQ(os.str(), "%%MatrixMarket matrix coordinate real general\n2 3 1\n2 3 2.5\n");
}
