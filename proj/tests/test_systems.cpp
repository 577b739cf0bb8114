#include <gtest/gtest.h>

#include "umix/harness.hpp"
#include "umix/polynomial.hpp"

using namespace umix;

namespace {

struct Shifted {
  MeshHierarchy meshes{16};
  Discretization d;
  Shifted(int k, double shift) : d(meshes.level(0), make_domain(Geometry::Ring, 0, shift), k) {}
};

}  // namespace

class SystemDegrees : public ::testing::TestWithParam<int> {};

TEST_P(SystemDegrees, ConservationHoldsAtArbitraryCutPositions) {
  const int k = GetParam();
  for (double shift : {0.0, 0.0123, 0.0457}) {
    Shifted s(k, shift);
    for (double g : {0.0, 1.0}) {
      MainOptions opt;
      opt.gamma_u = g;
      const MixedSolution sol = solve_main(s.d, sine_problem(), opt);
      EXPECT_LE(divergence_defect(s.d, sol), 1e-9) << "shift " << shift << " gamma " << g;
      EXPECT_TRUE(sol.report.residual <= 1e-10 || sol.report.backward_error <= 1e-13);
    }
  }
}

TEST_P(SystemDegrees, LowerDegreeSourceKeepsConservation) {
  const int k = GetParam();
  if (k == 0) GTEST_SKIP();
  Shifted s(k, 0.0);
  MainOptions opt;
  opt.source.kf = k - 1;
  EXPECT_LE(divergence_defect(s.d, solve_main(s.d, sine_problem(), opt)), 1e-9);
}

INSTANTIATE_TEST_SUITE_P(K0to2, SystemDegrees, ::testing::Values(0, 1, 2));

TEST(Systems, DivergenceFreeForZeroSource) {
  Shifted s(1, 0.0);
  ProblemData data;
  data.p = [](const Point2& x) { return x.x() - 2.0 * x.y(); };
  data.u = [](const Point2&) { return Point2(1.0, -2.0); };
  data.f = [](const Point2&) { return 0.0; };
  const MixedSolution sol = solve_main(s.d, data, {});
  EXPECT_LE(divergence_defect(s.d, sol), 1e-10);
}

TEST(Systems, LinearPressureIsReproducedOnOmega) {
  // u = grad p is constant, so u_h = u exactly and the interior p_bar equals
  // the element projection of p.
  Shifted s(1, 0.0);
  ProblemData data;
  data.p = [](const Point2& x) { return 0.5 * x.x() + x.y(); };
  data.u = [](const Point2&) { return Point2(0.5, 1.0); };
  data.f = [](const Point2&) { return 0.0; };
  const MixedSolution sol = solve_main(s.d, data, {});
  const ErrorRecord r = compute_errors(s.d, data, sol, nullptr);
  EXPECT_LE(r.ul2error, 1e-10);
  EXPECT_LE(r.p_inner_l2error, 1e-10);
}

TEST(Systems, DivergenceStabilizedAndMainAgreeOnVelocity) {
  const EquivalenceReport e = run_equivalence_check(0, 1);
  EXPECT_LT(e.u_rel_diff, 1e-9);
  EXPECT_LT(e.p_far_diff, 1e-9);
  EXPECT_GT(e.far_elements, 0);
}

TEST(Systems, HybridizationReproducesMain) {
  const HybridReport h = run_hybrid_check(0, 1, 1e-10);
  EXPECT_LE(h.u_rel_diff, 1e-8);
  EXPECT_LE(h.p_rel_diff, 1e-8);
}

TEST(Systems, NeumannSolutionHasZeroMean) {
  Shifted s(1, 0.0);
  const MixedSolution sol = solve_neumann(s.d, sine_problem(), {});
  const Eigen::VectorXd mean = assemble_source_rhs(s.d.q, [](const Point2&) { return 1.0; }, Measure::ActiveMesh);
  EXPECT_LE(std::abs(mean.dot(sol.p)), 1e-11 * sol.p.norm());
  EXPECT_TRUE(sol.report.residual <= 1e-10 || sol.report.backward_error <= 1e-13);
  EXPECT_EQ(sol.lambda.size(), static_cast<Eigen::Index>(monomial_count(1) * s.d.cut_elements().size()));
}

TEST(Systems, RestrictedMethodSolvesOnPolygon) {
  MeshHierarchy meshes;
  const Discretization d(meshes.level(0), make_domain(Geometry::Polygon, 0), 1);
  const MixedSolution sol = solve_restricted(d, sine_problem());
  EXPECT_TRUE(sol.report.residual <= 1e-10 || sol.report.backward_error <= 1e-13);
}
