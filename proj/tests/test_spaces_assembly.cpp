#include <gtest/gtest.h>

#include <random>

#include "checks.hpp"
#include "umix/polynomial.hpp"

using namespace umix;

namespace {

double asymmetry(const SpMat& A) {
  const SpMat At = A.transpose();
  return (A - At).norm() / std::max(A.norm(), 1e-300);
}

Eigen::VectorXd random_vector(Eigen::Index n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

struct Fixture {
  MeshHierarchy meshes{16};
  Discretization d;
  Fixture(Geometry g, int k) : d(meshes.level(0), make_domain(g, 0), k) {}
};

}  // namespace

class Degrees : public ::testing::TestWithParam<int> {};

TEST_P(Degrees, CommutingInterpolation) { EXPECT_LE(checks::commuting_interpolation_defect(GetParam()), 1e-10); }

TEST_P(Degrees, GhostPenaltyKernelsContainPolynomials) {
  for (GPVariant g : {GPVariant::NormalJump, GPVariant::Direct}) {
    EXPECT_LE(checks::gp_kernel_defect_rt(GetParam(), g), 1e-10);
    EXPECT_LE(checks::gp_kernel_defect_dg(GetParam(), g), 1e-10);
  }
}

TEST_P(Degrees, ExtensionPairingIdentity) { EXPECT_LE(checks::e0_pairing_defect(GetParam()), 1e-12); }

TEST_P(Degrees, GlobalRTDimension) {
  const int k = GetParam();
  Fixture f(Geometry::Ring, k);
  const int nf = static_cast<int>(f.d.active.facets.size()), ne = f.d.active.num_elements();
  EXPECT_EQ(f.d.rt.ndofs(), (k + 1) * nf + k * (k + 1) * ne);
}

TEST_P(Degrees, NormalContinuityOfUnbrokenRT) {
  const int k = GetParam();
  Fixture f(Geometry::Ring, k);
  const auto& mesh = f.d.mesh();
  const Eigen::VectorXd c = random_vector(f.d.rt.ndofs(), 5);
  double worst = 0.0;
  for (int fct : f.d.active.interior_facets) {
    const auto [a, b] = facet_patch(mesh, fct);
    const Rule r = segment_rule(mesh.vertices[mesh.facets[fct].v[0]], mesh.vertices[mesh.facets[fct].v[1]], 2 * k + 2);
    const Point2 n = mesh.facet_normal(fct);
    const Eigen::Matrix2Xd ua = eval_rt(f.d.rt, c, a, r.points), ub = eval_rt(f.d.rt, c, b, r.points);
    worst = std::max(worst, ((ua - ub).transpose() * n).cwiseAbs().maxCoeff());
  }
  EXPECT_LE(worst, 1e-12 * c.cwiseAbs().maxCoeff() / mesh.h_max());
}

TEST_P(Degrees, AssembledFormsAreSymmetric) {
  const int k = GetParam();
  Fixture f(Geometry::Ring, k);
  GPConfig cfg;
  cfg.facets = f.d.patches.gp_facets;
  EXPECT_LE(asymmetry(assemble_mass(f.d.rt, Measure::Omega)), 1e-12);
  EXPECT_LE(asymmetry(assemble_dg_mass(f.d.q, Measure::Omega)), 1e-12);
  for (GPVariant g : {GPVariant::NormalJump, GPVariant::Direct}) {
    cfg.variant = g;
    EXPECT_LE(asymmetry(assemble_gp(cfg, f.d.rt)), 1e-12);
    EXPECT_LE(asymmetry(assemble_gp(cfg, f.d.q)), 1e-12);
  }
}

TEST_P(Degrees, ExtendedSourceReproducesPolynomials) {
  const int k = GetParam();
  Fixture f(Geometry::Ring, k);
  Eigen::VectorXd coef = random_vector(monomial_count(k), 9);
  const ScalarField poly = [&](const Point2& x) { return monomials(k, x.x(), x.y()).dot(coef); };
  const DGSpace space(f.d.active, k);
  const Eigen::VectorXd ref = project_l2(space, poly, Measure::ActiveMesh, 2 * k + 2);
  for (GPVariant g : {GPVariant::NormalJump, GPVariant::Direct}) {
    const ExtendedSource ext = compute_extended_source(f.d.active, f.d.patches, poly, k, 1.0, g);
    EXPECT_LE((ext.coeffs - ref).cwiseAbs().maxCoeff(), 1e-11 * std::max(1.0, ref.cwiseAbs().maxCoeff()));
  }
}

INSTANTIATE_TEST_SUITE_P(K0to3, Degrees, ::testing::Values(0, 1, 2, 3));

TEST(Assembly, ActiveMeshDivergenceIgnoresCutPosition) {
  const BackgroundMesh mesh = build_structured(16);
  const CutMesh a(mesh, rotated_square(0.8, 0.3)), b(mesh, rotated_square(0.8, 0.3 + 1e-7));
  ASSERT_EQ(a.classes(), b.classes());
  const ActiveMesh ma(a), mb(b);
  const RTSpace ra(ma, 2), rb(mb, 2);
  const DGSpace qa(ma, 2), qb(mb, 2);
  const SpMat Ba = assemble_div_constraint(ra, qa, Measure::ActiveMesh);
  const SpMat Bb = assemble_div_constraint(rb, qb, Measure::ActiveMesh);
  ASSERT_EQ(Ba.nonZeros(), Bb.nonZeros());
  EXPECT_EQ((Ba - Bb).norm(), 0.0);
}

TEST(Assembly, DivergenceMapMatchesDivergenceConstraint) {
  Fixture f(Geometry::Ring, 2);
  const SpMat D = div_map(f.d.rt, f.d.q);
  const SpMat M = assemble_dg_mass(f.d.q, Measure::ActiveMesh);
  const SpMat B = assemble_div_constraint(f.d.rt, f.d.q, Measure::ActiveMesh);
  const Eigen::VectorXd x = random_vector(f.d.rt.ndofs(), 3);
  const Eigen::VectorXd bx = B * x, mdx = M * (D * x);
  EXPECT_LE((bx - mdx).cwiseAbs().maxCoeff(), 1e-12 * bx.cwiseAbs().maxCoeff());
}
