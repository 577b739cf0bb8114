#pragma once

#include <memory>
#include <string>

#include "umix/assembly.hpp"
#include "umix/linalg.hpp"

namespace umix {

// Manufactured data with u = grad p and div u = -f.
struct ProblemData {
  ScalarField p;
  VectorField u;
  ScalarField f;
  VectorField g;  // optional force in the flux equation
};

// p = sin(x1), u = (cos x1, 0), f = sin(x1).
ProblemData sine_problem();

// Geometry, patches and the RT_k x P_k pair on one background mesh. Holds
// internal pointers, so it is neither copyable nor movable.
class Discretization {
 public:
  Discretization(const BackgroundMesh& mesh, DomainDescription domain, int k, PatchOptions patch_options = {});
  Discretization(const Discretization&) = delete;
  Discretization& operator=(const Discretization&) = delete;

  int k;
  CutMesh cut;
  ActiveMesh active;
  PatchDecomposition patches;
  RTSpace rt;
  DGSpace q;

  const BackgroundMesh& mesh() const { return cut.mesh(); }
  std::vector<int> cut_elements() const;
};

struct SourceOptions {
  bool exact_f = false;  // use f itself on the active mesh instead of f_h
  int kf = -1;           // -1 means k
  double gamma_f = 1.0;
  GPVariant variant = GPVariant::NormalJump;
};

struct MainOptions {
  double gamma_u = 1.0;
  GPVariant variant = GPVariant::NormalJump;
  SourceOptions source;
  double eps_reg = 0.0;  // eps (u, v) on full cut elements
};

struct MixedSolution {
  Eigen::VectorXd u;        // unbroken RT coefficients
  Eigen::VectorXd p;        // P_k coefficients
  Eigen::VectorXd p_facet;  // hybrid facet multiplier
  Eigen::VectorXd lambda;   // Neumann multiplier on cut elements
  Eigen::VectorXd fh;       // source used on the active mesh, P_kf layout (empty when f is used directly)
  int kf = -1;
  SolveReport report;
  std::string variant;
};

// [[A, B^T], [B, -C]] with an empty C allowed.
SpMat saddle_matrix(const SpMat& A, const SpMat& B, const SpMat& C = SpMat());

// Right-hand side -(f_h, q) on the active mesh in the P_k layout.
Eigen::VectorXd source_rhs(const Discretization& d, const ProblemData& data, const SourceOptions& opt,
                           Eigen::VectorXd* fh = nullptr, int* kf = nullptr);

// Divergence pairing on the active mesh with the discrete source extension.
MixedSolution solve_main(const Discretization& d, const ProblemData& data, const MainOptions& opt = {});
// Unstabilized, divergence pairing on Omega.
MixedSolution solve_restricted(const Discretization& d, const ProblemData& data);
// Divergence pairing on Omega plus a ghost penalty on the divergence.
MixedSolution solve_div_stabilized(const Discretization& d, const ProblemData& data, double gamma_u, double gamma_div,
                                   GPVariant variant = GPVariant::NormalJump);
// Main method with broken fluxes and facet multipliers, condensed to an SPD
// facet system.
MixedSolution solve_hybrid(const Discretization& d, const ProblemData& data, const SourceOptions& source = {},
                           double eps_reg = 0.0);

enum class NeumannFacets {
  CrossedByGamma,  // interior facets that Gamma passes through
  CutElements,     // all facets between two cut elements
};

struct NeumannOptions {
  double gamma_u = 1.0;
  double gamma_facet = 0.01;
  double gamma_volume = 0.01;
  NeumannFacets facets = NeumannFacets::CrossedByGamma;
  GPVariant variant = GPVariant::NormalJump;
  SourceOptions source;
};

// Flux data on Gamma through a multiplier on cut elements; p_bar has zero
// mean on the active mesh.
MixedSolution solve_neumann(const Discretization& d, const ProblemData& data, const NeumannOptions& opt = {});

// Largest elementwise norm of the P_k coefficients of div u_h + f_h.
double divergence_defect(const Discretization& d, const MixedSolution& s);

// Matrices of the sparsity comparison: V1 restricted, V2 with velocity GP,
// V3 adding divergence GP, V4 adding pressure GP, V5 with all three.
enum class Variant { V1, V2, V3, V4, V5 };
SpMat build_variant_matrix(const Discretization& d, Variant v, double gamma = 1.0,
                           GPVariant gp = GPVariant::NormalJump);

}  // namespace umix
