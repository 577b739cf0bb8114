#pragma once

#include <functional>
#include <vector>

#include "umix/patches.hpp"
#include "umix/spaces.hpp"

namespace umix {

enum class GPVariant {
  NormalJump,  // sum_l h^(2l+1) ([d_n^l u], [d_n^l v])_F
  Direct,      // (u1 - u2, v1 - v2) on the facet patch, via polynomial extension
};

struct GPConfig {
  GPVariant variant = GPVariant::NormalJump;
  std::vector<int> facets;  // interior facets of the active mesh
  int degree = -1;          // highest stabilized degree; -1 means the space degree
  int scaling_exponent = 0; // every facet term is multiplied by weight * h_F^scaling_exponent
  double weight = 1.0;
};

// A basis family restricted to active elements: values or normal derivatives
// at physical points and the global dof indices of an element.
struct Family {
  int ncomp = 1;
  int degree = 0;
  std::function<RowMat(int e, const Eigen::Matrix2Xd& x, const Point2& n, int order)> eval;
  std::function<std::vector<int>(int e)> dofs;
  int ndofs = 0;
};

Family rt_family(const RTSpace& space);
Family rt_div_family(const RTSpace& space);
Family dg_family(const DGSpace& space);

// Facet-based ghost penalty between two families (test rows, trial columns).
SpMat assemble_gp(const GPConfig& config, const Family& test, const Family& trial, const BackgroundMesh& mesh);
SpMat assemble_gp(const GPConfig& config, const RTSpace& space);
SpMat assemble_gp(const GPConfig& config, const DGSpace& space);
// j_h(div u, q): DG test rows, RT trial columns.
SpMat assemble_div_gp(const GPConfig& config, const RTSpace& space, const DGSpace& qspace);

// (u, v) over T ∩ Omega or the whole active mesh.
SpMat assemble_mass(const RTSpace& space, Measure measure);
// eps * (u, v) over the full elements listed.
SpMat assemble_element_mass(const RTSpace& space, const std::vector<int>& elements, double eps);
SpMat assemble_dg_mass(const DGSpace& space, Measure measure);

// (div v, q) with q rows and v columns.
SpMat assemble_div_constraint(const RTSpace& space, const DGSpace& qspace, Measure measure);

// (g, v)_Omega.
Eigen::VectorXd assemble_force_rhs(const RTSpace& space, const VectorField& g, int quad_degree = -1);
// (v . n, p_D)_Gamma.
Eigen::VectorXd assemble_boundary_rhs(const RTSpace& space, const ScalarField& p_d, int quad_degree = -1);
// (f, q) over the chosen measure.
Eigen::VectorXd assemble_source_rhs(const DGSpace& space, const ScalarField& f, Measure measure, int quad_degree = -1);

// -([v . n], qF) over active interior facets; facet rows, broken RT columns.
SpMat assemble_normal_coupling(const RTSpace& broken, const FacetSpace& facets);

// (v . n, mu)_Gamma; multiplier rows, RT columns.
SpMat assemble_interface_coupling(const RTSpace& space, const DGSpace& multiplier);
// (g, mu)_Gamma.
Eigen::VectorXd assemble_interface_rhs(const DGSpace& multiplier, const ScalarField& g, int quad_degree = -1);

// (u . n, mu)_Gamma with the rule normals.
Eigen::VectorXd assemble_interface_flux_rhs(const DGSpace& multiplier, const VectorField& u, int quad_degree = -1);

// gamma_F h_F^{-1} j_F over `facets` plus gamma_T h_T (grad l . n_h, grad m . n_h)
// on the full multiplier elements.
SpMat assemble_neumann_gp(const DGSpace& multiplier, const std::vector<int>& facets, double gamma_f, double gamma_t,
                          GPVariant variant = GPVariant::NormalJump);
SpMat assemble_neumann_volume(const DGSpace& multiplier, double gamma_t);

// Stabilized discrete extension of f from Omega to the active mesh, solved
// patch by patch: (f_h, q)_Omega + gamma j_h(f_h, q) = (f, q)_Omega.
struct ExtendedSource {
  int kf = 0;
  double gamma = 1.0;
  Eigen::VectorXd coeffs;  // DGSpace(active, kf) layout
};

ExtendedSource compute_extended_source(const ActiveMesh& active, const PatchDecomposition& patches,
                                       const ScalarField& f, int kf, double gamma_f,
                                       GPVariant variant = GPVariant::NormalJump);

// Facets crossed by Gamma whose neighbours are both cut.
std::vector<int> cut_facets(const ActiveMesh& active);
// Interior facets whose neighbours are both cut.
std::vector<int> cut_element_facets(const ActiveMesh& active);

// Scatter a dense local block into triplets.
void scatter(std::vector<Eigen::Triplet<double>>& trip, const std::vector<int>& rows, const std::vector<int>& cols,
             const Eigen::Ref<const RowMat>& local);

}  // namespace umix
