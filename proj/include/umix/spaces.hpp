#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <span>
#include <vector>

#include "umix/geometry.hpp"
#include "umix/mesh.hpp"

namespace umix {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using SpMat = Eigen::SparseMatrix<double>;
using ScalarField = std::function<double(const Point2&)>;
using VectorField = std::function<Point2(const Point2&)>;

// Affine map x = v0 + J xhat from the reference triangle.
struct ElementMap {
  Point2 v0;
  Eigen::Matrix2d J, Jinv;
  double detJ = 0.0;

  Eigen::Matrix2Xd to_reference(const Eigen::Matrix2Xd& x) const { return Jinv * (x.colwise() - v0); }
};

ElementMap element_map(const BackgroundMesh& mesh, int e);

// Shifted Legendre polynomial P_j(2t - 1) on [0, 1].
double shifted_legendre(int j, double t);

// Raviart-Thomas element of degree k on the reference triangle. Local dofs:
// for each edge i (from vertex i+1 to vertex i+2) the moments of the normal
// trace against shifted Legendre polynomials in the edge parameter, then
// moments of each component against the orthonormal P_{k-1} basis.
struct RTReference {
  int k = 0;
  int ndof = 0;
  Eigen::MatrixXd cx, cy;    // ndof x monomial_count(k+1)
  Eigen::MatrixXd div;       // ndof x monomial_count(k)
  Eigen::MatrixXd div_dg;    // ndof x dim P_k: divergence in the orthonormal basis

  static const RTReference& get(int k);
};

// Elements and facets touching Omega.
struct ActiveMesh {
  const CutMesh* cut = nullptr;
  std::vector<int> elements;        // ascending
  std::vector<int> element_rank;    // per mesh element, -1 if inactive
  std::vector<int> facets;          // at least one active neighbour
  std::vector<int> facet_rank;      // per mesh facet, -1 if not active
  std::vector<int> interior_facets; // two active neighbours

  explicit ActiveMesh(const CutMesh& cut_mesh);
  const BackgroundMesh& mesh() const { return cut->mesh(); }
  int num_elements() const { return static_cast<int>(elements.size()); }
};

class RTSpace {
 public:
  RTSpace(const ActiveMesh& active, int k, bool broken = false);

  const ActiveMesh& active() const { return *active_; }
  int degree() const { return k_; }
  bool broken() const { return broken_; }
  int ndofs() const { return ndofs_; }
  int local_dim() const { return ld_; }
  int num_facet_dofs() const { return nfacet_dofs_; }
  std::span<const int> dofs(int e) const;
  std::span<const double> signs(int e) const;
  // First global index of the facet's k+1 dofs (unbroken space only).
  int facet_dof(int f) const;

 private:
  const ActiveMesh* active_;
  int k_, ld_, ndofs_ = 0, nfacet_dofs_ = 0;
  bool broken_;
  std::vector<int> dofs_;
  std::vector<double> signs_;
};

// Discontinuous P_m with an orthonormal reference basis, on all active
// elements or on a subset.
class DGSpace {
 public:
  DGSpace(const ActiveMesh& active, int m);
  DGSpace(const ActiveMesh& active, int m, std::vector<int> elements);

  const ActiveMesh& active() const { return *active_; }
  int degree() const { return m_; }
  int local_dim() const { return ld_; }
  int ndofs() const { return ld_ * static_cast<int>(elements_.size()); }
  const std::vector<int>& elements() const { return elements_; }
  bool contains(int e) const { return rank_[e] >= 0; }
  int first_dof(int e) const { return rank_[e] * ld_; }

 private:
  const ActiveMesh* active_;
  int m_, ld_;
  std::vector<int> elements_;
  std::vector<int> rank_;
};

// P_k on active interior facets, basis L_j(s) with s running from facet
// vertex v[0] to v[1].
class FacetSpace {
 public:
  FacetSpace(const ActiveMesh& active, int k);

  int degree() const { return k_; }
  int ndofs() const { return (k_ + 1) * static_cast<int>(facets_.size()); }
  const std::vector<int>& facets() const { return facets_; }
  int first_dof(int f) const { return rank_[f] * (k_ + 1); }

 private:
  int k_;
  std::vector<int> facets_;
  std::vector<int> rank_;
};

// ---- Basis evaluation at physical points (points may lie outside the
// element, giving the polynomial extension). Vector-valued tables store all
// x components first, then all y components.

// local_dim x 2n, global signs applied.
RowMat rt_values(const RTSpace& space, int e, const Eigen::Matrix2Xd& x);
// (n . grad)^order applied componentwise; local_dim x 2n.
RowMat rt_normal_derivatives(const RTSpace& space, int e, const Eigen::Matrix2Xd& x, const Point2& n, int order);
// local_dim x n.
RowMat rt_divergence(const RTSpace& space, int e, const Eigen::Matrix2Xd& x);
// (n . grad)^order of the divergence; local_dim x n.
RowMat rt_divergence_normal_derivatives(const RTSpace& space, int e, const Eigen::Matrix2Xd& x, const Point2& n,
                                        int order);

// dim P_m x n.
RowMat dg_values(const BackgroundMesh& mesh, int e, int m, const Eigen::Matrix2Xd& x);
RowMat dg_normal_derivatives(const BackgroundMesh& mesh, int e, int m, const Eigen::Matrix2Xd& x, const Point2& n,
                             int order);
// dim P_m x 2n.
RowMat dg_gradients(const BackgroundMesh& mesh, int e, int m, const Eigen::Matrix2Xd& x);

// ---- Field evaluation from coefficient vectors.
Eigen::Matrix2Xd eval_rt(const RTSpace& space, const Eigen::VectorXd& c, int e, const Eigen::Matrix2Xd& x);
Eigen::VectorXd eval_rt_div(const RTSpace& space, const Eigen::VectorXd& c, int e, const Eigen::Matrix2Xd& x);
Eigen::VectorXd eval_dg(const DGSpace& space, const Eigen::VectorXd& c, int e, const Eigen::Matrix2Xd& x);

// ---- Interpolation and projection.
Eigen::VectorXd interpolate_rt(const RTSpace& space, const VectorField& u);

enum class Measure { Omega, ActiveMesh };

// Elementwise L2 projection w.r.t. T ∩ Omega or the full element.
Eigen::VectorXd project_l2(const DGSpace& space, const ScalarField& f, Measure measure, int quad_degree);

// Divergence as a map from RT coefficients to P_k coefficients.
SpMat div_map(const RTSpace& space, const DGSpace& qspace);

}  // namespace umix
