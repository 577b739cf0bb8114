#include "umix/spaces.hpp"

#include <map>
#include <mutex>

#include "umix/error.hpp"
#include "umix/polynomial.hpp"
#include "umix/quadrature.hpp"

namespace umix {

ElementMap element_map(const BackgroundMesh& mesh, int e) {
  const auto& t = mesh.elements[e];
  ElementMap m;
  m.v0 = mesh.vertices[t[0]];
  m.J.col(0) = mesh.vertices[t[1]] - m.v0;
  m.J.col(1) = mesh.vertices[t[2]] - m.v0;
  m.detJ = m.J.determinant();
  m.Jinv = m.J.inverse();
  return m;
}

double shifted_legendre(int j, double t) {
  const double x = 2.0 * t - 1.0;
  double p0 = 1.0, p1 = x;
  if (j == 0) return p0;
  for (int n = 1; n < j; ++n) {
    const double p2 = ((2.0 * n + 1.0) * x * p1 - n * p0) / (n + 1.0);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

namespace {

RTReference build_rt(int k) {
  const int nm = monomial_count(k + 1);
  const int npk = monomial_count(k);
  const int nint = 2 * monomial_count(k - 1);
  const int ndof = 3 * (k + 1) + nint;

  // Spanning set [P_k]^2 + x * (homogeneous P_k).
  std::vector<Eigen::VectorXd> sx, sy;
  for (int m = 0; m < npk; ++m) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(nm);
    e[m] = 1.0;
    sx.push_back(e);
    sy.push_back(Eigen::VectorXd::Zero(nm));
    sx.push_back(Eigen::VectorXd::Zero(nm));
    sy.push_back(e);
  }
  for (int b = 0; b <= k; ++b) {
    const int a = k - b;
    Eigen::VectorXd ex = Eigen::VectorXd::Zero(nm), ey = Eigen::VectorXd::Zero(nm);
    ex[monomial_index(a + 1, b)] = 1.0;
    ey[monomial_index(a, b + 1)] = 1.0;
    sx.push_back(ex);
    sy.push_back(ey);
  }
  const int nspan = static_cast<int>(sx.size());
  if (nspan != ndof) throw Error("RT spanning set has wrong size");

  Eigen::MatrixXd SX(nspan, nm), SY(nspan, nm);
  for (int s = 0; s < nspan; ++s) {
    SX.row(s) = sx[s].transpose();
    SY.row(s) = sy[s].transpose();
  }

  const Point2 V[3] = {Point2(0, 0), Point2(1, 0), Point2(0, 1)};
  Eigen::MatrixXd Phi = Eigen::MatrixXd::Zero(ndof, nspan);
  const Rule& line = gauss_unit_interval(2 * k + 2);
  for (int i = 0; i < 3; ++i) {
    const Point2 a = V[(i + 1) % 3], b = V[(i + 2) % 3];
    const Point2 d = b - a;
    const Point2 n = Point2(d.y(), -d.x()).normalized();
    const double len = d.norm();
    for (Eigen::Index q = 0; q < line.size(); ++q) {
      const double t = line.points(0, q);
      const Point2 x = a + t * d;
      const Eigen::VectorXd mono = monomials(k + 1, x.x(), x.y());
      const Eigen::VectorXd flux = (SX * mono) * n.x() + (SY * mono) * n.y();
      for (int j = 0; j <= k; ++j) Phi.row(i * (k + 1) + j) += line.weights[q] * len * shifted_legendre(j, t) * flux.transpose();
    }
  }
  if (k > 0) {
    const Eigen::MatrixXd& O = orthonormal_basis(k - 1);
    const int np = monomial_count(k - 1);
    const Rule& tri = reference_triangle_rule(2 * k + 2);
    const Eigen::MatrixXd T = monomial_table(k + 1, tri.points);
    const Eigen::MatrixXd phi = O * T.topRows(np);  // np x nq
    const Eigen::MatrixXd UX = SX * T, UY = SY * T;  // nspan x nq
    const int base = 3 * (k + 1);
    for (int m = 0; m < np; ++m) {
      const Eigen::VectorXd wphi = tri.weights.cwiseProduct(phi.row(m).transpose());
      Phi.row(base + m) = (UX * wphi).transpose();
      Phi.row(base + np + m) = (UY * wphi).transpose();
    }
  }
  const Eigen::MatrixXd C = Phi.fullPivLu().inverse();  // column j: basis j in the spanning set

  RTReference r;
  r.k = k;
  r.ndof = ndof;
  r.cx = C.transpose() * SX;
  r.cy = C.transpose() * SY;
  const Eigen::MatrixXd full_div = r.cx * derivative_x(k + 1) + r.cy * derivative_y(k + 1);
  r.div = full_div.leftCols(npk);
  const Eigen::MatrixXd& Ok = orthonormal_basis(k);
  // mono = O^{-1} phi, so coefficients in the orthonormal basis are div * O^{-1}.
  r.div_dg = r.div * Ok.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(npk, npk));
  return r;
}

}  // namespace

const RTReference& RTReference::get(int k) {
  static std::mutex mu;
  static std::map<int, RTReference> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(k);
  if (it == cache.end()) it = cache.emplace(k, build_rt(k)).first;
  return it->second;
}

ActiveMesh::ActiveMesh(const CutMesh& cut_mesh) : cut(&cut_mesh) {
  const BackgroundMesh& m = cut_mesh.mesh();
  element_rank.assign(m.num_elements(), -1);
  for (int e = 0; e < m.num_elements(); ++e) {
    if (cut_mesh.active(e)) {
      element_rank[e] = static_cast<int>(elements.size());
      elements.push_back(e);
    }
  }
  facet_rank.assign(m.num_facets(), -1);
  for (int f = 0; f < m.num_facets(); ++f) {
    const Facet& F = m.facets[f];
    const bool l = cut_mesh.active(F.left), r = F.right >= 0 && cut_mesh.active(F.right);
    if (l || r) {
      facet_rank[f] = static_cast<int>(facets.size());
      facets.push_back(f);
    }
    if (l && r) interior_facets.push_back(f);
  }
}

RTSpace::RTSpace(const ActiveMesh& active, int k, bool broken)
    : active_(&active), k_(k), ld_((k + 1) * (k + 3)), broken_(broken) {
  const BackgroundMesh& mesh = active.mesh();
  const int ne = active.num_elements();
  const int nint = k * (k + 1);
  nfacet_dofs_ = broken ? 0 : (k + 1) * static_cast<int>(active.facets.size());
  ndofs_ = broken ? ld_ * ne : nfacet_dofs_ + nint * ne;
  dofs_.resize(static_cast<std::size_t>(ld_) * ne);
  signs_.assign(dofs_.size(), 1.0);
  for (int r = 0; r < ne; ++r) {
    const int e = active.elements[r];
    const auto& t = mesh.elements[e];
    int* d = dofs_.data() + static_cast<std::size_t>(r) * ld_;
    double* s = signs_.data() + static_cast<std::size_t>(r) * ld_;
    for (int i = 0; i < 3; ++i) {
      const int f = mesh.element_facets[e][i];
      const bool flipped = t[(i + 1) % 3] > t[(i + 2) % 3];
      const double orient = mesh.facets[f].left == e ? 1.0 : -1.0;
      for (int j = 0; j <= k; ++j) {
        const int l = i * (k + 1) + j;
        s[l] = orient * ((flipped && (j % 2 == 1)) ? -1.0 : 1.0);
        d[l] = broken ? r * ld_ + l : active.facet_rank[f] * (k + 1) + j;
      }
    }
    for (int i = 0; i < nint; ++i) {
      const int l = 3 * (k + 1) + i;
      d[l] = broken ? r * ld_ + l : nfacet_dofs_ + r * nint + i;
    }
  }
}

std::span<const int> RTSpace::dofs(int e) const {
  const int r = active_->element_rank[e];
  return {dofs_.data() + static_cast<std::size_t>(r) * ld_, static_cast<std::size_t>(ld_)};
}

std::span<const double> RTSpace::signs(int e) const {
  const int r = active_->element_rank[e];
  return {signs_.data() + static_cast<std::size_t>(r) * ld_, static_cast<std::size_t>(ld_)};
}

int RTSpace::facet_dof(int f) const {
  if (broken_) throw Error("facet dofs are element-local in the broken space");
  return active_->facet_rank[f] * (k_ + 1);
}

DGSpace::DGSpace(const ActiveMesh& active, int m) : DGSpace(active, m, active.elements) {}

DGSpace::DGSpace(const ActiveMesh& active, int m, std::vector<int> elements)
    : active_(&active), m_(m), ld_(monomial_count(m)), elements_(std::move(elements)) {
  rank_.assign(active.mesh().num_elements(), -1);
  for (std::size_t i = 0; i < elements_.size(); ++i) rank_[elements_[i]] = static_cast<int>(i);
}

FacetSpace::FacetSpace(const ActiveMesh& active, int k) : k_(k), facets_(active.interior_facets) {
  rank_.assign(active.mesh().num_facets(), -1);
  for (std::size_t i = 0; i < facets_.size(); ++i) rank_[facets_[i]] = static_cast<int>(i);
}

namespace {

RowMat piola(const ElementMap& m, const Eigen::MatrixXd& UX, const Eigen::MatrixXd& UY, std::span<const double> s) {
  const Eigen::Index n = UX.cols();
  RowMat out(UX.rows(), 2 * n);
  const double inv = 1.0 / m.detJ;
  out.leftCols(n) = inv * (m.J(0, 0) * UX + m.J(0, 1) * UY);
  out.rightCols(n) = inv * (m.J(1, 0) * UX + m.J(1, 1) * UY);
  for (Eigen::Index i = 0; i < out.rows(); ++i) out.row(i) *= s[i];
  return out;
}

}  // namespace

RowMat rt_values(const RTSpace& space, int e, const Eigen::Matrix2Xd& x) {
  const auto& R = RTReference::get(space.degree());
  const ElementMap m = element_map(space.active().mesh(), e);
  const Eigen::MatrixXd T = monomial_table(space.degree() + 1, m.to_reference(x));
  return piola(m, R.cx * T, R.cy * T, space.signs(e));
}

RowMat rt_normal_derivatives(const RTSpace& space, int e, const Eigen::Matrix2Xd& x, const Point2& n, int order) {
  const int k = space.degree();
  const auto& R = RTReference::get(k);
  const ElementMap m = element_map(space.active().mesh(), e);
  const Point2 d = m.Jinv * n;
  const Eigen::MatrixXd D = directional_derivative(k + 1, d.x(), d.y(), order);
  const Eigen::MatrixXd T = monomial_table(k + 1, m.to_reference(x));
  return piola(m, R.cx * D * T, R.cy * D * T, space.signs(e));
}

RowMat rt_divergence(const RTSpace& space, int e, const Eigen::Matrix2Xd& x) {
  const auto& R = RTReference::get(space.degree());
  const ElementMap m = element_map(space.active().mesh(), e);
  const Eigen::MatrixXd T = monomial_table(space.degree(), m.to_reference(x));
  RowMat out = (R.div * T) / m.detJ;
  const auto s = space.signs(e);
  for (Eigen::Index i = 0; i < out.rows(); ++i) out.row(i) *= s[i];
  return out;
}

RowMat rt_divergence_normal_derivatives(const RTSpace& space, int e, const Eigen::Matrix2Xd& x, const Point2& n,
                                        int order) {
  const int k = space.degree();
  const auto& R = RTReference::get(k);
  const ElementMap m = element_map(space.active().mesh(), e);
  const Point2 d = m.Jinv * n;
  const Eigen::MatrixXd T = monomial_table(k, m.to_reference(x));
  RowMat out = (R.div * directional_derivative(k, d.x(), d.y(), order) * T) / m.detJ;
  const auto s = space.signs(e);
  for (Eigen::Index i = 0; i < out.rows(); ++i) out.row(i) *= s[i];
  return out;
}

RowMat dg_values(const BackgroundMesh& mesh, int e, int deg, const Eigen::Matrix2Xd& x) {
  const ElementMap m = element_map(mesh, e);
  return orthonormal_basis(deg) * monomial_table(deg, m.to_reference(x));
}

RowMat dg_normal_derivatives(const BackgroundMesh& mesh, int e, int deg, const Eigen::Matrix2Xd& x, const Point2& n,
                             int order) {
  const ElementMap m = element_map(mesh, e);
  const Point2 d = m.Jinv * n;
  return orthonormal_basis(deg) * directional_derivative(deg, d.x(), d.y(), order) *
         monomial_table(deg, m.to_reference(x));
}

RowMat dg_gradients(const BackgroundMesh& mesh, int e, int deg, const Eigen::Matrix2Xd& x) {
  const ElementMap m = element_map(mesh, e);
  const Eigen::MatrixXd T = monomial_table(deg, m.to_reference(x));
  const Eigen::MatrixXd& O = orthonormal_basis(deg);
  const Eigen::MatrixXd gx = O * derivative_x(deg) * T, gy = O * derivative_y(deg) * T;
  const Eigen::Index n = x.cols();
  RowMat out(O.rows(), 2 * n);
  out.leftCols(n) = m.Jinv(0, 0) * gx + m.Jinv(1, 0) * gy;
  out.rightCols(n) = m.Jinv(0, 1) * gx + m.Jinv(1, 1) * gy;
  return out;
}

Eigen::Matrix2Xd eval_rt(const RTSpace& space, const Eigen::VectorXd& c, int e, const Eigen::Matrix2Xd& x) {
  const RowMat V = rt_values(space, e, x);
  const auto d = space.dofs(e);
  Eigen::VectorXd cl(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) cl[i] = c[d[i]];
  const Eigen::RowVectorXd flat = cl.transpose() * V;
  Eigen::Matrix2Xd out(2, x.cols());
  out.row(0) = flat.head(x.cols());
  out.row(1) = flat.tail(x.cols());
  return out;
}

Eigen::VectorXd eval_rt_div(const RTSpace& space, const Eigen::VectorXd& c, int e, const Eigen::Matrix2Xd& x) {
  const RowMat V = rt_divergence(space, e, x);
  const auto d = space.dofs(e);
  Eigen::VectorXd cl(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) cl[i] = c[d[i]];
  return V.transpose() * cl;
}

Eigen::VectorXd eval_dg(const DGSpace& space, const Eigen::VectorXd& c, int e, const Eigen::Matrix2Xd& x) {
  const RowMat V = dg_values(space.active().mesh(), e, space.degree(), x);
  return V.transpose() * c.segment(space.first_dof(e), space.local_dim());
}

Eigen::VectorXd interpolate_rt(const RTSpace& space, const VectorField& u) {
  const int k = space.degree();
  const auto& active = space.active();
  const auto& mesh = active.mesh();
  const int qdeg = 2 * k + 4;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(space.ndofs());

  // Moments of u . n_F against L_j along facet f.
  auto facet_moments = [&](int f) {
    const Facet& F = mesh.facets[f];
    const Point2 a = mesh.vertices[F.v[0]], b = mesh.vertices[F.v[1]];
    const Point2 n = mesh.facet_normal(f);
    const Rule& line = gauss_unit_interval(qdeg);
    const double len = (b - a).norm();
    Eigen::VectorXd mom = Eigen::VectorXd::Zero(k + 1);
    for (Eigen::Index q = 0; q < line.size(); ++q) {
      const double t = line.points(0, q);
      const double un = u(a + t * (b - a)).dot(n);
      for (int j = 0; j <= k; ++j) mom[j] += line.weights[q] * len * un * shifted_legendre(j, t);
    }
    return mom;
  };

  const int nint = k * (k + 1);
  const int np = monomial_count(k - 1);
  for (int e : active.elements) {
    const auto d = space.dofs(e);
    if (space.broken()) {
      for (int i = 0; i < 3; ++i) {
        const Eigen::VectorXd mom = facet_moments(mesh.element_facets[e][i]);
        for (int j = 0; j <= k; ++j) c[d[i * (k + 1) + j]] = mom[j];
      }
    }
    if (nint == 0) continue;
    const ElementMap m = element_map(mesh, e);
    const Rule r = triangle_rule(mesh.vertices[mesh.elements[e][0]], mesh.vertices[mesh.elements[e][1]],
                                 mesh.vertices[mesh.elements[e][2]], qdeg);
    const Eigen::MatrixXd phi = orthonormal_basis(k - 1) * monomial_table(k - 1, m.to_reference(r.points));
    for (Eigen::Index q = 0; q < r.size(); ++q) {
      const Point2 uh = m.Jinv * u(r.points.col(q));
      for (int p = 0; p < np; ++p) {
        c[d[3 * (k + 1) + p]] += r.weights[q] * uh.x() * phi(p, q);
        c[d[3 * (k + 1) + np + p]] += r.weights[q] * uh.y() * phi(p, q);
      }
    }
  }
  if (!space.broken()) {
    for (int f : active.facets) {
      const Eigen::VectorXd mom = facet_moments(f);
      c.segment(space.facet_dof(f), k + 1) = mom;
    }
  }
  return c;
}

Eigen::VectorXd project_l2(const DGSpace& space, const ScalarField& f, Measure measure, int quad_degree) {
  const auto& cut = *space.active().cut;
  const auto& mesh = cut.mesh();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(space.ndofs());
  for (int e : space.elements()) {
    const Rule r = measure == Measure::Omega ? cut.volume_rule(e, quad_degree) : cut.full_rule(e, quad_degree);
    const RowMat V = dg_values(mesh, e, space.degree(), r.points);
    Eigen::VectorXd fv(r.size());
    for (Eigen::Index q = 0; q < r.size(); ++q) fv[q] = f(r.points.col(q));
    const Eigen::MatrixXd G = V * r.weights.asDiagonal() * V.transpose();
    if (!(G.trace() > 0.0)) throw Error("empty measure in L2 projection on element " + std::to_string(e));
    const Eigen::VectorXd rhs = V * r.weights.cwiseProduct(fv);
    c.segment(space.first_dof(e), space.local_dim()) = G.ldlt().solve(rhs);
  }
  return c;
}

SpMat div_map(const RTSpace& space, const DGSpace& qspace) {
  const auto& R = RTReference::get(space.degree());
  if (qspace.degree() != space.degree()) throw Error("divergence map needs a DG space of the RT degree");
  const auto& mesh = space.active().mesh();
  std::vector<Eigen::Triplet<double>> trip;
  for (int e : qspace.elements()) {
    const double inv = 1.0 / element_map(mesh, e).detJ;
    const auto d = space.dofs(e);
    const auto s = space.signs(e);
    const int q0 = qspace.first_dof(e);
    for (int i = 0; i < space.local_dim(); ++i)
      for (Eigen::Index m = 0; m < R.div_dg.cols(); ++m) trip.emplace_back(q0 + m, d[i], inv * s[i] * R.div_dg(i, m));
  }
  SpMat D(qspace.ndofs(), space.ndofs());
  D.setFromTriplets(trip.begin(), trip.end());
  return D;
}

}  // namespace umix
