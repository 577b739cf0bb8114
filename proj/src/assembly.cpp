#include "umix/assembly.hpp"

#include <cmath>

#include "umix/error.hpp"
#include "umix/kernels.hpp"
#include "umix/polynomial.hpp"

namespace umix {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// out(i, j) = sum_q w[q] a(i, q) b(j, q)
RowMat weighted_gram(const RowMat& a, const RowMat& b, const Eigen::VectorXd& w) {
  RowMat out = RowMat::Zero(a.rows(), b.rows());
  kernels::active().gram(a.data(), a.rows(), b.data(), b.rows(), w.data(), a.cols(), out.data(), out.cols());
  return out;
}

Eigen::VectorXd replicate(const Eigen::VectorXd& w, int times) {
  Eigen::VectorXd out(w.size() * times);
  for (int i = 0; i < times; ++i) out.segment(i * w.size(), w.size()) = w;
  return out;
}

RowMat stack_jump(const RowMat& a, const RowMat& b) {
  RowMat out(a.rows() + b.rows(), a.cols());
  out.topRows(a.rows()) = a;
  out.bottomRows(b.rows()) = -b;
  return out;
}

std::vector<int> concat(std::vector<int> a, const std::vector<int>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::vector<int> to_vector(std::span<const int> s) { return {s.begin(), s.end()}; }

std::vector<int> dg_dofs(const DGSpace& space, int e) {
  std::vector<int> d(space.local_dim());
  for (int i = 0; i < space.local_dim(); ++i) d[i] = space.first_dof(e) + i;
  return d;
}

Rule element_rule(const BackgroundMesh& mesh, int e, int degree) {
  const auto& t = mesh.elements[e];
  return triangle_rule(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]], degree);
}

// (v . n) table from a vector-valued table and per-point normals.
RowMat normal_component(const RowMat& v, const Eigen::Matrix2Xd& normals) {
  const Eigen::Index n = normals.cols();
  RowMat out(v.rows(), n);
  for (Eigen::Index q = 0; q < n; ++q) out.col(q) = v.col(q) * normals(0, q) + v.col(n + q) * normals(1, q);
  return out;
}

}  // namespace

void scatter(Triplets& trip, const std::vector<int>& rows, const std::vector<int>& cols,
             const Eigen::Ref<const RowMat>& local) {
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) trip.emplace_back(rows[i], cols[j], local(i, j));
}

Family rt_family(const RTSpace& space) {
  Family f;
  f.ncomp = 2;
  f.degree = space.degree();
  f.ndofs = space.ndofs();
  f.eval = [&space](int e, const Eigen::Matrix2Xd& x, const Point2& n, int order) {
    return order == 0 ? rt_values(space, e, x) : rt_normal_derivatives(space, e, x, n, order);
  };
  f.dofs = [&space](int e) { return to_vector(space.dofs(e)); };
  return f;
}

Family rt_div_family(const RTSpace& space) {
  Family f;
  f.ncomp = 1;
  f.degree = space.degree();
  f.ndofs = space.ndofs();
  f.eval = [&space](int e, const Eigen::Matrix2Xd& x, const Point2& n, int order) {
    return order == 0 ? rt_divergence(space, e, x) : rt_divergence_normal_derivatives(space, e, x, n, order);
  };
  f.dofs = [&space](int e) { return to_vector(space.dofs(e)); };
  return f;
}

Family dg_family(const DGSpace& space) {
  Family f;
  f.ncomp = 1;
  f.degree = space.degree();
  f.ndofs = space.ndofs();
  const BackgroundMesh* mesh = &space.active().mesh();
  f.eval = [&space, mesh](int e, const Eigen::Matrix2Xd& x, const Point2& n, int order) {
    return order == 0 ? dg_values(*mesh, e, space.degree(), x)
                      : dg_normal_derivatives(*mesh, e, space.degree(), x, n, order);
  };
  f.dofs = [&space](int e) { return dg_dofs(space, e); };
  return f;
}

SpMat assemble_gp(const GPConfig& config, const Family& test, const Family& trial, const BackgroundMesh& mesh) {
  if (test.ncomp != trial.ncomp) throw Error("ghost penalty families must have matching components");
  const int deg = config.degree >= 0 ? config.degree : test.degree;
  Triplets trip;
  for (int f : config.facets) {
    const Facet& F = mesh.facets[f];
    if (!F.interior()) throw Error("ghost penalty facet " + std::to_string(f) + " is on the boundary");
    const int t1 = F.left, t2 = F.right;
    const double h = mesh.facet_length(f);
    const Point2 n = mesh.facet_normal(f);
    const double factor = config.weight * std::pow(h, config.scaling_exponent);
    const std::vector<int> rows = concat(test.dofs(t1), test.dofs(t2));
    const std::vector<int> cols = concat(trial.dofs(t1), trial.dofs(t2));
    RowMat local = RowMat::Zero(rows.size(), cols.size());
    if (config.variant == GPVariant::NormalJump) {
      const Rule r = segment_rule(mesh.vertices[F.v[0]], mesh.vertices[F.v[1]], 2 * deg + 2);
      for (int l = 0; l <= deg; ++l) {
        const RowMat a = stack_jump(test.eval(t1, r.points, n, l), test.eval(t2, r.points, n, l));
        const RowMat b = stack_jump(trial.eval(t1, r.points, n, l), trial.eval(t2, r.points, n, l));
        const Eigen::VectorXd w = replicate(r.weights * (factor * std::pow(h, 2 * l + 1)), test.ncomp);
        local += weighted_gram(a, b, w);
      }
    } else {
      for (int t : {t1, t2}) {
        const Rule r = element_rule(mesh, t, 2 * deg + 2);
        const RowMat a = stack_jump(test.eval(t1, r.points, n, 0), test.eval(t2, r.points, n, 0));
        const RowMat b = stack_jump(trial.eval(t1, r.points, n, 0), trial.eval(t2, r.points, n, 0));
        local += weighted_gram(a, b, replicate(r.weights * factor, test.ncomp));
      }
    }
    scatter(trip, rows, cols, local);
  }
  SpMat J(test.ndofs, trial.ndofs);
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

SpMat assemble_gp(const GPConfig& config, const RTSpace& space) {
  const Family f = rt_family(space);
  return assemble_gp(config, f, f, space.active().mesh());
}

SpMat assemble_gp(const GPConfig& config, const DGSpace& space) {
  const Family f = dg_family(space);
  return assemble_gp(config, f, f, space.active().mesh());
}

SpMat assemble_div_gp(const GPConfig& config, const RTSpace& space, const DGSpace& qspace) {
  return assemble_gp(config, dg_family(qspace), rt_div_family(space), space.active().mesh());
}

SpMat assemble_mass(const RTSpace& space, Measure measure) {
  const auto& cut = *space.active().cut;
  const int deg = 2 * space.degree() + 2;
  Triplets trip;
  for (int e : space.active().elements) {
    const Rule r = measure == Measure::Omega ? cut.volume_rule(e, deg) : cut.full_rule(e, deg);
    const RowMat v = rt_values(space, e, r.points);
    const std::vector<int> d = to_vector(space.dofs(e));
    scatter(trip, d, d, weighted_gram(v, v, replicate(r.weights, 2)));
  }
  SpMat A(space.ndofs(), space.ndofs());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

SpMat assemble_element_mass(const RTSpace& space, const std::vector<int>& elements, double eps) {
  const auto& cut = *space.active().cut;
  const int deg = 2 * space.degree() + 2;
  Triplets trip;
  for (int e : elements) {
    const Rule r = cut.full_rule(e, deg);
    const RowMat v = rt_values(space, e, r.points);
    const std::vector<int> d = to_vector(space.dofs(e));
    scatter(trip, d, d, weighted_gram(v, v, replicate(r.weights * eps, 2)));
  }
  SpMat A(space.ndofs(), space.ndofs());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

SpMat assemble_dg_mass(const DGSpace& space, Measure measure) {
  const auto& cut = *space.active().cut;
  const auto& mesh = cut.mesh();
  const int deg = 2 * space.degree();
  Triplets trip;
  for (int e : space.elements()) {
    const Rule r = measure == Measure::Omega ? cut.volume_rule(e, deg) : cut.full_rule(e, deg);
    const RowMat v = dg_values(mesh, e, space.degree(), r.points);
    const std::vector<int> d = dg_dofs(space, e);
    scatter(trip, d, d, weighted_gram(v, v, r.weights));
  }
  SpMat M(space.ndofs(), space.ndofs());
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

SpMat assemble_div_constraint(const RTSpace& space, const DGSpace& qspace, Measure measure) {
  if (qspace.degree() != space.degree()) throw Error("divergence constraint needs a DG space of the RT degree");
  const auto& cut = *space.active().cut;
  const auto& mesh = cut.mesh();
  const auto& R = RTReference::get(space.degree());
  Triplets trip;
  for (int e : qspace.elements()) {
    const std::vector<int> rows = dg_dofs(qspace, e);
    const std::vector<int> cols = to_vector(space.dofs(e));
    if (measure == Measure::ActiveMesh) {
      // The Jacobians cancel against the orthonormal reference basis, so the
      // block depends on the element only through the dof signs.
      RowMat local = R.div_dg.transpose();
      const auto s = space.signs(e);
      for (Eigen::Index j = 0; j < local.cols(); ++j) local.col(j) *= s[j];
      scatter(trip, rows, cols, local);
    } else {
      const Rule r = cut.volume_rule(e, 2 * space.degree());
      scatter(trip, rows, cols,
              weighted_gram(dg_values(mesh, e, qspace.degree(), r.points), rt_divergence(space, e, r.points),
                            r.weights));
    }
  }
  SpMat B(qspace.ndofs(), space.ndofs());
  B.setFromTriplets(trip.begin(), trip.end());
  return B;
}

Eigen::VectorXd assemble_force_rhs(const RTSpace& space, const VectorField& g, int quad_degree) {
  const auto& cut = *space.active().cut;
  const int deg = quad_degree >= 0 ? quad_degree : 2 * space.degree() + 4;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(space.ndofs());
  for (int e : space.active().elements) {
    const Rule r = cut.volume_rule(e, deg);
    const RowMat v = rt_values(space, e, r.points);
    Eigen::VectorXd gv(2 * r.size());
    for (Eigen::Index q = 0; q < r.size(); ++q) {
      const Point2 val = g(r.points.col(q));
      gv[q] = val.x();
      gv[r.size() + q] = val.y();
    }
    const Eigen::VectorXd loc = v * replicate(r.weights, 2).cwiseProduct(gv);
    const auto d = space.dofs(e);
    for (std::size_t i = 0; i < d.size(); ++i) b[d[i]] += loc[i];
  }
  return b;
}

Eigen::VectorXd assemble_boundary_rhs(const RTSpace& space, const ScalarField& p_d, int quad_degree) {
  const auto& cut = *space.active().cut;
  const int deg = quad_degree >= 0 ? quad_degree : 2 * space.degree() + 4;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(space.ndofs());
  for (int e : space.active().elements) {
    if (!cut.cut(e)) continue;
    const InterfaceRule ir = cut.interface_rule(e, deg);
    if (ir.rule.size() == 0) continue;
    const RowMat vn = normal_component(rt_values(space, e, ir.rule.points), ir.normals);
    Eigen::VectorXd pw(ir.rule.size());
    for (Eigen::Index q = 0; q < ir.rule.size(); ++q) pw[q] = ir.rule.weights[q] * p_d(ir.rule.points.col(q));
    const Eigen::VectorXd loc = vn * pw;
    const auto d = space.dofs(e);
    for (std::size_t i = 0; i < d.size(); ++i) b[d[i]] += loc[i];
  }
  return b;
}

Eigen::VectorXd assemble_source_rhs(const DGSpace& space, const ScalarField& f, Measure measure, int quad_degree) {
  const auto& cut = *space.active().cut;
  const auto& mesh = cut.mesh();
  const int deg = quad_degree >= 0 ? quad_degree : 2 * space.degree() + 4;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(space.ndofs());
  for (int e : space.elements()) {
    const Rule r = measure == Measure::Omega ? cut.volume_rule(e, deg) : cut.full_rule(e, deg);
    Eigen::VectorXd fw(r.size());
    for (Eigen::Index q = 0; q < r.size(); ++q) fw[q] = r.weights[q] * f(r.points.col(q));
    b.segment(space.first_dof(e), space.local_dim()) += dg_values(mesh, e, space.degree(), r.points) * fw;
  }
  return b;
}

SpMat assemble_normal_coupling(const RTSpace& broken, const FacetSpace& facets) {
  const auto& mesh = broken.active().mesh();
  const int k = facets.degree();
  Triplets trip;
  for (int f : facets.facets()) {
    const Facet& F = mesh.facets[f];
    const Point2 a = mesh.vertices[F.v[0]], b = mesh.vertices[F.v[1]];
    const Rule r = segment_rule(a, b, 2 * broken.degree() + 2);
    const Point2 n = mesh.facet_normal(f);
    RowMat lam(k + 1, r.size());
    for (Eigen::Index q = 0; q < r.size(); ++q) {
      const double s = (r.points.col(q) - a).norm() / (b - a).norm();
      for (int j = 0; j <= k; ++j) lam(j, q) = shifted_legendre(j, s);
    }
    Eigen::Matrix2Xd normals(2, r.size());
    normals.colwise() = n;
    std::vector<int> rows(k + 1);
    for (int j = 0; j <= k; ++j) rows[j] = facets.first_dof(f) + j;
    const RowMat jump = stack_jump(normal_component(rt_values(broken, F.left, r.points), normals),
                                   normal_component(rt_values(broken, F.right, r.points), normals));
    const std::vector<int> cols = concat(to_vector(broken.dofs(F.left)), to_vector(broken.dofs(F.right)));
    scatter(trip, rows, cols, -weighted_gram(lam, jump, r.weights));
  }
  SpMat C(facets.ndofs(), broken.ndofs());
  C.setFromTriplets(trip.begin(), trip.end());
  return C;
}

SpMat assemble_interface_coupling(const RTSpace& space, const DGSpace& multiplier) {
  const auto& cut = *space.active().cut;
  const auto& mesh = cut.mesh();
  const int deg = space.degree() + multiplier.degree() + 2;
  Triplets trip;
  for (int e : multiplier.elements()) {
    const InterfaceRule ir = cut.interface_rule(e, deg);
    const RowMat vn = normal_component(rt_values(space, e, ir.rule.points), ir.normals);
    const RowMat mu = dg_values(mesh, e, multiplier.degree(), ir.rule.points);
    scatter(trip, dg_dofs(multiplier, e), to_vector(space.dofs(e)), weighted_gram(mu, vn, ir.rule.weights));
  }
  SpMat C(multiplier.ndofs(), space.ndofs());
  C.setFromTriplets(trip.begin(), trip.end());
  return C;
}

Eigen::VectorXd assemble_interface_rhs(const DGSpace& multiplier, const ScalarField& g, int quad_degree) {
  const auto& cut = *multiplier.active().cut;
  const auto& mesh = cut.mesh();
  const int deg = quad_degree >= 0 ? quad_degree : 2 * multiplier.degree() + 4;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(multiplier.ndofs());
  for (int e : multiplier.elements()) {
    const InterfaceRule ir = cut.interface_rule(e, deg);
    Eigen::VectorXd gw(ir.rule.size());
    for (Eigen::Index q = 0; q < ir.rule.size(); ++q) gw[q] = ir.rule.weights[q] * g(ir.rule.points.col(q));
    b.segment(multiplier.first_dof(e), multiplier.local_dim()) +=
        dg_values(mesh, e, multiplier.degree(), ir.rule.points) * gw;
  }
  return b;
}

Eigen::VectorXd assemble_interface_flux_rhs(const DGSpace& multiplier, const VectorField& u, int quad_degree) {
  const auto& cut = *multiplier.active().cut;
  const auto& mesh = cut.mesh();
  const int deg = quad_degree >= 0 ? quad_degree : 2 * multiplier.degree() + 4;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(multiplier.ndofs());
  for (int e : multiplier.elements()) {
    const InterfaceRule ir = cut.interface_rule(e, deg);
    Eigen::VectorXd gw(ir.rule.size());
    for (Eigen::Index q = 0; q < ir.rule.size(); ++q)
      gw[q] = ir.rule.weights[q] * u(ir.rule.points.col(q)).dot(ir.normals.col(q));
    b.segment(multiplier.first_dof(e), multiplier.local_dim()) +=
        dg_values(mesh, e, multiplier.degree(), ir.rule.points) * gw;
  }
  return b;
}

SpMat assemble_neumann_volume(const DGSpace& multiplier, double gamma_t) {
  const auto& cut = *multiplier.active().cut;
  const auto& mesh = cut.mesh();
  Triplets trip;
  for (int e : multiplier.elements()) {
    const Rule r = cut.full_rule(e, 2 * multiplier.degree());
    Eigen::Matrix2Xd nh(2, r.size());
    for (Eigen::Index q = 0; q < r.size(); ++q) nh.col(q) = cut.quasi_normal(r.points.col(q));
    const RowMat gn = normal_component(dg_gradients(mesh, e, multiplier.degree(), r.points), nh);
    const std::vector<int> d = dg_dofs(multiplier, e);
    scatter(trip, d, d, weighted_gram(gn, gn, r.weights * (gamma_t * mesh.element_diameters[e])));
  }
  SpMat J(multiplier.ndofs(), multiplier.ndofs());
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

SpMat assemble_neumann_gp(const DGSpace& multiplier, const std::vector<int>& facets, double gamma_f, double gamma_t,
                          GPVariant variant) {
  GPConfig cfg;
  cfg.variant = variant;
  cfg.facets = facets;
  cfg.scaling_exponent = -1;
  cfg.weight = gamma_f;
  SpMat J = assemble_gp(cfg, multiplier);
  if (gamma_t != 0.0) J += assemble_neumann_volume(multiplier, gamma_t);
  return J;
}

std::vector<int> cut_element_facets(const ActiveMesh& active) {
  std::vector<int> out;
  const auto& mesh = active.mesh();
  for (int f : active.interior_facets) {
    const Facet& F = mesh.facets[f];
    if (active.cut->cut(F.left) && active.cut->cut(F.right)) out.push_back(f);
  }
  return out;
}

std::vector<int> cut_facets(const ActiveMesh& active) {
  std::vector<int> out;
  for (int f : cut_element_facets(active))
    if (active.cut->facet_cut(f)) out.push_back(f);
  return out;
}

ExtendedSource compute_extended_source(const ActiveMesh& active, const PatchDecomposition& patches,
                                       const ScalarField& f, int kf, double gamma_f, GPVariant variant) {
  if (!(gamma_f > 0.0)) throw Error("extended source needs a positive weight");
  const DGSpace Q(active, kf);
  GPConfig cfg;
  cfg.variant = variant;
  cfg.facets = patches.gp_facets;
  cfg.weight = gamma_f;
  const SpMat K = SpMat(assemble_dg_mass(Q, Measure::Omega) + assemble_gp(cfg, Q));
  const Eigen::VectorXd rhs = assemble_source_rhs(Q, f, Measure::Omega);

  ExtendedSource out;
  out.kf = kf;
  out.gamma = gamma_f;
  out.coeffs = Eigen::VectorXd::Zero(Q.ndofs());
  std::vector<int> local_of(Q.ndofs(), -1);
  for (const Patch& P : patches.patches) {
    std::vector<int> idx;
    for (int e : P.elements)
      for (int i = 0; i < Q.local_dim(); ++i) idx.push_back(Q.first_dof(e) + i);
    const int n = static_cast<int>(idx.size());
    for (int i = 0; i < n; ++i) local_of[idx[i]] = i;
    Eigen::MatrixXd Kp = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd bp(n);
    for (int j = 0; j < n; ++j) {
      bp[j] = rhs[idx[j]];
      for (SpMat::InnerIterator it(K, idx[j]); it; ++it) {
        const int i = local_of[it.row()];
        if (i >= 0) Kp(i, j) = it.value();
      }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(Kp);
    if (llt.info() != Eigen::Success) throw Error("unstable patch rooted at element " + std::to_string(P.root));
    const Eigen::VectorXd xp = llt.solve(bp);
    for (int i = 0; i < n; ++i) {
      out.coeffs[idx[i]] = xp[i];
      local_of[idx[i]] = -1;
    }
  }
  return out;
}

}  // namespace umix
