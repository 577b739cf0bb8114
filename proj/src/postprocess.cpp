#include "umix/postprocess.hpp"

#include <cmath>

#include "umix/error.hpp"

namespace umix {

namespace {

struct LocalFit {
  Eigen::MatrixXd K;
  Eigen::VectorXd rhs;
};

// (grad phi, grad psi) and (u_h, grad phi) over a rule, with the basis of
// element `basis_el` evaluated at points of element `e`.
LocalFit gradient_fit(const Discretization& d, const Eigen::VectorXd& u, int e, int basis_el, int m, const Rule& r) {
  const auto& mesh = d.mesh();
  const RowMat g = dg_gradients(mesh, basis_el, m, r.points);
  const Eigen::Matrix2Xd uh = eval_rt(d.rt, u, e, r.points);
  const Eigen::Index n = r.size();
  Eigen::VectorXd w2(2 * n);
  w2 << r.weights, r.weights;
  Eigen::VectorXd wu(2 * n);
  wu << r.weights.cwiseProduct(uh.row(0).transpose()), r.weights.cwiseProduct(uh.row(1).transpose());
  return {g * w2.asDiagonal() * g.transpose(), g * wu};
}

Eigen::VectorXd basis_mean(const BackgroundMesh& mesh, int basis_el, int m, const Rule& r) {
  return dg_values(mesh, basis_el, m, r.points) * r.weights;
}

double field_mean(const DGSpace& q, const Eigen::VectorXd& c, int e, const Rule& r) {
  return eval_dg(q, c, e, r.points).dot(r.weights);
}

// Solve [[K, c], [c^T, 0]] [x, l] = [b, v]; the constraint row is scaled to
// the size of K.
Eigen::VectorXd constrained_solve(const Eigen::MatrixXd& K, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                                  double v, const char* failure) {
  const Eigen::Index n = K.rows();
  const double cn = c.norm();
  if (!(cn > 0.0)) throw Error(failure);
  const double s = std::max(K.norm(), 1.0) / cn;
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n + 1, n + 1);
  S.topLeftCorner(n, n) = K;
  S.col(n).head(n) = s * c;
  S.row(n).head(n) = s * c.transpose();
  Eigen::VectorXd rhs(n + 1);
  rhs << b, s * v;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(S);
  if (!(lu.rcond() > 1e-14)) throw Error(failure);
  return lu.solve(rhs).head(n);
}

}  // namespace

PostProcessedScalar pp_element(const Discretization& d, const Eigen::VectorXd& u, const Eigen::VectorXd& p,
                               const ScalarField& p_dirichlet) {
  const int k = d.k, m = k + 1, deg = 2 * k + 4;
  const auto& mesh = d.mesh();
  const DGSpace out(d.active, m);
  PostProcessedScalar res{PPScheme::Elementwise, m, Eigen::VectorXd::Zero(out.ndofs())};
  for (int e : d.active.elements) {
    const Rule full = d.cut.full_rule(e, deg);
    const LocalFit fit = gradient_fit(d, u, e, e, m, full);
    Eigen::VectorXd c;
    double v = 0.0;
    if (d.cut.cut(e)) {
      const InterfaceRule ir = d.cut.interface_rule(e, deg);
      if (!(ir.rule.total() >= 1e-14)) throw Error("degenerate boundary constraint on element " + std::to_string(e));
      c = basis_mean(mesh, e, m, ir.rule);
      for (Eigen::Index i = 0; i < ir.rule.size(); ++i) v += ir.rule.weights[i] * p_dirichlet(ir.rule.points.col(i));
    } else {
      c = basis_mean(mesh, e, m, full);
      v = field_mean(d.q, p, e, full);
    }
    res.coeffs.segment(out.first_dof(e), out.local_dim()) =
        constrained_solve(fit.K, fit.rhs, c, v, "degenerate boundary constraint");
  }
  return res;
}

PostProcessedScalar pp_patch(const Discretization& d, const Eigen::VectorXd& u, const Eigen::VectorXd& p,
                             const PatchPPOptions& options) {
  const int k = d.k, m = k + 1, deg = 2 * k + 4;
  const auto& mesh = d.mesh();
  const DGSpace out(d.active, m);
  const int ld = out.local_dim();
  PostProcessedScalar res{PPScheme::Patchwise, m, Eigen::VectorXd::Zero(out.ndofs())};

  SpMat gp;
  if (!options.single_polynomial) {
    GPConfig cfg;
    cfg.variant = options.variant;
    cfg.facets = d.patches.gp_facets;
    cfg.degree = m;
    cfg.scaling_exponent = -2;
    cfg.weight = options.gamma;
    gp = assemble_gp(cfg, out);
  }

  for (std::size_t pi = 0; pi < d.patches.patches.size(); ++pi) {
    const Patch& patch = d.patches.patches[pi];
    const int ne = static_cast<int>(patch.elements.size());
    const int n = options.single_polynomial ? ld : ne * ld;
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n), c = Eigen::VectorXd::Zero(n);
    double v = 0.0;
    for (int a = 0; a < ne; ++a) {
      const int e = patch.elements[a];
      const int basis_el = options.single_polynomial ? patch.root : e;
      const int off = options.single_polynomial ? 0 : a * ld;
      const LocalFit fit = gradient_fit(d, u, e, basis_el, m, d.cut.volume_rule(e, deg));
      K.block(off, off, ld, ld) += fit.K;
      b.segment(off, ld) += fit.rhs;
      const Rule full = d.cut.full_rule(e, deg);
      if (options.constraint == PatchConstraint::InteriorMean) {
        if (d.cut.cls(e) != ElementClass::Interior) continue;
        c.segment(off, ld) += basis_mean(mesh, basis_el, m, full);
      } else {
        c.segment(off, ld) += basis_mean(mesh, basis_el, m, d.cut.volume_rule(e, deg));
      }
      v += field_mean(d.q, p, e, full);
    }
    if (!options.single_polynomial) {
      for (int a = 0; a < ne; ++a) {
        for (int b2 = 0; b2 < ne; ++b2) {
          const int r0 = out.first_dof(patch.elements[a]), c0 = out.first_dof(patch.elements[b2]);
          for (int j = 0; j < ld; ++j)
            for (SpMat::InnerIterator it(gp, c0 + j); it; ++it)
              if (it.row() >= r0 && it.row() < r0 + ld) K(a * ld + it.row() - r0, b2 * ld + j) += it.value();
        }
      }
    }
    const std::string failure = "unstable PP patch rooted at element " + std::to_string(patch.root);
    const Eigen::VectorXd x = constrained_solve(K, b, c, v, failure.c_str());
    for (int a = 0; a < ne; ++a) {
      const int e = patch.elements[a];
      if (!options.single_polynomial) {
        res.coeffs.segment(out.first_dof(e), ld) = x.segment(a * ld, ld);
        continue;
      }
      // Restrict the patch polynomial to e in its own orthonormal basis.
      const Rule full = d.cut.full_rule(e, 2 * m + 2);
      const Eigen::VectorXd vals = dg_values(mesh, patch.root, m, full.points).transpose() * x;
      const RowMat phi = dg_values(mesh, e, m, full.points);
      res.coeffs.segment(out.first_dof(e), ld) = phi * full.weights.cwiseProduct(vals) / (2.0 * mesh.area(e));
    }
  }
  return res;
}

}  // namespace umix
