#include "umix/systems.hpp"

#include <cmath>
#include <memory>
#include <sstream>

#include "umix/error.hpp"
#include "umix/polynomial.hpp"

namespace umix {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

constexpr double kResidualTol = 1e-10;
constexpr double kBackwardErrorTol = 1e-13;

void add_block(Triplets& trip, const SpMat& M, int r0, int c0, double scale = 1.0, bool transpose = false) {
  for (int c = 0; c < M.outerSize(); ++c) {
    for (SpMat::InnerIterator it(M, c); it; ++it) {
      if (transpose) trip.emplace_back(r0 + it.col(), c0 + it.row(), scale * it.value());
      else trip.emplace_back(r0 + it.row(), c0 + it.col(), scale * it.value());
    }
  }
}

// Accepts a small relative residual or a small normwise backward error.
void check_residual(const SolveReport& rep, const std::string& what, double tol = kResidualTol) {
  if (!(rep.residual <= tol) && !(rep.backward_error <= kBackwardErrorTol)) {
    std::ostringstream msg;
    msg << what << ": relative residual " << std::scientific << rep.residual << " exceeds " << tol;
    throw Error(msg.str());
  }
}

SpMat velocity_matrix(const Discretization& d, double gamma_u, GPVariant variant, double eps_reg = 0.0) {
  SpMat A = assemble_mass(d.rt, Measure::Omega);
  if (gamma_u != 0.0) {
    GPConfig cfg;
    cfg.variant = variant;
    cfg.facets = d.patches.gp_facets;
    cfg.weight = gamma_u;
    A += assemble_gp(cfg, d.rt);
  }
  if (eps_reg > 0.0) A += assemble_element_mass(d.rt, d.cut_elements(), eps_reg);
  return A;
}

Eigen::VectorXd flux_rhs(const RTSpace& rt, const ProblemData& data) {
  Eigen::VectorXd F = assemble_boundary_rhs(rt, data.p);
  if (data.g) F += assemble_force_rhs(rt, data.g);
  return F;
}

MixedSolution split(const Discretization& d, const Eigen::VectorXd& x, const SolveReport& rep, std::string tag) {
  MixedSolution s;
  s.u = x.head(d.rt.ndofs());
  s.p = x.segment(d.rt.ndofs(), d.q.ndofs());
  s.report = rep;
  s.variant = std::move(tag);
  return s;
}


// Solves [[K0, m], [m^T, 0]] for symmetric K0 with a one-dimensional kernel
// by factoring K0 with row and column `pin` replaced by the identity.
class BorderedSolver {
 public:
  BorderedSolver(const SpMat& K0, const Eigen::VectorXd& m, int pin) : K0_(K0), m_(m), pin_(pin) {
    SpMat Kp = K0;
    Kp.prune([pin](const Eigen::Index& r, const Eigen::Index& c, const double&) { return r != pin && c != pin; });
    Kp.coeffRef(pin, pin) = 1.0;
    lu_ = std::make_unique<DirectSolver>(Kp);
    y_m_ = pinned_solve(m, &r_m_);
    Eigen::VectorXd t = -K0.col(pin);
    t(pin) = 0.0;
    z_ = lu_->solve(t);
    z_(pin) = 1.0;
    if (r_m_ == 0.0 || m.dot(z_) == 0.0) throw Error("bordered system is singular");
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    const Eigen::Index n0 = K0_.rows();
    double r_b = 0.0;
    const Eigen::VectorXd y = pinned_solve(rhs.head(n0), &r_b);
    const double mu = r_b / r_m_;
    Eigen::VectorXd x(n0 + 1);
    x.head(n0) = y - mu * y_m_;
    x.head(n0) += (rhs(n0) - m_.dot(x.head(n0))) / m_.dot(z_) * z_;
    x(n0) = mu;
    return x;
  }

 private:
  // Solves every equation except `pin`; returns the residual of that one.
  Eigen::VectorXd pinned_solve(const Eigen::VectorXd& b, double* r_pin) const {
    Eigen::VectorXd bp = b;
    bp(pin_) = 0.0;
    const Eigen::VectorXd y = lu_->solve(bp);
    *r_pin = b(pin_) - K0_.col(pin_).dot(y);
    return y;
  }

  const SpMat& K0_;
  const Eigen::VectorXd& m_;
  int pin_;
  std::unique_ptr<DirectSolver> lu_;
  Eigen::VectorXd y_m_, z_;
  double r_m_ = 0.0;
};

}  // namespace

ProblemData sine_problem() {
  ProblemData pd;
  pd.p = [](const Point2& x) { return std::sin(x.x()); };
  pd.u = [](const Point2& x) { return Point2(std::cos(x.x()), 0.0); };
  pd.f = [](const Point2& x) { return std::sin(x.x()); };
  return pd;
}

Discretization::Discretization(const BackgroundMesh& mesh, DomainDescription domain, int k_,
                               PatchOptions patch_options)
    : k(k_),
      cut(mesh, std::move(domain)),
      active(cut),
      patches(build_patches(mesh, cut.classes(), patch_options)),
      rt(active, k_),
      q(active, k_) {}

std::vector<int> Discretization::cut_elements() const {
  std::vector<int> out;
  for (int e : active.elements)
    if (cut.cut(e)) out.push_back(e);
  return out;
}

SpMat saddle_matrix(const SpMat& A, const SpMat& B, const SpMat& C) {
  const int nu = static_cast<int>(A.rows()), nq = static_cast<int>(B.rows());
  Triplets trip;
  trip.reserve(A.nonZeros() + 2 * B.nonZeros() + C.nonZeros());
  add_block(trip, A, 0, 0);
  add_block(trip, B, nu, 0);
  add_block(trip, B, 0, nu, 1.0, true);
  if (C.nonZeros() > 0) add_block(trip, C, nu, nu, -1.0);
  SpMat K(nu + nq, nu + nq);
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

Eigen::VectorXd source_rhs(const Discretization& d, const ProblemData& data, const SourceOptions& opt,
                           Eigen::VectorXd* fh_out, int* kf_out) {
  const int k = d.k;
  Eigen::VectorXd fh;
  int kf = opt.kf < 0 ? k : opt.kf;
  if (opt.exact_f) {
    kf = k;
    fh = project_l2(d.q, data.f, Measure::ActiveMesh, 2 * k + 6);
  } else {
    fh = compute_extended_source(d.active, d.patches, data.f, kf, opt.gamma_f, opt.variant).coeffs;
  }
  // Hierarchical orthonormal bases: (phi_m, phi_n)_T = detJ delta_mn across degrees.
  const int nk = monomial_count(k), nf = monomial_count(kf), nmin = std::min(nk, nf);
  Eigen::VectorXd G = Eigen::VectorXd::Zero(d.q.ndofs());
  for (int e : d.active.elements) {
    const double detJ = 2.0 * d.mesh().area(e);
    const int r = d.active.element_rank[e];
    G.segment(d.q.first_dof(e), nmin) = -detJ * fh.segment(r * nf, nmin);
  }
  if (fh_out) *fh_out = fh;
  if (kf_out) *kf_out = kf;
  return G;
}

MixedSolution solve_main(const Discretization& d, const ProblemData& data, const MainOptions& opt) {
  const SpMat A = velocity_matrix(d, opt.gamma_u, opt.variant, opt.eps_reg);
  const SpMat B = assemble_div_constraint(d.rt, d.q, Measure::ActiveMesh);
  Eigen::VectorXd fh;
  int kf = 0;
  Eigen::VectorXd rhs(d.rt.ndofs() + d.q.ndofs());
  rhs << flux_rhs(d.rt, data), source_rhs(d, data, opt.source, &fh, &kf);
  SolveReport rep;
  const Eigen::VectorXd x = factor_solve(saddle_matrix(A, B), rhs, &rep);
  check_residual(rep, "main method");
  MixedSolution s = split(d, x, rep, "M");
  s.fh = std::move(fh);
  s.kf = kf;
  return s;
}

MixedSolution solve_restricted(const Discretization& d, const ProblemData& data) {
  const SpMat A = assemble_mass(d.rt, Measure::Omega);
  const SpMat B = assemble_div_constraint(d.rt, d.q, Measure::Omega);
  Eigen::VectorXd rhs(d.rt.ndofs() + d.q.ndofs());
  rhs << flux_rhs(d.rt, data), -assemble_source_rhs(d.q, data.f, Measure::Omega);
  SolveReport rep;
  const Eigen::VectorXd x = factor_solve(saddle_matrix(A, B), rhs, &rep);
  check_residual(rep, "restricted method");
  return split(d, x, rep, "R");
}

MixedSolution solve_div_stabilized(const Discretization& d, const ProblemData& data, double gamma_u, double gamma_div,
                                   GPVariant variant) {
  if (!(gamma_div > 0.0)) throw Error("divergence stabilization needs a positive weight");
  const SpMat A = velocity_matrix(d, gamma_u, variant);
  GPConfig cfg;
  cfg.variant = variant;
  cfg.facets = d.patches.gp_facets;
  cfg.weight = gamma_div;
  const SpMat B = SpMat(assemble_div_constraint(d.rt, d.q, Measure::Omega) + assemble_div_gp(cfg, d.rt, d.q));
  Eigen::VectorXd rhs(d.rt.ndofs() + d.q.ndofs());
  rhs << flux_rhs(d.rt, data), -assemble_source_rhs(d.q, data.f, Measure::Omega);
  SolveReport rep;
  const Eigen::VectorXd x = factor_solve(saddle_matrix(A, B), rhs, &rep);
  check_residual(rep, "divergence-stabilized method");
  return split(d, x, rep, "F");
}

MixedSolution solve_hybrid(const Discretization& d, const ProblemData& data, const SourceOptions& source,
                           double eps_reg) {
  const int k = d.k;
  const auto& mesh = d.mesh();
  const RTSpace rtb(d.active, k, true);
  const FacetSpace fs(d.active, k);
  const SpMat C = assemble_normal_coupling(rtb, fs);
  const Eigen::VectorXd F = flux_rhs(rtb, data);
  Eigen::VectorXd fh;
  int kf = 0;
  const Eigen::VectorXd G = source_rhs(d, data, source, &fh, &kf);
  const auto& R = RTReference::get(k);
  const int ld = rtb.local_dim(), nq = d.q.local_dim();

  struct Local {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
    Eigen::MatrixXd K;   // local [[A, B^T], [B, 0]]
    Eigen::MatrixXd Ct;  // multiplier rows x local RT dofs
    std::vector<int> rows;
    Eigen::VectorXd r;
  };
  std::vector<Local> locals(d.active.elements.size());
  Triplets strip;
  std::vector<int> local_row(fs.ndofs(), -1);

  for (std::size_t idx = 0; idx < d.active.elements.size(); ++idx) {
    const int e = d.active.elements[idx];
    Local& L = locals[idx];
    const Rule vr = d.cut.volume_rule(e, 2 * k + 2);
    const RowMat v = rt_values(rtb, e, vr.points);
    Eigen::VectorXd w2(2 * vr.size());
    w2 << vr.weights, vr.weights;
    Eigen::MatrixXd A = v * w2.asDiagonal() * v.transpose();
    if (eps_reg > 0.0 && d.cut.cut(e)) {
      const Rule fr = d.cut.full_rule(e, 2 * k + 2);
      const RowMat vf = rt_values(rtb, e, fr.points);
      Eigen::VectorXd wf(2 * fr.size());
      wf << fr.weights, fr.weights;
      A += eps_reg * (vf * wf.asDiagonal() * vf.transpose());
    }
    Eigen::MatrixXd B = R.div_dg.transpose();
    const auto s = rtb.signs(e);
    for (int j = 0; j < ld; ++j) B.col(j) *= s[j];
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(ld + nq, ld + nq);
    K.topLeftCorner(ld, ld) = A;
    K.bottomLeftCorner(nq, ld) = B;
    K.topRightCorner(ld, nq) = B.transpose();
    L.lu.compute(K);
    if (!(L.lu.rcond() > 1e-15))
      throw Error("singular local block on element " + std::to_string(e) + "; use eps_reg = 1e-10");

    const auto dofs = rtb.dofs(e);
    for (int f : mesh.element_facets[e]) {
      if (fs.first_dof(f) < 0 || !mesh.facets[f].interior() || !d.cut.active(mesh.neighbor(e, f))) continue;
      for (int j = 0; j <= k; ++j) L.rows.push_back(fs.first_dof(f) + j);
    }
    L.Ct = Eigen::MatrixXd::Zero(L.rows.size(), ld);
    for (std::size_t i = 0; i < L.rows.size(); ++i) local_row[L.rows[i]] = static_cast<int>(i);
    for (int j = 0; j < ld; ++j)
      for (SpMat::InnerIterator it(C, dofs[j]); it; ++it)
        if (local_row[it.row()] >= 0) L.Ct(local_row[it.row()], j) = it.value();
    for (int row : L.rows) local_row[row] = -1;

    L.r.resize(ld + nq);
    for (int j = 0; j < ld; ++j) L.r[j] = F[dofs[j]];
    L.r.tail(nq) = G.segment(d.q.first_dof(e), nq);
    L.K = std::move(K);

    const int m = static_cast<int>(L.rows.size());
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(ld + nq, m);
    rhs.topRows(ld) = L.Ct.transpose();
    const Eigen::MatrixXd Z = L.lu.solve(rhs);
    const Eigen::MatrixXd S = L.Ct * Z.topRows(ld);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) strip.emplace_back(L.rows[i], L.rows[j], S(i, j));
  }
  SpMat S(fs.ndofs(), fs.ndofs());
  S.setFromTriplets(strip.begin(), strip.end());
  const Eigen::SimplicialLLT<SpMat> llt(S);
  if (llt.info() != Eigen::Success) throw Error("hybrid Schur complement is not positive definite");

  // Broken system: K_T x_T + Ct_T^T lambda = r_T on every element and
  // sum_T Ct_T u_T = h on the facets. Solved by static condensation with
  // iterative refinement.
  std::vector<Eigen::VectorXd> xs(locals.size(), Eigen::VectorXd::Zero(ld + nq));
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(fs.ndofs());
  std::vector<Eigen::VectorXd> res(locals.size());
  Eigen::VectorXd hres = Eigen::VectorXd::Zero(fs.ndofs());
  for (std::size_t idx = 0; idx < locals.size(); ++idx) res[idx] = locals[idx].r;
  double rnorm0 = 0.0;
  for (const auto& r : res) rnorm0 += r.squaredNorm();
  rnorm0 = std::sqrt(rnorm0);
  int steps = 0;
  for (;; ++steps) {
    Eigen::VectorXd g = -hres;
    std::vector<Eigen::VectorXd> z(locals.size());
    for (std::size_t idx = 0; idx < locals.size(); ++idx) {
      const Local& L = locals[idx];
      z[idx] = L.lu.solve(res[idx]);
      const Eigen::VectorXd gl = L.Ct * z[idx].head(ld);
      for (std::size_t i = 0; i < L.rows.size(); ++i) g[L.rows[i]] += gl[i];
    }
    const Eigen::VectorXd dlam = llt.solve(g);
    lambda += dlam;
    for (std::size_t idx = 0; idx < locals.size(); ++idx) {
      const Local& L = locals[idx];
      Eigen::VectorXd lam(L.rows.size());
      for (std::size_t i = 0; i < L.rows.size(); ++i) lam[i] = dlam[L.rows[i]];
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ld + nq);
      rhs.head(ld) = L.Ct.transpose() * lam;
      xs[idx] += z[idx] - L.lu.solve(rhs);
    }
    hres.setZero();
    double rnorm = 0.0;
    for (std::size_t idx = 0; idx < locals.size(); ++idx) {
      const Local& L = locals[idx];
      Eigen::VectorXd lam(L.rows.size());
      for (std::size_t i = 0; i < L.rows.size(); ++i) lam[i] = lambda[L.rows[i]];
      res[idx] = L.r - L.K * xs[idx];
      res[idx].head(ld) -= L.Ct.transpose() * lam;
      rnorm += res[idx].squaredNorm();
      const Eigen::VectorXd cu = L.Ct * xs[idx].head(ld);
      for (std::size_t i = 0; i < L.rows.size(); ++i) hres[L.rows[i]] -= cu[i];
    }
    rnorm = std::sqrt(rnorm + hres.squaredNorm());
    if (rnorm <= 1e-14 * rnorm0 || steps == 4) break;
  }

  MixedSolution s;
  s.u = Eigen::VectorXd::Zero(d.rt.ndofs());
  s.p = Eigen::VectorXd::Zero(d.q.ndofs());
  s.p_facet = lambda;
  for (std::size_t idx = 0; idx < d.active.elements.size(); ++idx) {
    const int e = d.active.elements[idx];
    const auto gd = d.rt.dofs(e);
    for (int j = 0; j < ld; ++j) s.u[gd[j]] = xs[idx][j];
    s.p.segment(d.q.first_dof(e), nq) = xs[idx].tail(nq);
  }

  // Residual of the recovered pair in the unbroken system with gamma_u = 0.
  const SpMat A = velocity_matrix(d, 0.0, GPVariant::NormalJump, eps_reg);
  const SpMat B = assemble_div_constraint(d.rt, d.q, Measure::ActiveMesh);
  Eigen::VectorXd rhs(d.rt.ndofs() + d.q.ndofs());
  rhs << flux_rhs(d.rt, data), G;
  Eigen::VectorXd x(rhs.size());
  x << s.u, s.p;
  const SpMat M = saddle_matrix(A, B);
  s.report.residual = (M * x - rhs).norm() / rhs.norm();
  s.report.backward_error = backward_error(M, x, rhs);
  s.report.nnz = S.nonZeros();
  s.report.dimension = static_cast<int>(S.rows());
  s.report.refinement_steps = steps;
  check_residual(s.report, "hybrid method", 1e-8);
  s.fh = std::move(fh);
  s.kf = kf;
  s.variant = "HM";
  return s;
}

MixedSolution solve_neumann(const Discretization& d, const ProblemData& data, const NeumannOptions& opt) {
  const SpMat A = velocity_matrix(d, opt.gamma_u, opt.variant);
  const SpMat B = assemble_div_constraint(d.rt, d.q, Measure::ActiveMesh);
  const DGSpace L(d.active, d.k, d.cut_elements());
  const SpMat Cg = assemble_interface_coupling(d.rt, L);
  const std::vector<int> facets =
      opt.facets == NeumannFacets::CrossedByGamma ? cut_facets(d.active) : cut_element_facets(d.active);
  const SpMat Jg = assemble_neumann_gp(L, facets, opt.gamma_facet, opt.gamma_volume, opt.variant);
  const Eigen::VectorXd mean = assemble_source_rhs(d.q, [](const Point2&) { return 1.0; }, Measure::ActiveMesh);

  const int nu = d.rt.ndofs(), nq = d.q.ndofs(), nl = L.ndofs();
  const int n = nu + nq + nl + 1;
  Triplets trip;
  add_block(trip, A, 0, 0);
  add_block(trip, B, nu, 0);
  add_block(trip, B, 0, nu, 1.0, true);
  add_block(trip, Cg, nu + nq, 0);
  add_block(trip, Cg, 0, nu + nq, 1.0, true);
  add_block(trip, Jg, nu + nq, nu + nq, -1.0);
  SpMat K0(n - 1, n - 1);
  K0.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd m = Eigen::VectorXd::Zero(n - 1);
  m.segment(nu, nq) = mean;

  int pin = -1;
  for (int e : d.active.elements)
    if (!d.cut.cut(e)) {
      pin = nu + d.q.first_dof(e);
      break;
    }
  if (pin < 0) throw Error("Neumann method needs an uncut element");
  const BorderedSolver bs(K0, m, pin);

  for (int i = 0; i < nq; ++i) {
    if (mean[i] == 0.0) continue;
    trip.emplace_back(nu + i, n - 1, mean[i]);
    trip.emplace_back(n - 1, nu + i, mean[i]);
  }
  SpMat K(n, n);
  K.setFromTriplets(trip.begin(), trip.end());

  Eigen::VectorXd fh;
  int kf = 0;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  if (data.g) rhs.head(nu) = assemble_force_rhs(d.rt, data.g);
  rhs.segment(nu, nq) = source_rhs(d, data, opt.source, &fh, &kf);
  rhs.segment(nu + nq, nl) = assemble_interface_flux_rhs(L, data.u);
  Eigen::VectorXd x = bs.solve(rhs);
  const double bn = rhs.norm();
  double res = (K * x - rhs).norm() / bn;
  int steps = 0;
  while (res > 1e-12 && steps < 3) {
    x += bs.solve(rhs - K * x);
    res = (K * x - rhs).norm() / bn;
    ++steps;
  }
  const SolveReport rep{res, backward_error(K, x, rhs), steps, static_cast<long>(K.nonZeros()), n};
  check_residual(rep, "Neumann method");
  MixedSolution s = split(d, x, rep, "N");
  s.lambda = x.segment(nu + nq, nl);
  s.fh = std::move(fh);
  s.kf = kf;
  return s;
}

double divergence_defect(const Discretization& d, const MixedSolution& s) {
  const SpMat D = div_map(d.rt, d.q);
  const Eigen::VectorXd du = D * s.u;
  const int nk = d.q.local_dim(), nf = monomial_count(s.kf), nmin = std::min(nk, nf);
  double worst = 0.0;
  for (int e : d.active.elements) {
    Eigen::VectorXd r = du.segment(d.q.first_dof(e), nk);
    r.head(nmin) += s.fh.segment(d.active.element_rank[e] * nf, nmin);
    worst = std::max(worst, r.norm());
  }
  return worst;
}

SpMat build_variant_matrix(const Discretization& d, Variant v, double gamma, GPVariant gp) {
  GPConfig cfg;
  cfg.variant = gp;
  cfg.facets = d.patches.gp_facets;
  cfg.weight = gamma;
  if (v == Variant::V1)
    return saddle_matrix(assemble_mass(d.rt, Measure::Omega), assemble_div_constraint(d.rt, d.q, Measure::Omega));
  const SpMat A = SpMat(assemble_mass(d.rt, Measure::Omega) + assemble_gp(cfg, d.rt));
  SpMat B = assemble_div_constraint(d.rt, d.q, v == Variant::V2 || v == Variant::V4 ? Measure::ActiveMesh : Measure::Omega);
  if (v == Variant::V3 || v == Variant::V5) B += assemble_div_gp(cfg, d.rt, d.q);
  if (v == Variant::V4 || v == Variant::V5) return saddle_matrix(A, B, assemble_gp(cfg, d.q));
  return saddle_matrix(A, B);
}

}  // namespace umix
