#include "umix/harness.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <tuple>

#include "umix/error.hpp"
#include "umix/polynomial.hpp"

namespace umix {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string annotate(const Error& err, int k, int L) {
  return std::string(err.what()) + " (k=" + std::to_string(k) + ", L=" + std::to_string(L) + ")";
}

struct ErrorSums {
  double u = 0, ubar = 0, div = 0, p = 0, pin = 0, ps = 0;
};

}  // namespace

const char* to_string(PPKind pp) {
  switch (pp) {
    case PPKind::None: return "none";
    case PPKind::Element: return "element";
    case PPKind::Patch: return "patch";
  }
  return "none";
}

PPKind parse_pp(const std::string& s) {
  if (s == "none") return PPKind::None;
  if (s == "element") return PPKind::Element;
  if (s == "patch") return PPKind::Patch;
  throw Error("unknown post-processing '" + s + "'");
}

GPVariant parse_gp(const std::string& s) {
  if (s == "normal-jump") return GPVariant::NormalJump;
  if (s == "direct") return GPVariant::Direct;
  throw Error("unknown ghost penalty '" + s + "'");
}

Geometry parse_geometry(const std::string& s) {
  if (s == "ring") return Geometry::Ring;
  if (s == "polygon") return Geometry::Polygon;
  throw Error("unknown geometry '" + s + "'");
}

std::vector<double> compute_eoc(const std::vector<double>& errors) {
  std::vector<double> rates(errors.size(), kNaN);
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double a = errors[i - 1], b = errors[i];
    if (a > 0.0 && b > 0.0 && std::isfinite(a) && std::isfinite(b)) rates[i] = std::log2(a / b);
  }
  return rates;
}

const BackgroundMesh& MeshHierarchy::level(int L) {
  if (L < 0) throw Error("negative mesh level");
  if (meshes_.empty()) meshes_.push_back(build_structured(base_n));
  while (static_cast<int>(meshes_.size()) <= L) meshes_.push_back(refine_uniform(meshes_.back()));
  return meshes_[L];
}

DomainDescription make_domain(Geometry g, int level, double shift) {
  if (g == Geometry::Polygon) return rotated_square();
  return ring_level_set(level + 2, shift);
}

ErrorRecord compute_errors(const Discretization& d, const ProblemData& data, const MixedSolution& s,
                           const PostProcessedScalar* pp, bool mean_free) {
  const int deg = 2 * d.k + 6;
  const DGSpace pps(d.active, d.k + 1);
  double shift_p = 0.0, shift_ps = 0.0;
  if (mean_free) {
    double vol = 0.0, dp = 0.0, dps = 0.0;
    for (int e : d.active.elements) {
      const Rule r = d.cut.volume_rule(e, deg);
      const Eigen::VectorXd ph = eval_dg(d.q, s.p, e, r.points);
      Eigen::VectorXd pex(r.size());
      for (Eigen::Index i = 0; i < r.size(); ++i) pex[i] = data.p(r.points.col(i));
      vol += r.total();
      dp += r.weights.dot(ph - pex);
      if (pp) dps += r.weights.dot(eval_dg(pps, pp->coeffs, e, r.points) - pex);
    }
    shift_p = dp / vol;
    shift_ps = dps / vol;
  }
  ErrorSums sum;
  for (int e : d.active.elements) {
    for (int pass = 0; pass < 2; ++pass) {
      const Rule r = pass == 0 ? d.cut.volume_rule(e, deg) : d.cut.full_rule(e, deg);
      const Eigen::Matrix2Xd uh = eval_rt(d.rt, s.u, e, r.points);
      double eu = 0.0;
      for (Eigen::Index i = 0; i < r.size(); ++i)
        eu += r.weights[i] * (data.u(r.points.col(i)) - uh.col(i)).squaredNorm();
      if (pass == 1) {
        sum.ubar += eu;
        if (d.cut.cls(e) == ElementClass::Interior) {
          const Eigen::VectorXd ph = eval_dg(d.q, s.p, e, r.points);
          for (Eigen::Index i = 0; i < r.size(); ++i)
            sum.pin += r.weights[i] * std::pow(data.p(r.points.col(i)) - ph[i] + shift_p, 2);
        }
        continue;
      }
      sum.u += eu;
      const Eigen::VectorXd div = eval_rt_div(d.rt, s.u, e, r.points);
      const Eigen::VectorXd ph = eval_dg(d.q, s.p, e, r.points);
      Eigen::VectorXd ps;
      if (pp) ps = eval_dg(pps, pp->coeffs, e, r.points);
      for (Eigen::Index i = 0; i < r.size(); ++i) {
        const Point2 x = r.points.col(i);
        const double w = r.weights[i], pex = data.p(x);
        sum.div += w * std::pow(div[i] + data.f(x), 2);
        sum.p += w * std::pow(pex - ph[i] + shift_p, 2);
        if (pp) sum.ps += w * std::pow(pex - ps[i] + shift_ps, 2);
      }
    }
  }
  ErrorRecord rec;
  rec.L = d.mesh().level;
  rec.k = d.k;
  rec.postprocessver = pp ? (pp->scheme == PPScheme::Elementwise ? "element" : "patch") : "none";
  rec.ul2error = std::sqrt(sum.u);
  rec.ul2error_bar = std::sqrt(sum.ubar);
  rec.udiverror = std::sqrt(sum.div);
  rec.pl2error = std::sqrt(sum.p);
  rec.p_inner_l2error = std::sqrt(sum.pin);
  rec.psl2error = pp ? std::sqrt(sum.ps) : rec.pl2error;
  return rec;
}

PostProcessedScalar apply_pp(const Discretization& d, const MixedSolution& s, const ProblemData& data, PPKind pp,
                             GPVariant gp) {
  if (pp == PPKind::Element) return pp_element(d, s.u, s.p, data.p);
  PatchPPOptions opt;
  opt.variant = gp;
  return pp_patch(d, s.u, s.p, opt);
}

namespace {

template <class Solve>
std::vector<ErrorRecord> convergence_loop(const ConvergenceConfig& config, PPKind pp, bool mean_free,
                                          Solve&& solve) {
  if (config.levels < 1) throw Error("at least one level is required");
  MeshHierarchy meshes{config.base_n};
  const ProblemData data = sine_problem();
  std::vector<ErrorRecord> out;
  for (int L = 0; L < config.levels; ++L) {
    const BackgroundMesh& mesh = meshes.level(L);
    for (int k : config.ks) {
      try {
        const Discretization d(mesh, make_domain(config.geometry, L), k);
        for (double gamma : config.gammas) {
          const MixedSolution s = solve(d, data, gamma);
          std::optional<PostProcessedScalar> p;
          if (pp != PPKind::None) p = apply_pp(d, s, data, pp, config.gp);
          ErrorRecord rec = compute_errors(d, data, s, p ? &*p : nullptr, mean_free);
          rec.gammastab = gamma;
          out.push_back(rec);
        }
      } catch (const Error& err) {
        throw Error(annotate(err, k, L));
      }
    }
  }
  return out;
}

}  // namespace

std::vector<ErrorRecord> run_dirichlet_convergence(const ConvergenceConfig& config) {
  return convergence_loop(config, config.pp, false, [&](const Discretization& d, const ProblemData& data, double g) {
    MainOptions opt;
    opt.gamma_u = g;
    opt.variant = config.gp;
    opt.source = config.source;
    opt.source.variant = config.gp;
    return solve_main(d, data, opt);
  });
}

std::vector<ErrorRecord> run_f_study(const ConvergenceConfig& config) {
  std::vector<ErrorRecord> out;
  for (int k : config.ks) {
    const std::vector<std::pair<std::string, int>> modes{
        {"exact", -1}, {"k-2", k - 2}, {"k-1", k - 1}, {"k", k}, {"k+1", k + 1}};
    for (const auto& [label, kf] : modes) {
      if (label != "exact" && kf < 0) continue;
      ConvergenceConfig c = config;
      c.ks = {k};
      c.source.exact_f = label == "exact";
      c.source.kf = label == "exact" ? -1 : kf;
      for (ErrorRecord& r : run_dirichlet_convergence(c)) {
        r.F = label;
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

std::vector<ErrorRecord> run_neumann_convergence(const ConvergenceConfig& config) {
  return convergence_loop(config, PPKind::Patch, true, [&](const Discretization& d, const ProblemData& data, double g) {
    NeumannOptions opt;
    opt.gamma_u = g;
    opt.variant = config.gp;
    opt.source = config.source;
    opt.source.variant = config.gp;
    return solve_neumann(d, data, opt);
  });
}

std::vector<SweepRecord> run_condition_sweep(const SweepConfig& config) {
  if (!(config.step > 0.0)) throw Error("sweep step must be positive");
  MeshHierarchy meshes{config.base_n};
  const BackgroundMesh& mesh = meshes.level(config.level);
  const long n = std::lround(std::floor((config.stop - config.start) / config.step + 1e-9));
  std::vector<SweepRecord> out;
  for (long z = 0; z <= n; ++z) {
    const double shift = config.start + static_cast<double>(z) * config.step;
    std::unique_ptr<Discretization> d;
    try {
      d = std::make_unique<Discretization>(mesh, make_domain(Geometry::Ring, config.level, shift), config.k);
    } catch (const Error&) {
      d.reset();
    }
    for (double g : config.gammas) {
      double cond = std::numeric_limits<double>::infinity();
      if (d) {
        const Condition c = condition_number_lanczos(build_variant_matrix(*d, Variant::V2, g));
        cond = c.singular ? std::numeric_limits<double>::infinity() : c.value;
      }
      out.push_back({shift, g, cond});
    }
  }
  return out;
}

StripFixture build_strip_fixture() {
  constexpr int cells = 5, middle = 2;
  std::vector<Point2> verts;
  for (int i = 0; i <= cells; ++i)
    for (int j = 0; j <= 2; ++j) verts.emplace_back(i, j);
  const auto vid = [](int i, int j) { return 3 * i + j; };
  std::vector<std::array<int, 3>> tris;
  for (int i = 0; i < cells; ++i) {
    // Bottom square: lower-left (interior) and upper-right; top square: both cut.
    tris.push_back({vid(i, 0), vid(i + 1, 0), vid(i, 1)});
    tris.push_back({vid(i + 1, 0), vid(i + 1, 1), vid(i, 1)});
    tris.push_back({vid(i, 1), vid(i + 1, 1), vid(i, 2)});
    tris.push_back({vid(i + 1, 1), vid(i + 1, 2), vid(i, 2)});
  }
  StripFixture fx;
  fx.mesh = mesh_from_triangles(verts, tris);
  LevelSet ls;
  ls.value = [](const Point2& x) { return x.y() - 4.0 / 3.0; };
  ls.gradient = [](const Point2&) { return Point2(0.0, 1.0); };
  ls.subdivision_depth = 0;
  fx.domain = ls;

  const auto find_facet = [&](int a, int b) {
    for (int f = 0; f < fx.mesh.num_facets(); ++f) {
      const auto& v = fx.mesh.facets[f].v;
      if ((v[0] == a && v[1] == b) || (v[0] == b && v[1] == a)) return f;
    }
    throw Error("strip fixture: missing facet");
  };
  for (int i = 0; i < cells; ++i) {
    const int root = 4 * i + 1, lower = 4 * i + 2, upper = 4 * i + 3;
    Patch p;
    p.root = root;
    p.elements = {root, lower, upper};
    p.facets = {find_facet(vid(i, 1), vid(i + 1, 1)), find_facet(vid(i + 1, 1), vid(i, 2))};
    std::sort(p.facets.begin(), p.facets.end());
    fx.patches.push_back(p);
    Patch single;
    single.root = 4 * i;
    single.elements = {4 * i};
    fx.patches.push_back(single);
  }
  fx.cell_elements = {4 * middle, 4 * middle + 1, 4 * middle + 2, 4 * middle + 3};
  const int i = middle;
  fx.cell_facets = {find_facet(vid(i, 0), vid(i, 1)),         find_facet(vid(i, 1), vid(i, 2)),
                    find_facet(vid(i, 0), vid(i + 1, 0)),     find_facet(vid(i, 1), vid(i + 1, 1)),
                    find_facet(vid(i, 2), vid(i + 1, 2)),     find_facet(vid(i + 1, 0), vid(i, 1)),
                    find_facet(vid(i + 1, 1), vid(i, 2))};
  return fx;
}

PatchDecomposition decomposition_from(const std::vector<Patch>& patches, int num_elements) {
  PatchDecomposition pd;
  pd.patches = patches;
  pd.element_to_patch.assign(num_elements, -1);
  std::set<int> facets;
  for (std::size_t i = 0; i < patches.size(); ++i) {
    for (int e : patches[i].elements) pd.element_to_patch[e] = static_cast<int>(i);
    facets.insert(patches[i].facets.begin(), patches[i].facets.end());
  }
  pd.gp_facets.assign(facets.begin(), facets.end());
  return pd;
}

std::vector<SparsityRow> run_sparsity_study(int kmax, NnzAttribution mode) {
  const StripFixture fx = build_strip_fixture();
  std::vector<SparsityRow> rows;
  for (int k = 0; k <= kmax; ++k) {
    Discretization d(fx.mesh, fx.domain, k);
    d.patches = decomposition_from(fx.patches, fx.mesh.num_elements());
    const int nu = d.rt.ndofs();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(nu + d.q.ndofs());
    for (int f : fx.cell_facets) w.segment(d.rt.facet_dof(f), k + 1).setOnes();
    for (int e : fx.cell_elements) {
      const auto dofs = d.rt.dofs(e);
      for (std::size_t j = 3 * (k + 1); j < dofs.size(); ++j) w[dofs[j]] = 1.0;
      w.segment(nu + d.q.first_dof(e), d.q.local_dim()).setOnes();
    }
    SparsityRow row;
    row.k = k;
    row.ndof_sigma = w.head(nu).sum();
    row.ndof_q = w.tail(d.q.ndofs()).sum();
    const Variant vs[5] = {Variant::V1, Variant::V2, Variant::V3, Variant::V4, Variant::V5};
    for (int v = 0; v < 5; ++v) row.nnz_per_dof[v] = count_nnz(build_variant_matrix(d, vs[v]), w, mode) / w.sum();
    rows.push_back(row);
  }
  return rows;
}

double closed_form_v1_nnz_per_dof(int k) {
  // Unit cell: five facets shared by two elements, two boundary facets, four elements.
  const double nt = (k + 1) * (k + 3), np = monomial_count(k), nf = k + 1;
  const double interior_facet_rows = 5 * nf * (2 * nt - nf + 2 * np);
  const double boundary_facet_rows = 2 * nf * (nt + np);
  const double bubble_rows = 4 * k * (k + 1) * (nt + np);
  const double q_rows = 4 * np * nt;
  const double ndof = 7 * nf + 4 * k * (k + 1) + 4 * np;
  return (interior_facet_rows + boundary_facet_rows + bubble_rows + q_rows) / ndof;
}

EquivalenceReport run_equivalence_check(int level, int k, Geometry geometry, int base_n) {
  MeshHierarchy meshes{base_n};
  const BackgroundMesh& mesh = meshes.level(level);
  const Discretization d(mesh, make_domain(geometry, level), k);
  const ProblemData data = sine_problem();
  MainOptions opt;
  opt.gamma_u = 1.0;
  opt.source.gamma_f = 1.0;
  const MixedSolution m = solve_main(d, data, opt);
  const MixedSolution f = solve_div_stabilized(d, data, 1.0, 1.0);

  std::vector<char> near(mesh.num_elements(), 0);
  for (int e : d.active.elements) near[e] = d.cut.cut(e);
  for (int fct : d.patches.gp_facets) near[mesh.facets[fct].left] = near[mesh.facets[fct].right] = 1;
  std::vector<char> grown = near;
  for (int e : d.active.elements)
    if (near[e])
      for (int fct : mesh.element_facets[e]) {
        const int nb = mesh.neighbor(e, fct);
        if (nb >= 0) grown[nb] = 1;
      }

  EquivalenceReport rep;
  rep.level = level;
  rep.k = k;
  rep.u_rel_diff = (m.u - f.u).lpNorm<Eigen::Infinity>() / m.u.lpNorm<Eigen::Infinity>();
  const int nq = d.q.local_dim();
  for (int e : d.active.elements) {
    const double diff = (m.p - f.p).segment(d.q.first_dof(e), nq).lpNorm<Eigen::Infinity>();
    if (grown[e]) {
      rep.p_near_max_diff = std::max(rep.p_near_max_diff, diff);
    } else {
      rep.p_far_diff = std::max(rep.p_far_diff, diff);
      ++rep.far_elements;
    }
  }
  return rep;
}

HybridReport run_hybrid_check(int level, int k, double eps_reg, int base_n) {
  MeshHierarchy meshes{base_n};
  const Discretization d(meshes.level(level), make_domain(Geometry::Ring, level), k);
  const ProblemData data = sine_problem();
  MainOptions opt;
  opt.gamma_u = 0.0;
  opt.eps_reg = eps_reg;
  const MixedSolution m = solve_main(d, data, opt);
  const MixedSolution h = solve_hybrid(d, data, opt.source, eps_reg);
  HybridReport rep;
  double du = 0.0, nu = 0.0, dp = 0.0, np = 0.0;
  for (int e : d.active.elements) {
    const Rule r = d.cut.volume_rule(e, 2 * k + 2);
    const Eigen::Matrix2Xd um = eval_rt(d.rt, m.u, e, r.points), uh = eval_rt(d.rt, h.u, e, r.points);
    const Eigen::VectorXd pm = eval_dg(d.q, m.p, e, r.points), ph = eval_dg(d.q, h.p, e, r.points);
    du += r.weights.dot((um - uh).colwise().squaredNorm().transpose());
    nu += r.weights.dot(um.colwise().squaredNorm().transpose());
    dp += r.weights.dot((pm - ph).array().square().matrix());
    np += r.weights.dot(pm.array().square().matrix());
  }
  rep.u_rel_diff = std::sqrt(du / nu);
  rep.p_rel_diff = std::sqrt(dp / np);
  rep.u_coeff_rel_diff = (m.u - h.u).lpNorm<Eigen::Infinity>() / m.u.lpNorm<Eigen::Infinity>();
  rep.residual = h.report.residual;
  return rep;
}

void write_error_csv(std::ostream& os, std::vector<ErrorRecord> records, bool with_f) {
  std::stable_sort(records.begin(), records.end(), [](const ErrorRecord& a, const ErrorRecord& b) {
    return std::tie(a.F, a.k, a.gammastab, a.postprocessver, a.L) <
           std::tie(b.F, b.k, b.gammastab, b.postprocessver, b.L);
  });
  os << "L,k,gammastab,postprocessver,ul2error,ul2error_bar,udiverror,pl2error,p_inner_l2error,psl2error";
  if (with_f) os << ",F";
  os << '\n' << std::setprecision(12);
  for (const ErrorRecord& r : records) {
    os << r.L << ',' << r.k << ',' << r.gammastab << ',' << r.postprocessver << ',' << r.ul2error << ','
       << r.ul2error_bar << ',' << r.udiverror << ',' << r.pl2error << ',' << r.p_inner_l2error << ','
       << r.psl2error;
    if (with_f) os << ',' << r.F;
    os << '\n';
  }
}

void write_sweep_csv(std::ostream& os, std::vector<SweepRecord> records) {
  std::stable_sort(records.begin(), records.end(), [](const SweepRecord& a, const SweepRecord& b) {
    return std::tie(a.gammastab, a.shift) < std::tie(b.gammastab, b.shift);
  });
  os << "shift,gammastab,cond\n" << std::setprecision(12);
  for (const SweepRecord& r : records) os << r.shift << ',' << r.gammastab << ',' << r.cond << '\n';
}

void write_sparsity_table(std::ostream& os, const std::vector<SparsityRow>& rows) {
  os << "k,ndof_sigma,ndof_q,ndof,V1,V2,V3,V4,V5\n" << std::fixed << std::setprecision(2);
  for (const SparsityRow& r : rows) {
    os << r.k << ',' << std::setprecision(0) << r.ndof_sigma << ',' << r.ndof_q << ',' << r.ndof_sigma + r.ndof_q
       << std::setprecision(2);
    for (double v : r.nnz_per_dof) os << ',' << v;
    os << '\n';
  }
  os.unsetf(std::ios::fixed);
}

}  // namespace umix
