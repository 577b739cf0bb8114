#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>

#include "umix/error.hpp"
#include "umix/harness.hpp"

namespace {

struct Options {
  std::vector<int> ks;
  int levels = 4;
  std::vector<double> gammas;
  std::string pp = "patch";
  std::string geometry = "ring";
  std::string gp = "normal-jump";
  int kf = -1;
  bool exact_f = false;
  std::string out;
  int base_n = 16;
  double start = 0.0, stop = 0.1, step = 1e-4;
  int level = 1;
  int sweep_level = 0;
  std::string dump_mesh, dump_matrix;
};

// Writes to --out when given, else to stdout.
template <class Fn>
void emit(const Options& o, Fn&& fn) {
  if (o.out.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream os(o.out);
  if (!os) throw umix::Error("cannot open '" + o.out + "' for writing");
  fn(os);
}

void print_rates(const std::vector<umix::ErrorRecord>& recs) {
  std::map<std::tuple<std::string, int, double, std::string>, std::vector<const umix::ErrorRecord*>> groups;
  for (const auto& r : recs) groups[{r.F, r.k, r.gammastab, r.postprocessver}].push_back(&r);
  std::cerr << std::fixed << std::setprecision(2);
  for (auto& [key, rows] : groups) {
    std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->L < b->L; });
    std::vector<double> u, ub, p, ps;
    for (auto* r : rows) {
      u.push_back(r->ul2error);
      ub.push_back(r->ul2error_bar);
      p.push_back(r->p_inner_l2error);
      ps.push_back(r->psl2error);
    }
    const auto eu = umix::compute_eoc(u), eub = umix::compute_eoc(ub), ep = umix::compute_eoc(p),
               eps = umix::compute_eoc(ps);
    std::cerr << "k=" << std::get<1>(key) << " gamma=" << std::get<2>(key) << " pp=" << std::get<3>(key);
    if (!std::get<0>(key).empty()) std::cerr << " F=" << std::get<0>(key);
    std::cerr << "  EOC u/u_bar/p_inner/p*:";
    for (std::size_t i = 1; i < rows.size(); ++i)
      std::cerr << "  " << eu[i] << '/' << eub[i] << '/' << ep[i] << '/' << eps[i];
    std::cerr << '\n';
  }
}

umix::ConvergenceConfig convergence_config(const Options& o, std::vector<int> default_k,
                                           std::vector<double> default_gamma) {
  umix::ConvergenceConfig c;
  c.geometry = umix::parse_geometry(o.geometry);
  c.ks = o.ks.empty() ? default_k : o.ks;
  c.gammas = o.gammas.empty() ? default_gamma : o.gammas;
  c.pp = umix::parse_pp(o.pp);
  c.levels = o.levels;
  c.base_n = o.base_n;
  c.gp = umix::parse_gp(o.gp);
  c.source.exact_f = o.exact_f;
  c.source.kf = o.kf;
  return c;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--k", o.ks, "Polynomial degrees");
  sub->add_option("--levels", o.levels, "Number of refinement levels")->check(CLI::PositiveNumber);
  sub->add_option("--gamma-u", o.gammas, "Ghost penalty weights on u");
  sub->add_option("--geometry", o.geometry, "ring or polygon")->check(CLI::IsMember({"ring", "polygon"}));
  sub->add_option("--base-n", o.base_n, "Squares per side of the level-0 mesh")->check(CLI::PositiveNumber);
  sub->add_option("--gp", o.gp, "Ghost penalty variant")->check(CLI::IsMember({"normal-jump", "direct"}));
  sub->add_option("--out", o.out, "Output file (stdout when omitted)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unfitted divergence-preserving mixed FEM experiments"};
  app.require_subcommand(1);
  Options o;

  auto* dir = app.add_subcommand("converge-dirichlet", "Convergence study with Dirichlet data");
  add_common(dir, o);
  dir->add_option("--pp", o.pp, "Post-processing")->check(CLI::IsMember({"none", "element", "patch"}));
  dir->add_option("--kf", o.kf, "Degree of the discrete source extension");
  dir->add_flag("--exact-f", o.exact_f, "Use f directly on the active mesh");

  auto* neu = app.add_subcommand("converge-neumann", "Convergence study with Neumann data");
  add_common(neu, o);
  neu->add_option("--kf", o.kf, "Degree of the discrete source extension");
  neu->add_flag("--exact-f", o.exact_f, "Use f directly on the active mesh");

  auto* fst = app.add_subcommand("f-study", "Influence of the source approximation");
  add_common(fst, o);
  fst->add_option("--pp", o.pp, "Post-processing")->check(CLI::IsMember({"none", "element", "patch"}));

  auto* cond = app.add_subcommand("cond-sweep", "Condition numbers while shifting the ring");
  cond->add_option("--k", o.ks, "Polynomial degree");
  cond->add_option("--levels", o.sweep_level, "Mesh level");
  cond->add_option("--gamma-u", o.gammas, "Ghost penalty weights on u");
  cond->add_option("--base-n", o.base_n, "Squares per side of the level-0 mesh");
  cond->add_option("--start", o.start, "First shift");
  cond->add_option("--stop", o.stop, "Last shift");
  cond->add_option("--step", o.step, "Shift increment")->check(CLI::PositiveNumber);
  cond->add_option("--out", o.out, "Output file (stdout when omitted)");

  auto* sp = app.add_subcommand("sparsity", "Unit-cell dof and nonzero counts");
  sp->add_option("--k", o.ks, "Largest degree (default 3)");
  sp->add_option("--out", o.out, "Output file (stdout when omitted)");
  sp->add_option("--dump-mesh", o.dump_mesh, "Write the strip mesh");
  sp->add_option("--dump-matrix", o.dump_matrix, "Prefix for Matrix Market files of V1..V5");

  auto* eq = app.add_subcommand("equivalence", "Method equivalence and hybridization checks");
  eq->add_option("--k", o.ks, "Polynomial degrees");
  eq->add_option("--levels", o.level, "Mesh level");
  eq->add_option("--geometry", o.geometry, "ring or polygon")->check(CLI::IsMember({"ring", "polygon"}));
  eq->add_option("--base-n", o.base_n, "Squares per side of the level-0 mesh");
  eq->add_option("--out", o.out, "Output file (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*dir) {
      const auto recs = umix::run_dirichlet_convergence(convergence_config(o, {1}, {1.0}));
      emit(o, [&](std::ostream& os) { umix::write_error_csv(os, recs, false); });
      print_rates(recs);
    } else if (*neu) {
      const auto recs = umix::run_neumann_convergence(convergence_config(o, {0, 1}, {1.0}));
      emit(o, [&](std::ostream& os) { umix::write_error_csv(os, recs, false); });
      print_rates(recs);
    } else if (*fst) {
      const auto recs = umix::run_f_study(convergence_config(o, {2}, {1.0}));
      emit(o, [&](std::ostream& os) { umix::write_error_csv(os, recs, true); });
      print_rates(recs);
    } else if (*cond) {
      umix::SweepConfig c;
      c.start = o.start;
      c.stop = o.stop;
      c.step = o.step;
      c.k = o.ks.empty() ? 1 : o.ks.front();
      c.level = o.sweep_level;
      c.base_n = o.base_n;
      if (!o.gammas.empty()) c.gammas = o.gammas;
      const auto recs = umix::run_condition_sweep(c);
      emit(o, [&](std::ostream& os) { umix::write_sweep_csv(os, recs); });
    } else if (*sp) {
      const int kmax = o.ks.empty() ? 3 : o.ks.front();
      const auto rows = umix::run_sparsity_study(kmax);
      emit(o, [&](std::ostream& os) { umix::write_sparsity_table(os, rows); });
      if (!o.dump_mesh.empty() || !o.dump_matrix.empty()) {
        const umix::StripFixture fx = umix::build_strip_fixture();
        if (!o.dump_mesh.empty()) {
          std::ofstream os(o.dump_mesh);
          umix::write_mesh(os, fx.mesh);
        }
        if (!o.dump_matrix.empty()) {
          umix::Discretization d(fx.mesh, fx.domain, kmax);
          d.patches = umix::decomposition_from(fx.patches, fx.mesh.num_elements());
          const umix::Variant vs[5] = {umix::Variant::V1, umix::Variant::V2, umix::Variant::V3, umix::Variant::V4,
                                       umix::Variant::V5};
          for (int v = 0; v < 5; ++v) {
            std::ofstream os(o.dump_matrix + "_V" + std::to_string(v + 1) + "_k" + std::to_string(kmax) + ".mtx");
            umix::write_matrix_market(os, umix::build_variant_matrix(d, vs[v]));
          }
        }
      }
    } else if (*eq) {
      const std::vector<int> ks = o.ks.empty() ? std::vector<int>{0, 1, 2} : o.ks;
      emit(o, [&](std::ostream& os) {
        os << "check,k,level,u_diff,p_diff,aux\n" << std::setprecision(6) << std::scientific;
        for (int k : ks) {
          const auto e = umix::run_equivalence_check(o.level, k, umix::parse_geometry(o.geometry), o.base_n);
          os << "div-stabilized," << k << ',' << o.level << ',' << e.u_rel_diff << ',' << e.p_far_diff << ','
             << e.p_near_max_diff << '\n';
          const auto h = umix::run_hybrid_check(o.level, k, 1e-10, o.base_n);
          os << "hybrid," << k << ',' << o.level << ',' << h.u_rel_diff << ',' << h.p_rel_diff << ','
             << h.u_coeff_rel_diff << '\n';
        }
      });
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 0;
}
