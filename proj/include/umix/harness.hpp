#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "umix/postprocess.hpp"

namespace umix {

enum class Geometry { Ring, Polygon };
enum class PPKind { None, Element, Patch };

const char* to_string(PPKind pp);
PPKind parse_pp(const std::string& s);
GPVariant parse_gp(const std::string& s);
Geometry parse_geometry(const std::string& s);

struct ErrorRecord {
  int L = 0;
  int k = 0;
  double gammastab = 0.0;
  std::string postprocessver;
  double ul2error = 0.0;        // ||u - u_h||_Omega
  double ul2error_bar = 0.0;    // ||u - u_h|| on the active mesh
  double udiverror = 0.0;       // ||div u_h + f||_Omega
  double pl2error = 0.0;        // ||p - p_bar||_Omega
  double p_inner_l2error = 0.0; // ||p - p_bar|| on interior elements
  double psl2error = 0.0;       // ||p - p*||_Omega; equals pl2error without post-processing
  std::string F;                // source mode label, f-study only
};

// Undefined rates are NaN.
std::vector<double> compute_eoc(const std::vector<double>& errors);

struct MeshHierarchy {
  explicit MeshHierarchy(int n = 16) : base_n(n) {}
  int base_n;
  // Level L: the structured base mesh refined L times.
  const BackgroundMesh& level(int L);

 private:
  std::vector<BackgroundMesh> meshes_;
};

// Ring level sets use subdivision depth L + 2.
DomainDescription make_domain(Geometry g, int level, double shift = 0.0);

struct ConvergenceConfig {
  Geometry geometry = Geometry::Ring;
  std::vector<int> ks{1};
  std::vector<double> gammas{1.0};
  PPKind pp = PPKind::Patch;
  int levels = 4;  // L = 0 .. levels-1
  int base_n = 16;
  GPVariant gp = GPVariant::NormalJump;  // every ghost penalty of the run, including f_h and post-processing
  SourceOptions source;
};

// Errors of a solution; with `mean_free` the scalar errors are taken after
// removing the mean difference over Omega.
ErrorRecord compute_errors(const Discretization& d, const ProblemData& data, const MixedSolution& s,
                           const PostProcessedScalar* pp, bool mean_free = false);

PostProcessedScalar apply_pp(const Discretization& d, const MixedSolution& s, const ProblemData& data, PPKind pp,
                             GPVariant gp = GPVariant::NormalJump);

std::vector<ErrorRecord> run_dirichlet_convergence(const ConvergenceConfig& config);
// Source modes exact, k-2, k-1, k, k+1 (negative degrees skipped) for every
// entry of config.ks and config.gammas.
std::vector<ErrorRecord> run_f_study(const ConvergenceConfig& config);
// Patchwise post-processing, mean-free errors.
std::vector<ErrorRecord> run_neumann_convergence(const ConvergenceConfig& config);

struct SweepConfig {
  double start = 0.0;
  double stop = 0.1;
  double step = 1e-4;
  int k = 1;
  int level = 0;
  int base_n = 16;
  std::vector<double> gammas{0.0, 1.0};
};

struct SweepRecord {
  double shift = 0.0;
  double gammastab = 0.0;
  double cond = 0.0;  // +inf for numerically singular matrices
};

std::vector<SweepRecord> run_condition_sweep(const SweepConfig& config);

struct SparsityRow {
  int k = 0;
  double ndof_sigma = 0.0;
  double ndof_q = 0.0;
  double nnz_per_dof[5] = {0, 0, 0, 0, 0};  // V1..V5
};

// Periodic strip unit cell replicated five times; only the middle cell's
// dofs are counted.
struct StripFixture {
  BackgroundMesh mesh;
  DomainDescription domain;
  std::vector<int> cell_elements;  // middle cell
  std::vector<int> cell_facets;    // middle cell, one copy of each periodic facet
  std::vector<Patch> patches;
};

StripFixture build_strip_fixture();
PatchDecomposition decomposition_from(const std::vector<Patch>& patches, int num_elements);
std::vector<SparsityRow> run_sparsity_study(int kmax = 3, NnzAttribution mode = NnzAttribution::Row);
// Unstabilized mixed coupling count per dof of the unit cell.
double closed_form_v1_nnz_per_dof(int k);

struct EquivalenceReport {
  int level = 0;
  int k = 0;
  double u_rel_diff = 0.0;
  double p_far_diff = 0.0;   // elements not touched by a cut element, ghost penalty facet or their neighbours
  double p_near_max_diff = 0.0;
  int far_elements = 0;
};

EquivalenceReport run_equivalence_check(int level, int k, Geometry geometry = Geometry::Ring, int base_n = 16);

struct HybridReport {
  double u_rel_diff = 0.0;        // relative L2(Omega) difference of the fields
  double p_rel_diff = 0.0;        // relative L2(Omega) difference of the fields
  double u_coeff_rel_diff = 0.0;  // relative max coefficient difference on the active mesh
  double residual = 0.0;
};

HybridReport run_hybrid_check(int level, int k, double eps_reg = 1e-10, int base_n = 16);

void write_error_csv(std::ostream& os, std::vector<ErrorRecord> records, bool with_f);
void write_sweep_csv(std::ostream& os, std::vector<SweepRecord> records);
void write_sparsity_table(std::ostream& os, const std::vector<SparsityRow>& rows);

}  // namespace umix
