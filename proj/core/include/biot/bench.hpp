#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "biot/analysis.hpp"
#include "biot/assembly.hpp"
#include "biot/driver.hpp"
#include "biot/mesh.hpp"
#include "biot/precond.hpp"

namespace biot {

/// Footing benchmark sweep configuration. Loaded from a plain-text key-value
/// file (one `key = values...` pair per line, `#` comments) with optional
/// command-line overrides applied on top through apply_override.
struct BenchConfig {
  int dim = 3;
  std::vector<int> levels{1, 2, 3};  // level l subdivides each axis 2^(l+1) times
  std::vector<double> taus{0.1, 0.01, 0.001, 0.0001};
  std::vector<double> Ks{1e-6};
  std::vector<double> nus{0.2};
  double E = 3.0e4;
  double alpha = 1.0;
  double delta = 0.25;
  std::vector<std::string> preconds{"B_D", "B_L", "B_U", "M_D", "M_L", "M_U"};
  double outer_tol = 1e-6;
  double inner_tol = 1e-2;
  int outer_maxit = 500;
  FormulaMode formula = FormulaMode::Paper;
  DrainedSet drained = DrainedSet::AllButBase;
  bool analysis = false;
  std::string out = "results.csv";
  int dof_budget = 300000;    // skip any mesh whose total dofs exceed this
  int direct_budget = 80000;  // skip exact preconditioners above this many displacement dofs
  double traction = 0.1;
  double load_extent = 16.0;

  void validate() const;
};

/// The benchmark geometry: a (-32,32)^(d-1) x (0,64) box, tagged for the
/// footing load. Level l >= 1 gives 2^(l+1) subdivisions per axis, so the
/// relative mesh size is h = 2^-(l+1) of the box width.
Mesh footing_mesh(int dim, int level, double load_extent = 16.0);
int footing_vertex_count(int dim, int level);
double footing_relative_h(int level);

BenchConfig parse_bench_config(std::istream& in);
BenchConfig load_bench_config(const std::string& path);

/// Applies one key-value override using the same keys as the config file;
/// values may separate list entries with spaces or commas.
void apply_override(BenchConfig& cfg, const std::string& key, const std::string& values);

/// The six preconditioner names of the benchmark: B_D, B_L, B_U (exact) and
/// M_D, M_L, M_U (inexact with the given inner tolerance).
PreconditionerSpec spec_for_name(const std::string& name, double inner_tol);

/// Outer solver paired with each preconditioner: MINRES for B_D, left
/// GMRES for B_L, flexible right GMRES for the rest.
OuterSolver solver_for_name(const std::string& name);

struct BenchRow {
  std::string precond;
  double h = 0.0;  // relative mesh size 2^-(level+1)
  double tau = 0.0, K = 0.0, nu = 0.0;
  int iters = 0;
  bool converged = false;
  bool skipped = false;  // over budget, mirrored as "*" in outputs
  int dofs = 0, cells = 0;
  bool has_analysis = false;
  SpectralReport analysis{};
};

/// Runs the sweep: one backward-Euler step from rest per grid point, rows in
/// deterministic (preconditioner, level, tau, K, nu) order regardless of the
/// worker schedule. Worker count comes from BIOT_BENCH_WORKERS (default 1).
std::vector<BenchRow> run_benchmark(const BenchConfig& cfg);

/// Machine output, schema exactly: precond,h,tau,K,nu,iters,converged.
/// Skipped cells write "*" in the iters column. Identical configs produce
/// byte-identical files.
void write_results_csv(const std::vector<BenchRow>& rows, std::ostream& out);

/// Spectral measurements for the rows that carry them, schema:
/// precond,h,tau,K,nu,kappa,sigma,upsilon,infsup_gamma.
void write_analysis_csv(const std::vector<BenchRow>& rows, std::ostream& out);

std::vector<BenchRow> read_results_csv(std::istream& in);
std::vector<BenchRow> load_results_csv(const std::string& path);

/// Aligned markdown tables with the same numbers as the CSV: per-
/// preconditioner (tau x h) panels for refinement sweeps, preconditioner-by-
/// parameter tables for K or nu sweeps. cfg, when given, contributes the
/// material metadata block (Lame constants per nu).
std::string render_markdown_tables(const std::vector<BenchRow>& rows,
                                   const BenchConfig* cfg = nullptr);

}  // namespace biot
