#include "biot/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <utility>

namespace biot {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::vector<std::string> tokenize(const std::string& s) {
  std::string t = s;
  std::replace(t.begin(), t.end(), ',', ' ');
  std::istringstream in(t);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

double parse_double(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse number '" + s + "'");
  }
}

int parse_int(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse integer '" + s + "'");
  }
}

bool parse_flag(const std::string& s, const std::string& key) {
  if (s == "on" || s == "true" || s == "1") return true;
  if (s == "off" || s == "false" || s == "0") return false;
  throw ConfigError("config key '" + key + "': expected on/off, got '" + s + "'");
}

void set_key(BenchConfig& cfg, const std::string& key, const std::vector<std::string>& vals) {
  auto one = [&]() -> const std::string& {
    if (vals.size() != 1) throw ConfigError("config key '" + key + "' takes exactly one value");
    return vals.front();
  };
  auto doubles = [&] {
    if (vals.empty()) throw ConfigError("config key '" + key + "' needs at least one value");
    std::vector<double> out;
    for (const auto& s : vals) out.push_back(parse_double(s, key));
    return out;
  };
  if (key == "dim") {
    cfg.dim = parse_int(one(), key);
  } else if (key == "levels") {
    if (vals.empty()) throw ConfigError("config key 'levels' needs at least one value");
    cfg.levels.clear();
    for (const auto& s : vals) cfg.levels.push_back(parse_int(s, key));
  } else if (key == "tau") {
    cfg.taus = doubles();
  } else if (key == "K") {
    cfg.Ks = doubles();
  } else if (key == "nu") {
    cfg.nus = doubles();
  } else if (key == "E") {
    cfg.E = parse_double(one(), key);
  } else if (key == "alpha") {
    cfg.alpha = parse_double(one(), key);
  } else if (key == "delta") {
    cfg.delta = parse_double(one(), key);
  } else if (key == "precond") {
    cfg.preconds = vals;  // an empty list is the documented empty-table case
  } else if (key == "outer_tol") {
    cfg.outer_tol = parse_double(one(), key);
  } else if (key == "inner_tol") {
    cfg.inner_tol = parse_double(one(), key);
  } else if (key == "outer_maxit") {
    cfg.outer_maxit = parse_int(one(), key);
  } else if (key == "formula") {
    const std::string& v = one();
    if (v == "paper") cfg.formula = FormulaMode::Paper;
    else if (v == "standard") cfg.formula = FormulaMode::Standard;
    else throw ConfigError("config key 'formula': expected paper or standard, got '" + v + "'");
  } else if (key == "drained") {
    const std::string& v = one();
    if (v == "all_but_base") cfg.drained = DrainedSet::AllButBase;
    else if (v == "top") cfg.drained = DrainedSet::Top;
    else if (v == "top_free") cfg.drained = DrainedSet::TopFree;
    else throw ConfigError("config key 'drained': expected all_but_base, top or top_free");
  } else if (key == "analysis") {
    cfg.analysis = parse_flag(one(), key);
  } else if (key == "out") {
    cfg.out = one();
  } else if (key == "dof_budget") {
    cfg.dof_budget = parse_int(one(), key);
  } else if (key == "direct_budget") {
    cfg.direct_budget = parse_int(one(), key);
  } else if (key == "traction") {
    cfg.traction = parse_double(one(), key);
  } else if (key == "load_extent") {
    cfg.load_extent = parse_double(one(), key);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

int worker_count() {
  const char* env = std::getenv("BIOT_BENCH_WORKERS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (!end || *end != '\0' || v < 1 || v > 1024) {
    throw ConfigError("BIOT_BENCH_WORKERS must be a small positive integer");
  }
  return static_cast<int>(v);
}

}  // namespace

void BenchConfig::validate() const {
  if (dim != 2 && dim != 3) throw ConfigError("dim must be 2 or 3");
  if (levels.empty() || taus.empty() || Ks.empty() || nus.empty()) {
    throw ConfigError("sweep lists must be nonempty");
  }
  for (int l : levels) {
    if (l < 1) throw ConfigError("refinement levels start at 1");
  }
  for (double t : taus) {
    if (!(t > 0.0)) throw ConfigError("tau values must be positive");
  }
  for (double k : Ks) {
    if (!(k > 0.0)) throw ConfigError("K values must be positive");
  }
  for (double n : nus) {
    if (!(n >= 0.0 && n < 0.5)) throw ConfigError("nu values must lie in [0, 0.5)");
  }
  if (!(E > 0.0)) throw ConfigError("E must be positive");
  if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (!(delta > 0.0)) throw ConfigError("delta must be positive");
  if (!(outer_tol > 0.0 && outer_tol < 1.0)) throw ConfigError("outer tolerance must be in (0,1)");
  if (!(inner_tol > 0.0 && inner_tol < 1.0)) throw ConfigError("inner tolerance must be in (0,1)");
  if (outer_maxit < 1) throw ConfigError("outer_maxit must be positive");
  if (dof_budget < 1 || direct_budget < 1) throw ConfigError("budgets must be positive");
  if (!(load_extent > 0.0)) throw ConfigError("load_extent must be positive");
  for (const auto& p : preconds) (void)spec_for_name(p, 0.5);  // name check
}

int footing_subdivisions(int level) {
  if (level < 1) throw ParamError("refinement level starts at 1");
  return 1 << (level + 1);
}

Mesh footing_mesh(int dim, int level, double load_extent) {
  const int n = footing_subdivisions(level);
  std::vector<double> lo, hi;
  if (dim == 2) {
    lo = {-32.0, 0.0};
    hi = {32.0, 64.0};
  } else {
    lo = {-32.0, -32.0, 0.0};
    hi = {32.0, 32.0, 64.0};
  }
  return classify_footing_boundary(build_box_mesh(lo, hi, std::vector<int>(static_cast<std::size_t>(dim), n), dim),
                                   load_extent);
}

int footing_vertex_count(int dim, int level) {
  const int n = footing_subdivisions(level) + 1;
  int v = 1;
  for (int d = 0; d < dim; ++d) v *= n;
  return v;
}

double footing_relative_h(int level) {
  if (level < 1) throw ParamError("refinement level starts at 1");
  return std::ldexp(1.0, -(level + 1));
}

BenchConfig parse_bench_config(std::istream& in) {
  BenchConfig cfg;
  std::map<std::string, bool> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::vector<std::string> words = tokenize(line);
    if (words.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = values'");
    }
    std::vector<std::string> keypart = tokenize(line.substr(0, eq));
    if (keypart.size() != 1) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected a single key before '='");
    }
    if (seen[keypart.front()]) {
      throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + keypart.front() + "'");
    }
    seen[keypart.front()] = true;
    set_key(cfg, keypart.front(), tokenize(line.substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

BenchConfig load_bench_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  return parse_bench_config(in);
}

void apply_override(BenchConfig& cfg, const std::string& key, const std::string& values) {
  set_key(cfg, key, tokenize(values));
}

PreconditionerSpec spec_for_name(const std::string& name, double inner_tol) {
  PreconditionerSpec s;
  if (name == "B_D" || name == "M_D") s.shape = BlockShape::Diagonal;
  else if (name == "B_L" || name == "M_L") s.shape = BlockShape::Lower;
  else if (name == "B_U" || name == "M_U") s.shape = BlockShape::Upper;
  else throw ConfigError("unknown preconditioner '" + name + "' (expected B_D, B_L, B_U, M_D, M_L or M_U)");
  s.mode = (name[0] == 'B') ? BlockMode::Exact : BlockMode::Inexact;
  s.inner_u.tol = inner_tol;
  s.inner_p.tol = inner_tol;
  return s;
}

OuterSolver solver_for_name(const std::string& name) {
  (void)spec_for_name(name, 0.5);  // validates the name
  // Benchmark counts measure the true relative residual under one outer
  // iteration for every block shape; the symmetric and left-preconditioned
  // solvers stay available through the time-stepping driver.
  return OuterSolver::Fgmres;
}

namespace {

struct Task {
  std::size_t row = 0;
  double tau = 0.0, K = 0.0;
  const std::string* precond = nullptr;
};

struct Group {
  int level = 0;
  double nu = 0.0;
  std::vector<Task> tasks;
};

void process_group(const BenchConfig& cfg, const Group& g, std::vector<BenchRow>& rows) {
  const int n = footing_subdivisions(g.level);
  const int verts = footing_vertex_count(cfg.dim, g.level);
  const int dofs = (cfg.dim + 1) * verts;
  int cells = cfg.dim == 2 ? 2 * n * n : 6 * n * n * n;
  for (const Task& t : g.tasks) {
    rows[t.row].dofs = dofs;
    rows[t.row].cells = cells;
  }
  if (dofs > cfg.dof_budget) {
    for (const Task& t : g.tasks) rows[t.row].skipped = true;
    return;
  }

  Mesh mesh = footing_mesh(cfg.dim, g.level, cfg.load_extent);
  PhysicalParams params;
  params.E = cfg.E;
  params.nu = g.nu;
  params.K = cfg.Ks.front();
  params.alpha = cfg.alpha;
  BcConfig bc;
  bc.drained = cfg.drained;
  bc.formula = cfg.formula;
  bc.traction = cfg.traction;
  const BlockSystem base = assemble_biot_system(mesh, params, cfg.taus.front(), cfg.delta, bc);

  std::shared_ptr<const DirectSolver> factor_u;
  double infsup_cached = -1.0;

  for (const Task& t : g.tasks) {
    BenchRow& row = rows[t.row];
    PreconditionerSpec spec = spec_for_name(*t.precond, cfg.inner_tol);
    if (spec.mode == BlockMode::Exact && base.n_u > cfg.direct_budget) {
      row.skipped = true;
      continue;
    }
    const BlockSystem sys = t.K == base.K ? base.with_tau(t.tau) : base.with_tau(t.tau).with_K(t.K);
    if (spec.mode == BlockMode::Exact && !factor_u) {
      factor_u = std::make_shared<const DirectSolver>(base.A_u, DirectSolver::Method::Cholesky);
    }
    const OuterSolver solver = solver_for_name(*t.precond);
    const bool neg = solver_wants_negated(solver);
    const Preconditioner pre(sys, spec, spec.mode == BlockMode::Exact ? factor_u : nullptr);
    const BlockOperator op = sys.make_operator(neg);
    Vector rhs = step_rhs(sys, Vector(static_cast<std::size_t>(sys.n_u), 0.0),
                          Vector(static_cast<std::size_t>(sys.n_p), 0.0));
    if (neg) BlockOperator::negate_pressure_rows(rhs, sys.n_p);
    Vector x;
    SolveConfig scfg;
    scfg.tol = cfg.outer_tol;
    scfg.maxit = cfg.outer_maxit;
    SolveReport rep;
    try {
      switch (solver) {
        case OuterSolver::Minres: rep = pminres(op, &pre, rhs, x, scfg); break;
        case OuterSolver::Fgmres: rep = fgmres(op, &pre, rhs, x, scfg); break;
        case OuterSolver::GmresLeft: rep = gmres_left(op, &pre, rhs, x, scfg); break;
      }
    } catch (const InnerSolveError&) {
      // an inner block running out of iterations is a benchmark result
      // (non-convergence), not a harness failure
      row.iters = 0;
      row.converged = false;
      continue;
    }
    row.iters = rep.iterations;
    row.converged = rep.converged;

    if (cfg.analysis && spec.mode == BlockMode::Exact && sys.n_total() <= kDenseBudget) {
      row.has_analysis = true;
      row.analysis.params = {row.h, t.tau, t.K, g.nu, cfg.delta};
      if (spec.shape == BlockShape::Diagonal) {
        row.analysis.kappa = condition_number_diag(sys);
      } else {
        const FovConstants f = fov_constants(sys, spec.shape);
        row.analysis.sigma_est = f.sigma;
        row.analysis.upsilon_est = f.upsilon;
      }
      if (infsup_cached < 0.0) {
        const InfSupReport ir = infsup_constant(mesh);
        infsup_cached = ir.applicable ? ir.gamma : 0.0;
      }
      row.analysis.infsup_gamma = infsup_cached;
    }
  }
}

}  // namespace

std::vector<BenchRow> run_benchmark(const BenchConfig& cfg) {
  cfg.validate();
  std::vector<BenchRow> rows;
  for (const auto& pc : cfg.preconds) {
    for (int l : cfg.levels) {
      for (double tau : cfg.taus) {
        for (double K : cfg.Ks) {
          for (double nu : cfg.nus) {
            BenchRow r;
            r.precond = pc;
            r.h = footing_relative_h(l);
            r.tau = tau;
            r.K = K;
            r.nu = nu;
            rows.push_back(std::move(r));
          }
        }
      }
    }
  }
  if (rows.empty()) return rows;

  std::vector<Group> groups;
  groups.reserve(cfg.levels.size() * cfg.nus.size());
  for (int l : cfg.levels) {
    for (double nu : cfg.nus) groups.push_back({l, nu, {}});
  }
  std::size_t idx = 0;
  for (std::size_t pi = 0; pi < cfg.preconds.size(); ++pi) {
    for (std::size_t li = 0; li < cfg.levels.size(); ++li) {
      for (std::size_t ti = 0; ti < cfg.taus.size(); ++ti) {
        for (std::size_t ki = 0; ki < cfg.Ks.size(); ++ki) {
          for (std::size_t ni = 0; ni < cfg.nus.size(); ++ni) {
            groups[li * cfg.nus.size() + ni].tasks.push_back(
                {idx, cfg.taus[ti], cfg.Ks[ki], &cfg.preconds[pi]});
            ++idx;
          }
        }
      }
    }
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mtx;
  auto work = [&] {
    for (;;) {
      const std::size_t gi = next.fetch_add(1);
      if (gi >= groups.size()) return;
      try {
        process_group(cfg, groups[gi], rows);
      } catch (...) {
        const std::lock_guard<std::mutex> lk(err_mtx);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const int workers = std::min<int>(worker_count(), static_cast<int>(groups.size()));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return rows;
}

void write_results_csv(const std::vector<BenchRow>& rows, std::ostream& out) {
  out << "precond,h,tau,K,nu,iters,converged\n";
  for (const auto& r : rows) {
    out << r.precond << ',' << fmt(r.h) << ',' << fmt(r.tau) << ',' << fmt(r.K) << ',' << fmt(r.nu)
        << ',';
    if (r.skipped) out << '*';
    else out << r.iters;
    out << ',' << (r.converged ? 1 : 0) << '\n';
  }
}

void write_analysis_csv(const std::vector<BenchRow>& rows, std::ostream& out) {
  out << "precond,h,tau,K,nu,kappa,sigma,upsilon,infsup_gamma\n";
  for (const auto& r : rows) {
    if (!r.has_analysis) continue;
    out << r.precond << ',' << fmt(r.h) << ',' << fmt(r.tau) << ',' << fmt(r.K) << ',' << fmt(r.nu)
        << ',' << fmt(r.analysis.kappa) << ',' << fmt(r.analysis.sigma_est) << ','
        << fmt(r.analysis.upsilon_est) << ',' << fmt(r.analysis.infsup_gamma) << '\n';
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::vector<BenchRow> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("results file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "precond,h,tau,K,nu,iters,converged") {
    throw IoError("results file has an unexpected header: '" + line + "'");
  }
  std::vector<BenchRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 7) {
      throw IoError("results line " + std::to_string(lineno) + ": expected 7 fields, got " +
                    std::to_string(f.size()));
    }
    BenchRow r;
    r.precond = f[0];
    try {
      r.h = parse_double(f[1], "h");
      r.tau = parse_double(f[2], "tau");
      r.K = parse_double(f[3], "K");
      r.nu = parse_double(f[4], "nu");
      if (f[5] == "*") {
        r.skipped = true;
      } else {
        r.iters = parse_int(f[5], "iters");
      }
    } catch (const ConfigError& e) {
      throw IoError("results line " + std::to_string(lineno) + ": " + e.what());
    }
    if (f[6] != "0" && f[6] != "1") {
      throw IoError("results line " + std::to_string(lineno) + ": converged must be 0 or 1");
    }
    r.converged = f[6] == "1";
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<BenchRow> load_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read results file '" + path + "'");
  return read_results_csv(in);
}

namespace {

std::string h_label(double h) {
  if (h > 0.0) {
    const double inv = 1.0 / h;
    if (inv < 1e9 && std::abs(inv - std::round(inv)) < 1e-9) {
      return "1/" + std::to_string(static_cast<long>(std::llround(inv)));
    }
  }
  return fmt(h);
}

std::string cell_text(const BenchRow& r) {
  if (r.skipped) return "*";
  if (!r.converged) return "nc";
  return std::to_string(r.iters);
}

template <class F>
std::vector<double> distinct_values(const std::vector<BenchRow>& rows, F get) {
  std::vector<double> out;
  for (const auto& r : rows) {
    const double v = get(r);
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  return out;
}

std::string row_key(const std::string& pc, double h, double tau, double K, double nu) {
  return pc + '|' + fmt(h) + '|' + fmt(tau) + '|' + fmt(K) + '|' + fmt(nu);
}

/// Pads a grid of cells into an aligned markdown table.
std::string aligned_table(const std::vector<std::vector<std::string>>& grid) {
  if (grid.empty()) return {};
  std::vector<std::size_t> width(grid.front().size(), 1);
  for (const auto& row : grid) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (std::size_t ri = 0; ri < grid.size(); ++ri) {
    out << '|';
    for (std::size_t c = 0; c < grid[ri].size(); ++c) {
      std::string cell = grid[ri][c];
      cell.resize(width[c], ' ');
      out << ' ' << cell << " |";
    }
    out << '\n';
    if (ri == 0) {
      out << '|';
      for (std::size_t c = 0; c < grid.front().size(); ++c) {
        out << ' ' << std::string(width[c], '-') << " |";
      }
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace

std::string render_markdown_tables(const std::vector<BenchRow>& rows, const BenchConfig* cfg) {
  std::ostringstream md;
  md << "# Iteration counts\n\n";
  if (cfg) {
    md << "- dim " << cfg->dim << ", E " << fmt(cfg->E) << ", alpha " << fmt(cfg->alpha)
       << ", delta " << fmt(cfg->delta) << ", outer tol " << fmt(cfg->outer_tol)
       << ", inner tol " << fmt(cfg->inner_tol) << '\n';
    md << "- formula " << (cfg->formula == FormulaMode::Paper ? "paper" : "standard")
       << ", drained "
       << (cfg->drained == DrainedSet::AllButBase ? "all_but_base"
                                                  : cfg->drained == DrainedSet::Top ? "top" : "top_free")
       << ", traction " << fmt(cfg->traction) << ", load extent " << fmt(cfg->load_extent) << '\n';
    for (double nu : cfg->nus) {
      PhysicalParams p;
      p.E = cfg->E;
      p.nu = nu;
      const LameParams lame = lame_from_engineering(p, cfg->dim, cfg->formula);
      md << "- nu " << fmt(nu) << ": lambda " << fmt(lame.lambda) << ", mu " << fmt(lame.mu)
         << ", zeta^2 " << fmt(lame.zeta_sq) << " (drained bulk modulus)\n";
    }
  }
  // structured-mesh sizes, when the rows carry them
  {
    std::vector<std::pair<double, std::pair<int, int>>> sizes;
    for (const auto& r : rows) {
      if (r.dofs <= 0) continue;
      bool found = false;
      for (auto& s : sizes) found = found || s.first == r.h;
      if (!found) sizes.push_back({r.h, {r.cells, r.dofs}});
    }
    for (const auto& s : sizes) {
      md << "- h " << h_label(s.first) << ": " << s.second.first << " cells, " << s.second.second
         << " dofs\n";
    }
  }
  md << '\n';
  if (rows.empty()) {
    md << "(no rows)\n";
    return md.str();
  }

  std::vector<std::string> preconds;
  for (const auto& r : rows) {
    if (std::find(preconds.begin(), preconds.end(), r.precond) == preconds.end()) {
      preconds.push_back(r.precond);
    }
  }
  const std::vector<double> hs = distinct_values(rows, [](const BenchRow& r) { return r.h; });
  const std::vector<double> taus = distinct_values(rows, [](const BenchRow& r) { return r.tau; });
  const std::vector<double> Ks = distinct_values(rows, [](const BenchRow& r) { return r.K; });
  const std::vector<double> nus = distinct_values(rows, [](const BenchRow& r) { return r.nu; });

  std::map<std::string, const BenchRow*> by_key;
  for (const auto& r : rows) by_key[row_key(r.precond, r.h, r.tau, r.K, r.nu)] = &r;
  auto lookup = [&](const std::string& pc, double h, double tau, double K, double nu) -> std::string {
    const auto it = by_key.find(row_key(pc, h, tau, K, nu));
    return it == by_key.end() ? std::string() : cell_text(*it->second);
  };

  const bool k_sweep = Ks.size() > 1 && nus.size() == 1 && hs.size() == 1 && taus.size() == 1;
  const bool nu_sweep = nus.size() > 1 && Ks.size() == 1 && hs.size() == 1 && taus.size() == 1;
  if (k_sweep || nu_sweep) {
    const std::vector<double>& axis = k_sweep ? Ks : nus;
    md << "## " << (k_sweep ? "K sweep" : "nu sweep") << " (h " << h_label(hs.front()) << ", tau "
       << fmt(taus.front()) << ", " << (k_sweep ? "nu " + fmt(nus.front()) : "K " + fmt(Ks.front()))
       << ")\n\n";
    std::vector<std::vector<std::string>> grid;
    std::vector<std::string> head{k_sweep ? "precond \\ K" : "precond \\ nu"};
    for (double v : axis) head.push_back(fmt(v));
    grid.push_back(head);
    for (const auto& pc : preconds) {
      std::vector<std::string> line{pc};
      for (double v : axis) {
        line.push_back(k_sweep ? lookup(pc, hs.front(), taus.front(), v, nus.front())
                               : lookup(pc, hs.front(), taus.front(), Ks.front(), v));
      }
      grid.push_back(std::move(line));
    }
    md << aligned_table(grid);
    return md.str();
  }

  if (Ks.size() == 1 && nus.size() == 1) {
    for (const auto& pc : preconds) {
      md << "## " << pc << " (K " << fmt(Ks.front()) << ", nu " << fmt(nus.front()) << ")\n\n";
      std::vector<std::vector<std::string>> grid;
      std::vector<std::string> head{"tau \\ h"};
      for (double h : hs) head.push_back(h_label(h));
      grid.push_back(head);
      for (double tau : taus) {
        std::vector<std::string> line{fmt(tau)};
        for (double h : hs) line.push_back(lookup(pc, h, tau, Ks.front(), nus.front()));
        grid.push_back(std::move(line));
      }
      md << aligned_table(grid) << '\n';
    }
    return md.str();
  }

  // general fallback: one flat table
  md << "## All rows\n\n";
  std::vector<std::vector<std::string>> grid;
  grid.push_back({"precond", "h", "tau", "K", "nu", "iters"});
  for (const auto& r : rows) {
    grid.push_back({r.precond, h_label(r.h), fmt(r.tau), fmt(r.K), fmt(r.nu), cell_text(r)});
  }
  md << aligned_table(grid);
  return md.str();
}

}  // namespace biot
