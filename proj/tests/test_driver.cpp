#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "biot/assembly.hpp"
#include "biot/bench.hpp"
#include "biot/driver.hpp"
#include "biot/errors.hpp"
#include "biot/vector_ops.hpp"
#include "doctest.h"

using namespace biot;

namespace {

BlockSystem footing_system(double tau = 0.01, double K = 1.0e-6) {
  PhysicalParams p;
  p.K = K;
  return assemble_biot_system(footing_mesh(2, 1), p, tau, 0.25);
}

double rel_norm_gap(const Vector& got, const Vector& want) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    num += (got[i] - want[i]) * (got[i] - want[i]);
    den += want[i] * want[i];
  }
  return std::sqrt(num / den);
}

TimeLoopConfig base_config(double tau = 0.01) {
  TimeLoopConfig cfg;
  cfg.tau = tau;
  cfg.solver = OuterSolver::Fgmres;
  cfg.precond.shape = BlockShape::Upper;
  cfg.solve.tol = 1e-10;
  cfg.solve.maxit = 400;
  return cfg;
}

}  // namespace

TEST_CASE("solver sign conventions") {
  CHECK_FALSE(solver_wants_negated(OuterSolver::Minres));
  CHECK(solver_wants_negated(OuterSolver::Fgmres));
  CHECK(solver_wants_negated(OuterSolver::GmresLeft));
}

TEST_CASE("trajectory bookkeeping over several steps") {
  const BlockSystem sys = footing_system();
  TimeLoopConfig cfg = base_config();
  cfg.n_steps = 4;
  const Trajectory t = run_time_loop(sys, cfg);
  REQUIRE(t.u.size() == 4);
  REQUIRE(t.p.size() == 4);
  REQUIRE(t.records.size() == 4);
  for (int s = 0; s < 4; ++s) {
    CHECK(t.records[static_cast<std::size_t>(s)].step == s + 1);
    CHECK(t.records[static_cast<std::size_t>(s)].time ==
          doctest::Approx(0.01 * (s + 1)).epsilon(1e-14));
    CHECK(t.records[static_cast<std::size_t>(s)].report.converged);
    CHECK(static_cast<int>(t.u[static_cast<std::size_t>(s)].size()) == sys.n_u);
    CHECK(static_cast<int>(t.p[static_cast<std::size_t>(s)].size()) == sys.n_p);
  }
  CHECK(t.first_step_iterations() == t.records.front().report.iterations);
  int worst = 0;
  for (const StepRecord& r : t.records) worst = std::max(worst, r.report.iterations);
  CHECK(t.max_iterations() == worst);
}

TEST_CASE("all three outer solvers agree on the first step") {
  const BlockSystem sys = footing_system();
  TimeLoopConfig cfg = base_config();
  const Trajectory upper = run_time_loop(sys, cfg);

  cfg.solver = OuterSolver::Minres;
  cfg.precond.shape = BlockShape::Diagonal;
  const Trajectory diag = run_time_loop(sys, cfg);

  cfg.solver = OuterSolver::GmresLeft;
  cfg.precond.shape = BlockShape::Lower;
  const Trajectory lower = run_time_loop(sys, cfg);

  CHECK(nrm2(upper.p[0]) > 0.0);
  CHECK(rel_norm_gap(diag.p[0], upper.p[0]) <= 1e-6);
  CHECK(rel_norm_gap(lower.p[0], upper.p[0]) <= 1e-6);
  CHECK(rel_norm_gap(diag.u[0], upper.u[0]) <= 1e-6);
}

TEST_CASE("consolidation: excess pressure decays monotonically in time") {
  // conductive enough that drainage is visible within sixty unit steps
  const BlockSystem sys = footing_system(1.0, 1.0e-2);
  TimeLoopConfig cfg = base_config(1.0);
  cfg.n_steps = 60;
  const Trajectory t = run_time_loop(sys, cfg);

  // peak pressure right after loading, then drainage toward equilibrium
  auto peak = [&](const Vector& p) {
    double m = 0.0;
    for (double v : p) m = std::max(m, std::abs(v));
    return m;
  };
  const double first = peak(t.p.front());
  const double last = peak(t.p.back());
  CHECK(first > 0.0);
  CHECK(last < 0.25 * first);
  for (std::size_t s = 20; s + 1 < t.p.size(); ++s)
    CHECK(peak(t.p[s + 1]) <= peak(t.p[s]) * (1.0 + 1e-9));
}

TEST_CASE("nonzero initial state and loads change the trajectory") {
  const BlockSystem sys = footing_system();
  TimeLoopConfig cfg = base_config();
  const Trajectory rest = run_time_loop(sys, cfg);

  TimeLoopConfig warm = cfg;
  warm.initial_p.assign(static_cast<std::size_t>(sys.n_p), 0.5);
  for (int dof : sys.bc.p_dofs) warm.initial_p[static_cast<std::size_t>(dof)] = 0.0;
  const Trajectory shifted = run_time_loop(sys, warm);

  Loads loads;
  loads.f_nodal.assign(static_cast<std::size_t>(sys.n_p), 1.0);
  const Trajectory forced = run_time_loop(sys, cfg, loads);

  double gap_warm = 0.0, gap_forced = 0.0;
  for (int i = 0; i < sys.n_p; ++i) {
    gap_warm = std::max(gap_warm, std::abs(shifted.p[0][static_cast<std::size_t>(i)] -
                                           rest.p[0][static_cast<std::size_t>(i)]));
    gap_forced = std::max(gap_forced, std::abs(forced.p[0][static_cast<std::size_t>(i)] -
                                               rest.p[0][static_cast<std::size_t>(i)]));
  }
  CHECK(gap_warm > 1e-8);
  CHECK(gap_forced > 1e-8);
}

TEST_CASE("configuration validation") {
  const BlockSystem sys = footing_system();
  TimeLoopConfig cfg = base_config();

  TimeLoopConfig bad = cfg;
  bad.tau = 0.02;
  CHECK_THROWS_AS(run_time_loop(sys, bad), ConfigError);

  bad = cfg;
  bad.n_steps = 0;
  CHECK_THROWS_AS(run_time_loop(sys, bad), ParamError);

  bad = cfg;
  bad.solver = OuterSolver::Minres;
  bad.precond.shape = BlockShape::Upper;
  CHECK_THROWS_AS(run_time_loop(sys, bad), ConfigError);

  bad = cfg;
  bad.solver = OuterSolver::Minres;
  bad.precond.shape = BlockShape::Diagonal;
  bad.precond.mode = BlockMode::Inexact;
  bad.precond.inner_u.kind = InnerSolve::Kind::Cg;
  CHECK_THROWS_AS(run_time_loop(sys, bad), ConfigError);

  // the admissible inexact pairing runs
  bad.precond.inner_u.kind = InnerSolve::Kind::SgsSweeps;
  bad.precond.inner_p.kind = InnerSolve::Kind::SgsSweeps;
  bad.solve.tol = 1e-8;
  bad.solve.maxit = 500;
  CHECK(run_time_loop(sys, bad).records.front().report.converged);
}

TEST_CASE("a starved iteration budget names the failing step") {
  const BlockSystem sys = footing_system();
  TimeLoopConfig cfg = base_config();
  cfg.solve.maxit = 1;
  cfg.solve.tol = 1e-14;
  try {
    run_time_loop(sys, cfg);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(std::string(e.what()).find("time step 1") != std::string::npos);
  }
}

TEST_CASE("trajectory and field exports") {
  const BlockSystem sys = footing_system();
  TimeLoopConfig cfg = base_config();
  cfg.n_steps = 2;
  const Trajectory t = run_time_loop(sys, cfg);

  std::ostringstream csv;
  write_trajectory_csv(t, csv);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "step,time,iters,final_residual");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 2);

  std::ostringstream fields;
  dump_fields(sys, t, fields);
  const std::string text = fields.str();
  CHECK(text.find("u ") != std::string::npos);
  CHECK(text.find("p ") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') >= sys.n_total() + 4);
}
