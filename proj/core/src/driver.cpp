#include "biot/driver.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>

namespace biot {

bool solver_wants_negated(OuterSolver solver) { return solver != OuterSolver::Minres; }

namespace {

void validate(const BlockSystem& sys, const TimeLoopConfig& cfg) {
  if (!(cfg.tau > 0.0)) throw ParamError("time step must be positive");
  if (cfg.n_steps < 1) throw ParamError("need at least one time step");
  if (cfg.tau != sys.tau) {
    throw ConfigError("time loop tau differs from the tau the system was assembled with");
  }
  if (cfg.solver == OuterSolver::Minres) {
    if (cfg.precond.shape != BlockShape::Diagonal) {
      throw ConfigError("MINRES needs the symmetric block-diagonal preconditioner");
    }
    if (cfg.precond.mode == BlockMode::Inexact &&
        (cfg.precond.inner_u.kind != InnerSolve::Kind::SgsSweeps ||
         cfg.precond.inner_p.kind != InnerSolve::Kind::SgsSweeps)) {
      throw ConfigError("MINRES needs a fixed preconditioner; use sweep-based inner blocks");
    }
  }
}

Vector initial_state(const Vector& given, int n, const char* who) {
  if (given.empty()) return Vector(static_cast<std::size_t>(n), 0.0);
  if (static_cast<int>(given.size()) != n) {
    throw ShapeError(std::string(who) + ": initial state has the wrong length");
  }
  return given;
}

}  // namespace

int Trajectory::first_step_iterations() const {
  return records.empty() ? 0 : records.front().report.iterations;
}

int Trajectory::max_iterations() const {
  int m = 0;
  for (const auto& r : records) m = std::max(m, r.report.iterations);
  return m;
}

Trajectory run_time_loop(const BlockSystem& sys, const TimeLoopConfig& cfg, const Loads& loads) {
  validate(sys, cfg);
  const bool negated = solver_wants_negated(cfg.solver);
  BlockOperator op = sys.make_operator(negated);
  Preconditioner pre(sys, cfg.precond);

  Trajectory traj;
  Vector u_prev = initial_state(cfg.initial_u, sys.n_u, "displacement");
  Vector p_prev = initial_state(cfg.initial_p, sys.n_p, "pressure");

  for (int step = 1; step <= cfg.n_steps; ++step) {
    Vector rhs = step_rhs(sys, u_prev, p_prev, loads.g_nodal, loads.f_nodal);
    if (negated) BlockOperator::negate_pressure_rows(rhs, sys.n_p);
    Vector x;
    SolveReport rep;
    switch (cfg.solver) {
      case OuterSolver::Minres: rep = pminres(op, &pre, rhs, x, cfg.solve); break;
      case OuterSolver::Fgmres: rep = fgmres(op, &pre, rhs, x, cfg.solve); break;
      case OuterSolver::GmresLeft: rep = gmres_left(op, &pre, rhs, x, cfg.solve); break;
    }
    if (!rep.converged) {
      throw ConvergenceError("time step " + std::to_string(step) + ": solver stopped at residual " +
                             std::to_string(rep.final_residual));
    }
    u_prev.assign(x.begin(), x.begin() + sys.n_u);
    p_prev.assign(x.begin() + sys.n_u, x.end());
    traj.u.push_back(u_prev);
    traj.p.push_back(p_prev);
    traj.records.push_back({step, static_cast<double>(step) * cfg.tau, std::move(rep)});
  }
  return traj;
}

void write_trajectory_csv(const Trajectory& t, std::ostream& out) {
  out << "step,time,iters,final_residual\n";
  char buf[64];
  for (const auto& r : t.records) {
    std::snprintf(buf, sizeof(buf), "%.17g", r.time);
    out << r.step << ',' << buf << ',' << r.report.iterations << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", r.report.final_residual);
    out << buf << '\n';
  }
}

void dump_fields(const BlockSystem& sys, const Trajectory& t, std::ostream& out) {
  dump_dof_map(sys, out);
  char buf[64];
  auto write_field = [&](const char* tag, const Vector& v) {
    out << tag;
    for (double x : v) {
      std::snprintf(buf, sizeof(buf), "%.17g", x);
      out << ' ' << buf;
    }
    out << '\n';
  };
  for (std::size_t s = 0; s < t.records.size(); ++s) {
    out << "step " << t.records[s].step << '\n';
    write_field("u", t.u[s]);
    write_field("p", t.p[s]);
  }
}

}  // namespace biot
