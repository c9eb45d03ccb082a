#pragma once

#include <iosfwd>
#include <vector>

#include "biot/assembly.hpp"
#include "biot/krylov.hpp"
#include "biot/precond.hpp"

namespace biot {

enum class OuterSolver { Minres, Fgmres, GmresLeft };

/// Sign convention per solver: MINRES runs on the symmetric (unnegated)
/// form; both GMRES variants run on the sign-flipped form whose symmetric
/// part is positive semidefinite, the one the triangular preconditioners
/// are designed for.
bool solver_wants_negated(OuterSolver solver);

struct TimeLoopConfig {
  double tau = 0.01;  // must equal the tau the system was assembled with
  int n_steps = 1;
  Vector initial_u{};  // empty = undeformed
  Vector initial_p{};  // empty = unpressurized
  OuterSolver solver = OuterSolver::Fgmres;
  PreconditionerSpec precond{};
  SolveConfig solve{};
};

/// Time-independent loads: the surface traction lives in the system itself;
/// these are nodal body-force and fluid-source values (empty = zero).
struct Loads {
  Vector g_nodal{};
  Vector f_nodal{};
};

struct StepRecord {
  int step = 0;
  double time = 0.0;
  SolveReport report;
};

struct Trajectory {
  std::vector<Vector> u, p;  // state after each step
  std::vector<StepRecord> records;

  int first_step_iterations() const;
  int max_iterations() const;
};

/// Backward-Euler loop: one preconditioner and one operator built up front,
/// then n_steps solves with the right-hand side lagged through step_rhs.
/// Every step starts from a zero initial guess so the recorded iteration
/// counts measure preconditioner quality, not warm-start luck. A step that
/// misses the tolerance aborts with ConvergenceError naming the step.
Trajectory run_time_loop(const BlockSystem& sys, const TimeLoopConfig& cfg,
                         const Loads& loads = {});

/// Per-step summary CSV: step,time,iters,final_residual.
void write_trajectory_csv(const Trajectory& t, std::ostream& out);

/// Full-field dump: the dof map, then per step one `u ...` and one `p ...`
/// line of 17-significant-digit nodal values.
void dump_fields(const BlockSystem& sys, const Trajectory& t, std::ostream& out);

}  // namespace biot
