#pragma once

#include <iosfwd>
#include <vector>

#include "biot/sparse.hpp"
#include "biot/vector_ops.hpp"

namespace biot {

struct SolveConfig {
  double tol = 1e-6;  // relative residual target
  int maxit = 500;
  int restart = 0;  // GMRES restart length; 0 keeps the full Krylov space
};

struct SolveReport {
  int iterations = 0;
  bool converged = false;
  /// Max of the solver-natural and unpreconditioned Euclidean relative
  /// residuals at exit, so converged <=> final_residual <= tol.
  double final_residual = 0.0;
  /// residuals[0] = 1; one entry per iteration in the solver's natural norm
  /// (preconditioner norm for pminres, metric norm of the preconditioned
  /// residual for gmres_left, Euclidean otherwise).
  std::vector<double> residuals;
};

/// Preconditioned MINRES after Paige & Saunders (1975). A must be symmetric,
/// M (if given) symmetric positive definite and fixed across iterations; the
/// recorded residual history is ||r||_M / ||r0||_M and is nonincreasing.
SolveReport pminres(const Operator& A, const Operator* M, const Vector& b, Vector& x,
                    const SolveConfig& cfg);

/// Preconditioned conjugate gradients; A and M must be SPD. Indefiniteness
/// shows up as a nonpositive curvature or inner product and raises
/// DefinitenessError.
SolveReport pcg(const Operator& A, const Operator* M, const Vector& b, Vector& x,
                const SolveConfig& cfg);

/// Flexible GMRES with right preconditioning after Saad (1993). M may change
/// from one application to the next (inner Krylov solves). Modified
/// Gram-Schmidt with one reorthogonalization pass.
SolveReport fgmres(const Operator& A, const Operator* M, const Vector& b, Vector& x,
                   const SolveConfig& cfg);

/// GMRES on the left-preconditioned operator M A. With `metric` (an SPD
/// operator G), the Krylov process runs in the G-inner product and the
/// recorded history is ||M(b - A x_m)||_G normalized; this is the quantity
/// the field-of-values convergence bound controls. Without a metric the
/// inner product is Euclidean.
SolveReport gmres_left(const Operator& A, const Operator* M, const Vector& b, Vector& x,
                       const SolveConfig& cfg, const Operator* metric = nullptr);

/// Stationary iteration x <- x + M(b - A x); converges iff the spectral
/// radius of (I - M A) is below one.
SolveReport richardson(const Operator& A, const Operator& M, const Vector& b, Vector& x,
                       const SolveConfig& cfg);

/// Two-column CSV (iter,residual) of a residual history.
void write_residual_csv(const SolveReport& report, std::ostream& out);

}  // namespace biot
