#pragma once

#include <memory>

#include "biot/assembly.hpp"
#include "biot/krylov.hpp"
#include "biot/sparse.hpp"

namespace biot {

/// Sparse direct factorization behind a stable interface. Cholesky requires
/// an SPD matrix and raises DefinitenessError otherwise; Ldlt covers
/// symmetric quasi-definite systems; Lu is the general fallback.
class DirectSolver {
 public:
  enum class Method { Cholesky, Ldlt, Lu };

  DirectSolver(const CsrMatrix& A, Method method);
  ~DirectSolver();
  DirectSolver(DirectSolver&&) noexcept;
  DirectSolver& operator=(DirectSolver&&) noexcept;
  DirectSolver(const DirectSolver&) = delete;
  DirectSolver& operator=(const DirectSolver&) = delete;

  int rows() const;
  void solve(const Vector& b, Vector& x) const;
  Vector solve(const Vector& b) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Exact solver for one SPD diagonal block (sparse Cholesky).
DirectSolver exact_block_solver(const CsrMatrix& A);

/// Fixed number of symmetric Gauss-Seidel sweeps on an SPD matrix, started
/// from zero. As a map r -> z this is linear, symmetric and positive
/// definite, so it is admissible under MINRES; one sweep is the usual SGS
/// preconditioner for inner CG.
class SgsSweeps final : public Operator {
 public:
  SgsSweeps(const CsrMatrix& A, int sweeps);
  int rows() const override { return A_->rows(); }
  void apply(const Vector& r, Vector& z) const override;

 private:
  const CsrMatrix* A_;
  Vector diag_;
  int sweeps_;
};

/// z = D^{-1} r.
class JacobiPrecond final : public Operator {
 public:
  explicit JacobiPrecond(const CsrMatrix& A);
  int rows() const override { return static_cast<int>(diag_.size()); }
  void apply(const Vector& r, Vector& z) const override;

 private:
  Vector diag_;
};

enum class BlockShape { Diagonal, Lower, Upper };
enum class BlockMode { Exact, Inexact };

/// How an inexact diagonal block is resolved.
struct InnerSolve {
  enum class Kind { Cg, Gmres, SgsSweeps };
  enum class Smoother { Sgs, Jacobi };
  Kind kind = Kind::Cg;
  Smoother smoother = Smoother::Sgs;  // preconditioner inside the inner Krylov solve
  double tol = 1e-2;
  int maxit = 1000;
  int sweeps = 3;  // SgsSweeps only
};

struct PreconditionerSpec {
  BlockShape shape = BlockShape::Diagonal;
  BlockMode mode = BlockMode::Exact;
  InnerSolve inner_u{};
  InnerSolve inner_p{};
  /// Drops the stabilization term from the pressure block, recovering the
  /// fixed-stress split when paired with the Upper shape on an
  /// unstabilized system.
  bool fixed_stress = false;
};

/// Pressure block shared by all six preconditioners:
/// S = tau A_p + eta h^2 L_p + (alpha^2/zeta^2) M_p, plus a unit diagonal on
/// drained dofs (whose rows/columns the assembled blocks keep empty).
/// fixed_stress omits the eta term.
CsrMatrix build_pressure_schur(const BlockSystem& sys, bool fixed_stress);

/// Block preconditioner in one of three shapes:
///   Diagonal: z_u = solve_u(r_u);            z_p = solve_p(r_p)
///   Lower:    z_u = solve_u(r_u);            z_p = solve_p(r_p + alpha B z_u)
///   Upper:    z_p = solve_p(r_p);            z_u = solve_u(r_u - alpha B^T z_p)
/// The triangular shapes pair with the sign-flipped block operator. The
/// referenced BlockSystem must outlive the preconditioner.
class Preconditioner final : public Operator {
 public:
  Preconditioner(const BlockSystem& sys, const PreconditionerSpec& spec,
                 std::shared_ptr<const DirectSolver> shared_u_factor = nullptr);

  int rows() const override { return sys_->n_total(); }
  void apply(const Vector& r, Vector& z) const override;

  const PreconditionerSpec& spec() const { return spec_; }
  const CsrMatrix& pressure_block() const { return S_; }
  const BlockSystem& system() const { return *sys_; }

 private:
  void solve_u(const Vector& r, Vector& z) const;
  void solve_p(const Vector& r, Vector& z) const;

  const BlockSystem* sys_;
  PreconditionerSpec spec_;
  CsrMatrix S_;
  std::shared_ptr<const DirectSolver> exact_u_;
  std::unique_ptr<DirectSolver> exact_p_;
  std::unique_ptr<SgsSweeps> sweeps_u_, sweeps_p_;
  std::unique_ptr<Operator> smoother_u_, smoother_p_;
};

Preconditioner build_preconditioner(const BlockSystem& sys, const PreconditionerSpec& spec,
                                    std::shared_ptr<const DirectSolver> shared_u_factor = nullptr);

/// Gram matrix of the stability norm as an operator: blockdiag(A_u, S),
/// the inverse of the Diagonal-Exact preconditioner. Used as the inner
/// product for left-preconditioned GMRES theory checks.
class BlockDiagNorm final : public Operator {
 public:
  explicit BlockDiagNorm(const BlockSystem& sys);
  int rows() const override { return sys_->n_total(); }
  void apply(const Vector& x, Vector& y) const override;
  const CsrMatrix& pressure_block() const { return S_; }

 private:
  const BlockSystem* sys_;
  CsrMatrix S_;
};

/// Sparse direct solution of the full (unnegated, symmetric) block system,
/// used as the reference in solver-versus-direct checks. Tries LDLt first
/// (the system is quasi-definite up to the sign of the second row) and falls
/// back to LU when the factorization residual is not at round-off level.
Vector direct_block_solve(const BlockSystem& sys, const Vector& rhs_unnegated);

}  // namespace biot
