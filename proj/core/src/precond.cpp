#include "biot/precond.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <utility>

namespace biot {

namespace {

Eigen::SparseMatrix<double> to_eigen(const CsrMatrix& A) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(A.nnz());
  for (int i = 0; i < A.rows(); ++i) {
    for (int k = A.row_ptr()[i]; k < A.row_ptr()[i + 1]; ++k) {
      trips.emplace_back(i, A.col_idx()[k], A.values()[k]);
    }
  }
  Eigen::SparseMatrix<double> S(A.rows(), A.cols());
  S.setFromTriplets(trips.begin(), trips.end());
  return S;
}

Vector extract_positive_diagonal(const CsrMatrix& A, const char* who) {
  if (A.rows() != A.cols()) throw ShapeError("diagonal extraction needs a square matrix");
  Vector diag(static_cast<std::size_t>(A.rows()), 0.0);
  for (int i = 0; i < A.rows(); ++i) {
    for (int k = A.row_ptr()[i]; k < A.row_ptr()[i + 1]; ++k) {
      if (A.col_idx()[k] == i) diag[static_cast<std::size_t>(i)] = A.values()[k];
    }
    if (!(diag[static_cast<std::size_t>(i)] > 0.0)) {
      throw DefinitenessError(std::string(who) + ": nonpositive diagonal entry");
    }
  }
  return diag;
}

}  // namespace

struct DirectSolver::Impl {
  int n = 0;
  Method method = Method::Cholesky;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
};

DirectSolver::DirectSolver(const CsrMatrix& A, Method method) : impl_(std::make_unique<Impl>()) {
  if (A.rows() != A.cols()) throw ShapeError("direct solver needs a square matrix");
  impl_->n = A.rows();
  impl_->method = method;
  Eigen::SparseMatrix<double> S = to_eigen(A);
  switch (method) {
    case Method::Cholesky:
      impl_->llt.compute(S);
      if (impl_->llt.info() != Eigen::Success) {
        throw DefinitenessError("sparse Cholesky failed; matrix is not positive definite");
      }
      break;
    case Method::Ldlt:
      impl_->ldlt.compute(S);
      if (impl_->ldlt.info() != Eigen::Success) {
        throw DefinitenessError("sparse LDLt factorization failed");
      }
      break;
    case Method::Lu:
      impl_->lu.compute(S);
      if (impl_->lu.info() != Eigen::Success) {
        throw Error("sparse LU factorization failed");
      }
      break;
  }
}

DirectSolver::~DirectSolver() = default;
DirectSolver::DirectSolver(DirectSolver&&) noexcept = default;
DirectSolver& DirectSolver::operator=(DirectSolver&&) noexcept = default;

int DirectSolver::rows() const { return impl_->n; }

void DirectSolver::solve(const Vector& b, Vector& x) const {
  if (static_cast<int>(b.size()) != impl_->n) throw ShapeError("direct solve: rhs size mismatch");
  Eigen::Map<const Eigen::VectorXd> bm(b.data(), static_cast<Eigen::Index>(b.size()));
  Eigen::VectorXd xe;
  switch (impl_->method) {
    case Method::Cholesky: xe = impl_->llt.solve(bm); break;
    case Method::Ldlt: xe = impl_->ldlt.solve(bm); break;
    case Method::Lu: xe = impl_->lu.solve(bm); break;
  }
  x.assign(xe.data(), xe.data() + xe.size());
}

Vector DirectSolver::solve(const Vector& b) const {
  Vector x;
  solve(b, x);
  return x;
}

DirectSolver exact_block_solver(const CsrMatrix& A) {
  return DirectSolver(A, DirectSolver::Method::Cholesky);
}

SgsSweeps::SgsSweeps(const CsrMatrix& A, int sweeps) : A_(&A), sweeps_(sweeps) {
  if (sweeps < 1) throw ParamError("sweep count must be positive");
  diag_ = extract_positive_diagonal(A, "symmetric Gauss-Seidel");
}

void SgsSweeps::apply(const Vector& r, Vector& z) const {
  const int n = A_->rows();
  if (static_cast<int>(r.size()) != n) throw ShapeError("SGS apply: size mismatch");
  z.assign(r.size(), 0.0);
  const auto& rp = A_->row_ptr();
  const auto& ci = A_->col_idx();
  const auto& va = A_->values();
  auto relax = [&](int i) {
    double s = r[static_cast<std::size_t>(i)];
    for (int k = rp[static_cast<std::size_t>(i)]; k < rp[static_cast<std::size_t>(i) + 1]; ++k) {
      s -= va[static_cast<std::size_t>(k)] * z[static_cast<std::size_t>(ci[static_cast<std::size_t>(k)])];
    }
    // s now holds r_i - (A z)_i; the Gauss-Seidel update adds back the
    // diagonal part so z_i = (r_i - sum_{j != i} a_ij z_j) / a_ii.
    z[static_cast<std::size_t>(i)] += s / diag_[static_cast<std::size_t>(i)];
  };
  for (int sweep = 0; sweep < sweeps_; ++sweep) {
    for (int i = 0; i < n; ++i) relax(i);
    for (int i = n - 1; i >= 0; --i) relax(i);
  }
}

JacobiPrecond::JacobiPrecond(const CsrMatrix& A) {
  diag_ = extract_positive_diagonal(A, "Jacobi");
}

void JacobiPrecond::apply(const Vector& r, Vector& z) const {
  if (r.size() != diag_.size()) throw ShapeError("Jacobi apply: size mismatch");
  z.resize(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) z[i] = r[i] / diag_[i];
}

CsrMatrix build_pressure_schur(const BlockSystem& sys, bool fixed_stress) {
  if (!(sys.lame.zeta_sq > 0.0)) throw ParamError("pressure block needs zeta^2 > 0");
  const double w_mass = sys.alpha * sys.alpha / sys.lame.zeta_sq;
  std::vector<std::pair<double, const CsrMatrix*>> terms{{sys.tau, &sys.A_p}, {w_mass, &sys.M_p}};
  if (!fixed_stress) terms.emplace_back(sys.eta * sys.h * sys.h, &sys.L_p);
  return csr_weighted_sum(terms, sys.bc.p_dofs);
}

Preconditioner::Preconditioner(const BlockSystem& sys, const PreconditionerSpec& spec,
                               std::shared_ptr<const DirectSolver> shared_u_factor)
    : sys_(&sys), spec_(spec), S_(build_pressure_schur(sys, spec.fixed_stress)) {
  if (spec.fixed_stress && spec.shape == BlockShape::Diagonal) {
    throw ConfigError("the fixed-stress split needs a triangular shape");
  }
  if (spec.mode == BlockMode::Exact) {
    if (shared_u_factor) {
      if (shared_u_factor->rows() != sys.n_u) {
        throw ShapeError("shared displacement factorization has the wrong size");
      }
      exact_u_ = std::move(shared_u_factor);
    } else {
      exact_u_ = std::make_shared<const DirectSolver>(sys.A_u, DirectSolver::Method::Cholesky);
    }
    exact_p_ = std::make_unique<DirectSolver>(S_, DirectSolver::Method::Cholesky);
    return;
  }
  // Inexact blocks never factor anything; a shared factorization is ignored.
  auto setup = [](const CsrMatrix& block, const InnerSolve& in, std::unique_ptr<SgsSweeps>& sweeps,
                  std::unique_ptr<Operator>& smoother) {
    if (in.kind == InnerSolve::Kind::SgsSweeps) {
      sweeps = std::make_unique<SgsSweeps>(block, in.sweeps);
      return;
    }
    if (in.smoother == InnerSolve::Smoother::Sgs) {
      smoother = std::make_unique<SgsSweeps>(block, 1);
    } else {
      smoother = std::make_unique<JacobiPrecond>(block);
    }
  };
  setup(sys.A_u, spec.inner_u, sweeps_u_, smoother_u_);
  setup(S_, spec.inner_p, sweeps_p_, smoother_p_);
}

namespace {

void run_inner(const CsrMatrix& block, const InnerSolve& in, const Operator* smoother,
               const Vector& r, Vector& z, const char* who) {
  CsrOperator A(block);
  SolveConfig cfg;
  cfg.tol = in.tol;
  cfg.maxit = in.maxit;
  z.clear();
  SolveReport rep = (in.kind == InnerSolve::Kind::Cg) ? pcg(A, smoother, r, z, cfg)
                                                      : fgmres(A, smoother, r, z, cfg);
  if (!rep.converged) {
    throw InnerSolveError(std::string(who) + ": inner solve missed its tolerance");
  }
}

}  // namespace

void Preconditioner::solve_u(const Vector& r, Vector& z) const {
  if (spec_.mode == BlockMode::Exact) {
    exact_u_->solve(r, z);
    return;
  }
  if (spec_.inner_u.kind == InnerSolve::Kind::SgsSweeps) {
    sweeps_u_->apply(r, z);
    return;
  }
  run_inner(sys_->A_u, spec_.inner_u, smoother_u_.get(), r, z, "displacement block");
}

void Preconditioner::solve_p(const Vector& r, Vector& z) const {
  if (spec_.mode == BlockMode::Exact) {
    exact_p_->solve(r, z);
    return;
  }
  if (spec_.inner_p.kind == InnerSolve::Kind::SgsSweeps) {
    sweeps_p_->apply(r, z);
    return;
  }
  run_inner(S_, spec_.inner_p, smoother_p_.get(), r, z, "pressure block");
}

void Preconditioner::apply(const Vector& r, Vector& z) const {
  const int n_u = sys_->n_u;
  const int n_p = sys_->n_p;
  if (static_cast<int>(r.size()) != n_u + n_p) throw ShapeError("preconditioner apply: size mismatch");
  Vector r_u(r.begin(), r.begin() + n_u);
  Vector r_p(r.begin() + n_u, r.end());
  Vector z_u, z_p;
  switch (spec_.shape) {
    case BlockShape::Diagonal:
      solve_u(r_u, z_u);
      solve_p(r_p, z_p);
      break;
    case BlockShape::Lower: {
      solve_u(r_u, z_u);
      Vector t = sys_->B.apply(z_u);
      for (int i = 0; i < n_p; ++i) r_p[static_cast<std::size_t>(i)] += sys_->alpha * t[static_cast<std::size_t>(i)];
      solve_p(r_p, z_p);
      break;
    }
    case BlockShape::Upper: {
      solve_p(r_p, z_p);
      Vector t = sys_->B.apply_transpose(z_p);
      for (int i = 0; i < n_u; ++i) r_u[static_cast<std::size_t>(i)] -= sys_->alpha * t[static_cast<std::size_t>(i)];
      solve_u(r_u, z_u);
      break;
    }
  }
  z.resize(static_cast<std::size_t>(n_u + n_p));
  std::copy(z_u.begin(), z_u.end(), z.begin());
  std::copy(z_p.begin(), z_p.end(), z.begin() + n_u);
}

Preconditioner build_preconditioner(const BlockSystem& sys, const PreconditionerSpec& spec,
                                    std::shared_ptr<const DirectSolver> shared_u_factor) {
  return Preconditioner(sys, spec, std::move(shared_u_factor));
}

BlockDiagNorm::BlockDiagNorm(const BlockSystem& sys)
    : sys_(&sys), S_(build_pressure_schur(sys, false)) {}

void BlockDiagNorm::apply(const Vector& x, Vector& y) const {
  const int n_u = sys_->n_u;
  const int n_p = sys_->n_p;
  if (static_cast<int>(x.size()) != n_u + n_p) throw ShapeError("norm operator: size mismatch");
  Vector x_u(x.begin(), x.begin() + n_u);
  Vector x_p(x.begin() + n_u, x.end());
  Vector y_u = sys_->A_u.apply(x_u);
  Vector y_p = S_.apply(x_p);
  y.resize(static_cast<std::size_t>(n_u + n_p));
  std::copy(y_u.begin(), y_u.end(), y.begin());
  std::copy(y_p.begin(), y_p.end(), y.begin() + n_u);
}

Vector direct_block_solve(const BlockSystem& sys, const Vector& rhs_unnegated) {
  BlockOperator op = sys.make_operator(false);
  CsrMatrix A = op.to_csr();
  if (static_cast<int>(rhs_unnegated.size()) != A.rows()) {
    throw ShapeError("direct block solve: rhs size mismatch");
  }
  const double bn = nrm2(rhs_unnegated);
  auto rel_residual = [&](const Vector& x) {
    Vector res = A.apply(x);
    axpy(-1.0, rhs_unnegated, res);
    return nrm2(res) / (bn > 0.0 ? bn : 1.0);
  };
  try {
    DirectSolver ldlt(A, DirectSolver::Method::Ldlt);
    Vector x = ldlt.solve(rhs_unnegated);
    if (rel_residual(x) <= 1e-10) return x;
  } catch (const Error&) {
    // fall through to LU
  }
  DirectSolver lu(A, DirectSolver::Method::Lu);
  Vector x = lu.solve(rhs_unnegated);
  if (rel_residual(x) > 1e-6) throw Error("direct block solve: residual above round-off level");
  return x;
}

}  // namespace biot
