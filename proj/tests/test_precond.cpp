#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "biot/assembly.hpp"
#include "biot/bench.hpp"
#include "biot/errors.hpp"
#include "biot/krylov.hpp"
#include "biot/precond.hpp"
#include "biot/sparse.hpp"
#include "biot/vector_ops.hpp"
#include "doctest.h"

using namespace biot;

namespace {

CsrMatrix tridiag(int n, double lo, double di, double up) {
  CooBuilder coo(n, n);
  for (int i = 0; i < n; ++i) {
    if (i > 0) coo.add(i, i - 1, lo);
    coo.add(i, i, di);
    if (i + 1 < n) coo.add(i, i + 1, up);
  }
  return std::move(coo).compress();
}

CsrMatrix diag(const std::vector<double>& d) {
  CooBuilder coo(static_cast<int>(d.size()), static_cast<int>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) coo.add(static_cast<int>(i), static_cast<int>(i), d[i]);
  return std::move(coo).compress();
}

double entry(const CsrMatrix& A, int i, int j) {
  for (int k = A.row_ptr()[i]; k < A.row_ptr()[i + 1]; ++k)
    if (A.col_idx()[k] == j) return A.values()[k];
  return 0.0;
}

Vector random_vector(std::size_t n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Vector v(n);
  for (double& x : v) x = uni(gen);
  return v;
}

double rel_gap(const Vector& got, const Vector& want) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    num += (got[i] - want[i]) * (got[i] - want[i]);
    den += want[i] * want[i];
  }
  return std::sqrt(num / den);
}

BlockSystem footing_system() {
  return assemble_biot_system(footing_mesh(2, 1), PhysicalParams{}, 0.01, 0.25);
}

/// The overriders hide the base-class convenience overload; route around it.
Vector call(const Operator& op, const Vector& x) { return op.apply(x); }

}  // namespace

TEST_CASE("direct solver methods and their admissibility rules") {
  const CsrMatrix spd = tridiag(12, -1.0, 2.5, -1.0);
  const Vector b = random_vector(12, 7);

  const DirectSolver chol(spd, DirectSolver::Method::Cholesky);
  Vector x = chol.solve(b);
  CHECK(rel_gap(spd.apply(x), b) <= 1e-13);
  CHECK(chol.rows() == 12);

  const CsrMatrix indef = diag({1.0, -2.0, 3.0, -4.0});
  CHECK_THROWS_AS(DirectSolver(indef, DirectSolver::Method::Cholesky), DefinitenessError);

  const DirectSolver ldlt(indef, DirectSolver::Method::Ldlt);
  const Vector c = {1.0, 2.0, 3.0, 4.0};
  x = ldlt.solve(c);
  CHECK(x[1] == doctest::Approx(-1.0).epsilon(1e-13));

  const CsrMatrix skew = tridiag(6, 1.0, 3.0, -1.0);
  const DirectSolver lu(skew, DirectSolver::Method::Lu);
  const Vector d = random_vector(6, 11);
  x = lu.solve(d);
  CHECK(rel_gap(skew.apply(x), d) <= 1e-13);

  CHECK_THROWS_AS(chol.solve(c), ShapeError);

  const DirectSolver viaHelper = exact_block_solver(spd);
  x = viaHelper.solve(b);
  CHECK(rel_gap(spd.apply(x), b) <= 1e-13);
}

TEST_CASE("sgs sweeps act as a linear symmetric positive definite map") {
  const CsrMatrix A = tridiag(9, -1.0, 2.0, -1.0);
  for (int sweeps : {1, 3}) {
    const SgsSweeps M(A, sweeps);
    std::vector<Vector> cols;
    for (int j = 0; j < 9; ++j) {
      Vector e(9, 0.0);
      e[static_cast<std::size_t>(j)] = 1.0;
      cols.push_back(call(M, e));
    }
    for (int i = 0; i < 9; ++i)
      for (int j = 0; j < 9; ++j)
        CHECK(cols[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] ==
              doctest::Approx(cols[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])
                  .epsilon(1e-12));
    for (unsigned seed : {1u, 2u, 3u}) {
      const Vector v = random_vector(9, seed);
      CHECK(dot(v, call(M, v)) > 0.0);
    }
    // linearity: M(2u - 3w) = 2 Mu - 3 Mw
    const Vector u = random_vector(9, 4), w = random_vector(9, 5);
    Vector mix(9);
    for (int i = 0; i < 9; ++i)
      mix[static_cast<std::size_t>(i)] =
          2.0 * u[static_cast<std::size_t>(i)] - 3.0 * w[static_cast<std::size_t>(i)];
    const Vector lhs = call(M, mix);
    const Vector mu = call(M, u), mw = call(M, w);
    for (int i = 0; i < 9; ++i)
      CHECK(lhs[static_cast<std::size_t>(i)] ==
            doctest::Approx(2.0 * mu[static_cast<std::size_t>(i)] -
                            3.0 * mw[static_cast<std::size_t>(i)])
                .epsilon(1e-11));
  }
}

TEST_CASE("one sgs sweep is a convergent stationary smoother") {
  const CsrMatrix A = tridiag(15, -1.0, 2.0, -1.0);
  const CsrOperator op(A);
  const SgsSweeps M(A, 1);
  Vector b(15, 1.0), x;
  SolveConfig cfg;
  cfg.tol = 1e-10;
  cfg.maxit = 2000;
  const SolveReport rep = richardson(op, M, b, x, cfg);
  CHECK(rep.converged);
}

TEST_CASE("jacobi preconditioner divides by the diagonal") {
  const CsrMatrix A = tridiag(5, -1.0, 4.0, -1.0);
  const JacobiPrecond M(A);
  const Vector r = {4.0, 8.0, -4.0, 0.0, 2.0};
  const Vector z = call(M, r);
  CHECK(z[0] == 1.0);
  CHECK(z[1] == 2.0);
  CHECK(z[2] == -1.0);
  CHECK(z[4] == 0.5);
}

TEST_CASE("pressure block combines the three scalar matrices") {
  const BlockSystem sys = footing_system();
  const double mass_w = sys.alpha * sys.alpha / sys.lame.zeta_sq;
  for (bool fixed_stress : {false, true}) {
    const CsrMatrix S = build_pressure_schur(sys, fixed_stress);
    const double stab_w = fixed_stress ? 0.0 : sys.eta * sys.h * sys.h;
    for (int i = 0; i < sys.n_p; ++i)
      for (int j = 0; j < sys.n_p; ++j) {
        double want = sys.tau * entry(sys.A_p, i, j) + stab_w * entry(sys.L_p, i, j) +
                      mass_w * entry(sys.M_p, i, j);
        if (i == j && sys.bc.p_mask[i]) want = 1.0;
        CHECK(entry(S, i, j) == doctest::Approx(want).epsilon(1e-13));
      }
  }
}

TEST_CASE("exact shapes satisfy their defining block equations") {
  const BlockSystem sys = footing_system();
  const Vector r = random_vector(static_cast<std::size_t>(sys.n_total()), 99);
  const Vector r_u(r.begin(), r.begin() + sys.n_u);
  const Vector r_p(r.begin() + sys.n_u, r.end());

  for (const BlockShape shape : {BlockShape::Diagonal, BlockShape::Lower, BlockShape::Upper}) {
    PreconditionerSpec spec;
    spec.shape = shape;
    const Preconditioner P = build_preconditioner(sys, spec);
    const CsrMatrix& S = P.pressure_block();
    const Vector z = call(P, r);
    const Vector z_u(z.begin(), z.begin() + sys.n_u);
    const Vector z_p(z.begin() + sys.n_u, z.end());

    Vector want_u = r_u, want_p = r_p;
    if (shape == BlockShape::Lower) {
      const Vector t = sys.B.apply(z_u);
      for (int i = 0; i < sys.n_p; ++i) want_p[static_cast<std::size_t>(i)] += sys.alpha * t[static_cast<std::size_t>(i)];
    }
    if (shape == BlockShape::Upper) {
      const Vector t = sys.B.apply_transpose(z_p);
      for (int i = 0; i < sys.n_u; ++i) want_u[static_cast<std::size_t>(i)] -= sys.alpha * t[static_cast<std::size_t>(i)];
    }
    CHECK(rel_gap(sys.A_u.apply(z_u), want_u) <= 1e-11);
    CHECK(rel_gap(S.apply(z_p), want_p) <= 1e-11);
  }
}

TEST_CASE("configuration and shape guards") {
  const BlockSystem sys = footing_system();
  PreconditionerSpec fixed;
  fixed.shape = BlockShape::Diagonal;
  fixed.fixed_stress = true;
  CHECK_THROWS_AS(build_preconditioner(sys, fixed), ConfigError);

  const BlockSystem small = assemble_biot_system(footing_mesh(2, 2), PhysicalParams{}, 0.01, 0.25);
  auto wrong = std::make_shared<const DirectSolver>(sys.A_u, DirectSolver::Method::Cholesky);
  PreconditionerSpec spec;
  CHECK_THROWS_AS(build_preconditioner(small, spec, wrong), ShapeError);

  const Preconditioner P = build_preconditioner(sys, spec);
  Vector tooShort(3, 1.0), z;
  CHECK_THROWS_AS(P.apply(tooShort, z), ShapeError);
}

TEST_CASE("a shared displacement factorization is reused verbatim") {
  const BlockSystem sys = footing_system();
  auto shared = std::make_shared<const DirectSolver>(sys.A_u, DirectSolver::Method::Cholesky);
  PreconditionerSpec spec;
  spec.shape = BlockShape::Lower;
  const Preconditioner with = build_preconditioner(sys, spec, shared);
  const Preconditioner without = build_preconditioner(sys, spec);
  const Vector r = random_vector(static_cast<std::size_t>(sys.n_total()), 3);
  CHECK(rel_gap(call(with, r), call(without, r)) <= 1e-13);
}

TEST_CASE("inner solves respect their budget and name the offending block") {
  const BlockSystem sys = footing_system();
  PreconditionerSpec spec;
  spec.mode = BlockMode::Inexact;
  spec.inner_u.tol = 1e-12;
  spec.inner_u.maxit = 1;
  const Preconditioner P = build_preconditioner(sys, spec);
  const Vector r = random_vector(static_cast<std::size_t>(sys.n_total()), 21);
  Vector z;
  CHECK_THROWS_WITH_AS(P.apply(r, z), "displacement block: inner solve missed its tolerance",
                       InnerSolveError);

  PreconditionerSpec pspec;
  pspec.mode = BlockMode::Inexact;
  pspec.inner_p.tol = 1e-14;
  pspec.inner_p.maxit = 1;
  const Preconditioner Q = build_preconditioner(sys, pspec);
  CHECK_THROWS_WITH_AS(Q.apply(r, z), "pressure block: inner solve missed its tolerance",
                       InnerSolveError);
}

TEST_CASE("inexact variants approximate the exact ones to the inner tolerance") {
  const BlockSystem sys = footing_system();
  PreconditionerSpec exact;
  PreconditionerSpec loose;
  loose.mode = BlockMode::Inexact;
  loose.inner_u.tol = 1e-10;
  loose.inner_p.tol = 1e-10;
  loose.inner_p.kind = InnerSolve::Kind::Gmres;
  const Preconditioner E = build_preconditioner(sys, exact);
  const Preconditioner L = build_preconditioner(sys, loose);
  const Vector r = random_vector(static_cast<std::size_t>(sys.n_total()), 8);
  CHECK(rel_gap(call(L, r), call(E, r)) <= 1e-6);
}

TEST_CASE("minres accepts the fixed linear inexact diagonal preconditioner") {
  const BlockSystem sys = footing_system();
  PreconditionerSpec spec;
  spec.mode = BlockMode::Inexact;
  spec.inner_u.kind = InnerSolve::Kind::SgsSweeps;
  spec.inner_p.kind = InnerSolve::Kind::SgsSweeps;
  spec.inner_u.sweeps = 3;
  spec.inner_p.sweeps = 3;
  const Preconditioner P = build_preconditioner(sys, spec);
  const BlockOperator op = sys.make_operator(false);
  Vector b = sys.rhs_u;
  b.resize(static_cast<std::size_t>(sys.n_total()), 0.0);
  Vector x;
  SolveConfig cfg;
  cfg.tol = 1e-8;
  cfg.maxit = 400;
  const SolveReport rep = pminres(op, &P, b, x, cfg);
  CHECK(rep.converged);
}

TEST_CASE("block norm operator is the inverse of the exact diagonal shape") {
  const BlockSystem sys = footing_system();
  const BlockDiagNorm G(sys);
  PreconditionerSpec spec;
  const Preconditioner P = build_preconditioner(sys, spec);

  const Vector x = random_vector(static_cast<std::size_t>(sys.n_total()), 17);
  const Vector gx = call(G, x);

  // G x = [A_u x_u; S x_p]
  const Vector x_u(x.begin(), x.begin() + sys.n_u);
  const Vector x_p(x.begin() + sys.n_u, x.end());
  const Vector au = sys.A_u.apply(x_u);
  const Vector sp = G.pressure_block().apply(x_p);
  for (int i = 0; i < sys.n_u; ++i)
    CHECK(gx[static_cast<std::size_t>(i)] == doctest::Approx(au[static_cast<std::size_t>(i)]).epsilon(1e-12));
  // drained rows act as the identity inside the pressure block
  for (int i = 0; i < sys.n_p; ++i) {
    const double want = sys.bc.p_mask[i] ? x_p[static_cast<std::size_t>(i)] : sp[static_cast<std::size_t>(i)];
    CHECK(gx[static_cast<std::size_t>(sys.n_u + i)] == doctest::Approx(want).epsilon(1e-12));
  }

  CHECK(rel_gap(call(P, gx), x) <= 1e-11);
}

TEST_CASE("monolithic direct solve leaves a round-off residual") {
  const BlockSystem sys = footing_system();
  Vector rhs = sys.rhs_u;
  rhs.resize(static_cast<std::size_t>(sys.n_total()), 0.0);
  const Vector x = direct_block_solve(sys, rhs);
  const BlockOperator op = sys.make_operator(false);
  Vector r = call(op, x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = rhs[i] - r[i];
  CHECK(nrm2(r) / nrm2(rhs) <= 1e-10);
}
