#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <array>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

#include "biot/errors.hpp"
#include "biot/krylov.hpp"
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

/// Inner map that changes between applications, as an inner Krylov solve
/// would; only the flexible method is allowed to converge with it.
class DriftingJacobi final : public Operator {
 public:
  DriftingJacobi(const std::vector<double>& d) : d_(d) {}
  int rows() const override { return static_cast<int>(d_.size()); }
  void apply(const Vector& x, Vector& y) const override {
    const double w = 1.0 + 0.2 * (calls_++ % 3);
    y.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = w * x[i] / d_[i];
  }

 private:
  std::vector<double> d_;
  mutable int calls_ = 0;
};

double true_rel_residual(const CsrMatrix& A, const Vector& b, const Vector& x) {
  Vector r = A.apply(x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  return nrm2(r) / nrm2(b);
}

/// Dense Gaussian elimination with partial pivoting for the tiny normal
/// equations of the least-squares oracle.
std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
    std::swap(a[k], a[piv]);
    std::swap(rhs[k], rhs[piv]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
      rhs[i] -= f * rhs[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = rhs[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }
  return x;
}

/// min ||b - A z|| over z in span{b, Ab, ..., A^(k-1) b}, via an
/// orthonormalized Krylov basis and dense normal equations.
double krylov_ls_residual(const CsrMatrix& A, const Vector& b, int k) {
  std::vector<Vector> q;
  Vector v = b;
  for (int j = 0; j < k; ++j) {
    if (j > 0) v = A.apply(q[static_cast<std::size_t>(j) - 1]);
    for (const Vector& qi : q) axpy(-dot(qi, v), qi, v);
    for (const Vector& qi : q) axpy(-dot(qi, v), qi, v);  // second MGS pass
    scal(1.0 / nrm2(v), v);
    q.push_back(v);
  }
  std::vector<Vector> w;
  for (const Vector& qi : q) w.push_back(A.apply(qi));
  std::vector<std::vector<double>> gram(q.size(), std::vector<double>(q.size()));
  std::vector<double> rhs(q.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    for (std::size_t j = 0; j < w.size(); ++j) gram[i][j] = dot(w[i], w[j]);
    rhs[i] = dot(w[i], b);
  }
  const std::vector<double> y = gauss_solve(gram, rhs);
  Vector r = b;
  for (std::size_t i = 0; i < w.size(); ++i) axpy(-y[i], w[i], r);
  return nrm2(r);
}

}  // namespace

TEST_CASE("all methods solve the 3x3 second-difference system") {
  const CsrMatrix A = tridiag(3, -1.0, 2.0, -1.0);
  const CsrOperator op(A);
  const Vector b = {1.0, 0.0, 0.0};
  const Vector want = {0.75, 0.5, 0.25};
  SolveConfig cfg;
  cfg.tol = 1e-12;

  auto check = [&](SolveReport rep, const Vector& x) {
    CHECK(rep.converged);
    CHECK(rep.residuals.front() == 1.0);
    CHECK(rep.iterations <= 3);
    for (int i = 0; i < 3; ++i) CHECK(x[i] == doctest::Approx(want[i]).epsilon(1e-10));
  };
  Vector x;
  check(pminres(op, nullptr, b, x, cfg), x);
  x.clear();
  check(pcg(op, nullptr, b, x, cfg), x);
  x.clear();
  check(fgmres(op, nullptr, b, x, cfg), x);
  x.clear();
  check(gmres_left(op, nullptr, b, x, cfg), x);
}

TEST_CASE("minres and gmres share their optimal histories on symmetric systems") {
  // indefinite diagonal plus coupling: symmetric, well within both methods
  const CsrMatrix A = tridiag(8, 0.3, 0.0, 0.3);
  const CsrMatrix D = diag({3.0, -1.0, 2.0, -4.0, 1.0, 5.0, -2.0, 1.5});
  const CsrMatrix S = csr_weighted_sum({{1.0, &A}, {1.0, &D}});
  const CsrOperator op(S);
  Vector b(8);
  for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = std::sin(1.0 + i);
  SolveConfig cfg;
  cfg.tol = 1e-13;
  cfg.maxit = 8;

  Vector xm, xg;
  const SolveReport rm = pminres(op, nullptr, b, xm, cfg);
  const SolveReport rg = gmres_left(op, nullptr, b, xg, cfg);
  REQUIRE(rm.residuals.size() == rg.residuals.size());
  for (std::size_t i = 0; i < rm.residuals.size(); ++i)
    CHECK(rm.residuals[i] == doctest::Approx(rg.residuals[i]).epsilon(1e-8));
  for (std::size_t i = 1; i < rm.residuals.size(); ++i)
    CHECK(rm.residuals[i] <= rm.residuals[i - 1] * (1.0 + 1e-12));
}

TEST_CASE("gmres residual history matches the dense least-squares oracle") {
  // nonsymmetric but diagonalizable and well conditioned
  const CsrMatrix A = tridiag(7, -0.4, 2.5, 0.9);
  const CsrOperator op(A);
  Vector b(7);
  for (int i = 0; i < 7; ++i) b[static_cast<std::size_t>(i)] = std::cos(0.7 * i) + 0.1;
  SolveConfig cfg;
  cfg.tol = 1e-13;
  cfg.maxit = 7;

  Vector xf, xl;
  const SolveReport rf = fgmres(op, nullptr, b, xf, cfg);
  const SolveReport rl = gmres_left(op, nullptr, b, xl, cfg);
  const double bnorm = nrm2(b);
  for (int k = 1; k <= rf.iterations; ++k) {
    const double want = krylov_ls_residual(A, b, k) / bnorm;
    CHECK(rf.residuals[static_cast<std::size_t>(k)] == doctest::Approx(want).epsilon(1e-7));
  }
  for (int k = 1; k <= rl.iterations; ++k) {
    const double want = krylov_ls_residual(A, b, k) / bnorm;
    CHECK(rl.residuals[static_cast<std::size_t>(k)] == doctest::Approx(want).epsilon(1e-7));
  }
}

TEST_CASE("converged reports imply a true residual within tolerance") {
  const CsrMatrix A = tridiag(40, -1.0, 2.1, -1.0);
  const CsrOperator op(A);
  Vector b(40, 1.0);
  const std::vector<double> d(40, 2.1);
  const CsrMatrix J = diag(d);
  const CsrOperator jac(J);
  SolveConfig cfg;
  cfg.tol = 1e-9;
  cfg.maxit = 200;

  Vector x;
  for (int variant = 0; variant < 4; ++variant) {
    x.clear();
    SolveReport rep;
    switch (variant) {
      case 0: rep = pminres(op, nullptr, b, x, cfg); break;
      case 1: rep = pcg(op, &jac, b, x, cfg); break;
      case 2: rep = fgmres(op, &jac, b, x, cfg); break;
      default: rep = gmres_left(op, &jac, b, x, cfg); break;
    }
    CHECK(rep.converged);
    CHECK(rep.final_residual <= cfg.tol);
    CHECK(true_rel_residual(A, b, x) <= cfg.tol * 1.01);
    CHECK(rep.residuals.size() == static_cast<std::size_t>(rep.iterations) + 1);
  }
}

TEST_CASE("jacobi preconditioning cuts minres iterations on a scaled system") {
  // badly scaled SPD diagonal dominates the convergence without scaling
  std::vector<double> d(30);
  for (int i = 0; i < 30; ++i) d[static_cast<std::size_t>(i)] = std::pow(10.0, i % 4);
  const CsrMatrix D = diag(d);
  const CsrMatrix T = tridiag(30, 1.0, 0.0, 1.0);
  const CsrMatrix A = csr_weighted_sum({{1.0, &D}, {0.05, &T}});
  const CsrOperator op(A);
  std::vector<double> dinv(30);
  for (int i = 0; i < 30; ++i) dinv[static_cast<std::size_t>(i)] = 1.0 / d[static_cast<std::size_t>(i)];
  const CsrMatrix M = diag(dinv);
  const CsrOperator prec(M);
  Vector b(30, 1.0);
  SolveConfig cfg;
  cfg.tol = 1e-10;
  cfg.maxit = 300;

  Vector xp, xu;
  const SolveReport plain = pminres(op, nullptr, b, xu, cfg);
  const SolveReport pre = pminres(op, &prec, b, xp, cfg);
  CHECK(pre.converged);
  CHECK(plain.converged);
  CHECK(pre.iterations < plain.iterations);
}

TEST_CASE("flexible gmres tolerates an iteration-dependent preconditioner") {
  const CsrMatrix A = tridiag(25, -1.0, 4.0, -1.0);
  const CsrOperator op(A);
  const std::vector<double> d(25, 4.0);
  const DriftingJacobi drift(d);
  Vector b(25, 1.0);
  SolveConfig cfg;
  cfg.tol = 1e-10;
  cfg.maxit = 100;
  Vector x;
  const SolveReport rep = fgmres(op, &drift, b, x, cfg);
  CHECK(rep.converged);
  CHECK(true_rel_residual(A, b, x) <= 2e-10);
}

TEST_CASE("richardson converges iff the iteration contracts") {
  const CsrMatrix A = diag({2.0, 2.0, 2.0});
  const CsrOperator op(A);
  const Vector b = {2.0, 4.0, 6.0};
  SolveConfig cfg;
  cfg.tol = 1e-12;
  cfg.maxit = 200;

  const CsrMatrix good = diag({0.4, 0.4, 0.4});
  Vector x;
  const SolveReport ok = richardson(op, CsrOperator(good), b, x, cfg);
  CHECK(ok.converged);
  CHECK(x[2] == doctest::Approx(3.0).epsilon(1e-10));

  const CsrMatrix bad = diag({1.5, 1.5, 1.5});
  Vector y;
  SolveConfig few = cfg;
  few.maxit = 20;
  const SolveReport diverged = richardson(op, CsrOperator(bad), b, y, few);
  CHECK_FALSE(diverged.converged);
  CHECK(diverged.residuals.back() > 1.0);
}

TEST_CASE("cg refuses indefinite operators") {
  const CsrMatrix A = diag({1.0, -1.0, 2.0});
  const CsrOperator op(A);
  const Vector b = {1.0, 1.0, 1.0};
  Vector x;
  SolveConfig cfg;
  CHECK_THROWS_AS(pcg(op, nullptr, b, x, cfg), DefinitenessError);
}

TEST_CASE("identity metric reproduces the euclidean gmres history") {
  const CsrMatrix A = tridiag(10, -1.3, 3.0, -0.7);
  const CsrOperator op(A);
  const CsrMatrix I = CsrMatrix::identity(10);
  const CsrOperator eye(I);
  Vector b(10);
  for (int i = 0; i < 10; ++i) b[static_cast<std::size_t>(i)] = 1.0 / (1.0 + i);
  SolveConfig cfg;
  cfg.tol = 1e-12;

  Vector xa, xb;
  const SolveReport plain = gmres_left(op, nullptr, b, xa, cfg);
  const SolveReport metric = gmres_left(op, nullptr, b, xb, cfg, &eye);
  REQUIRE(plain.residuals.size() == metric.residuals.size());
  for (std::size_t i = 0; i < plain.residuals.size(); ++i)
    CHECK(plain.residuals[i] == doctest::Approx(metric.residuals[i]).epsilon(1e-12));
}

TEST_CASE("iteration budget exhaustion is reported, not thrown") {
  const CsrMatrix A = tridiag(50, -1.0, 2.0, -1.0);
  const CsrOperator op(A);
  Vector b(50, 1.0);
  SolveConfig cfg;
  cfg.tol = 1e-14;
  cfg.maxit = 3;
  for (int variant = 0; variant < 3; ++variant) {
    Vector x;
    SolveReport rep;
    switch (variant) {
      case 0: rep = pminres(op, nullptr, b, x, cfg); break;
      case 1: rep = fgmres(op, nullptr, b, x, cfg); break;
      default: rep = gmres_left(op, nullptr, b, x, cfg); break;
    }
    CHECK_FALSE(rep.converged);
    CHECK(rep.iterations == 3);
    CHECK(rep.residuals.size() == 4);
    CHECK(rep.final_residual > cfg.tol);
  }
}

TEST_CASE("restarted gmres still converges, just more slowly") {
  const CsrMatrix A = tridiag(40, -1.0, 2.2, -1.0);
  const CsrOperator op(A);
  Vector b(40, 1.0);
  SolveConfig full;
  full.tol = 1e-10;
  full.maxit = 400;
  SolveConfig restarted = full;
  restarted.restart = 5;

  Vector xf, xr, xl;
  const SolveReport rf = fgmres(op, nullptr, b, xf, full);
  const SolveReport rr = fgmres(op, nullptr, b, xr, restarted);
  const SolveReport rl = gmres_left(op, nullptr, b, xl, restarted);
  CHECK(rf.converged);
  CHECK(rr.converged);
  CHECK(rl.converged);
  CHECK(rr.iterations >= rf.iterations);
  CHECK(true_rel_residual(A, b, xr) <= 2e-10);
  CHECK(true_rel_residual(A, b, xl) <= 2e-10);
}

TEST_CASE("shape validation") {
  const CsrMatrix A = tridiag(4, -1.0, 2.0, -1.0);
  const CsrOperator op(A);
  const CsrMatrix Mbad = CsrMatrix::identity(3);
  const CsrOperator badprec(Mbad);
  Vector b3(3, 1.0), b4(4, 1.0), xbad(2, 0.0);
  Vector x;
  SolveConfig cfg;
  CHECK_THROWS_AS(pminres(op, nullptr, b3, x, cfg), ShapeError);
  CHECK_THROWS_AS(fgmres(op, &badprec, b4, x, cfg), ShapeError);
  CHECK_THROWS_AS(gmres_left(op, nullptr, b4, xbad, cfg), ShapeError);
  CHECK_THROWS_AS(gmres_left(op, nullptr, b4, x, cfg, &badprec), ShapeError);
}

TEST_CASE("residual history export format") {
  SolveReport rep;
  rep.residuals = {1.0, 0.25, 1.0 / 3.0};
  std::ostringstream out;
  write_residual_csv(rep, out);
  CHECK(out.str() ==
        "iter,residual\n"
        "0,1\n"
        "1,0.25\n"
        "2,0.33333333333333331\n");
}
