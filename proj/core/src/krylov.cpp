#include "biot/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace biot {

namespace {

void check_shapes(const Operator& A, const Operator* M, const Vector& b, Vector& x) {
  if (A.rows() != A.cols()) throw ShapeError("krylov: operator must be square");
  if (b.size() != static_cast<std::size_t>(A.rows())) throw ShapeError("krylov: rhs size mismatch");
  if (M != nullptr && (M->rows() != A.rows() || M->cols() != A.cols()))
    throw ShapeError("krylov: preconditioner shape mismatch");
  if (x.empty())
    x.assign(b.size(), 0.0);
  else if (x.size() != b.size())
    throw ShapeError("krylov: initial guess size mismatch");
}

Vector residual(const Operator& A, const Vector& b, const Vector& x) {
  Vector r;
  A.apply(x, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  return r;
}

double true_relative_residual(const Operator& A, const Vector& b, const Vector& x, double rnorm0) {
  if (rnorm0 == 0.0) return 0.0;
  return nrm2(residual(A, b, x)) / rnorm0;
}

struct Givens {
  double c = 1.0, s = 0.0;
  void make(double a, double b) {
    const double r = std::hypot(a, b);
    if (r == 0.0) {
      c = 1.0;
      s = 0.0;
    } else {
      c = a / r;
      s = b / r;
    }
  }
  // [c s; -s c] [a; b]
  void rotate(double& a, double& b) const {
    const double t = c * a + s * b;
    b = -s * a + c * b;
    a = t;
  }
};

}  // namespace

SolveReport pminres(const Operator& A, const Operator* M, const Vector& b, Vector& x,
                    const SolveConfig& cfg) {
  check_shapes(A, M, b, x);
  SolveReport rep;
  rep.residuals.push_back(1.0);

  Vector r1 = residual(A, b, x);
  const double rnorm0 = nrm2(r1);
  Vector y = M != nullptr ? M->apply(r1) : r1;
  double beta1 = dot(r1, y);
  if (beta1 < 0.0) throw DefinitenessError("pminres: preconditioner is not positive definite");
  beta1 = std::sqrt(beta1);
  if (beta1 == 0.0 || rnorm0 == 0.0) {
    rep.converged = true;
    return rep;
  }

  // Lanczos pair (r1, r2) and solution updates in Paige-Saunders form.
  Vector r2 = r1, v(b.size()), w(b.size(), 0.0), w1(b.size(), 0.0), w2(b.size(), 0.0);
  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
  double cs = -1.0, sn = 0.0;

  for (int itn = 1; itn <= cfg.maxit; ++itn) {
    const double s = 1.0 / beta;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = y[i] * s;

    A.apply(v, y);
    if (itn >= 2) axpy(-beta / oldb, r1, y);
    const double alfa = dot(v, y);
    axpy(-alfa / beta, r2, y);
    r1 = r2;
    r2 = y;
    y = M != nullptr ? M->apply(r2) : r2;
    oldb = beta;
    beta = dot(r2, y);
    if (beta < 0.0) throw DefinitenessError("pminres: preconditioner is not positive definite");
    beta = std::sqrt(beta);

    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    double gamma = std::hypot(gbar, beta);
    gamma = std::max(gamma, 1e-300);
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    w1 = w2;
    w2 = w;
    for (std::size_t i = 0; i < w.size(); ++i)
      w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
    axpy(phi, w, x);

    rep.iterations = itn;
    const double rel_m = phibar / beta1;
    rep.residuals.push_back(rel_m);
    if (rel_m <= cfg.tol) {
      const double rel_true = true_relative_residual(A, b, x, rnorm0);
      rep.final_residual = std::max(rel_m, rel_true);
      if (rel_true <= cfg.tol) {
        rep.converged = true;
        return rep;
      }
    }
    if (beta <= 1e-300) {  // Krylov space exhausted: solution is exact
      const double rel_true = true_relative_residual(A, b, x, rnorm0);
      rep.final_residual = std::max(rel_m, rel_true);
      rep.converged = rep.final_residual <= cfg.tol;
      return rep;
    }
  }
  const double rel_m = rep.residuals.back();
  rep.final_residual = std::max(rel_m, true_relative_residual(A, b, x, rnorm0));
  rep.converged = rep.final_residual <= cfg.tol;
  return rep;
}

SolveReport pcg(const Operator& A, const Operator* M, const Vector& b, Vector& x,
                const SolveConfig& cfg) {
  check_shapes(A, M, b, x);
  SolveReport rep;
  rep.residuals.push_back(1.0);

  Vector r = residual(A, b, x);
  const double rnorm0 = nrm2(r);
  if (rnorm0 == 0.0) {
    rep.converged = true;
    return rep;
  }
  Vector z = M != nullptr ? M->apply(r) : r;
  double rz = dot(r, z);
  if (rz <= 0.0) throw DefinitenessError("pcg: preconditioner is not positive definite");
  Vector p = z, q(b.size());

  for (int itn = 1; itn <= cfg.maxit; ++itn) {
    A.apply(p, q);
    const double pq = dot(p, q);
    if (pq <= 0.0) throw DefinitenessError("pcg: operator is not positive definite");
    const double alpha = rz / pq;
    axpy(alpha, p, x);
    axpy(-alpha, q, r);

    rep.iterations = itn;
    const double rel = nrm2(r) / rnorm0;
    rep.residuals.push_back(rel);
    if (rel <= cfg.tol) {
      const double rel_true = true_relative_residual(A, b, x, rnorm0);
      rep.final_residual = std::max(rel, rel_true);
      if (rel_true <= cfg.tol) {
        rep.converged = true;
        return rep;
      }
      r = residual(A, b, x);  // refresh against drift and continue
    }
    z = M != nullptr ? M->apply(r) : r;
    const double rz_new = dot(r, z);
    if (rz_new < 0.0) throw DefinitenessError("pcg: preconditioner is not positive definite");
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
  }
  rep.final_residual = std::max(rep.residuals.back(), true_relative_residual(A, b, x, rnorm0));
  rep.converged = rep.final_residual <= cfg.tol;
  return rep;
}

namespace {

// Shared skeleton of fgmres (flexible, right) and gmres_left (fixed, left,
// optional SPD metric). Saad & Schultz (1986) with modified Gram-Schmidt and
// one reorthogonalization pass.
SolveReport gmres_engine(const Operator& A, const Operator* M, const Vector& b, Vector& x,
                         const SolveConfig& cfg, bool flexible_right, const Operator* metric) {
  check_shapes(A, M, b, x);
  if (metric != nullptr && (metric->rows() != A.rows() || metric->cols() != A.cols()))
    throw ShapeError("gmres: metric shape mismatch");
  SolveReport rep;
  rep.residuals.push_back(1.0);

  const Vector r_true0 = residual(A, b, x);
  const double rnorm0 = nrm2(r_true0);
  if (rnorm0 == 0.0) {
    rep.converged = true;
    return rep;
  }

  auto precondition = [&](const Vector& v) { return M != nullptr ? M->apply(v) : v; };

  // Natural residual: Euclidean for right preconditioning, metric norm of the
  // preconditioned residual for left.
  Vector r0 = flexible_right ? r_true0 : precondition(r_true0);
  auto metric_apply = [&](const Vector& v) { return metric != nullptr ? metric->apply(v) : v; };
  Vector gr0 = metric_apply(r0);
  double beta0 = dot(r0, gr0);
  if (beta0 < 0.0) throw DefinitenessError("gmres: metric is not positive definite");
  beta0 = std::sqrt(beta0);
  if (beta0 == 0.0) {
    rep.converged = true;
    rep.final_residual = 0.0;
    return rep;
  }

  int total = 0;
  bool done = false;
  while (!done && total < cfg.maxit) {
    Vector r = flexible_right ? residual(A, b, x) : precondition(residual(A, b, x));
    Vector gr = metric_apply(r);
    double beta = std::sqrt(std::max(0.0, dot(r, gr)));
    if (beta == 0.0) break;

    const int m = cfg.restart > 0 ? std::min(cfg.restart, cfg.maxit - total) : cfg.maxit - total;
    std::vector<Vector> V, GV, Z;
    V.reserve(m + 1);
    if (metric != nullptr) GV.reserve(m + 1);
    if (flexible_right) Z.reserve(m);
    std::vector<std::vector<double>> H(m + 1, std::vector<double>(m, 0.0));
    std::vector<Givens> rot(m);
    Vector g(static_cast<std::size_t>(m) + 1, 0.0);
    g[0] = beta;

    V.push_back(r);
    scal(1.0 / beta, V[0]);
    if (metric != nullptr) {
      GV.push_back(gr);
      scal(1.0 / beta, GV[0]);
    }

    int j = 0;
    bool happy = false;
    for (; j < m; ++j) {
      Vector w;
      if (flexible_right) {
        Z.push_back(precondition(V[j]));
        A.apply(Z[j], w);
      } else {
        Vector t;
        A.apply(V[j], t);
        w = precondition(t);
      }
      Vector gw = metric_apply(w);

      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= j; ++i) {
          const double hij = metric != nullptr ? dot(GV[i], w) : dot(V[i], w);
          if (hij == 0.0) continue;
          H[i][j] += hij;
          axpy(-hij, V[i], w);
          if (metric != nullptr) axpy(-hij, GV[i], gw);
        }
      }
      double h_next = dot(w, gw);
      if (h_next < 0.0) throw DefinitenessError("gmres: metric is not positive definite");
      h_next = std::sqrt(h_next);
      H[j + 1][j] = h_next;

      for (int i = 0; i < j; ++i) rot[i].rotate(H[i][j], H[i + 1][j]);
      rot[j].make(H[j][j], H[j + 1][j]);
      rot[j].rotate(H[j][j], H[j + 1][j]);
      g[j + 1] = 0.0;
      rot[j].rotate(g[j], g[j + 1]);

      ++total;
      rep.iterations = total;
      const double rel = std::abs(g[j + 1]) / beta0;
      rep.residuals.push_back(rel);

      happy = h_next <= 1e-300;
      if (!happy) {
        V.push_back(w);
        scal(1.0 / h_next, V[j + 1]);
        if (metric != nullptr) {
          GV.push_back(gw);
          scal(1.0 / h_next, GV[j + 1]);
        }
      }
      if (rel <= cfg.tol || happy || total >= cfg.maxit) {
        ++j;
        break;
      }
    }

    // back substitution on the j x j triangular factor
    Vector yv(static_cast<std::size_t>(j), 0.0);
    for (int i = j - 1; i >= 0; --i) {
      double s = g[i];
      for (int k = i + 1; k < j; ++k) s -= H[i][k] * yv[k];
      yv[i] = s / H[i][i];
    }
    for (int i = 0; i < j; ++i) axpy(yv[i], flexible_right ? Z[i] : V[i], x);

    const double rel_natural = rep.residuals.back();
    const double rel_true = true_relative_residual(A, b, x, rnorm0);
    rep.final_residual = std::max(rel_natural, rel_true);
    if (rel_natural <= cfg.tol && rel_true <= cfg.tol) {
      rep.converged = true;
      done = true;
    } else if (happy || total >= cfg.maxit) {
      rep.converged = rep.final_residual <= cfg.tol;
      done = true;
    }
  }
  return rep;
}

}  // namespace

SolveReport fgmres(const Operator& A, const Operator* M, const Vector& b, Vector& x,
                   const SolveConfig& cfg) {
  return gmres_engine(A, M, b, x, cfg, /*flexible_right=*/true, nullptr);
}

SolveReport gmres_left(const Operator& A, const Operator* M, const Vector& b, Vector& x,
                       const SolveConfig& cfg, const Operator* metric) {
  return gmres_engine(A, M, b, x, cfg, /*flexible_right=*/false, metric);
}

SolveReport richardson(const Operator& A, const Operator& M, const Vector& b, Vector& x,
                       const SolveConfig& cfg) {
  check_shapes(A, &M, b, x);
  SolveReport rep;
  rep.residuals.push_back(1.0);
  Vector r = residual(A, b, x);
  const double rnorm0 = nrm2(r);
  if (rnorm0 == 0.0) {
    rep.converged = true;
    return rep;
  }
  Vector z;
  for (int itn = 1; itn <= cfg.maxit; ++itn) {
    M.apply(r, z);
    axpy(1.0, z, x);
    r = residual(A, b, x);
    rep.iterations = itn;
    const double rel = nrm2(r) / rnorm0;
    rep.residuals.push_back(rel);
    if (rel <= cfg.tol) {
      rep.converged = true;
      rep.final_residual = rel;
      return rep;
    }
  }
  rep.final_residual = rep.residuals.back();
  rep.converged = false;
  return rep;
}

void write_residual_csv(const SolveReport& report, std::ostream& out) {
  out << "iter,residual\n";
  char buf[64];
  for (std::size_t i = 0; i < report.residuals.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i, report.residuals[i]);
    out << buf;
  }
}

}  // namespace biot
