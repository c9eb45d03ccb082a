#include "biot/analysis.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace biot {

namespace {

// Modes whose gradient scale resolves at the mesh scale, h |q|_1 / ||q||
// above this, are the spurious equal-order modes the stabilization targets;
// smooth eigenmodes sit at O(h) in this measure.
constexpr double kSpuriousScale = 1.0;

void check_budget(int n, int budget) {
  if (n > budget) {
    throw SizeError("dense analysis budget exceeded (" + std::to_string(n) + " dofs > " +
                    std::to_string(budget) + "); use a smaller mesh");
  }
}

Eigen::MatrixXd to_dense(const CsrMatrix& A) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(A.rows(), A.cols());
  for (int i = 0; i < A.rows(); ++i) {
    for (int k = A.row_ptr()[i]; k < A.row_ptr()[i + 1]; ++k) {
      D(i, A.col_idx()[k]) = A.values()[k];
    }
  }
  return D;
}

Eigen::LLT<Eigen::MatrixXd> dense_cholesky(const Eigen::MatrixXd& G, const char* who) {
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success) {
    throw DefinitenessError(std::string(who) + ": metric is not positive definite");
  }
  return llt;
}

PencilExtremes pencil_extremes_dense(const Eigen::MatrixXd& A, const Eigen::MatrixXd& G) {
  auto llt = dense_cholesky(G, "pencil metric");
  Eigen::MatrixXd Y = llt.matrixL().solve(A);
  Eigen::MatrixXd M = llt.matrixL().solve(Y.transpose()).transpose();
  Eigen::MatrixXd sym = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success) throw Error("dense eigensolve failed");
  PencilExtremes out;
  out.abs_min = es.eigenvalues().cwiseAbs().minCoeff();
  out.abs_max = es.eigenvalues().cwiseAbs().maxCoeff();
  return out;
}

double quadratic_form_eigen(const CsrMatrix& A, const Eigen::VectorXd& x) {
  Vector v(x.data(), x.data() + x.size());
  return A.quadratic_form(v);
}

}  // namespace

PencilExtremes pencil_extremes(const CsrMatrix& A, const CsrMatrix& G, int budget) {
  if (A.rows() != A.cols() || G.rows() != G.cols() || A.rows() != G.rows()) {
    throw ShapeError("pencil needs two square matrices of one size");
  }
  check_budget(A.rows(), budget);
  return pencil_extremes_dense(to_dense(A), to_dense(G));
}

double condition_number_pencil(const CsrMatrix& A, const CsrMatrix& G, int budget) {
  PencilExtremes e = pencil_extremes(A, G, budget);
  if (!(e.abs_min > 0.0)) throw DefinitenessError("pencil is singular");
  return e.abs_max / e.abs_min;
}

double condition_number_diag(const BlockSystem& sys, int budget) {
  const int n = sys.n_total();
  check_budget(n, budget);
  Eigen::MatrixXd A = to_dense(sys.make_operator(false).to_csr());
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
  G.topLeftCorner(sys.n_u, sys.n_u) = to_dense(sys.A_u);
  G.bottomRightCorner(sys.n_p, sys.n_p) = to_dense(build_pressure_schur(sys, false));
  PencilExtremes e = pencil_extremes_dense(A, G);
  if (!(e.abs_min > 0.0)) throw DefinitenessError("preconditioned operator is singular");
  return e.abs_max / e.abs_min;
}

FovConstants fov_constants(const BlockSystem& sys, BlockShape shape, int budget) {
  if (shape == BlockShape::Diagonal) {
    throw ConfigError("field-of-values constants apply to the triangular shapes");
  }
  const int n = sys.n_total();
  check_budget(n, budget);
  const int n_u = sys.n_u;
  const int n_p = sys.n_p;
  Eigen::MatrixXd At = to_dense(sys.make_operator(true).to_csr());
  Eigen::MatrixXd Au = to_dense(sys.A_u);
  Eigen::MatrixXd S = to_dense(build_pressure_schur(sys, false));
  Eigen::MatrixXd Bd = to_dense(sys.B);

  // P is the inverse of the preconditioner as a matrix.
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  P.topLeftCorner(n_u, n_u) = Au;
  P.bottomRightCorner(n_p, n_p) = S;
  if (shape == BlockShape::Lower) {
    P.bottomLeftCorner(n_p, n_u) = -sys.alpha * Bd;
  } else {
    P.topRightCorner(n_u, n_p) = sys.alpha * Bd.transpose();
  }
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
  G.topLeftCorner(n_u, n_u) = Au;
  G.bottomRightCorner(n_p, n_p) = S;
  auto llt = dense_cholesky(G, "fov metric");
  Eigen::MatrixXd Lmat = llt.matrixL();
  Eigen::PartialPivLU<Eigen::MatrixXd> plu(P);

  Eigen::MatrixXd W;
  if (shape == BlockShape::Lower) {
    Eigen::MatrixXd T = plu.solve(At);
    Eigen::MatrixXd Z = llt.matrixL().solve(T.transpose()).transpose();  // T L^{-T}
    W = Lmat.transpose() * Z;
  } else {
    Eigen::MatrixXd Tr = At * plu.inverse();
    W = llt.matrixL().solve(Tr * Lmat);
  }

  FovConstants out;
  Eigen::MatrixXd sym = 0.5 * (W + W.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success) throw Error("dense eigensolve failed");
  out.sigma = es.eigenvalues().minCoeff();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gram(W.transpose() * W);
  if (gram.info() != Eigen::Success) throw Error("dense eigensolve failed");
  out.upsilon = std::sqrt(std::max(0.0, gram.eigenvalues().maxCoeff()));
  out.theory_ok = out.sigma > 0.0;
  return out;
}

namespace {

struct InfSupSetup {
  CsrMatrix B, A1, L_p, M_p;
  int n_free_u = 0;
  double h = 0.0;
};

InfSupSetup infsup_setup(const Mesh& mesh, int budget) {
  const int d = mesh.dim;
  const int nv = mesh.n_vertices();
  check_budget(nv * (d + 1), budget);
  std::vector<std::uint8_t> on_boundary(static_cast<std::size_t>(nv), 0);
  for (int f = 0; f < mesh.n_facets(); ++f) {
    const int* fv = mesh.facet(f);
    for (int k = 0; k < d; ++k) on_boundary[static_cast<std::size_t>(fv[k])] = 1;
  }
  std::vector<std::uint8_t> u_mask(static_cast<std::size_t>(nv * d), 0);
  int n_free = 0;
  for (int v = 0; v < nv; ++v) {
    for (int c = 0; c < d; ++c) u_mask[static_cast<std::size_t>(v * d + c)] = on_boundary[static_cast<std::size_t>(v)];
    if (!on_boundary[static_cast<std::size_t>(v)]) n_free += d;
  }
  PressureMatrices pm = assemble_pressure_matrices(mesh, 1.0, nullptr);
  CooBuilder a1(nv * d, nv * d);
  auto scatter = [&](const CsrMatrix& scal) {
    for (int i = 0; i < scal.rows(); ++i) {
      if (on_boundary[static_cast<std::size_t>(i)]) continue;
      for (int k = scal.row_ptr()[i]; k < scal.row_ptr()[i + 1]; ++k) {
        const int j = scal.col_idx()[k];
        if (on_boundary[static_cast<std::size_t>(j)]) continue;
        for (int c = 0; c < d; ++c) a1.add(i * d + c, j * d + c, scal.values()[k]);
      }
    }
  };
  scatter(pm.L_p);
  scatter(pm.M_p);
  for (int v = 0; v < nv; ++v) {
    if (!on_boundary[static_cast<std::size_t>(v)]) continue;
    for (int c = 0; c < d; ++c) a1.add(v * d + c, v * d + c, 1.0);
  }
  InfSupSetup s;
  s.A1 = std::move(a1).compress();
  s.B = assemble_divergence(mesh, &u_mask, nullptr);
  s.L_p = std::move(pm.L_p);
  s.M_p = std::move(pm.M_p);
  s.n_free_u = n_free;
  s.h = mesh.h;
  return s;
}

}  // namespace

InfSupReport infsup_constant(const Mesh& mesh, int budget) {
  InfSupSetup s = infsup_setup(mesh, budget);
  InfSupReport rep;
  if (s.n_free_u == 0) {
    rep.applicable = false;
    return rep;
  }
  Eigen::MatrixXd A1 = to_dense(s.A1);
  Eigen::MatrixXd Bd = to_dense(s.B);
  auto llt_a = dense_cholesky(A1, "H1 Gram");
  Eigen::MatrixXd N = Bd * llt_a.solve(Bd.transpose());
  Eigen::MatrixXd Md = to_dense(s.M_p);
  auto llt_m = dense_cholesky(Md, "pressure mass");
  Eigen::MatrixXd Y = llt_m.matrixL().solve(N);
  Eigen::MatrixXd Kp = llt_m.matrixL().solve(Y.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Kp + Kp.transpose()));
  if (es.info() != Eigen::Success) throw Error("dense eigensolve failed");
  const double lam_max = es.eigenvalues().maxCoeff();
  if (!(lam_max > 0.0)) throw DefinitenessError("inf-sup pencil vanished on a nonempty space");
  const double kernel_tol = lam_max * 1e-10;

  double raw = -1.0, kept = -1.0, xi = 0.0;
  std::vector<std::pair<double, double>> dropped;  // (value, scale)
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double lam = es.eigenvalues()(i);
    if (lam <= kernel_tol) continue;
    Eigen::VectorXd q = llt_m.matrixL().transpose().solve(es.eigenvectors().col(i));
    const double grad = quadratic_form_eigen(s.L_p, q);
    const double mass = quadratic_form_eigen(s.M_p, q);
    const double scale = s.h * std::sqrt(grad / mass);
    const double value = std::sqrt(lam);
    if (raw < 0.0 || value < raw) raw = value;
    if (scale < kSpuriousScale) {
      if (kept < 0.0 || value < kept) kept = value;
    } else {
      dropped.emplace_back(value, scale);
    }
  }
  if (raw < 0.0) throw DefinitenessError("inf-sup pencil vanished on a nonempty space");
  rep.gamma_raw = raw;
  rep.gamma = kept < 0.0 ? raw : kept;
  for (const auto& [value, scale] : dropped) {
    xi = std::max(xi, (rep.gamma - value) / scale);
  }
  rep.xi_proxy = xi;
  return rep;
}

double infsup_mode_value(const Mesh& mesh, const Vector& q_nodal, int budget) {
  InfSupSetup s = infsup_setup(mesh, budget);
  if (static_cast<int>(q_nodal.size()) != s.M_p.rows()) {
    throw ShapeError("pressure mode has the wrong length");
  }
  const double mass = s.M_p.quadratic_form(q_nodal);
  if (!(mass > 0.0)) throw ParamError("pressure mode must be nonzero");
  if (s.n_free_u == 0) return 0.0;  // sup over an empty space
  Vector w = s.B.apply_transpose(q_nodal);
  Eigen::Map<const Eigen::VectorXd> wm(w.data(), static_cast<Eigen::Index>(w.size()));
  auto llt_a = dense_cholesky(to_dense(s.A1), "H1 Gram");
  Eigen::VectorXd z = llt_a.solve(wm);
  const double num = wm.dot(z);
  return std::sqrt(std::max(0.0, num) / mass);
}

bool minres_bound_check(const SolveReport& report, double kappa, double slack) {
  if (!(kappa >= 1.0)) throw ParamError("condition number must be at least one");
  const double rho = (kappa - 1.0) / (kappa + 1.0);
  double bound = 2.0;
  for (double entry : report.residuals) {
    if (entry > bound + slack) return false;
    bound *= rho;
  }
  return true;
}

bool gmres_bound_check(const SolveReport& report, double sigma, double upsilon, double slack) {
  if (!(sigma > 0.0) || !(upsilon >= sigma)) return false;
  const double ratio = sigma / upsilon;
  const double rate = std::sqrt(std::max(0.0, 1.0 - ratio * ratio));
  double bound = 1.0;
  for (double entry : report.residuals) {
    if (entry > bound + slack) return false;
    bound *= rate;
  }
  return true;
}

}  // namespace biot
