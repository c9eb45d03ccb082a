#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "biot/analysis.hpp"
#include "biot/assembly.hpp"
#include "biot/bench.hpp"
#include "biot/errors.hpp"
#include "biot/mesh.hpp"
#include "doctest.h"

using namespace biot;

namespace {

CsrMatrix diag(const std::vector<double>& d) {
  CooBuilder coo(static_cast<int>(d.size()), static_cast<int>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) coo.add(static_cast<int>(i), static_cast<int>(i), d[i]);
  return std::move(coo).compress();
}

CsrMatrix scalar1x1(double v) {
  CooBuilder coo(1, 1);
  coo.add(0, 0, v);
  return std::move(coo).compress();
}

/// Minimal one-dof-per-field system whose preconditioned spectra are known in
/// closed form: A_u = [2], B = [1], S = tau A_p + (alpha^2/zeta^2) M_p = [2].
BlockSystem toy_system() {
  BlockSystem sys;
  sys.A_u = scalar1x1(2.0);
  sys.B = scalar1x1(1.0);
  sys.A_p = scalar1x1(1.0);
  sys.L_p = CsrMatrix(1, 1, {0, 0}, {}, {});
  sys.M_p = scalar1x1(1.0);
  sys.M_vertex = scalar1x1(1.0);
  sys.alpha = 1.0;
  sys.tau = 1.0;
  sys.eta = 0.0;
  sys.delta = 0.25;
  sys.K = 1.0;
  sys.h = 1.0;
  sys.lame.zeta = 1.0;
  sys.lame.zeta_sq = 1.0;
  sys.dim = 2;
  sys.n_u = 1;
  sys.n_p = 1;
  sys.bc.u_mask = {0};
  sys.bc.p_mask = {0};
  sys.rhs_u = {0.0};
  sys.rhs_p = {0.0};
  return sys;
}

Vector checkerboard(const Mesh& mesh, int n) {
  Vector q(static_cast<std::size_t>(mesh.n_vertices()));
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const int ix = static_cast<int>(std::lround(mesh.coords[static_cast<std::size_t>(v) * 2] * n));
    const int iy = static_cast<int>(std::lround(mesh.coords[static_cast<std::size_t>(v) * 2 + 1] * n));
    q[static_cast<std::size_t>(v)] = ((ix + iy) % 2 == 0) ? 1.0 : -1.0;
  }
  return q;
}

Vector smooth_mode(const Mesh& mesh) {
  Vector q(static_cast<std::size_t>(mesh.n_vertices()));
  for (int v = 0; v < mesh.n_vertices(); ++v)
    q[static_cast<std::size_t>(v)] = mesh.coords[static_cast<std::size_t>(v) * 2] +
                                     0.5 * mesh.coords[static_cast<std::size_t>(v) * 2 + 1];
  return q;
}

}  // namespace

TEST_CASE("pencil extremes on diagonal pairs") {
  const CsrMatrix A = diag({2.0, 8.0});
  const CsrMatrix G = diag({1.0, 2.0});
  const PencilExtremes ex = pencil_extremes(A, G);
  CHECK(ex.abs_min == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(ex.abs_max == doctest::Approx(4.0).epsilon(1e-12));

  const CsrMatrix An = diag({-6.0, 1.0});
  const CsrMatrix Gn = diag({2.0, 1.0});
  const PencilExtremes en = pencil_extremes(An, Gn);
  CHECK(en.abs_min == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(en.abs_max == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(condition_number_pencil(An, Gn) == doctest::Approx(3.0).epsilon(1e-12));

  const CsrMatrix sing = diag({0.0, 1.0});
  CHECK_THROWS_AS(condition_number_pencil(sing, Gn), DefinitenessError);
  const CsrMatrix notspd = diag({-1.0, 1.0});
  CHECK_THROWS_AS(pencil_extremes(A, notspd), DefinitenessError);
}

TEST_CASE("dense budget is enforced with a helpful message") {
  const CsrMatrix A = diag({2.0, 8.0});
  const CsrMatrix G = diag({1.0, 2.0});
  CHECK_THROWS_WITH_AS(pencil_extremes(A, G, 1),
                       "dense analysis budget exceeded (2 dofs > 1); use a smaller mesh",
                       SizeError);
}

TEST_CASE("toy system condition number is known in closed form") {
  const BlockSystem sys = toy_system();
  // preconditioned matrix A/2 has eigenvalues (0.5 +- sqrt(13)/2)/2
  const double want = (1.0 + std::sqrt(13.0)) / (std::sqrt(13.0) - 1.0);
  CHECK(condition_number_diag(sys) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("toy system field-of-values constants are known in closed form") {
  const BlockSystem sys = toy_system();
  const double sigma_want = (7.0 - std::sqrt(5.0)) / 8.0;
  const double upsilon_want = std::sqrt((1.8125 + std::sqrt(1.03515625)) / 2.0);
  for (const BlockShape shape : {BlockShape::Lower, BlockShape::Upper}) {
    const FovConstants fov = fov_constants(sys, shape);
    CHECK(fov.theory_ok);
    CHECK(fov.sigma == doctest::Approx(sigma_want).epsilon(1e-12));
    CHECK(fov.upsilon == doctest::Approx(upsilon_want).epsilon(1e-12));
  }
  CHECK_THROWS_AS(fov_constants(sys, BlockShape::Diagonal), ConfigError);
}

TEST_CASE("real footing systems satisfy the spectral sanity relations") {
  const BlockSystem sys = assemble_biot_system(footing_mesh(2, 1), PhysicalParams{}, 0.01, 0.25);
  const double kappa = condition_number_diag(sys);
  CHECK(kappa >= 1.0);
  CHECK(kappa < 100.0);
  for (const BlockShape shape : {BlockShape::Lower, BlockShape::Upper}) {
    const FovConstants fov = fov_constants(sys, shape);
    CHECK(fov.theory_ok);
    CHECK(fov.sigma > 0.0);
    CHECK(fov.upsilon >= fov.sigma);
    CHECK(fov.upsilon < 10.0);
  }
}

TEST_CASE("contraction bound checks accept conforming histories only") {
  SolveReport rep;
  rep.residuals = {1.0, 0.9, 0.4};
  CHECK(minres_bound_check(rep, 3.0));  // bounds 2, 1, 0.5
  rep.residuals = {1.0, 1.0 + 2e-8};
  CHECK_FALSE(minres_bound_check(rep, 3.0));
  rep.residuals = {1.0, 1.0 + 0.5e-8};
  CHECK(minres_bound_check(rep, 3.0));  // inside the slack
  CHECK_THROWS_AS(minres_bound_check(rep, 0.5), ParamError);

  rep.residuals = {1.0, 0.79};
  CHECK(gmres_bound_check(rep, 0.6, 1.0));  // rate sqrt(1 - 0.36) = 0.8
  rep.residuals = {1.0, 0.81};
  CHECK_FALSE(gmres_bound_check(rep, 0.6, 1.0));
  rep.residuals = {1.0, 0.8 + 0.5e-8};
  CHECK(gmres_bound_check(rep, 0.6, 1.0));
  rep.residuals = {1.0};
  CHECK_FALSE(gmres_bound_check(rep, 0.0, 1.0));   // vacuous constants are rejected
  CHECK_FALSE(gmres_bound_check(rep, 0.6, 0.5));   // upsilon below sigma is impossible
}

TEST_CASE("inf-sup data on unit square meshes") {
  const Mesh coarse = build_box_mesh({0.0, 0.0}, {1.0, 1.0}, {3, 3}, 2);
  const InfSupReport rep = infsup_constant(coarse);
  CHECK(rep.applicable);
  CHECK(rep.gamma > 0.0);
  CHECK(rep.gamma_raw > 0.0);
  CHECK(rep.gamma >= rep.gamma_raw - 1e-12);
  CHECK(rep.xi_proxy >= 0.0);

  const Mesh tiny = build_box_mesh({0.0, 0.0}, {1.0, 1.0}, {1, 1}, 2);
  CHECK_FALSE(infsup_constant(tiny).applicable);
}

TEST_CASE("equal-order instability: kernel checkerboard, decaying raw constant") {
  const Mesh m4 = build_box_mesh({0.0, 0.0}, {1.0, 1.0}, {4, 4}, 2);
  const Mesh m8 = build_box_mesh({0.0, 0.0}, {1.0, 1.0}, {8, 8}, 2);
  const Mesh m16 = build_box_mesh({0.0, 0.0}, {1.0, 1.0}, {16, 16}, 2);

  // the checkerboard pressure is invisible to every discrete divergence
  const double smooth4 = infsup_mode_value(m4, smooth_mode(m4));
  CHECK(infsup_mode_value(m4, checkerboard(m4, 4)) <= 1e-12 * smooth4);
  CHECK(infsup_mode_value(m8, checkerboard(m8, 8)) <= 1e-12 * smooth4);

  // smooth modes keep an O(1) value under refinement
  const double smooth8 = infsup_mode_value(m8, smooth_mode(m8));
  const double flat = smooth8 / smooth4;
  CHECK(flat > 0.8);
  CHECK(flat < 1.25);

  // with only the kernel dropped the constant decays like h ...
  const double raw4 = infsup_constant(m4).gamma_raw;
  const double raw8 = infsup_constant(m8).gamma_raw;
  const InfSupReport fine = infsup_constant(m16);
  CHECK(raw8 / raw4 > 0.5);
  CHECK(raw8 / raw4 < 0.85);
  CHECK(fine.gamma_raw / raw8 > 0.4);
  CHECK(fine.gamma_raw / raw8 < 0.78);

  // ... while dropping the mesh-scale modes leaves an O(1) constant
  CHECK(fine.gamma > 5.0 * fine.gamma_raw);
  CHECK(fine.gamma > 0.3);
  CHECK(fine.gamma <= 2.0);
  CHECK(fine.xi_proxy > 0.0);
}
