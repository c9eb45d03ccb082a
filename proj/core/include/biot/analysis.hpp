#pragma once

#include "biot/assembly.hpp"
#include "biot/krylov.hpp"
#include "biot/precond.hpp"
#include "biot/sparse.hpp"

namespace biot {

/// Everything here is verified densely at desk scale; meshes above this many
/// total dofs are rejected with SizeError rather than silently approximated.
inline constexpr int kDenseBudget = 4000;

/// Parameter tuple a spectral quantity was measured at.
struct SpectralParams {
  double h = 0.0, tau = 0.0, K = 0.0, nu = 0.0, delta = 0.0;
};

struct SpectralReport {
  double kappa = 0.0;         // condition number of the preconditioned operator
  double sigma_est = 0.0;     // field-of-values lower constant
  double upsilon_est = 0.0;   // field-of-values upper constant
  double infsup_gamma = 0.0;  // discrete inf-sup constant
  SpectralParams params{};
};

/// Extreme |lambda| of the symmetric pencil A x = lambda G x with G SPD,
/// computed through the Cholesky congruence L^{-1} A L^{-T}, G = L L^T.
struct PencilExtremes {
  double abs_min = 0.0;
  double abs_max = 0.0;
};
PencilExtremes pencil_extremes(const CsrMatrix& A, const CsrMatrix& G, int budget = kDenseBudget);

/// max|lambda| / min|lambda| of the pencil; DefinitenessError on a singular A.
double condition_number_pencil(const CsrMatrix& A, const CsrMatrix& G, int budget = kDenseBudget);

/// Condition number of the block-diagonal-preconditioned system: the pencil
/// of the unnegated symmetric operator against blockdiag(A_u, S).
double condition_number_diag(const BlockSystem& sys, int budget = kDenseBudget);

struct FovConstants {
  double sigma = 0.0;
  double upsilon = 0.0;
  /// sigma > 0; false signals a bug or a stabilization weight outside the
  /// hypotheses of the field-of-values theory.
  bool theory_ok = false;
};

/// Field-of-values constants of the triangular-preconditioned system (the
/// sign-flipped form). Lower is the left-preconditioned case, measured in
/// the inner product of the stability norm blockdiag(A_u, S); Upper is the
/// right-preconditioned case, measured in the inverse norm. sigma is the
/// smallest eigenvalue of the symmetric part, upsilon the largest singular
/// value, both after congruence to Euclidean coordinates.
FovConstants fov_constants(const BlockSystem& sys, BlockShape shape, int budget = kDenseBudget);

struct InfSupReport {
  /// sqrt of the smallest surviving eigenvalue of M_p^{-1} (B A_1^{-1} B^T)
  /// after dropping the kernel and the mesh-scale (spurious) modes.
  double gamma = 0.0;
  /// Same with only the kernel dropped; O(h) for equal-order P1-P1, which is
  /// exactly the instability the eta h^2 term repairs.
  double gamma_raw = 0.0;
  /// Deficit slope on the dropped modes: max over spurious modes of
  /// (gamma - sqrt(lambda)) / (h |q|_1 / ||q||), the measurable stand-in for
  /// the weak-inf-sup constant multiplying h||grad q||.
  double xi_proxy = 0.0;
  /// False when the displacement space is empty (every vertex constrained),
  /// where the sup is over nothing and no constant exists.
  bool applicable = true;
};

/// Discrete inf-sup data of the divergence coupling on the given mesh with
/// fully clamped displacement and free pressure. A_1 is the componentwise
/// H^1 Gram matrix (stiffness + mass).
InfSupReport infsup_constant(const Mesh& mesh, int budget = kDenseBudget);

/// sup_v (q, div v) / (|v|_{A_1} ||q||_{M_p}) for one nodal pressure mode,
/// i.e. sqrt(q^T B A_1^{-1} B^T q / q^T M_p q) in the setting above.
double infsup_mode_value(const Mesh& mesh, const Vector& q_nodal, int budget = kDenseBudget);

/// Checks a pminres history against the condition-number contraction bound
/// 2 rho^m with rho = (kappa - 1)/(kappa + 1), entrywise with the given
/// absolute slack.
bool minres_bound_check(const SolveReport& report, double kappa, double slack = 1e-8);

/// Checks a gmres_left history (recorded in the stability-norm metric)
/// against the field-of-values bound (1 - sigma^2/upsilon^2)^{m/2},
/// entrywise with the given absolute slack.
bool gmres_bound_check(const SolveReport& report, double sigma, double upsilon,
                       double slack = 1e-8);

}  // namespace biot
