#pragma once

#include <cstdint>
#include <vector>

#include "biot/mesh.hpp"
#include "biot/sparse.hpp"

namespace biot {

/// Conversion rule from engineering constants to the Lame parameters.
/// Paper mode uses mu = E/(1+2 nu); Standard is the textbook
/// mu = E/(2(1+nu)). Both share lambda = E nu / ((1-2 nu)(1+ nu)).
enum class FormulaMode { Paper, Standard };

/// Which part of the boundary holds the homogeneous pressure (drained)
/// condition. The base is never drained.
enum class DrainedSet { AllButBase, Top, TopFree };

struct PhysicalParams {
  double E = 3.0e4;    // Young modulus [N/m^2]
  double nu = 0.2;     // Poisson ratio, in [0, 0.5)
  double K = 1.0e-6;   // hydraulic conductivity [m^2]
  double alpha = 1.0;  // Biot-Willis coupling coefficient

  void validate() const;
};

struct LameParams {
  double lambda = 0.0;
  double mu = 0.0;
  double zeta = 0.0;     // sqrt(lambda + 2 mu / d), the drained bulk scale
  double zeta_sq = 0.0;  // lambda + 2 mu / d, kept unrounded by the sqrt
  FormulaMode mode = FormulaMode::Paper;
};

LameParams lame_from_engineering(const PhysicalParams& p, int dim, FormulaMode mode);

/// Boundary condition and material-formula choices for the footing problem.
struct BcConfig {
  DrainedSet drained = DrainedSet::AllButBase;
  FormulaMode formula = FormulaMode::Paper;
  double traction = 0.1;  // downward surface load on TopLoaded [N/m^2]
};

/// Constrained degrees of freedom. Masks are indexed by dof; the dof lists
/// repeat the same information in ascending order for sparse iteration.
struct DirichletSets {
  std::vector<std::uint8_t> u_mask;  // size n_u
  std::vector<std::uint8_t> p_mask;  // size n_p
  std::vector<int> u_dofs;
  std::vector<int> p_dofs;
};

/// Linear elasticity stiffness for vector P1 elements:
/// a(u,v) = 2 mu (eps(u),eps(v)) + lambda (div u, div v), exact integrals.
/// Displacement dofs interleave components: dof = vertex*dim + component.
/// When u_mask is given, constrained rows and columns are dropped and a unit
/// diagonal keeps the matrix SPD on the whole space. Degenerate choices
/// (mu = 0 or lambda = 0) assemble the div-div or strain Gram matrices used
/// in the verification inequalities; these are only semidefinite.
CsrMatrix assemble_elasticity(const Mesh& mesh, const LameParams& lame,
                              const std::vector<std::uint8_t>* u_mask = nullptr);

/// Coupling block with entries B[i, (j,c)] = -(div of the (j,c) basis, psi_i),
/// i.e. the discrete form of -(div u, q). With masks, constrained pressure
/// rows and displacement columns are dropped (no diagonal is added).
CsrMatrix assemble_divergence(const Mesh& mesh, const std::vector<std::uint8_t>* u_mask = nullptr,
                              const std::vector<std::uint8_t>* p_mask = nullptr);

struct PressureMatrices {
  CsrMatrix A_p;  // K-weighted stiffness
  CsrMatrix L_p;  // unweighted stiffness (stabilization)
  CsrMatrix M_p;  // vertex mass
};

/// Scalar P1 pressure matrices; with p_mask, constrained rows/columns are
/// dropped in all three (the operators add the identity part themselves).
PressureMatrices assemble_pressure_matrices(const Mesh& mesh, double K,
                                            const std::vector<std::uint8_t>* p_mask = nullptr);

/// Surface load vector for the tagged footing mesh: the downward traction of
/// the given intensity integrated over TopLoaded facets.
Vector assemble_traction_load(const Mesh& mesh, double intensity);

/// One time step of the discretized consolidation model in block form,
///
///   [ A_u        alpha B^T                 ] [u]   [rhs_u]
///   [ alpha B   -(tau A_p + eta h^2 L_p)   ] [p] = [rhs_p]
///
/// where eta = delta alpha^2 / zeta^2. All five matrices are stored with
/// constrained dofs eliminated symmetrically; scalar factors stay outside the
/// matrices so one assembly serves every (tau, alpha, eta) sweep point.
struct BlockSystem {
  CsrMatrix A_u, B, A_p, L_p, M_p;
  CsrMatrix M_vertex;  // unconstrained scalar mass, used to integrate loads

  double alpha = 1.0, tau = 0.0, eta = 0.0, delta = 0.0, K = 0.0, h = 0.0;
  LameParams lame;
  int dim = 0, n_u = 0, n_p = 0;
  DirichletSets bc;
  DrainedSet drained = DrainedSet::AllButBase;

  Vector rhs_u;  // surface traction (first-step load)
  Vector rhs_p;  // zero at assembly; step_rhs builds the lagged terms

  int n_total() const { return n_u + n_p; }

  BlockOperator make_operator(bool negate_second_row) const;

  /// Same blocks with a different coupling coefficient; eta is recomputed
  /// from delta so the stabilization invariant is preserved.
  BlockSystem with_coupling(double alpha) const;

  /// Same blocks with eta overridden (eta = 0 recovers the unstabilized
  /// scheme used by the fixed-stress split mode).
  BlockSystem with_eta(double eta) const;

  /// Sweep helpers: tau and K enter the system only as scalar factors, so
  /// one assembly serves a whole (tau, K) grid.
  BlockSystem with_tau(double tau) const;
  BlockSystem with_K(double K) const;
};

/// Assembles the full block system on a tagged mesh. Requires delta > 0 and
/// validated physical parameters; the mesh must have classified boundary
/// facets.
BlockSystem assemble_biot_system(const Mesh& mesh, const PhysicalParams& params, double tau,
                                 double delta, const BcConfig& bc = {});

/// Right-hand side of the step following state (prev_u, prev_p):
/// rhs_u = traction + (g_n, v);  rhs_p = tau (f_n, q) + alpha B prev_u
/// - eta h^2 L_p prev_p. g_nodal/f_nodal hold nodal values of the body force
/// and fluid source (empty means zero). Returns the stacked, unnegated form;
/// constrained entries are zeroed (homogeneous conditions).
Vector step_rhs(const BlockSystem& sys, const Vector& prev_u, const Vector& prev_p,
                const Vector& g_nodal = {}, const Vector& f_nodal = {});

/// Writes the dof layout (displacement dof -> vertex/component, pressure
/// dof -> vertex, constrained flags) as plain text.
void dump_dof_map(const BlockSystem& sys, std::ostream& out);

}  // namespace biot
