#include "biot/assembly.hpp"

#include <cmath>
#include <ostream>
#include <string>

namespace biot {

namespace {

constexpr double kDegenerateVolTol = 1e-14;

// Barycentric gradients and measure of one simplex. grads[i] is the gradient
// of the hat function of local vertex i; they sum to zero.
struct CellGeometry {
  double grads[4][3];
  double volume;
};

CellGeometry cell_geometry(const Mesh& mesh, int c) {
  CellGeometry g{};
  const int dim = mesh.dim;
  const int* cv = mesh.cell(c);
  const double vol = mesh.cell_volume(c);
  if (std::abs(vol) <= kDegenerateVolTol)
    throw AssemblyError("assembly: degenerate cell " + std::to_string(c));
  g.volume = vol;

  const double* p0 = mesh.vertex(cv[0]);
  if (dim == 2) {
    const double* p1 = mesh.vertex(cv[1]);
    const double* p2 = mesh.vertex(cv[2]);
    const double j11 = p1[0] - p0[0], j12 = p2[0] - p0[0];
    const double j21 = p1[1] - p0[1], j22 = p2[1] - p0[1];
    const double det = j11 * j22 - j12 * j21;
    // rows of J^{-1} are the gradients of the non-origin hat functions
    g.grads[1][0] = j22 / det;
    g.grads[1][1] = -j12 / det;
    g.grads[2][0] = -j21 / det;
    g.grads[2][1] = j11 / det;
  } else {
    const double* p1 = mesh.vertex(cv[1]);
    const double* p2 = mesh.vertex(cv[2]);
    const double* p3 = mesh.vertex(cv[3]);
    double J[3][3];
    for (int r = 0; r < 3; ++r) {
      J[r][0] = p1[r] - p0[r];
      J[r][1] = p2[r] - p0[r];
      J[r][2] = p3[r] - p0[r];
    }
    const double det = J[0][0] * (J[1][1] * J[2][2] - J[1][2] * J[2][1]) -
                       J[0][1] * (J[1][0] * J[2][2] - J[1][2] * J[2][0]) +
                       J[0][2] * (J[1][0] * J[2][1] - J[1][1] * J[2][0]);
    const double inv[3][3] = {
        {(J[1][1] * J[2][2] - J[1][2] * J[2][1]) / det, (J[0][2] * J[2][1] - J[0][1] * J[2][2]) / det,
         (J[0][1] * J[1][2] - J[0][2] * J[1][1]) / det},
        {(J[1][2] * J[2][0] - J[1][0] * J[2][2]) / det, (J[0][0] * J[2][2] - J[0][2] * J[2][0]) / det,
         (J[0][2] * J[1][0] - J[0][0] * J[1][2]) / det},
        {(J[1][0] * J[2][1] - J[1][1] * J[2][0]) / det, (J[0][1] * J[2][0] - J[0][0] * J[2][1]) / det,
         (J[0][0] * J[1][1] - J[0][1] * J[1][0]) / det}};
    for (int i = 0; i < 3; ++i)
      for (int d = 0; d < 3; ++d) g.grads[i + 1][d] = inv[i][d];
  }
  for (int d = 0; d < dim; ++d) {
    double s = 0.0;
    for (int i = 1; i <= dim; ++i) s += g.grads[i][d];
    g.grads[0][d] = -s;
  }
  return g;
}

bool masked(const std::vector<std::uint8_t>* mask, int dof) {
  return mask != nullptr && (*mask)[static_cast<std::size_t>(dof)] != 0;
}

double facet_measure(const Mesh& mesh, int f) {
  const int* fv = mesh.facet(f);
  const double* a = mesh.vertex(fv[0]);
  const double* b = mesh.vertex(fv[1]);
  if (mesh.dim == 2) {
    const double dx = b[0] - a[0], dy = b[1] - a[1];
    return std::sqrt(dx * dx + dy * dy);
  }
  const double* c = mesh.vertex(fv[2]);
  double u[3], v[3];
  for (int d = 0; d < 3; ++d) {
    u[d] = b[d] - a[d];
    v[d] = c[d] - a[d];
  }
  const double cx = u[1] * v[2] - u[2] * v[1];
  const double cy = u[2] * v[0] - u[0] * v[2];
  const double cz = u[0] * v[1] - u[1] * v[0];
  return 0.5 * std::sqrt(cx * cx + cy * cy + cz * cz);
}

}  // namespace

void PhysicalParams::validate() const {
  if (!(E > 0.0)) throw ParamError("PhysicalParams: E must be positive");
  if (!(nu >= 0.0) || nu >= 0.5)
    throw ParamError("PhysicalParams: nu must lie in [0, 0.5); nu = 0.5 is the incompressible "
                     "limit where lambda diverges");
  if (!(K > 0.0)) throw ParamError("PhysicalParams: K must be positive");
  if (!(alpha > 0.0)) throw ParamError("PhysicalParams: alpha must be positive");
}

LameParams lame_from_engineering(const PhysicalParams& p, int dim, FormulaMode mode) {
  p.validate();
  if (dim != 2 && dim != 3) throw ParamError("lame_from_engineering: dim must be 2 or 3");
  LameParams lame;
  lame.mode = mode;
  lame.lambda = p.E * p.nu / ((1.0 - 2.0 * p.nu) * (1.0 + p.nu));
  lame.mu = mode == FormulaMode::Paper ? p.E / (1.0 + 2.0 * p.nu) : p.E / (2.0 * (1.0 + p.nu));
  lame.zeta_sq = lame.lambda + 2.0 * lame.mu / dim;
  lame.zeta = std::sqrt(lame.zeta_sq);
  return lame;
}

CsrMatrix assemble_elasticity(const Mesh& mesh, const LameParams& lame,
                              const std::vector<std::uint8_t>* u_mask) {
  if (lame.mu < 0.0 || lame.lambda < 0.0 || !(lame.mu + lame.lambda > 0.0))
    throw ParamError("assemble_elasticity: need mu >= 0, lambda >= 0, not both zero");
  const int dim = mesh.dim;
  const int n_u = mesh.n_vertices() * dim;
  CooBuilder coo(n_u, n_u);
  coo.reserve(static_cast<std::size_t>(mesh.n_cells()) * (dim + 1) * (dim + 1) * dim * dim + n_u);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellGeometry g = cell_geometry(mesh, c);
    const int* cv = mesh.cell(c);
    for (int i = 0; i <= dim; ++i)
      for (int j = 0; j <= dim; ++j) {
        double gij = 0.0;
        for (int d = 0; d < dim; ++d) gij += g.grads[i][d] * g.grads[j][d];
        for (int a = 0; a < dim; ++a)
          for (int b = 0; b < dim; ++b) {
            const int row = cv[i] * dim + a;
            const int col = cv[j] * dim + b;
            if (masked(u_mask, row) || masked(u_mask, col)) continue;
            const double eps_term = (a == b ? gij : 0.0) + g.grads[i][b] * g.grads[j][a];
            const double val = g.volume * (lame.mu * eps_term +
                                           lame.lambda * g.grads[i][a] * g.grads[j][b]);
            coo.add(row, col, val);
          }
      }
  }
  if (u_mask != nullptr)
    for (int dof = 0; dof < n_u; ++dof)
      if ((*u_mask)[dof]) coo.add(dof, dof, 1.0);
  return std::move(coo).compress();
}

CsrMatrix assemble_divergence(const Mesh& mesh, const std::vector<std::uint8_t>* u_mask,
                              const std::vector<std::uint8_t>* p_mask) {
  const int dim = mesh.dim;
  const int n_p = mesh.n_vertices();
  const int n_u = n_p * dim;
  CooBuilder coo(n_p, n_u);
  coo.reserve(static_cast<std::size_t>(mesh.n_cells()) * (dim + 1) * (dim + 1) * dim);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellGeometry g = cell_geometry(mesh, c);
    const int* cv = mesh.cell(c);
    const double w = g.volume / (dim + 1);  // integral of each hat function
    for (int i = 0; i <= dim; ++i) {
      const int row = cv[i];
      if (masked(p_mask, row)) continue;
      for (int j = 0; j <= dim; ++j)
        for (int a = 0; a < dim; ++a) {
          const int col = cv[j] * dim + a;
          if (masked(u_mask, col)) continue;
          coo.add(row, col, -g.grads[j][a] * w);
        }
    }
  }
  return std::move(coo).compress();
}

PressureMatrices assemble_pressure_matrices(const Mesh& mesh, double K,
                                            const std::vector<std::uint8_t>* p_mask) {
  if (!(K > 0.0)) throw ParamError("assemble_pressure_matrices: K must be positive");
  const int dim = mesh.dim;
  const int n_p = mesh.n_vertices();
  CooBuilder stiff(n_p, n_p), mass(n_p, n_p);
  const double mass_scale = 1.0 / ((dim + 1.0) * (dim + 2.0));
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellGeometry g = cell_geometry(mesh, c);
    const int* cv = mesh.cell(c);
    for (int i = 0; i <= dim; ++i) {
      if (masked(p_mask, cv[i])) continue;
      for (int j = 0; j <= dim; ++j) {
        if (masked(p_mask, cv[j])) continue;
        double gij = 0.0;
        for (int d = 0; d < dim; ++d) gij += g.grads[i][d] * g.grads[j][d];
        stiff.add(cv[i], cv[j], g.volume * gij);
        mass.add(cv[i], cv[j], g.volume * mass_scale * (i == j ? 2.0 : 1.0));
      }
    }
  }
  PressureMatrices out;
  out.L_p = std::move(stiff).compress();
  out.M_p = std::move(mass).compress();
  out.A_p = csr_weighted_sum({{K, &out.L_p}});
  return out;
}

Vector assemble_traction_load(const Mesh& mesh, double intensity) {
  if (!mesh.tagged) throw ConfigError("assemble_traction_load: mesh boundary is untagged");
  const int dim = mesh.dim;
  Vector rhs(static_cast<std::size_t>(mesh.n_vertices()) * dim, 0.0);
  for (int f = 0; f < mesh.n_facets(); ++f) {
    if (mesh.facet_tags[f] != BoundaryTag::TopLoaded) continue;
    const double w = facet_measure(mesh, f) / dim;  // integral of each facet hat function
    const int* fv = mesh.facet(f);
    for (int k = 0; k < dim; ++k) rhs[fv[k] * dim + (dim - 1)] -= intensity * w;
  }
  return rhs;
}

BlockOperator BlockSystem::make_operator(bool negate_second_row) const {
  return BlockOperator(A_u, B, A_p, L_p, alpha, tau, eta * h * h, bc.p_dofs, negate_second_row);
}

BlockSystem BlockSystem::with_coupling(double new_alpha) const {
  if (!(new_alpha >= 0.0)) throw ParamError("with_coupling: alpha must be nonnegative");
  BlockSystem out = *this;
  out.alpha = new_alpha;
  out.eta = delta * new_alpha * new_alpha / lame.zeta_sq;
  return out;
}

BlockSystem BlockSystem::with_eta(double new_eta) const {
  if (!(new_eta >= 0.0)) throw ParamError("with_eta: eta must be nonnegative");
  BlockSystem out = *this;
  out.eta = new_eta;
  return out;
}

BlockSystem BlockSystem::with_tau(double new_tau) const {
  if (!(new_tau > 0.0)) throw ParamError("with_tau: tau must be positive");
  BlockSystem out = *this;
  out.tau = new_tau;
  return out;
}

BlockSystem BlockSystem::with_K(double new_K) const {
  if (!(new_K > 0.0)) throw ParamError("with_K: K must be positive");
  BlockSystem out = *this;
  out.K = new_K;
  // A_p is the pressure stiffness scaled by the permeability, so a K change
  // is a rescale of L_p rather than a reassembly.
  out.A_p = csr_weighted_sum({{new_K, &L_p}});
  return out;
}

BlockSystem assemble_biot_system(const Mesh& mesh, const PhysicalParams& params, double tau,
                                 double delta, const BcConfig& bc) {
  if (!mesh.tagged) throw ConfigError("assemble_biot_system: mesh boundary is untagged");
  params.validate();
  if (!(tau > 0.0)) throw ParamError("assemble_biot_system: tau must be positive");
  if (!(delta > 0.0)) throw ParamError("assemble_biot_system: delta must be positive");

  BlockSystem sys;
  sys.dim = mesh.dim;
  sys.n_p = mesh.n_vertices();
  sys.n_u = sys.n_p * mesh.dim;
  sys.alpha = params.alpha;
  sys.tau = tau;
  sys.delta = delta;
  sys.K = params.K;
  sys.h = mesh.h;
  sys.drained = bc.drained;
  sys.lame = lame_from_engineering(params, mesh.dim, bc.formula);
  sys.eta = delta * params.alpha * params.alpha / sys.lame.zeta_sq;

  // Constrained sets: displacement clamped on the base, pressure zero on the
  // configured drained part of the boundary. A vertex is constrained when it
  // touches any facet of the constraining tag set.
  sys.bc.u_mask.assign(static_cast<std::size_t>(sys.n_u), 0);
  sys.bc.p_mask.assign(static_cast<std::size_t>(sys.n_p), 0);
  auto drains = [&bc](BoundaryTag t) {
    switch (bc.drained) {
      case DrainedSet::AllButBase:
        return t != BoundaryTag::Base;
      case DrainedSet::Top:
        return t == BoundaryTag::TopLoaded || t == BoundaryTag::TopFree;
      case DrainedSet::TopFree:
        return t == BoundaryTag::TopFree;
    }
    return false;
  };
  for (int f = 0; f < mesh.n_facets(); ++f) {
    const int* fv = mesh.facet(f);
    if (mesh.facet_tags[f] == BoundaryTag::Base)
      for (int k = 0; k < mesh.dim; ++k)
        for (int d = 0; d < mesh.dim; ++d) sys.bc.u_mask[fv[k] * mesh.dim + d] = 1;
    if (drains(mesh.facet_tags[f]))
      for (int k = 0; k < mesh.dim; ++k) sys.bc.p_mask[fv[k]] = 1;
  }
  for (int dof = 0; dof < sys.n_u; ++dof)
    if (sys.bc.u_mask[dof]) sys.bc.u_dofs.push_back(dof);
  for (int dof = 0; dof < sys.n_p; ++dof)
    if (sys.bc.p_mask[dof]) sys.bc.p_dofs.push_back(dof);

  sys.A_u = assemble_elasticity(mesh, sys.lame, &sys.bc.u_mask);
  sys.B = assemble_divergence(mesh, &sys.bc.u_mask, &sys.bc.p_mask);
  PressureMatrices pm = assemble_pressure_matrices(mesh, params.K, &sys.bc.p_mask);
  sys.A_p = std::move(pm.A_p);
  sys.L_p = std::move(pm.L_p);
  sys.M_p = std::move(pm.M_p);
  sys.M_vertex = assemble_pressure_matrices(mesh, 1.0, nullptr).M_p;

  sys.rhs_u = assemble_traction_load(mesh, bc.traction);
  for (int dof : sys.bc.u_dofs) sys.rhs_u[dof] = 0.0;
  sys.rhs_p.assign(static_cast<std::size_t>(sys.n_p), 0.0);
  return sys;
}

Vector step_rhs(const BlockSystem& sys, const Vector& prev_u, const Vector& prev_p,
                const Vector& g_nodal, const Vector& f_nodal) {
  if (prev_u.size() != static_cast<std::size_t>(sys.n_u) ||
      prev_p.size() != static_cast<std::size_t>(sys.n_p))
    throw ShapeError("step_rhs: previous state size mismatch");
  if (!g_nodal.empty() && g_nodal.size() != static_cast<std::size_t>(sys.n_u))
    throw ShapeError("step_rhs: body force size mismatch");
  if (!f_nodal.empty() && f_nodal.size() != static_cast<std::size_t>(sys.n_p))
    throw ShapeError("step_rhs: fluid source size mismatch");

  Vector rhs(static_cast<std::size_t>(sys.n_total()), 0.0);
  for (int i = 0; i < sys.n_u; ++i) rhs[i] = sys.rhs_u[i];

  // (g, v): the vector P1 mass acts componentwise through the scalar mass.
  if (!g_nodal.empty()) {
    const auto& rp = sys.M_vertex.row_ptr();
    const auto& ci = sys.M_vertex.col_idx();
    const auto& mv = sys.M_vertex.values();
    for (int i = 0; i < sys.n_p; ++i)
      for (int k = rp[i]; k < rp[i + 1]; ++k)
        for (int d = 0; d < sys.dim; ++d)
          rhs[i * sys.dim + d] += mv[k] * g_nodal[ci[k] * sys.dim + d];
  }

  Vector tmp;
  if (!f_nodal.empty()) {
    sys.M_vertex.apply(f_nodal, tmp);
    for (int i = 0; i < sys.n_p; ++i) rhs[sys.n_u + i] += sys.tau * tmp[i];
  }
  sys.B.apply(prev_u, tmp);
  for (int i = 0; i < sys.n_p; ++i) rhs[sys.n_u + i] += sys.alpha * tmp[i];
  sys.L_p.apply(prev_p, tmp);
  const double eh2 = sys.eta * sys.h * sys.h;
  for (int i = 0; i < sys.n_p; ++i) rhs[sys.n_u + i] -= eh2 * tmp[i];

  for (int dof : sys.bc.u_dofs) rhs[dof] = 0.0;
  for (int dof : sys.bc.p_dofs) rhs[sys.n_u + dof] = 0.0;
  return rhs;
}

void dump_dof_map(const BlockSystem& sys, std::ostream& out) {
  for (int dof = 0; dof < sys.n_u; ++dof)
    out << "u " << dof << " vertex " << dof / sys.dim << " comp " << dof % sys.dim
        << (sys.bc.u_mask[dof] ? " fixed" : "") << "\n";
  for (int dof = 0; dof < sys.n_p; ++dof)
    out << "p " << sys.n_u + dof << " vertex " << dof << (sys.bc.p_mask[dof] ? " drained" : "")
        << "\n";
}

}  // namespace biot
