#include "biot/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <string>

namespace biot {

namespace {

constexpr double kGeomTol = 1e-10;

double det2(double a, double b, double c, double d) { return a * d - b * c; }

}  // namespace

double Mesh::cell_volume(int c) const {
  const int* v = cell(c);
  const double* p0 = vertex(v[0]);
  if (dim == 2) {
    const double* p1 = vertex(v[1]);
    const double* p2 = vertex(v[2]);
    return 0.5 * det2(p1[0] - p0[0], p2[0] - p0[0], p1[1] - p0[1], p2[1] - p0[1]);
  }
  const double* p1 = vertex(v[1]);
  const double* p2 = vertex(v[2]);
  const double* p3 = vertex(v[3]);
  double a[3], b[3], d[3];
  for (int k = 0; k < 3; ++k) {
    a[k] = p1[k] - p0[k];
    b[k] = p2[k] - p0[k];
    d[k] = p3[k] - p0[k];
  }
  const double det = a[0] * (b[1] * d[2] - b[2] * d[1]) - a[1] * (b[0] * d[2] - b[2] * d[0]) +
                     a[2] * (b[0] * d[1] - b[1] * d[0]);
  return det / 6.0;
}

void Mesh::dump(std::ostream& out) const {
  for (int v = 0; v < n_vertices(); ++v) {
    out << "v";
    for (int d = 0; d < dim; ++d) out << " " << vertex(v)[d];
    out << "\n";
  }
  for (int c = 0; c < n_cells(); ++c) {
    out << "c";
    for (int k = 0; k <= dim; ++k) out << " " << cell(c)[k];
    out << "\n";
  }
}

namespace {

// Collects the boundary of a simplicial mesh: faces appearing in exactly one
// cell. Emitted in sorted-key order so the listing is deterministic.
void extract_boundary(Mesh& mesh) {
  const int dim = mesh.dim;
  std::map<std::vector<int>, int> count;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const int* cv = mesh.cell(c);
    for (int skip = 0; skip <= dim; ++skip) {
      std::vector<int> key;
      key.reserve(dim);
      for (int k = 0; k <= dim; ++k)
        if (k != skip) key.push_back(cv[k]);
      std::sort(key.begin(), key.end());
      ++count[key];
    }
  }
  mesh.facets.clear();
  for (const auto& [key, n] : count) {
    if (n == 1) mesh.facets.insert(mesh.facets.end(), key.begin(), key.end());
  }
  mesh.facet_tags.assign(static_cast<std::size_t>(mesh.n_facets()), BoundaryTag::Lateral);
  mesh.tagged = false;
}

double max_edge_length(const Mesh& mesh) {
  double h2 = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const int* cv = mesh.cell(c);
    for (int a = 0; a <= mesh.dim; ++a)
      for (int b = a + 1; b <= mesh.dim; ++b) {
        const double* pa = mesh.vertex(cv[a]);
        const double* pb = mesh.vertex(cv[b]);
        double s = 0.0;
        for (int d = 0; d < mesh.dim; ++d) {
          const double e = pb[d] - pa[d];
          s += e * e;
        }
        h2 = std::max(h2, s);
      }
  }
  return std::sqrt(h2);
}

}  // namespace

Mesh build_box_mesh(const std::vector<double>& lo, const std::vector<double>& hi,
                    const std::vector<int>& n, int dim) {
  if (dim != 2 && dim != 3) throw ParamError("build_box_mesh: dim must be 2 or 3");
  if (static_cast<int>(lo.size()) != dim || static_cast<int>(hi.size()) != dim ||
      static_cast<int>(n.size()) != dim)
    throw ShapeError("build_box_mesh: lo/hi/n must have dim entries");
  for (int d = 0; d < dim; ++d) {
    if (!(lo[d] < hi[d]))
      throw ParamError("build_box_mesh: invalid domain, lo must be below hi in axis " + std::to_string(d));
    if (n[d] < 1)
      throw ParamError("build_box_mesh: invalid subdivision count in axis " + std::to_string(d));
  }

  Mesh mesh;
  mesh.dim = dim;
  for (int d = 0; d < dim; ++d) {
    mesh.lo[d] = lo[d];
    mesh.hi[d] = hi[d];
  }

  const int nx = n[0], ny = n[1], nz = dim == 3 ? n[2] : 0;
  const int vx = nx + 1, vy = ny + 1;

  if (dim == 2) {
    mesh.coords.reserve(static_cast<std::size_t>(vx) * vy * 2);
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i) {
        mesh.coords.push_back(lo[0] + (hi[0] - lo[0]) * i / nx);
        mesh.coords.push_back(lo[1] + (hi[1] - lo[1]) * j / ny);
      }
    auto vid = [vx](int i, int j) { return j * vx + i; };
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
        mesh.cells.insert(mesh.cells.end(), {v00, v10, v11});
        mesh.cells.insert(mesh.cells.end(), {v00, v11, v01});
      }
  } else {
    mesh.coords.reserve(static_cast<std::size_t>(vx) * vy * (nz + 1) * 3);
    for (int k = 0; k <= nz; ++k)
      for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) {
          mesh.coords.push_back(lo[0] + (hi[0] - lo[0]) * i / nx);
          mesh.coords.push_back(lo[1] + (hi[1] - lo[1]) * j / ny);
          mesh.coords.push_back(lo[2] + (hi[2] - lo[2]) * k / nz);
        }
    auto vid = [vx, vy](int i, int j, int k) { return (k * vy + j) * vx + i; };
    // Six tetrahedra per box, one per axis permutation, all sharing the main
    // diagonal from the low corner to the high corner.
    int perm[3] = {0, 1, 2};
    std::vector<std::array<int, 3>> perms;
    do {
      perms.push_back({perm[0], perm[1], perm[2]});
    } while (std::next_permutation(perm, perm + 3));
    for (int k = 0; k < nz; ++k)
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
          for (const auto& pr : perms) {
            int off[3] = {0, 0, 0};
            int tet[4];
            tet[0] = vid(i, j, k);
            for (int s = 0; s < 3; ++s) {
              off[pr[s]] = 1;
              tet[s + 1] = vid(i + off[0], j + off[1], k + off[2]);
            }
            mesh.cells.insert(mesh.cells.end(), tet, tet + 4);
          }
        }
  }

  // Positive orientation; swapping the last two vertices flips the sign.
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const double vol = mesh.cell_volume(c);
    if (vol == 0.0) throw AssemblyError("build_box_mesh: degenerate cell " + std::to_string(c));
    if (vol < 0.0) {
      int* cv = mesh.cells.data() + static_cast<std::size_t>(dim + 1) * c;
      std::swap(cv[dim - 1], cv[dim]);
    }
  }

  extract_boundary(mesh);
  mesh.h = max_edge_length(mesh);
  return mesh;
}

Mesh classify_footing_boundary(Mesh mesh, double load_extent) {
  if (!(load_extent > 0.0)) throw ParamError("classify_footing_boundary: load_extent must be positive");
  const int dim = mesh.dim;
  const int vert = dim - 1;  // vertical axis is the last coordinate
  for (int f = 0; f < mesh.n_facets(); ++f) {
    const int* fv = mesh.facet(f);
    double c[3] = {0.0, 0.0, 0.0};
    for (int k = 0; k < dim; ++k) {
      const double* p = mesh.vertex(fv[k]);
      for (int d = 0; d < dim; ++d) c[d] += p[d];
    }
    for (int d = 0; d < dim; ++d) c[d] /= dim;

    BoundaryTag tag;
    if (std::abs(c[vert] - mesh.lo[vert]) <= kGeomTol) {
      tag = BoundaryTag::Base;
    } else if (std::abs(c[vert] - mesh.hi[vert]) <= kGeomTol) {
      bool inside = true;
      for (int d = 0; d < vert; ++d) inside = inside && std::abs(c[d]) < load_extent;
      tag = inside ? BoundaryTag::TopLoaded : BoundaryTag::TopFree;
    } else {
      bool on_side = false;
      for (int d = 0; d < vert && !on_side; ++d)
        on_side = std::abs(c[d] - mesh.lo[d]) <= kGeomTol || std::abs(c[d] - mesh.hi[d]) <= kGeomTol;
      if (!on_side)
        throw ClassificationError("classify_footing_boundary: facet " + std::to_string(f) +
                                  " lies on no box face");
      tag = BoundaryTag::Lateral;
    }
    mesh.facet_tags[f] = tag;
  }
  mesh.tagged = true;
  return mesh;
}

}  // namespace biot
