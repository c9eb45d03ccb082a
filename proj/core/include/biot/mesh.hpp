#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "biot/errors.hpp"

namespace biot {

/// Boundary labels of the footing benchmark geometry. Base is the clamped
/// bottom face; TopLoaded carries the surface traction; TopFree is the rest
/// of the top face; Lateral is everything else.
enum class BoundaryTag : std::uint8_t { Base = 0, TopLoaded = 1, TopFree = 2, Lateral = 3 };

/// Simplicial mesh of an axis-aligned box: triangles in 2D, tetrahedra in 3D.
/// Storage is flat; vertex v occupies coords[dim*v .. dim*v+dim).
struct Mesh {
  int dim = 0;
  std::vector<double> coords;             // dim doubles per vertex
  std::vector<int> cells;                 // dim+1 vertex ids per cell
  std::vector<int> facets;                // dim vertex ids per boundary facet
  std::vector<BoundaryTag> facet_tags;    // one tag per boundary facet, valid when tagged
  bool tagged = false;
  double h = 0.0;                         // max edge length over all cells
  std::array<double, 3> lo{};             // generating box corners (entries past dim unused)
  std::array<double, 3> hi{};

  int n_vertices() const { return static_cast<int>(coords.size()) / dim; }
  int n_cells() const { return static_cast<int>(cells.size()) / (dim + 1); }
  int n_facets() const { return static_cast<int>(facets.size()) / dim; }

  const double* vertex(int v) const { return coords.data() + static_cast<std::size_t>(dim) * v; }
  const int* cell(int c) const { return cells.data() + static_cast<std::size_t>(dim + 1) * c; }
  const int* facet(int f) const { return facets.data() + static_cast<std::size_t>(dim) * f; }

  double cell_volume(int c) const;  // signed simplex volume

  /// Plain-text listing, one vertex or cell per line; debugging aid only.
  void dump(std::ostream& out) const;
};

/// Uniform simplicial mesh of the box (lo, hi) with n[d] subdivisions per
/// axis. 2D boxes split into two triangles along the lower-left/upper-right
/// diagonal; 3D boxes split into six tetrahedra sharing the main diagonal.
/// All cells come out positively oriented and facets are the faces shared by
/// exactly one cell.
Mesh build_box_mesh(const std::vector<double>& lo, const std::vector<double>& hi,
                    const std::vector<int>& n, int dim);

/// Tags each boundary facet of a box mesh: Base on the bottom face
/// (last coordinate at its minimum), TopLoaded on top-face facets whose
/// centroid lies inside the axis-aligned square |x_i| < load_extent around
/// the origin in the lateral coordinates, TopFree on the rest of the top
/// face, Lateral elsewhere. Geometric matching uses a 1e-10 absolute
/// tolerance; a facet on no box face raises ClassificationError.
Mesh classify_footing_boundary(Mesh mesh, double load_extent);

}  // namespace biot
