#ifndef ATAMG_MESH_HPP
#define ATAMG_MESH_HPP

#include "atamg/types.hpp"

#include <array>
#include <ostream>
#include <vector>

namespace atamg {

/// Boundary faces of the axis-aligned box domain, usable as Dirichlet tags.
enum class BoxFace : int { XLo = 0, XHi, YLo, YHi, ZLo, ZHi };

/// Structured simplicial mesh of an axis-aligned box: segments in 1d,
/// right triangles in 2d, Kuhn tetrahedra in 3d.
struct StructuredMesh {
  int dim = 0;
  std::array<Index, 3> cells{1, 1, 1};
  std::array<double, 3> lengths{1.0, 1.0, 1.0};
  std::vector<Vec3> vertices;                 // padded with zeros below dim
  std::vector<std::vector<Index>> elements;   // (dim + 1) vertex indices each

  Index vertex_count() const { return static_cast<Index>(vertices.size()); }
  Index element_count() const { return static_cast<Index>(elements.size()); }

  double element_volume(Index e) const;
  Vec3 element_centroid(Index e) const;

  /// Vertices lying on a boundary face of the box.
  std::vector<Index> face_vertices(BoxFace face) const;
  std::vector<bool> dirichlet_flags(const std::vector<BoxFace> &faces) const;

  /// Debug/plot dump: `v x y z`, `e i0 i1 ...`, `d i` lines.
  void write(std::ostream &os, const std::vector<bool> &dirichlet) const;
};

/// Box mesh with per-axis cell counts and lengths.
StructuredMesh make_box_mesh(int dim, std::array<Index, 3> cells,
                             std::array<double, 3> lengths);

/// Unit-domain mesh with n cells per axis: unit interval into n segments,
/// unit square into 2n^2 triangles, unit cube into 6n^3 tetrahedra.
StructuredMesh make_structured_mesh(int dim, Index n);

} // namespace atamg

#endif
