#include "atamg/mesh.hpp"

#include <cmath>
#include <stdexcept>

namespace atamg {

namespace {

Index lex_index(Index i, Index j, Index k, Index nx, Index ny) {
  return i + (nx + 1) * (j + (ny + 1) * k);
}

} // namespace

double StructuredMesh::element_volume(Index e) const {
  const auto &el = elements[static_cast<std::size_t>(e)];
  Eigen::Matrix3d edges = Eigen::Matrix3d::Identity();
  for (int c = 0; c < dim; ++c)
    edges.col(c).head(3) = vertices[static_cast<std::size_t>(el[static_cast<std::size_t>(c) + 1])] -
                           vertices[static_cast<std::size_t>(el[0])];
  double factorial = 1.0;
  for (int c = 2; c <= dim; ++c) factorial *= c;
  // signed volume; orientation is positive by construction
  double det = 0.0;
  switch (dim) {
  case 1: det = edges(0, 0); break;
  case 2: det = edges(0, 0) * edges(1, 1) - edges(0, 1) * edges(1, 0); break;
  default: det = edges.determinant(); break;
  }
  return det / factorial;
}

Vec3 StructuredMesh::element_centroid(Index e) const {
  const auto &el = elements[static_cast<std::size_t>(e)];
  Vec3 c = Vec3::Zero();
  for (Index v : el) c += vertices[static_cast<std::size_t>(v)];
  return c / static_cast<double>(el.size());
}

std::vector<Index> StructuredMesh::face_vertices(BoxFace face) const {
  const int axis = static_cast<int>(face) / 2;
  const bool hi = static_cast<int>(face) % 2 == 1;
  if (axis >= dim) return {};
  const double target = hi ? lengths[static_cast<std::size_t>(axis)] : 0.0;
  const double h = lengths[static_cast<std::size_t>(axis)] /
                   static_cast<double>(cells[static_cast<std::size_t>(axis)]);
  std::vector<Index> out;
  for (Index v = 0; v < vertex_count(); ++v)
    if (std::abs(vertices[static_cast<std::size_t>(v)][axis] - target) < 1e-12 * std::max(1.0, h))
      out.push_back(v);
  return out;
}

std::vector<bool> StructuredMesh::dirichlet_flags(const std::vector<BoxFace> &faces) const {
  std::vector<bool> flags(static_cast<std::size_t>(vertex_count()), false);
  for (BoxFace f : faces)
    for (Index v : face_vertices(f)) flags[static_cast<std::size_t>(v)] = true;
  return flags;
}

void StructuredMesh::write(std::ostream &os, const std::vector<bool> &dirichlet) const {
  for (const Vec3 &x : vertices) os << "v " << x[0] << ' ' << x[1] << ' ' << x[2] << '\n';
  for (const auto &el : elements) {
    os << 'e';
    for (Index v : el) os << ' ' << v;
    os << '\n';
  }
  for (std::size_t i = 0; i < dirichlet.size(); ++i)
    if (dirichlet[i]) os << "d " << i << '\n';
}

StructuredMesh make_box_mesh(int dim, std::array<Index, 3> cells, std::array<double, 3> lengths) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("make_box_mesh: dim must be 1, 2 or 3");
  for (int a = 0; a < dim; ++a)
    if (cells[static_cast<std::size_t>(a)] < 1 || lengths[static_cast<std::size_t>(a)] <= 0.0)
      throw std::invalid_argument("make_box_mesh: invalid cells/lengths");
  for (int a = dim; a < 3; ++a) {
    cells[static_cast<std::size_t>(a)] = 0;
    lengths[static_cast<std::size_t>(a)] = 0.0;
  }

  StructuredMesh mesh;
  mesh.dim = dim;
  mesh.cells = {std::max<Index>(cells[0], 1), std::max<Index>(cells[1], 1),
                std::max<Index>(cells[2], 1)};
  mesh.lengths = {lengths[0], dim > 1 ? lengths[1] : 1.0, dim > 2 ? lengths[2] : 1.0};

  const Index nx = cells[0];
  const Index ny = dim > 1 ? cells[1] : 0;
  const Index nz = dim > 2 ? cells[2] : 0;

  for (Index k = 0; k <= nz; ++k)
    for (Index j = 0; j <= ny; ++j)
      for (Index i = 0; i <= nx; ++i) {
        Vec3 x = Vec3::Zero();
        x[0] = lengths[0] * static_cast<double>(i) / static_cast<double>(nx);
        if (dim > 1) x[1] = lengths[1] * static_cast<double>(j) / static_cast<double>(ny);
        if (dim > 2) x[2] = lengths[2] * static_cast<double>(k) / static_cast<double>(nz);
        mesh.vertices.push_back(x);
      }

  if (dim == 1) {
    for (Index i = 0; i < nx; ++i) mesh.elements.push_back({i, i + 1});
  } else if (dim == 2) {
    for (Index j = 0; j < ny; ++j)
      for (Index i = 0; i < nx; ++i) {
        const Index v00 = lex_index(i, j, 0, nx, ny);
        const Index v10 = lex_index(i + 1, j, 0, nx, ny);
        const Index v01 = lex_index(i, j + 1, 0, nx, ny);
        const Index v11 = lex_index(i + 1, j + 1, 0, nx, ny);
        mesh.elements.push_back({v00, v10, v11});
        mesh.elements.push_back({v00, v11, v01});
      }
  } else {
    // Kuhn split: six tetrahedra per cube, one per permutation of axes,
    // all sharing the main diagonal (0,0,0)-(1,1,1).
    static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                    {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (Index k = 0; k < nz; ++k)
      for (Index j = 0; j < ny; ++j)
        for (Index i = 0; i < nx; ++i) {
          const Index base[3] = {i, j, k};
          for (const auto &perm : perms) {
            Index corner[4][3];
            for (int a = 0; a < 3; ++a) corner[0][a] = base[a];
            for (int step = 0; step < 3; ++step) {
              for (int a = 0; a < 3; ++a) corner[step + 1][a] = corner[step][a];
              corner[step + 1][perm[step]] += 1;
            }
            std::vector<Index> tet(4);
            for (int v = 0; v < 4; ++v)
              tet[static_cast<std::size_t>(v)] =
                  lex_index(corner[v][0], corner[v][1], corner[v][2], nx, ny);
            // fix orientation so the signed volume is positive
            Eigen::Matrix3d edges;
            for (int c = 0; c < 3; ++c)
              edges.col(c) = mesh.vertices[static_cast<std::size_t>(tet[static_cast<std::size_t>(c) + 1])] -
                             mesh.vertices[static_cast<std::size_t>(tet[0])];
            if (edges.determinant() < 0.0) std::swap(tet[2], tet[3]);
            mesh.elements.push_back(std::move(tet));
          }
        }
  }
  return mesh;
}

StructuredMesh make_structured_mesh(int dim, Index n) {
  return make_box_mesh(dim, {n, n, n}, {1.0, 1.0, 1.0});
}

} // namespace atamg
