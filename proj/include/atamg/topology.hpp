#ifndef ATAMG_TOPOLOGY_HPP
#define ATAMG_TOPOLOGY_HPP

#include "atamg/block_sparse.hpp"

#include <ostream>
#include <vector>

namespace atamg {

enum class TopologyKind { Scalar, Elasticity };

/// Closed-form transform of per-vertex kernel coordinates between two
/// positions: the identity for scalar problems, a translation acting on
/// the rotational components for elasticity. `root` selects the square
/// root of the transform (half translation).
struct QTransform {
  TopologyKind kind = TopologyKind::Scalar;
  int dim = 0;          // spatial dimension (elasticity only)
  Vec3 translation = Vec3::Zero();
  bool root = false;

  static QTransform scalar() { return QTransform{}; }
  static QTransform full(int dim, const Vec3 &t) {
    return QTransform{TopologyKind::Elasticity, dim, t, false};
  }
  static QTransform half(int dim, const Vec3 &t) {
    return QTransform{TopologyKind::Elasticity, dim, t, true};
  }
};

/// Dofs per vertex: 1 for scalar, d + d(d-1)/2 for elasticity in dimension d.
inline Index dofs_per_vertex(TopologyKind kind, int dim) {
  if (kind == TopologyKind::Scalar) return 1;
  return dim + dim * (dim - 1) / 2;
}

/// Dense matrix of a QTransform (k x k, block upper triangular).
Matrix q_matrix(const QTransform &transform);

/// Cross-product matrix: skew(t) r = t x r. Shape d x (k - d).
Matrix skew_matrix(int dim, const Vec3 &t);

struct AuxEdge {
  Index i = 0, j = 0; // undirected, stored with i < j
  Matrix weight;      // k x k symmetric PSD
};

/// Vertices with positions and PSD weight matrices M^i, undirected edges
/// with PSD weight matrices E^ij, and Dirichlet flags. The auxiliary
/// matrix and the multilevel coarsening are both driven by this object.
struct AuxTopology {
  TopologyKind kind = TopologyKind::Scalar;
  int dim = 0;
  std::vector<Vec3> positions;
  std::vector<Matrix> vertex_weights; // M^i
  std::vector<AuxEdge> edges;
  std::vector<bool> dirichlet;

  Index vertex_count() const { return static_cast<Index>(positions.size()); }
  Index edge_count() const { return static_cast<Index>(edges.size()); }
  Index k() const { return dofs_per_vertex(kind, dim); }

  /// Full transform of kernel coordinates from vertex a to vertex b.
  Matrix q_full(Index a, Index b) const;
  /// Root transform from vertex a toward the midpoint of (a, b).
  Matrix q_root(Index a, Index b) const;
  /// Transform for an explicit translation.
  Matrix q_translate(const Vec3 &t) const;

  /// Neighbor lists from the edge set, sorted ascending.
  std::vector<std::vector<Index>> adjacency() const;

  /// Diagonal blocks of the auxiliary matrix: M^i + sum_j Q^ij,T E^ij Q^ij.
  std::vector<Matrix> diagonal_blocks() const;

  /// Validates invariants (PSD weights, no duplicate edges, finite data).
  void check(double tol = kRankTol) const;

  /// Text dump: `vtx i x y z m_00 ...`, `edge i j e_00 ...`, `dir i`.
  void write(std::ostream &os) const;
};

/// Scalar splitting E^ij = |A_ij|, M^i = max(0, A_ii - sum |A_ij|); exact
/// for M-matrices with nonnegative row sums.
AuxTopology build_scalar_topology(const BlockSparseMatrix &a, const std::vector<Vec3> &positions,
                                  const std::vector<bool> &dirichlet);

/// Elasticity splitting: per off-diagonal block a rank-1-in-displacement
/// edge matrix c^ij [t (x) t, 0; 0, 0] with the absolute-entry-sum scaling
/// c^ij = (1/d^2) sum |(A_ij)_lm|; all vertex weights zero.
AuxTopology build_elasticity_topology(const BlockSparseMatrix &a,
                                      const std::vector<Vec3> &positions,
                                      const std::vector<bool> &dirichlet);

/// Assembled auxiliary matrix (k x k blocks, symmetric PSD).
BlockSparseMatrix assemble_aux_matrix(const AuxTopology &topology);

/// sqrt( sum_i |u_i|^2_{M^i} + sum_edges |Q^ij u_i - Q^ji u_j|^2_{E^ij} ),
/// equal to sqrt(u^T A_hat u).
double discrete_energy(const AuxTopology &topology, const Vector &u);

/// Partition of the non-Dirichlet vertices plus the dropped set, with one
/// coarse position per agglomerate.
struct Agglomeration {
  std::vector<std::vector<Index>> agglomerates; // disjoint, each nonempty
  std::vector<bool> dropped;                    // true for every vertex outside all agglomerates
  std::vector<Vec3> coarse_positions;

  Index coarse_count() const { return static_cast<Index>(agglomerates.size()); }

  /// agglomerate id per vertex, -1 for dropped.
  std::vector<Index> vertex_to_coarse(Index fine_count) const;

  /// centroids of the member positions.
  static std::vector<Vec3> centroids(const std::vector<std::vector<Index>> &agglomerates,
                                     const std::vector<Vec3> &positions);
};

/// Coarse topology with exact Galerkin commutation: assembling the result
/// reproduces P^T A_hat P for the tentative prolongation of the same
/// agglomeration.
AuxTopology coarsen_topology(const AuxTopology &topology, const Agglomeration &agg);

} // namespace atamg

#endif
