#ifndef ATAMG_COARSENING_HPP
#define ATAMG_COARSENING_HPP

#include "atamg/topology.hpp"

#include <vector>

namespace atamg {

struct CoarseningParams {
  double sigma = 20.0;      // acceptance threshold, > 1
  int delta = 1;            // 0 or 1: neighborhood stabilization on/off
  bool pick_by_scalar = true; // R: candidate by mu_s (true) or mu_p (false)
  int rounds = 2;           // matching rounds per level, >= 1
  bool robust = true;       // false: accept on mu_s alone (no mu_p / mu_g)
  double rank_tol = kRankTol;
};

/// Per coarse vertex, an orthonormal basis of the range of the diagonal
/// block of a level matrix; the assembled block diagonal E satisfies
/// E^T E = I.
struct VertexKernelBasis {
  std::vector<Matrix> range; // k x n_i, n_i <= k

  Index total_columns() const;
  /// y = E^T x (restriction onto the per-vertex ranges).
  Vector restrict_vec(const Vector &x) const;
  /// y = E x.
  Vector prolong_vec(const Vector &x) const;
  /// dense I - E E^T over the full block layout.
  Matrix complement_projector(Index k) const;
};

/// Tentative prolongation: block row i in agglomerate J carries the
/// kernel-coordinate transport Q^{v_J -> v_i}; dropped rows stay empty.
/// With `finest_elasticity` only the displacement rows are kept (d x k).
BlockSparseMatrix build_tentative_prolongation(const AuxTopology &topology,
                                               const Agglomeration &agg,
                                               bool finest_elasticity = false);

/// mu_D: largest generalized eigenvalue of (D_ii, M^i); +infinity when the
/// vertex weight has a kernel direction carrying diagonal energy.
ExtendedReal mu_dirichlet(const Matrix &diag_block, const Matrix &vertex_weight,
                          double tol = kRankTol);

/// The measures below are evaluated on a fixed topology; `ctx` caches the
/// diagonal blocks of the assembled auxiliary matrix and the adjacency.
struct MeasureContext {
  const AuxTopology *topology = nullptr;
  std::vector<Matrix> diag;                    // auxiliary matrix diagonal blocks
  std::vector<std::vector<Index>> adjacency;   // sorted neighbor lists
  std::vector<std::vector<Index>> edge_of;     // edge index per (vertex, neighbor slot)
  std::vector<double> strongest_trace;         // max over incident edges of tr E
  double rank_tol = kRankTol;

  explicit MeasureContext(const AuxTopology &t, double tol = kRankTol);

  const AuxEdge *edge(Index i, Index j) const;
};

/// Trace quotient candidate measure; +infinity for tr E^ij = 0 or a
/// missing edge.
ExtendedReal mu_scalar(const MeasureContext &ctx, Index i, Index j);

/// Pairwise eigenvalue measure of the harmonic-mean pencil, with the
/// delta/2 common-neighbor stabilization.
ExtendedReal mu_pair(const MeasureContext &ctx, Index i, Index j, int delta);

/// Left- and right-hand quadratic forms of the agglomerate criterion over
/// the stacked dofs of C (k|C| each); the right side carries vertex
/// weights, internal edges, and the per-outside-neighbor generalized
/// Schur complements when delta = 1.
struct AgglomerateForms {
  Matrix lhs;
  Matrix rhs;
};
AgglomerateForms agglomerate_forms(const MeasureContext &ctx, const std::vector<Index> &members,
                                   int delta);

/// Smallest constant bounding the left form by the right one; +infinity on
/// range mismatch.
ExtendedReal mu_agglomerate_value(const MeasureContext &ctx, const std::vector<Index> &members,
                                  int delta);

/// PSD factorization check of sigma * rhs - lhs, avoiding the eigensolve.
bool mu_agglomerate_check(const MeasureContext &ctx, const std::vector<Index> &members,
                          int delta, double sigma);

/// Cuthill-McKee ordering: BFS from a minimum-degree seed per component,
/// neighbors visited by increasing degree; components by smallest index.
std::vector<Index> cuthill_mckee(const std::vector<std::vector<Index>> &adjacency);

/// One matching round over the current-level vertices. `order` gives the
/// iteration (and tie-break) sequence; `fine_members` maps each current
/// vertex to the original fine vertices it represents; `fine_ctx` is used
/// for the agglomerate confirmation. Returns groups of current-vertex
/// indices (pairs first in match order, then passed-through singletons).
std::vector<std::vector<Index>> match_round(const MeasureContext &ctx,
                                            const MeasureContext &fine_ctx,
                                            const std::vector<std::vector<Index>> &fine_members,
                                            const std::vector<Index> &order,
                                            const CoarseningParams &params);

/// Successive matching: Dirichlet seeding, N rounds with intermediate
/// coarse weights, Cuthill-McKee first-round ordering and reverse
/// insertion order afterwards.
Agglomeration successive_matching(const AuxTopology &topology, const CoarseningParams &params);

/// Orthonormal range bases of the diagonal blocks of a level matrix.
VertexKernelBasis vertex_kernel_bases(const BlockSparseMatrix &a, double tol = kRankTol);

} // namespace atamg

#endif
