#ifndef ATAMG_SMOOTHING_HPP
#define ATAMG_SMOOTHING_HPP

#include "atamg/coarsening.hpp"
#include "atamg/topology.hpp"

#include <vector>

namespace atamg {

struct SmoothingParams {
  double omega = 2.0 / 3.0; // damping in (0, 1]
  Index cap = 4;            // max filtered neighbors per vertex, >= 0
  double rank_tol = kRankTol;
};

enum class VertexClass : char { Standard, Auxiliary, Dropped };

/// Filtered auxiliary operator used to smooth a tentative prolongation:
/// standard rows copy the level matrix, auxiliary rows keep only the
/// capped strongest edges, dropped rows are the identity.
struct FilteredAuxMatrix {
  std::vector<VertexClass> classes;
  std::vector<std::vector<Index>> filtered; // neighbor sets for auxiliary rows
  BlockSparseMatrix matrix;                 // assembled filtered operator
  std::vector<Matrix> diag_pinv;            // pseudo-inverted diagonal blocks
};

/// Classify vertices and assemble the filtered operator. Rows whose level
/// matrix has at most cap + 1 block entries stay standard; the rest keep
/// the cap strongest neighbors by tr E^ij, always including an
/// in-agglomerate neighbor when one exists. On the finest elasticity level
/// (level matrix d x d, topology k-dof) every non-dropped row is auxiliary.
FilteredAuxMatrix build_filtered_aux(const AuxTopology &topology, const BlockSparseMatrix &a,
                                     const Agglomeration &agg, const SmoothingParams &params);

/// P_s = (I - omega D0^dagger A0) P, evaluated against the full-transport
/// tentative rows so kernel vectors pass through unchanged; for a d x k
/// finest-level prolongation the result is restricted to displacement rows.
BlockSparseMatrix smooth_prolongation(const FilteredAuxMatrix &filtered,
                                      const AuxTopology &topology, const Agglomeration &agg,
                                      const BlockSparseMatrix &tentative, double omega);

} // namespace atamg

#endif
