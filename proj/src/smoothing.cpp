#include "atamg/smoothing.hpp"

#include "atamg/dense.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace atamg {

FilteredAuxMatrix build_filtered_aux(const AuxTopology &topology, const BlockSparseMatrix &a,
                                     const Agglomeration &agg, const SmoothingParams &params) {
  const Index n = topology.vertex_count();
  const Index k = topology.k();
  if (a.block_rows() != n)
    throw std::invalid_argument("build_filtered_aux: matrix/topology vertex mismatch");
  const bool rows_match = a.block_height() == k && a.block_width() == k;
  const std::vector<Index> v2c = agg.vertex_to_coarse(n);
  const MeasureContext ctx(topology, params.rank_tol);

  FilteredAuxMatrix f;
  f.classes.assign(static_cast<std::size_t>(n), VertexClass::Auxiliary);
  f.filtered.assign(static_cast<std::size_t>(n), {});

  BlockSparseBuilder builder(n, n, k, k);
  for (Index i = 0; i < n; ++i) {
    if (v2c[static_cast<std::size_t>(i)] < 0) {
      f.classes[static_cast<std::size_t>(i)] = VertexClass::Dropped;
      builder.add(i, i, Matrix::Identity(k, k));
      continue;
    }
    if (rows_match && a.row_end(i) - a.row_begin(i) <= params.cap + 1) {
      f.classes[static_cast<std::size_t>(i)] = VertexClass::Standard;
      for (Index e = a.row_begin(i); e < a.row_end(i); ++e)
        builder.add(i, a.col(e), Matrix(a.block(e)));
      continue;
    }

    // auxiliary row: cap strongest non-dropped edges by trace
    struct Nbr {
      Index v;
      double trace;
    };
    std::vector<Nbr> nbrs;
    for (std::size_t s = 0; s < ctx.adjacency[static_cast<std::size_t>(i)].size(); ++s) {
      const Index u = ctx.adjacency[static_cast<std::size_t>(i)][s];
      if (v2c[static_cast<std::size_t>(u)] < 0) continue;
      const Index e = ctx.edge_of[static_cast<std::size_t>(i)][s];
      nbrs.push_back({u, topology.edges[static_cast<std::size_t>(e)].weight.trace()});
    }
    std::sort(nbrs.begin(), nbrs.end(), [](const Nbr &x, const Nbr &y) {
      return x.trace != y.trace ? x.trace > y.trace : x.v < y.v;
    });
    const std::size_t take = std::min<std::size_t>(nbrs.size(), static_cast<std::size_t>(params.cap));
    std::vector<Index> sel;
    for (std::size_t s = 0; s < take; ++s) sel.push_back(nbrs[s].v);

    const auto same_agg = [&](Index u) {
      return v2c[static_cast<std::size_t>(u)] == v2c[static_cast<std::size_t>(i)];
    };
    if (!sel.empty() && std::none_of(sel.begin(), sel.end(), same_agg)) {
      for (const Nbr &nb : nbrs)
        if (same_agg(nb.v)) {
          sel.back() = nb.v;
          break;
        }
    }
    std::sort(sel.begin(), sel.end());
    f.filtered[static_cast<std::size_t>(i)] = sel;

    Matrix diag = Matrix::Zero(k, k);
    for (Index u : sel) {
      const AuxEdge *e = ctx.edge(i, u);
      const Matrix qiu = topology.q_root(i, u);
      const Matrix qui = topology.q_root(u, i);
      diag += qiu.transpose() * e->weight * qiu;
      builder.add(i, u, (-qiu.transpose() * e->weight * qui).eval());
    }
    builder.add(i, i, diag);
  }
  f.matrix = builder.compress();
  f.diag_pinv.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    f.diag_pinv.push_back(pseudo_inverse(f.matrix.block_at(i, i), params.rank_tol));
  return f;
}

BlockSparseMatrix smooth_prolongation(const FilteredAuxMatrix &filtered,
                                      const AuxTopology &topology, const Agglomeration &agg,
                                      const BlockSparseMatrix &tentative, double omega) {
  const Index n = topology.vertex_count();
  const Index k = topology.k();
  const Index out_rows = tentative.block_height();
  if (tentative.block_rows() != n || tentative.block_width() != k)
    throw std::invalid_argument("smooth_prolongation: shape mismatch");
  const std::vector<Index> v2c = agg.vertex_to_coarse(n);

  // full k-dof transport rows of the tentative prolongation
  const auto full_row = [&](Index v) -> Matrix {
    const Index g = v2c[static_cast<std::size_t>(v)];
    return topology.q_translate(topology.positions[static_cast<std::size_t>(v)] -
                                agg.coarse_positions[static_cast<std::size_t>(g)]);
  };

  BlockSparseBuilder out(n, agg.coarse_count(), out_rows, k);
  const BlockSparseMatrix &a0 = filtered.matrix;
  for (Index i = 0; i < n; ++i) {
    if (filtered.classes[static_cast<std::size_t>(i)] == VertexClass::Dropped) continue;
    std::map<Index, Matrix> row; // coarse id -> k x k block in transport space
    row[v2c[static_cast<std::size_t>(i)]] = full_row(i);
    for (Index e = a0.row_begin(i); e < a0.row_end(i); ++e) {
      const Index j = a0.col(e);
      const Index g = v2c[static_cast<std::size_t>(j)];
      if (g < 0) continue; // dropped columns have empty tentative rows
      const Matrix term = filtered.diag_pinv[static_cast<std::size_t>(i)] *
                          (Matrix(a0.block(e)) * full_row(j));
      auto it = row.find(g);
      if (it == row.end())
        row.emplace(g, (-omega * term).eval());
      else
        it->second -= omega * term;
    }
    for (const auto &[g, block] : row) out.add(i, g, block.topRows(out_rows));
  }
  return out.compress();
}

} // namespace atamg
