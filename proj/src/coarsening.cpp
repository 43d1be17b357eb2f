#include "atamg/coarsening.hpp"

#include "atamg/dense.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace atamg {

namespace {

/// Express a quadratic form given in coordinates at `from` in coordinates
/// at `to`: Q(from - to)^T F Q(from - to).
Matrix express_at(const AuxTopology &t, const Matrix &form, const Vec3 &from, const Vec3 &to) {
  if (t.kind == TopologyKind::Scalar) return form;
  const Matrix q = t.q_translate(from - to);
  return q.transpose() * form * q;
}

} // namespace

Index VertexKernelBasis::total_columns() const {
  Index n = 0;
  for (const Matrix &b : range) n += b.cols();
  return n;
}

Vector VertexKernelBasis::restrict_vec(const Vector &x) const {
  Vector y(total_columns());
  Index off_x = 0, off_y = 0;
  for (const Matrix &b : range) {
    y.segment(off_y, b.cols()) = b.transpose() * x.segment(off_x, b.rows());
    off_x += b.rows();
    off_y += b.cols();
  }
  return y;
}

Vector VertexKernelBasis::prolong_vec(const Vector &x) const {
  Index rows = 0;
  for (const Matrix &b : range) rows += b.rows();
  Vector y(rows);
  Index off_x = 0, off_y = 0;
  for (const Matrix &b : range) {
    y.segment(off_y, b.rows()) = b * x.segment(off_x, b.cols());
    off_x += b.cols();
    off_y += b.rows();
  }
  return y;
}

Matrix VertexKernelBasis::complement_projector(Index k) const {
  const Index n = static_cast<Index>(range.size()) * k;
  Matrix p = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < range.size(); ++i) {
    const Matrix &b = range[i];
    p.block(static_cast<Index>(i) * k, static_cast<Index>(i) * k, k, k) =
        Matrix::Identity(k, k) - b * b.transpose();
  }
  return p;
}

BlockSparseMatrix build_tentative_prolongation(const AuxTopology &topology,
                                               const Agglomeration &agg,
                                               bool finest_elasticity) {
  const Index k = topology.k();
  const Index rows = finest_elasticity ? topology.dim : k;
  BlockSparseBuilder builder(topology.vertex_count(), agg.coarse_count(), rows, k);
  for (std::size_t g = 0; g < agg.agglomerates.size(); ++g)
    for (Index v : agg.agglomerates[g]) {
      const Matrix q = topology.q_translate(topology.positions[static_cast<std::size_t>(v)] -
                                            agg.coarse_positions[g]);
      builder.add(v, static_cast<Index>(g), q.topRows(rows));
    }
  return builder.compress();
}

ExtendedReal mu_dirichlet(const Matrix &diag_block, const Matrix &vertex_weight, double tol) {
  return gen_eig_sup(diag_block, vertex_weight, tol);
}

MeasureContext::MeasureContext(const AuxTopology &t, double tol)
    : topology(&t), diag(t.diagonal_blocks()), rank_tol(tol) {
  const std::size_t n = static_cast<std::size_t>(t.vertex_count());
  adjacency.assign(n, {});
  edge_of.assign(n, {});
  strongest_trace.assign(n, 0.0);
  std::vector<std::vector<std::pair<Index, Index>>> tmp(n);
  for (Index e = 0; e < t.edge_count(); ++e) {
    const AuxEdge &edge = t.edges[static_cast<std::size_t>(e)];
    tmp[static_cast<std::size_t>(edge.i)].emplace_back(edge.j, e);
    tmp[static_cast<std::size_t>(edge.j)].emplace_back(edge.i, e);
    const double tr = edge.weight.trace();
    strongest_trace[static_cast<std::size_t>(edge.i)] =
        std::max(strongest_trace[static_cast<std::size_t>(edge.i)], tr);
    strongest_trace[static_cast<std::size_t>(edge.j)] =
        std::max(strongest_trace[static_cast<std::size_t>(edge.j)], tr);
  }
  for (std::size_t v = 0; v < n; ++v) {
    std::sort(tmp[v].begin(), tmp[v].end());
    adjacency[v].reserve(tmp[v].size());
    edge_of[v].reserve(tmp[v].size());
    for (const auto &[j, e] : tmp[v]) {
      adjacency[v].push_back(j);
      edge_of[v].push_back(e);
    }
  }
}

const AuxEdge *MeasureContext::edge(Index i, Index j) const {
  const auto &nbrs = adjacency[static_cast<std::size_t>(i)];
  const auto it = std::lower_bound(nbrs.begin(), nbrs.end(), j);
  if (it == nbrs.end() || *it != j) return nullptr;
  const Index e = edge_of[static_cast<std::size_t>(i)][static_cast<std::size_t>(it - nbrs.begin())];
  return &topology->edges[static_cast<std::size_t>(e)];
}

ExtendedReal mu_scalar(const MeasureContext &ctx, Index i, Index j) {
  const AuxEdge *e = ctx.edge(i, j);
  if (!e) return ExtendedReal::infinity();
  const double denom = e->weight.trace();
  if (denom <= 0.0) return ExtendedReal::infinity();
  const auto side = [&](Index v) {
    return std::max(ctx.topology->vertex_weights[static_cast<std::size_t>(v)].trace(),
                    ctx.strongest_trace[static_cast<std::size_t>(v)]);
  };
  return ExtendedReal(std::sqrt(side(i) * side(j)) / denom);
}

namespace {

/// Common non-Dirichlet neighbors of i and j, ascending.
std::vector<Index> common_neighbors(const MeasureContext &ctx, Index i, Index j) {
  const auto &a = ctx.adjacency[static_cast<std::size_t>(i)];
  const auto &b = ctx.adjacency[static_cast<std::size_t>(j)];
  std::vector<Index> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  std::erase_if(out, [&](Index l) { return ctx.topology->dirichlet[static_cast<std::size_t>(l)]; });
  return out;
}

} // namespace

ExtendedReal mu_pair(const MeasureContext &ctx, Index i, Index j, int delta) {
  const AuxTopology &t = *ctx.topology;
  const AuxEdge *eij = ctx.edge(i, j);
  if (!eij) return ExtendedReal::infinity();
  const Vec3 &xi = t.positions[static_cast<std::size_t>(i)];
  const Vec3 &xj = t.positions[static_cast<std::size_t>(j)];
  const Vec3 mid = 0.5 * (xi + xj);

  const Matrix lhs = harmonic_mean(
      express_at(t, ctx.diag[static_cast<std::size_t>(i)], xi, mid),
      express_at(t, ctx.diag[static_cast<std::size_t>(j)], xj, mid), ctx.rank_tol);

  Matrix rhs = eij->weight;
  if (delta != 0) {
    for (Index l : common_neighbors(ctx, i, j)) {
      const AuxEdge *eil = ctx.edge(i, l);
      const AuxEdge *ejl = ctx.edge(j, l);
      const Vec3 &xl = t.positions[static_cast<std::size_t>(l)];
      const Matrix h = harmonic_mean(
          express_at(t, eil->weight, 0.5 * (xi + xl), xl),
          express_at(t, ejl->weight, 0.5 * (xj + xl), xl), ctx.rank_tol);
      rhs += 0.5 * express_at(t, h, xl, mid);
    }
  }
  return gen_eig_sup(lhs, rhs, ctx.rank_tol);
}

AgglomerateForms agglomerate_forms(const MeasureContext &ctx, const std::vector<Index> &members,
                                   int delta) {
  const AuxTopology &t = *ctx.topology;
  const Index k = t.k();
  const Index m = static_cast<Index>(members.size());
  std::vector<Index> slot(static_cast<std::size_t>(t.vertex_count()), -1);
  for (Index s = 0; s < m; ++s)
    slot[static_cast<std::size_t>(members[static_cast<std::size_t>(s)])] = s;

  Vec3 center = Vec3::Zero();
  for (Index v : members) center += t.positions[static_cast<std::size_t>(v)];
  center /= static_cast<double>(m);

  // left side: best kernel-coordinate fit in the D-hat seminorm
  Matrix dhat = Matrix::Zero(m * k, m * k);
  Matrix p = Matrix::Zero(m * k, k);
  for (Index s = 0; s < m; ++s) {
    const Index v = members[static_cast<std::size_t>(s)];
    dhat.block(s * k, s * k, k, k) = ctx.diag[static_cast<std::size_t>(v)];
    p.block(s * k, 0, k, k) = t.q_translate(t.positions[static_cast<std::size_t>(v)] - center);
  }
  const Matrix coarse_gram = p.transpose() * dhat * p;
  const Matrix dp = dhat * p;
  Matrix lhs = dhat - dp * pseudo_inverse(coarse_gram, ctx.rank_tol) * dp.transpose();
  lhs = 0.5 * (lhs + lhs.transpose());

  // right side: vertex weights, internal edges, optional ghost-neighbor
  // Schur complements at weight 1/2
  Matrix rhs = Matrix::Zero(m * k, m * k);
  for (Index s = 0; s < m; ++s)
    rhs.block(s * k, s * k, k, k) +=
        t.vertex_weights[static_cast<std::size_t>(members[static_cast<std::size_t>(s)])];

  std::vector<Index> outside;
  for (Index s = 0; s < m; ++s) {
    const Index v = members[static_cast<std::size_t>(s)];
    for (Index u : ctx.adjacency[static_cast<std::size_t>(v)]) {
      const Index su = slot[static_cast<std::size_t>(u)];
      if (su >= 0) {
        if (u > v) {
          const AuxEdge *e = ctx.edge(v, u);
          const Matrix qvu = t.q_root(v, u);
          const Matrix quv = t.q_root(u, v);
          rhs.block(s * k, s * k, k, k) += qvu.transpose() * e->weight * qvu;
          rhs.block(su * k, su * k, k, k) += quv.transpose() * e->weight * quv;
          rhs.block(s * k, su * k, k, k) -= qvu.transpose() * e->weight * quv;
          rhs.block(su * k, s * k, k, k) -= quv.transpose() * e->weight * qvu;
        }
      } else if (!t.dirichlet[static_cast<std::size_t>(u)]) {
        outside.push_back(u);
      }
    }
  }
  std::sort(outside.begin(), outside.end());
  outside.erase(std::unique(outside.begin(), outside.end()), outside.end());

  if (delta != 0) {
    for (Index l : outside) {
      std::vector<Index> touching;
      for (Index s = 0; s < m; ++s)
        if (ctx.edge(members[static_cast<std::size_t>(s)], l)) touching.push_back(s);
      if (touching.size() < 2) continue; // single-edge stars are eliminated exactly
      const Index nt = static_cast<Index>(touching.size());
      Matrix scc = Matrix::Zero(nt * k, nt * k);
      Matrix scw = Matrix::Zero(nt * k, k);
      Matrix sww = Matrix::Zero(k, k);
      for (Index ts = 0; ts < nt; ++ts) {
        const Index v = members[static_cast<std::size_t>(touching[static_cast<std::size_t>(ts)])];
        const AuxEdge *e = ctx.edge(v, l);
        const Matrix qvl = t.q_root(v, l);
        const Matrix qlv = t.q_root(l, v);
        scc.block(ts * k, ts * k, k, k) = qvl.transpose() * e->weight * qvl;
        scw.block(ts * k, 0, k, k) = -qvl.transpose() * e->weight * qlv;
        sww += qlv.transpose() * e->weight * qlv;
      }
      const Matrix schur = scc - scw * pseudo_inverse(sww, ctx.rank_tol) * scw.transpose();
      for (Index a = 0; a < nt; ++a)
        for (Index b = 0; b < nt; ++b)
          rhs.block(touching[static_cast<std::size_t>(a)] * k,
                    touching[static_cast<std::size_t>(b)] * k, k, k) +=
              0.5 * schur.block(a * k, b * k, k, k);
    }
  }
  rhs = 0.5 * (rhs + rhs.transpose()).eval();
  return {std::move(lhs), std::move(rhs)};
}

ExtendedReal mu_agglomerate_value(const MeasureContext &ctx, const std::vector<Index> &members,
                                  int delta) {
  if (members.size() == 1) return ExtendedReal(0.0);
  const AgglomerateForms forms = agglomerate_forms(ctx, members, delta);
  return gen_eig_sup(forms.lhs, forms.rhs, ctx.rank_tol);
}

bool mu_agglomerate_check(const MeasureContext &ctx, const std::vector<Index> &members,
                          int delta, double sigma) {
  if (members.size() == 1) return true;
  const AgglomerateForms forms = agglomerate_forms(ctx, members, delta);
  return psd_check((sigma * forms.rhs - forms.lhs).eval(), ctx.rank_tol);
}

std::vector<Index> cuthill_mckee(const std::vector<std::vector<Index>> &adjacency) {
  const Index n = static_cast<Index>(adjacency.size());
  std::vector<bool> visited(static_cast<std::size_t>(n), false);
  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(n));
  const auto degree = [&](Index v) {
    return static_cast<Index>(adjacency[static_cast<std::size_t>(v)].size());
  };

  for (Index scan = 0; scan < n; ++scan) {
    if (visited[static_cast<std::size_t>(scan)]) continue;
    // collect the component, then seed from its minimum-degree vertex
    std::vector<Index> component{scan};
    std::vector<bool> in_comp(static_cast<std::size_t>(n), false);
    in_comp[static_cast<std::size_t>(scan)] = true;
    for (std::size_t head = 0; head < component.size(); ++head)
      for (Index u : adjacency[static_cast<std::size_t>(component[head])])
        if (!in_comp[static_cast<std::size_t>(u)]) {
          in_comp[static_cast<std::size_t>(u)] = true;
          component.push_back(u);
        }
    Index seed = component.front();
    for (Index v : component)
      if (degree(v) < degree(seed) || (degree(v) == degree(seed) && v < seed)) seed = v;

    std::vector<Index> queue{seed};
    visited[static_cast<std::size_t>(seed)] = true;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const Index v = queue[head];
      order.push_back(v);
      std::vector<Index> next;
      for (Index u : adjacency[static_cast<std::size_t>(v)])
        if (!visited[static_cast<std::size_t>(u)]) next.push_back(u);
      std::sort(next.begin(), next.end(), [&](Index a, Index b) {
        return degree(a) != degree(b) ? degree(a) < degree(b) : a < b;
      });
      for (Index u : next) {
        visited[static_cast<std::size_t>(u)] = true;
        queue.push_back(u);
      }
    }
  }
  return order;
}

std::vector<std::vector<Index>> match_round(const MeasureContext &ctx,
                                            const MeasureContext &fine_ctx,
                                            const std::vector<std::vector<Index>> &fine_members,
                                            const std::vector<Index> &order,
                                            const CoarseningParams &params) {
  const Index n = ctx.topology->vertex_count();
  std::vector<Index> order_pos(static_cast<std::size_t>(n), 0);
  for (std::size_t p = 0; p < order.size(); ++p)
    order_pos[static_cast<std::size_t>(order[p])] = static_cast<Index>(p);

  std::vector<bool> matched(static_cast<std::size_t>(n), false);
  std::vector<std::vector<Index>> pairs;
  std::vector<std::vector<Index>> singles;

  for (Index v : order) {
    if (matched[static_cast<std::size_t>(v)]) continue;
    matched[static_cast<std::size_t>(v)] = true;

    struct Candidate {
      Index u;
      double mu_s;
    };
    std::vector<Candidate> candidates;
    for (Index u : ctx.adjacency[static_cast<std::size_t>(v)]) {
      if (matched[static_cast<std::size_t>(u)]) continue;
      const ExtendedReal ms = mu_scalar(ctx, v, u);
      if (ms < params.sigma) candidates.push_back({u, ms.value()});
    }

    const auto better = [&](double ma, Index ua, double mb, Index ub) {
      if (ma != mb) return ma < mb;
      return order_pos[static_cast<std::size_t>(ua)] < order_pos[static_cast<std::size_t>(ub)];
    };

    bool paired = false;
    if (!params.robust) {
      // scalar-only mode: accept the strongest mu_s candidate outright
      if (!candidates.empty()) {
        const Candidate *best = &candidates.front();
        for (const Candidate &c : candidates)
          if (better(c.mu_s, c.u, best->mu_s, best->u)) best = &c;
        matched[static_cast<std::size_t>(best->u)] = true;
        pairs.push_back({v, best->u});
        paired = true;
      }
    } else {
      std::vector<double> mu_p_cache;
      if (!params.pick_by_scalar) {
        mu_p_cache.resize(candidates.size());
        for (std::size_t c = 0; c < candidates.size(); ++c) {
          const ExtendedReal mp = mu_pair(ctx, v, candidates[c].u, params.delta);
          mu_p_cache[c] = mp.is_finite() ? mp.value()
                                         : std::numeric_limits<double>::infinity();
        }
      }
      std::vector<bool> alive(candidates.size(), true);
      for (std::size_t remaining = candidates.size(); remaining > 0; --remaining) {
        std::size_t best = candidates.size();
        for (std::size_t c = 0; c < candidates.size(); ++c) {
          if (!alive[c]) continue;
          const double score = params.pick_by_scalar ? candidates[c].mu_s : mu_p_cache[c];
          if (best == candidates.size() ||
              better(score, candidates[c].u,
                     params.pick_by_scalar ? candidates[best].mu_s : mu_p_cache[best],
                     candidates[best].u))
            best = c;
        }
        const Index u = candidates[best].u;
        const ExtendedReal mp = mu_pair(ctx, v, u, params.delta);
        bool ok = mp < params.sigma;
        if (ok) {
          std::vector<Index> merged = fine_members[static_cast<std::size_t>(v)];
          merged.insert(merged.end(), fine_members[static_cast<std::size_t>(u)].begin(),
                        fine_members[static_cast<std::size_t>(u)].end());
          if (merged.size() > 2) {
            std::sort(merged.begin(), merged.end());
            ok = mu_agglomerate_check(fine_ctx, merged, params.delta, params.sigma);
          }
        }
        if (ok) {
          matched[static_cast<std::size_t>(u)] = true;
          pairs.push_back({v, u});
          paired = true;
          break;
        }
        alive[best] = false;
      }
    }
    if (!paired) singles.push_back({v});
  }

  std::vector<std::vector<Index>> out = std::move(pairs);
  out.insert(out.end(), singles.begin(), singles.end());
  return out;
}

Agglomeration successive_matching(const AuxTopology &topology, const CoarseningParams &params) {
  const Index n = topology.vertex_count();
  MeasureContext full_ctx(topology, params.rank_tol);

  std::vector<bool> dropped = topology.dirichlet;
  for (Index v = 0; v < n; ++v) {
    if (dropped[static_cast<std::size_t>(v)]) continue;
    if (mu_dirichlet(full_ctx.diag[static_cast<std::size_t>(v)],
                     topology.vertex_weights[static_cast<std::size_t>(v)],
                     params.rank_tol) < params.sigma)
      dropped[static_cast<std::size_t>(v)] = true;
  }

  // Fold Dirichlet/dropped couplings once; the result is the reference
  // level every later measure sees (vertices renumbered to 0..m-1).
  std::vector<Index> kept;
  for (Index v = 0; v < n; ++v)
    if (!dropped[static_cast<std::size_t>(v)]) kept.push_back(v);

  Agglomeration singletons;
  for (Index v : kept) singletons.agglomerates.push_back({v});
  singletons.dropped = dropped;
  singletons.coarse_positions = Agglomeration::centroids(singletons.agglomerates, topology.positions);

  const AuxTopology reference = coarsen_topology(topology, singletons);
  const MeasureContext reference_ctx(reference, params.rank_tol);

  AuxTopology current = reference;
  std::vector<std::vector<Index>> members; // reference-vertex ids per current vertex
  for (Index v = 0; v < static_cast<Index>(kept.size()); ++v) members.push_back({v});

  for (int round = 1; round <= params.rounds; ++round) {
    const MeasureContext ctx(current, params.rank_tol);
    std::vector<Index> order;
    if (round == 1) {
      order = cuthill_mckee(ctx.adjacency);
    } else {
      // reverse of the insertion order from the previous round
      order.resize(static_cast<std::size_t>(current.vertex_count()));
      std::iota(order.rbegin(), order.rend(), Index{0});
    }
    const auto groups = match_round(ctx, reference_ctx, members, order, params);
    const bool any_pair =
        std::any_of(groups.begin(), groups.end(), [](const auto &g) { return g.size() > 1; });

    std::vector<std::vector<Index>> new_members;
    new_members.reserve(groups.size());
    for (const auto &g : groups) {
      std::vector<Index> merged;
      for (Index cur : g)
        merged.insert(merged.end(), members[static_cast<std::size_t>(cur)].begin(),
                      members[static_cast<std::size_t>(cur)].end());
      std::sort(merged.begin(), merged.end());
      new_members.push_back(std::move(merged));
    }
    members = std::move(new_members);

    if (round < params.rounds && any_pair) {
      Agglomeration step;
      step.agglomerates = groups;
      step.dropped.assign(static_cast<std::size_t>(current.vertex_count()), false);
      step.coarse_positions = Agglomeration::centroids(groups, current.positions);
      current = coarsen_topology(current, step);
    }
    if (!any_pair) break;
  }

  Agglomeration result;
  result.dropped = dropped;
  for (const auto &group : members) {
    std::vector<Index> fine;
    fine.reserve(group.size());
    for (Index r : group) fine.push_back(kept[static_cast<std::size_t>(r)]);
    result.agglomerates.push_back(std::move(fine));
  }
  result.coarse_positions = Agglomeration::centroids(result.agglomerates, topology.positions);
  return result;
}

VertexKernelBasis vertex_kernel_bases(const BlockSparseMatrix &a, double tol) {
  VertexKernelBasis basis;
  basis.range.reserve(static_cast<std::size_t>(a.block_rows()));
  for (Index v = 0; v < a.block_rows(); ++v)
    basis.range.push_back(range_basis(a.block_at(v, v), tol));
  return basis;
}

} // namespace atamg
