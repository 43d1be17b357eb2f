#include "atamg/topology.hpp"

#include "atamg/dense.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace atamg {

Matrix skew_matrix(int dim, const Vec3 &t) {
  if (dim == 2) {
    Matrix s(2, 1);
    s << -t[1], t[0];
    return s;
  }
  Matrix s(3, 3);
  s << 0.0, -t[2], t[1], t[2], 0.0, -t[0], -t[1], t[0], 0.0;
  return s;
}

Matrix q_matrix(const QTransform &transform) {
  if (transform.kind == TopologyKind::Scalar) return Matrix::Identity(1, 1);
  const int d = transform.dim;
  const Index k = dofs_per_vertex(TopologyKind::Elasticity, d);
  Matrix q = Matrix::Identity(k, k);
  const double scale = transform.root ? 0.5 : 1.0;
  q.block(0, d, d, k - d) = scale * skew_matrix(d, transform.translation);
  return q;
}

Matrix AuxTopology::q_full(Index a, Index b) const {
  if (kind == TopologyKind::Scalar) return Matrix::Identity(1, 1);
  return q_matrix(QTransform::full(dim, positions[static_cast<std::size_t>(b)] -
                                            positions[static_cast<std::size_t>(a)]));
}

Matrix AuxTopology::q_root(Index a, Index b) const {
  if (kind == TopologyKind::Scalar) return Matrix::Identity(1, 1);
  return q_matrix(QTransform::half(dim, positions[static_cast<std::size_t>(b)] -
                                            positions[static_cast<std::size_t>(a)]));
}

Matrix AuxTopology::q_translate(const Vec3 &t) const {
  if (kind == TopologyKind::Scalar) return Matrix::Identity(1, 1);
  return q_matrix(QTransform::full(dim, t));
}

std::vector<std::vector<Index>> AuxTopology::adjacency() const {
  std::vector<std::vector<Index>> adj(static_cast<std::size_t>(vertex_count()));
  for (const AuxEdge &e : edges) {
    adj[static_cast<std::size_t>(e.i)].push_back(e.j);
    adj[static_cast<std::size_t>(e.j)].push_back(e.i);
  }
  for (auto &list : adj) std::sort(list.begin(), list.end());
  return adj;
}

std::vector<Matrix> AuxTopology::diagonal_blocks() const {
  const Index nk = k();
  std::vector<Matrix> diag(static_cast<std::size_t>(vertex_count()), Matrix::Zero(nk, nk));
  for (Index v = 0; v < vertex_count(); ++v) diag[static_cast<std::size_t>(v)] = vertex_weights[static_cast<std::size_t>(v)];
  for (const AuxEdge &e : edges) {
    const Matrix qij = q_root(e.i, e.j);
    const Matrix qji = q_root(e.j, e.i);
    diag[static_cast<std::size_t>(e.i)] += qij.transpose() * e.weight * qij;
    diag[static_cast<std::size_t>(e.j)] += qji.transpose() * e.weight * qji;
  }
  return diag;
}

void AuxTopology::check(double tol) const {
  const Index nk = k();
  if (vertex_weights.size() != positions.size() || dirichlet.size() != positions.size())
    throw std::invalid_argument("AuxTopology: inconsistent vertex arrays");
  for (const Vec3 &x : positions)
    if (!x.allFinite()) throw std::invalid_argument("AuxTopology: non-finite position");
  for (const Matrix &m : vertex_weights) {
    if (m.rows() != nk || m.cols() != nk)
      throw std::invalid_argument("AuxTopology: vertex weight shape");
    if (!psd_check(m, tol)) throw std::invalid_argument("AuxTopology: vertex weight not PSD");
  }
  std::map<std::pair<Index, Index>, int> seen;
  for (const AuxEdge &e : edges) {
    if (e.i >= e.j) throw std::invalid_argument("AuxTopology: edge not stored with i < j");
    if (e.j >= vertex_count()) throw std::invalid_argument("AuxTopology: edge index range");
    if (++seen[{e.i, e.j}] > 1) throw std::invalid_argument("AuxTopology: duplicate edge");
    if (e.weight.rows() != nk || e.weight.cols() != nk)
      throw std::invalid_argument("AuxTopology: edge weight shape");
    if (!psd_check(e.weight, tol)) throw std::invalid_argument("AuxTopology: edge weight not PSD");
  }
}

void AuxTopology::write(std::ostream &os) const {
  os.precision(17);
  for (Index v = 0; v < vertex_count(); ++v) {
    const Vec3 &x = positions[static_cast<std::size_t>(v)];
    os << "vtx " << v << ' ' << x[0] << ' ' << x[1] << ' ' << x[2];
    const Matrix &m = vertex_weights[static_cast<std::size_t>(v)];
    for (Index r = 0; r < m.rows(); ++r)
      for (Index c = 0; c < m.cols(); ++c) os << ' ' << m(r, c);
    os << '\n';
  }
  for (const AuxEdge &e : edges) {
    os << "edge " << e.i << ' ' << e.j;
    for (Index r = 0; r < e.weight.rows(); ++r)
      for (Index c = 0; c < e.weight.cols(); ++c) os << ' ' << e.weight(r, c);
    os << '\n';
  }
  for (Index v = 0; v < vertex_count(); ++v)
    if (dirichlet[static_cast<std::size_t>(v)]) os << "dir " << v << '\n';
}

AuxTopology build_scalar_topology(const BlockSparseMatrix &a, const std::vector<Vec3> &positions,
                                  const std::vector<bool> &dirichlet) {
  if (a.block_height() != 1 || a.block_width() != 1)
    throw std::invalid_argument("build_scalar_topology: expected k = 1 blocks");
  const Index n = a.block_rows();
  AuxTopology t;
  t.kind = TopologyKind::Scalar;
  t.dim = 0;
  t.positions = positions;
  t.dirichlet = dirichlet;
  t.vertex_weights.assign(static_cast<std::size_t>(n), Matrix::Zero(1, 1));

  for (Index i = 0; i < n; ++i) {
    double offdiag_sum = 0.0;
    double diag = 0.0;
    for (Index e = a.row_begin(i); e < a.row_end(i); ++e) {
      const double v = a.block(e)(0, 0);
      const Index j = a.col(e);
      if (j == i) {
        diag = v;
        continue;
      }
      offdiag_sum += std::abs(v);
      if (j > i && v != 0.0) {
        Matrix w(1, 1);
        w(0, 0) = std::abs(v);
        t.edges.push_back({i, j, w});
      }
    }
    t.vertex_weights[static_cast<std::size_t>(i)](0, 0) = std::max(0.0, diag - offdiag_sum);
  }
  return t;
}

AuxTopology build_elasticity_topology(const BlockSparseMatrix &a,
                                      const std::vector<Vec3> &positions,
                                      const std::vector<bool> &dirichlet) {
  const int d = static_cast<int>(a.block_height());
  if ((d != 2 && d != 3) || a.block_width() != d)
    throw std::invalid_argument("build_elasticity_topology: expected d x d blocks");
  const Index n = a.block_rows();
  const Index k = dofs_per_vertex(TopologyKind::Elasticity, d);
  AuxTopology t;
  t.kind = TopologyKind::Elasticity;
  t.dim = d;
  t.positions = positions;
  t.dirichlet = dirichlet;
  t.vertex_weights.assign(static_cast<std::size_t>(n), Matrix::Zero(k, k));

  for (Index i = 0; i < n; ++i)
    for (Index e = a.row_begin(i); e < a.row_end(i); ++e) {
      const Index j = a.col(e);
      if (j <= i) continue;
      const double c = a.block(e).cwiseAbs().sum() / static_cast<double>(d * d);
      if (c == 0.0) continue;
      const Vec3 tij = positions[static_cast<std::size_t>(j)] - positions[static_cast<std::size_t>(i)];
      if (tij.squaredNorm() == 0.0)
        throw std::invalid_argument("build_elasticity_topology: coincident vertices on an edge");
      // rank-1 penalty along the normalized edge direction; |A_ij| already
      // carries the stiffness scale
      const Vec3 dir = tij / tij.norm();
      Matrix w = Matrix::Zero(k, k);
      w.block(0, 0, d, d) = c * (dir.head(d) * dir.head(d).transpose());
      t.edges.push_back({i, j, w});
    }
  return t;
}

BlockSparseMatrix assemble_aux_matrix(const AuxTopology &topology) {
  const Index n = topology.vertex_count();
  const Index k = topology.k();
  BlockSparseBuilder builder(n, n, k, k);
  for (Index v = 0; v < n; ++v) builder.add(v, v, topology.vertex_weights[static_cast<std::size_t>(v)]);
  for (const AuxEdge &e : topology.edges) {
    const Matrix qij = topology.q_root(e.i, e.j);
    const Matrix qji = topology.q_root(e.j, e.i);
    builder.add(e.i, e.i, (qij.transpose() * e.weight * qij).eval());
    builder.add(e.j, e.j, (qji.transpose() * e.weight * qji).eval());
    builder.add(e.i, e.j, (-qij.transpose() * e.weight * qji).eval());
    builder.add(e.j, e.i, (-qji.transpose() * e.weight * qij).eval());
  }
  return builder.compress();
}

double discrete_energy(const AuxTopology &topology, const Vector &u) {
  const Index k = topology.k();
  if (u.size() != topology.vertex_count() * k)
    throw std::invalid_argument("discrete_energy: vector size mismatch");
  double sum = 0.0;
  for (Index v = 0; v < topology.vertex_count(); ++v) {
    const auto ui = u.segment(v * k, k);
    sum += ui.dot(topology.vertex_weights[static_cast<std::size_t>(v)] * ui);
  }
  for (const AuxEdge &e : topology.edges) {
    const Vector jump = topology.q_root(e.i, e.j) * u.segment(e.i * k, k) -
                        topology.q_root(e.j, e.i) * u.segment(e.j * k, k);
    sum += jump.dot(e.weight * jump);
  }
  return std::sqrt(std::max(0.0, sum));
}

std::vector<Index> Agglomeration::vertex_to_coarse(Index fine_count) const {
  std::vector<Index> map(static_cast<std::size_t>(fine_count), -1);
  for (std::size_t g = 0; g < agglomerates.size(); ++g)
    for (Index v : agglomerates[g]) map[static_cast<std::size_t>(v)] = static_cast<Index>(g);
  return map;
}

std::vector<Vec3> Agglomeration::centroids(const std::vector<std::vector<Index>> &agglomerates,
                                           const std::vector<Vec3> &positions) {
  std::vector<Vec3> out;
  out.reserve(agglomerates.size());
  for (const auto &group : agglomerates) {
    Vec3 c = Vec3::Zero();
    for (Index v : group) c += positions[static_cast<std::size_t>(v)];
    out.push_back(c / static_cast<double>(group.size()));
  }
  return out;
}

AuxTopology coarsen_topology(const AuxTopology &topology, const Agglomeration &agg) {
  const Index n = topology.vertex_count();
  const Index k = topology.k();
  const std::vector<Index> v2c = agg.vertex_to_coarse(n);
  for (std::size_t g = 0; g < agg.agglomerates.size(); ++g)
    for (Index v : agg.agglomerates[g])
      if (topology.dirichlet[static_cast<std::size_t>(v)])
        throw std::invalid_argument("coarsen_topology: agglomerate contains a Dirichlet vertex");

  AuxTopology coarse;
  coarse.kind = topology.kind;
  coarse.dim = topology.dim;
  coarse.positions = agg.coarse_positions;
  coarse.dirichlet.assign(agg.agglomerates.size(), false);
  coarse.vertex_weights.assign(agg.agglomerates.size(), Matrix::Zero(k, k));

  // M^I accumulates fine vertex weights transported to the coarse position.
  for (std::size_t g = 0; g < agg.agglomerates.size(); ++g) {
    const Vec3 &xi = agg.coarse_positions[g];
    for (Index v : agg.agglomerates[g]) {
      const Matrix q = topology.q_translate(topology.positions[static_cast<std::size_t>(v)] - xi);
      coarse.vertex_weights[g] += q.transpose() * topology.vertex_weights[static_cast<std::size_t>(v)] * q;
    }
  }

  std::map<std::pair<Index, Index>, Matrix> coarse_edges;
  for (const AuxEdge &e : topology.edges) {
    const Index gi = v2c[static_cast<std::size_t>(e.i)];
    const Index gj = v2c[static_cast<std::size_t>(e.j)];
    const Vec3 fine_mid = 0.5 * (topology.positions[static_cast<std::size_t>(e.i)] +
                                 topology.positions[static_cast<std::size_t>(e.j)]);
    if (gi < 0 && gj < 0) continue;
    if (gi == gj) continue; // interior edges carry no transported jump
    if (gi < 0 || gj < 0) {
      // edge into the dropped set folds into the surviving vertex weight
      const Index g = gi < 0 ? gj : gi;
      const Matrix q = topology.q_translate(fine_mid - agg.coarse_positions[static_cast<std::size_t>(g)]);
      coarse.vertex_weights[static_cast<std::size_t>(g)] += q.transpose() * e.weight * q;
      continue;
    }
    const Index a = std::min(gi, gj), b = std::max(gi, gj);
    const Vec3 coarse_mid = 0.5 * (agg.coarse_positions[static_cast<std::size_t>(a)] +
                                   agg.coarse_positions[static_cast<std::size_t>(b)]);
    const Matrix q = topology.q_translate(fine_mid - coarse_mid);
    const Matrix contrib = q.transpose() * e.weight * q;
    auto it = coarse_edges.find({a, b});
    if (it == coarse_edges.end())
      coarse_edges.emplace(std::make_pair(a, b), contrib);
    else
      it->second += contrib;
  }
  for (auto &[key, w] : coarse_edges)
    coarse.edges.push_back({key.first, key.second, 0.5 * (w + w.transpose())});
  return coarse;
}

} // namespace atamg
