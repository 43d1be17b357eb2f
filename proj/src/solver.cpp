#include "atamg/solver.hpp"

#include "atamg/dense.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace atamg {

void Smoother::apply(const BlockSparseMatrix &a, const Vector &b, Vector &x,
                     bool transpose) const {
  const Index n = a.block_rows();
  const Index k = a.block_height();
  if (kind == SmootherKind::BlockGaussSeidel) {
    const auto sweep = [&](Index i) {
      Vector r = b.segment(i * k, k);
      for (Index e = a.row_begin(i); e < a.row_end(i); ++e)
        r.noalias() -= a.block(e) * x.segment(a.col(e) * k, k);
      x.segment(i * k, k) += block_inverse[static_cast<std::size_t>(i)] * r;
    };
    if (!transpose)
      for (Index i = 0; i < n; ++i) sweep(i);
    else
      for (Index i = n - 1; i >= 0; --i) sweep(i);
  } else {
    // Jacobi and l1 are symmetric: one simultaneous update
    const Vector r = b - a.multiply(x);
    for (Index i = 0; i < n; ++i)
      x.segment(i * k, k) += block_inverse[static_cast<std::size_t>(i)] * r.segment(i * k, k);
  }
}

Smoother make_smoother(const BlockSparseMatrix &a, SmootherKind kind, double tol) {
  Smoother s;
  s.kind = kind;
  const Index n = a.block_rows();
  const Index k = a.block_height();
  s.block_inverse.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    Matrix d = a.block_at(i, i);
    if (kind == SmootherKind::BlockL1) {
      for (Index r = 0; r < k; ++r) {
        double off = 0.0;
        for (Index e = a.row_begin(i); e < a.row_end(i); ++e) {
          if (a.col(e) == i) continue;
          off += a.block(e).row(r).cwiseAbs().sum();
        }
        d(r, r) += off;
      }
    }
    s.block_inverse.push_back(pseudo_inverse(d, tol));
  }
  return s;
}

CoarsestFactor coarsest_solve_factorize(const BlockSparseMatrix &a_coarsest,
                                        const VertexKernelBasis &basis, double tol) {
  CoarsestFactor f;
  f.basis = basis;
  f.regularized = a_coarsest.dense();
  const Index k = a_coarsest.block_height();
  f.regularized += basis.complement_projector(k);
  f.factor.compute(f.regularized);
  const double scale = std::max(1.0, f.regularized.cwiseAbs().maxCoeff());
  if (f.factor.info() != Eigen::Success || f.factor.vectorD().minCoeff() <= tol * scale)
    throw std::runtime_error("coarsest_solve_factorize: regularized matrix is singular");
  return f;
}

Vector two_grid_apply(const BlockSparseMatrix &a, const Smoother &m, const BlockSparseMatrix &p,
                      const CoarsestFactor &coarse, const Vector &b, const Vector &x0) {
  Vector x = x0;
  m.apply(a, b, x, false);
  const Vector residual = b - a.multiply(x);
  x += p.multiply(coarse.solve(p.multiply_transpose(residual)));
  m.apply(a, b, x, true);
  return x;
}

std::vector<Index> Hierarchy::level_vertex_counts() const {
  std::vector<Index> out;
  for (const Level &l : levels) out.push_back(l.matrix.block_rows());
  out.push_back(coarsest.block_rows());
  return out;
}

std::vector<Index> Hierarchy::level_nonzeros() const {
  std::vector<Index> out;
  for (const Level &l : levels) out.push_back(l.matrix.nonzeros());
  out.push_back(coarsest.nonzeros());
  return out;
}

double Hierarchy::vertex_complexity() const {
  const auto counts = level_vertex_counts();
  double total = 0.0;
  for (Index c : counts) total += static_cast<double>(c);
  return total / static_cast<double>(counts.front());
}

double Hierarchy::operator_complexity() const {
  const auto nnz = level_nonzeros();
  double total = 0.0;
  for (Index c : nnz) total += static_cast<double>(c);
  return total / static_cast<double>(nnz.front());
}

Vector Hierarchy::cycle(std::size_t level, const Vector &b) const {
  if (level == levels.size()) return coarsest_factor.solve(b);
  const Level &l = levels[level];
  Vector x = Vector::Zero(b.size());
  for (int s = 0; s < pre_smooth; ++s) l.smoother.apply(l.matrix, b, x, false);
  const Vector residual = b - l.matrix.multiply(x);
  x += l.prolongation.multiply(cycle(level + 1, l.prolongation.multiply_transpose(residual)));
  for (int s = 0; s < post_smooth; ++s) l.smoother.apply(l.matrix, b, x, true);
  return x;
}

Vector Hierarchy::apply(const Vector &b) const { return cycle(0, b); }

Hierarchy setup_hierarchy(const BlockSparseMatrix &a, const AuxTopology &topology,
                          const HierarchyConfig &config) {
  Hierarchy h;
  h.pre_smooth = config.pre_smooth;
  h.post_smooth = config.post_smooth;
  BlockSparseMatrix current = a;
  AuxTopology current_topology = topology;
  const Index n0 = a.block_rows();
  // problems at or below the static threshold are solved directly
  const Index target =
      n0 <= config.coarse_static
          ? n0
          : std::max<Index>(1, std::min<Index>(config.coarse_static,
                                               static_cast<Index>(std::ceil(
                                                   static_cast<double>(n0) /
                                                   config.coarse_reduction))));
  const bool finest_elasticity =
      topology.kind == TopologyKind::Elasticity && a.block_height() == topology.dim;

  const auto pick = [](const auto &values, std::size_t level, auto fallback) {
    if (values.empty()) return fallback;
    return values[std::min(level, values.size() - 1)];
  };

  for (int level = 0; level + 1 < config.max_levels; ++level) {
    const Index n = current.block_rows();
    if (n <= target) break;

    CoarseningParams cp = config.coarsening;
    cp.rounds = pick(config.rounds_per_level, static_cast<std::size_t>(level), cp.rounds);
    const Agglomeration agg = successive_matching(current_topology, cp);
    const Index nc = agg.coarse_count();
    if (nc == 0) break;
    if (static_cast<double>(nc) > config.stall_fraction * static_cast<double>(n)) {
      h.stalled = true;
      break;
    }

    const BlockSparseMatrix tentative =
        build_tentative_prolongation(current_topology, agg, level == 0 && finest_elasticity);
    BlockSparseMatrix used = tentative;
    if (config.smoothed_prolongation) {
      SmoothingParams sp = config.smoothing;
      sp.cap = pick(config.caps_per_level, static_cast<std::size_t>(level), sp.cap);
      const FilteredAuxMatrix filtered = build_filtered_aux(current_topology, current, agg, sp);
      used = smooth_prolongation(filtered, current_topology, agg, tentative, sp.omega);
    }

    Level l;
    l.matrix = current;
    l.topology = current_topology;
    l.agg = agg;
    l.prolongation = used;
    l.tentative = tentative;
    l.smoother = make_smoother(current, config.smoother, config.coarsening.rank_tol);

    current = galerkin_product(used, current);
    current_topology = coarsen_topology(current_topology, agg);
    h.levels.push_back(std::move(l));
  }

  h.coarsest = current;
  h.coarsest_topology = current_topology;
  h.coarsest_factor = coarsest_solve_factorize(
      current, vertex_kernel_bases(current, config.coarsening.rank_tol),
      config.coarsening.rank_tol);
  return h;
}

std::string SolveReport::csv_header() { return "levels,n_c,VC,OC,its,tsup,tsol"; }

void SolveReport::write_csv_row(std::ostream &os, bool with_times) const {
  os << levels << ',' << coarsest_vertices << ',' << std::setprecision(4) << vertex_complexity
     << ',' << operator_complexity << ',' << iterations << ',';
  if (with_times)
    os << std::setprecision(4) << setup_seconds << ',' << solve_seconds;
  else
    os << "-,-";
  os << '\n';
}

void SolveReport::write_table(std::ostream &os, bool with_times) const {
  os << "levels      " << levels << '\n';
  os << "vertices   ";
  for (Index v : level_vertices) os << ' ' << v;
  os << '\n';
  os << "n_c         " << coarsest_vertices << '\n';
  os << "VC          " << std::setprecision(4) << vertex_complexity << '\n';
  os << "OC          " << std::setprecision(4) << operator_complexity << '\n';
  os << "its         " << iterations << (converged ? "" : " (not converged)") << '\n';
  os << "rel. resid  " << std::setprecision(4) << final_residual << '\n';
  os << "ritz        [" << std::setprecision(6) << ritz_min << ", " << ritz_max << "]\n";
  os << "cond. est.  " << std::setprecision(6) << cond_estimate << '\n';
  if (with_times) {
    os << "tsup        " << std::setprecision(4) << setup_seconds << '\n';
    os << "tsol        " << std::setprecision(4) << solve_seconds << '\n';
  }
}

SolveReport pcg(const BlockSparseMatrix &a, const Vector &b,
                const std::function<Vector(const Vector &)> &preconditioner, Vector &x,
                double rtol, int maxit) {
  SolveReport report;
  if (x.size() != b.size()) x = Vector::Zero(b.size());

  Vector r = b - a.multiply(x);
  Vector z = preconditioner(r);
  double rho = r.dot(z);
  const double rho0 = std::abs(rho);
  if (rho < 0.0) throw std::runtime_error("pcg: preconditioner is not positive definite");
  const double target = rtol * rtol * rho0;
  if (rho0 == 0.0) {
    report.converged = true;
    return report;
  }

  Vector p = z;
  std::vector<double> alphas, betas;

  for (int it = 0; it < maxit; ++it) {
    const Vector ap = a.multiply(p);
    const double curvature = p.dot(ap);
    if (curvature <= 0.0) throw std::runtime_error("pcg: matrix is not positive definite");
    const double alpha = rho / curvature;
    x += alpha * p;
    r -= alpha * ap;
    z = preconditioner(r);
    const double rho_next = r.dot(z);
    if (rho_next < 0.0)
      throw std::runtime_error("pcg: preconditioner is not positive definite");
    const double beta = rho_next / rho;
    alphas.push_back(alpha);
    report.iterations = it + 1;
    rho = rho_next;
    if (rho <= target) {
      report.converged = true;
      break;
    }
    betas.push_back(beta);
    p = z + beta * p;
  }
  report.final_residual = std::sqrt(std::max(0.0, rho) / rho0);

  // Lanczos tridiagonal from the CG coefficients; its eigenvalues estimate
  // the extreme eigenvalues of B^{-1}A.
  const std::size_t j = alphas.size();
  if (j > 0) {
    Matrix t = Matrix::Zero(static_cast<Index>(j), static_cast<Index>(j));
    for (std::size_t i = 0; i < j; ++i) {
      double d = 1.0 / alphas[i];
      if (i > 0) d += betas[i - 1] / alphas[i - 1];
      t(static_cast<Index>(i), static_cast<Index>(i)) = d;
      if (i + 1 < j) {
        const double off = std::sqrt(std::max(0.0, betas[i])) / alphas[i];
        t(static_cast<Index>(i), static_cast<Index>(i) + 1) = off;
        t(static_cast<Index>(i) + 1, static_cast<Index>(i)) = off;
      }
    }
    const SymEig eig = sym_eig(t);
    report.ritz_min = eig.eigenvalues[0];
    report.ritz_max = eig.eigenvalues[eig.eigenvalues.size() - 1];
    report.cond_estimate = report.ritz_max / std::max(report.ritz_min, 1e-300);
  }
  return report;
}

ExtendedReal dense_gen_eig_sup(const Matrix &m, const Matrix &a, double tol) {
  const Index n = a.rows();
  if (n == 0) return ExtendedReal(0.0);
  Eigen::SelfAdjointEigenSolver<Matrix> ea(0.5 * (a + a.transpose()));
  const double lmax = ea.eigenvalues().cwiseAbs().maxCoeff();
  const double cut = tol * lmax;
  const double m_scale = m.trace();

  Index rank = 0;
  for (Index i = 0; i < n; ++i)
    if (std::abs(ea.eigenvalues()[i]) > cut) ++rank;

  if (rank < n && m_scale > 0.0) {
    Matrix kb(n, n - rank);
    Index c = 0;
    for (Index i = 0; i < n; ++i)
      if (std::abs(ea.eigenvalues()[i]) <= cut) kb.col(c++) = ea.eigenvectors().col(i);
    Eigen::SelfAdjointEigenSolver<Matrix> ek(
        (kb.transpose() * m * kb).eval(), Eigen::EigenvaluesOnly);
    if (ek.eigenvalues().maxCoeff() > tol * m_scale) return ExtendedReal::infinity();
  }
  if (rank == 0) return ExtendedReal(0.0);

  Matrix w(n, rank);
  Index c = 0;
  for (Index i = 0; i < n; ++i)
    if (std::abs(ea.eigenvalues()[i]) > cut)
      w.col(c++) = ea.eigenvectors().col(i) / std::sqrt(ea.eigenvalues()[i]);
  Eigen::SelfAdjointEigenSolver<Matrix> er((w.transpose() * m * w).eval(),
                                           Eigen::EigenvaluesOnly);
  return ExtendedReal(std::max(0.0, er.eigenvalues().maxCoeff()));
}

TwoGridDiagnostics dense_preconditioner_condition(
    const BlockSparseMatrix &a, const std::function<Vector(const Vector &)> &apply_binv) {
  const Index n = a.rows();
  if (n > 3200) throw std::invalid_argument("dense_preconditioner_condition: size guard exceeded");

  Matrix binv(n, n);
  Vector e = Vector::Zero(n);
  for (Index i = 0; i < n; ++i) {
    e[i] = 1.0;
    binv.col(i) = apply_binv(e);
    e[i] = 0.0;
  }
  binv = 0.5 * (binv + binv.transpose()).eval();

  // spectrum of B^{-1}A: for SPD A use A = L L^T and the congruent
  // L^T B^{-1} L; singular A falls back to the square-root route with the
  // kernel directions excluded
  const Matrix ad = a.dense();
  Matrix reduced;
  Eigen::LLT<Matrix> llt(ad);
  if (llt.info() == Eigen::Success) {
    const Matrix l = llt.matrixL();
    reduced = l.transpose() * binv * l;
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> ea(ad);
    const double lmax = ea.eigenvalues().cwiseAbs().maxCoeff();
    const double cut = kRankTol * lmax;
    Index rank = 0;
    for (Index i = 0; i < n; ++i)
      if (ea.eigenvalues()[i] > cut) ++rank;
    Matrix half(n, rank);
    Index c = 0;
    for (Index i = 0; i < n; ++i)
      if (ea.eigenvalues()[i] > cut)
        half.col(c++) = ea.eigenvectors().col(i) * std::sqrt(ea.eigenvalues()[i]);
    reduced = half.transpose() * binv * half;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(reduced, Eigen::EigenvaluesOnly);
  TwoGridDiagnostics d;
  d.lambda_min = es.eigenvalues().minCoeff();
  d.lambda_max = es.eigenvalues().maxCoeff();
  d.kappa = d.lambda_max / std::max(d.lambda_min, 1e-300);
  return d;
}

TwoGridDiagnostics dense_two_grid_condition(const BlockSparseMatrix &a, const Smoother &m,
                                            const BlockSparseMatrix &p) {
  const BlockSparseMatrix coarse = galerkin_product(p, a);
  const CoarsestFactor factor =
      coarsest_solve_factorize(coarse, vertex_kernel_bases(coarse, kRankTol), kRankTol);
  const Vector zero = Vector::Zero(a.rows());
  return dense_preconditioner_condition(
      a, [&](const Vector &b) { return two_grid_apply(a, m, p, factor, b, zero); });
}

double ktg_constant(const BlockSparseMatrix &aux, const BlockSparseMatrix &p, double tol) {
  const Index n = aux.rows();
  if (n > 3200) throw std::invalid_argument("ktg_constant: size guard exceeded");
  const Matrix ahat = aux.dense();
  Matrix dhat = Matrix::Zero(n, n);
  const Index k = aux.block_height();
  for (Index i = 0; i < aux.block_rows(); ++i)
    dhat.block(i * k, i * k, k, k) = aux.block_at(i, i);
  const Matrix pd = p.dense();
  const Matrix gram = pd.transpose() * dhat * pd;
  Eigen::SelfAdjointEigenSolver<Matrix> eg(gram);
  const double gmax = eg.eigenvalues().cwiseAbs().maxCoeff();
  Vector inv = Vector::Zero(gram.rows());
  for (Index i = 0; i < gram.rows(); ++i)
    if (std::abs(eg.eigenvalues()[i]) > tol * gmax) inv[i] = 1.0 / eg.eigenvalues()[i];
  const Matrix gram_pinv = eg.eigenvectors() * inv.asDiagonal() * eg.eigenvectors().transpose();
  const Matrix dp = dhat * pd;
  Matrix x = dhat - dp * gram_pinv * dp.transpose();
  x = 0.5 * (x + x.transpose()).eval();
  const ExtendedReal sup = dense_gen_eig_sup(x, ahat, tol);
  if (!sup.is_finite())
    throw std::runtime_error("ktg_constant: best-fit energy not bounded by the auxiliary energy");
  return sup.value();
}

} // namespace atamg
