#ifndef ATAMG_DENSE_HPP
#define ATAMG_DENSE_HPP

#include "atamg/types.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace atamg {

/// Eigendecomposition of a small symmetric matrix A = V diag(w) V^T,
/// computed with cyclic Jacobi rotations. Eigenvalues are sorted
/// ascending, eigenvectors are the matching columns of V (orthonormal).
struct SymEig {
  Vector eigenvalues;
  Matrix eigenvectors;
};

template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived> &a, double tol = 1e-12) {
  if (a.rows() != a.cols()) return false;
  const double scale = a.cwiseAbs().maxCoeff();
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, scale);
}

template <typename Derived>
SymEig sym_eig(const Eigen::MatrixBase<Derived> &a_in) {
  if (a_in.rows() != a_in.cols())
    throw std::invalid_argument("sym_eig: matrix not square");
  const Index n = a_in.rows();
  Matrix a = 0.5 * (a_in + a_in.transpose());
  Matrix v = Matrix::Identity(n, n);

  if (n > 1) {
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    const double stop = 1e-15 * scale;
    for (int sweep = 0; sweep < 64; ++sweep) {
      double off = 0.0;
      for (Index p = 0; p < n - 1; ++p)
        for (Index q = p + 1; q < n; ++q)
          off = std::max(off, std::abs(a(p, q)));
      if (off <= stop) break;
      for (Index p = 0; p < n - 1; ++p) {
        for (Index q = p + 1; q < n; ++q) {
          const double apq = a(p, q);
          if (std::abs(apq) <= 1e-2 * stop) continue;
          // Stable rotation angle, see Golub & Van Loan sec. 8.5.
          const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
          const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(1.0 + theta * theta));
          const double c = 1.0 / std::sqrt(1.0 + t * t);
          const double s = t * c;
          for (Index r = 0; r < n; ++r) {
            const double arp = a(r, p), arq = a(r, q);
            a(r, p) = c * arp - s * arq;
            a(r, q) = s * arp + c * arq;
          }
          for (Index r = 0; r < n; ++r) {
            const double apr = a(p, r), aqr = a(q, r);
            a(p, r) = c * apr - s * aqr;
            a(q, r) = s * apr + c * aqr;
          }
          for (Index r = 0; r < n; ++r) {
            const double vrp = v(r, p), vrq = v(r, q);
            v(r, p) = c * vrp - s * vrq;
            v(r, q) = s * vrp + c * vrq;
          }
        }
      }
    }
  }

  SymEig out;
  out.eigenvalues = a.diagonal();
  out.eigenvectors = v;
  // sort ascending
  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  std::sort(perm.begin(), perm.end(),
            [&](Index i, Index j) { return out.eigenvalues[i] < out.eigenvalues[j]; });
  Vector w(n);
  Matrix vv(n, n);
  for (Index i = 0; i < n; ++i) {
    w[i] = out.eigenvalues[perm[static_cast<std::size_t>(i)]];
    vv.col(i) = out.eigenvectors.col(perm[static_cast<std::size_t>(i)]);
  }
  out.eigenvalues = std::move(w);
  out.eigenvectors = std::move(vv);
  return out;
}

/// Moore-Penrose pseudo-inverse of a symmetric matrix via
/// eigendecomposition. Eigenvalues with |lambda| <= tol * max|lambda|
/// are treated as zero.
template <typename Derived>
Matrix pseudo_inverse(const Eigen::MatrixBase<Derived> &a, double tol = kRankTol) {
  if (!is_symmetric(a))
    throw std::invalid_argument("pseudo_inverse: matrix not symmetric");
  const SymEig eig = sym_eig(a);
  const Index n = a.rows();
  const double lmax = n > 0 ? eig.eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  const double cut = tol * lmax;
  Vector inv = Vector::Zero(n);
  for (Index i = 0; i < n; ++i)
    if (std::abs(eig.eigenvalues[i]) > cut) inv[i] = 1.0 / eig.eigenvalues[i];
  Matrix r = eig.eigenvectors * inv.asDiagonal() * eig.eigenvectors.transpose();
  return 0.5 * (r + r.transpose());
}

/// Orthonormal basis of the numerical kernel of a symmetric matrix,
/// returned as columns. Empty (n x 0) for definite input.
template <typename Derived>
Matrix kernel_basis(const Eigen::MatrixBase<Derived> &a, double tol = kRankTol) {
  const SymEig eig = sym_eig(a);
  const Index n = a.rows();
  const double lmax = n > 0 ? eig.eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  const double cut = tol * lmax;
  Index k = 0;
  for (Index i = 0; i < n; ++i)
    if (std::abs(eig.eigenvalues[i]) <= cut) ++k;
  Matrix basis(n, k);
  Index c = 0;
  for (Index i = 0; i < n; ++i)
    if (std::abs(eig.eigenvalues[i]) <= cut) basis.col(c++) = eig.eigenvectors.col(i);
  return basis;
}

/// Orthonormal basis of the numerical range (kernel complement).
template <typename Derived>
Matrix range_basis(const Eigen::MatrixBase<Derived> &a, double tol = kRankTol) {
  const SymEig eig = sym_eig(a);
  const Index n = a.rows();
  const double lmax = n > 0 ? eig.eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  const double cut = tol * lmax;
  Index k = 0;
  for (Index i = 0; i < n; ++i)
    if (std::abs(eig.eigenvalues[i]) > cut) ++k;
  Matrix basis(n, k);
  Index c = 0;
  for (Index i = 0; i < n; ++i)
    if (std::abs(eig.eigenvalues[i]) > cut) basis.col(c++) = eig.eigenvectors.col(i);
  return basis;
}

/// Harmonic mean H(A, B) = A (A + B)^dagger B of two symmetric PSD
/// matrices. Symmetric, PSD, and bounded by both arguments.
template <typename DerivedA, typename DerivedB>
Matrix harmonic_mean(const Eigen::MatrixBase<DerivedA> &a,
                     const Eigen::MatrixBase<DerivedB> &b, double tol = kRankTol) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("harmonic_mean: size mismatch");
  const Matrix sum_pinv = pseudo_inverse((a + b).eval(), tol);
  Matrix h = a * sum_pinv * b;
  return 0.5 * (h + h.transpose());
}

/// Positive semi-definiteness test by symmetrically pivoted Cholesky
/// factorization: true iff the smallest eigenvalue is >= -tol * max(1, max|a_ij|).
template <typename Derived>
bool psd_check(const Eigen::MatrixBase<Derived> &a_in, double tol = kRankTol) {
  if (!is_symmetric(a_in))
    throw std::invalid_argument("psd_check: matrix not symmetric");
  const Index n = a_in.rows();
  if (n == 0) return true;
  Matrix a = 0.5 * (a_in + a_in.transpose());
  const double threshold = tol * std::max(1.0, a.cwiseAbs().maxCoeff());

  for (Index k = 0; k < n; ++k) {
    // symmetric permutation moving the largest remaining diagonal to (k, k)
    Index piv = k;
    for (Index i = k + 1; i < n; ++i)
      if (a(i, i) > a(piv, piv)) piv = i;
    if (piv != k) {
      a.row(k).swap(a.row(piv));
      a.col(k).swap(a.col(piv));
    }
    const double d = a(k, k);
    if (d < -threshold) return false;
    if (d <= threshold) {
      // Remaining diagonal is numerically zero; PSD forces the whole
      // trailing block to vanish.
      double rem = 0.0;
      for (Index i = k; i < n; ++i)
        for (Index j = k; j < n; ++j) rem = std::max(rem, std::abs(a(i, j)));
      return rem <= 16.0 * threshold;
    }
    for (Index i = k + 1; i < n; ++i) {
      const double f = a(i, k) / d;
      for (Index j = k + 1; j <= i; ++j) a(i, j) -= f * a(k, j);
    }
    for (Index i = k + 1; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) a(i, j) = a(j, i);
  }
  return true;
}

/// Largest generalized Rayleigh quotient sup_v (v^T M v)/(v^T A v) over
/// directions with v^T A v > 0, for symmetric PSD M and A. Returns
/// +infinity exactly when some kernel direction of A carries M-energy
/// above tol * trace(M). Computed by eigendecomposing A, projecting M
/// onto range(A) and solving the reduced standard problem.
template <typename DerivedM, typename DerivedA>
ExtendedReal gen_eig_sup(const Eigen::MatrixBase<DerivedM> &m,
                         const Eigen::MatrixBase<DerivedA> &a, double tol = kRankTol) {
  if (m.rows() != a.rows() || m.cols() != a.cols())
    throw std::invalid_argument("gen_eig_sup: size mismatch");
  const Index n = a.rows();
  if (n == 0) return ExtendedReal(0.0);

  const SymEig ea = sym_eig(a);
  const double lmax = ea.eigenvalues.cwiseAbs().maxCoeff();
  const double cut = tol * lmax;
  if (ea.eigenvalues[0] < -std::max(cut, 1e-12 * std::max(1.0, lmax)))
    throw std::invalid_argument("gen_eig_sup: A not positive semidefinite");

  const double m_scale = m.trace();
  std::vector<Index> range_idx, kernel_idx;
  for (Index i = 0; i < n; ++i) {
    if (std::abs(ea.eigenvalues[i]) > cut)
      range_idx.push_back(i);
    else
      kernel_idx.push_back(i);
  }

  if (!kernel_idx.empty() && m_scale > 0.0) {
    Matrix kb(n, static_cast<Index>(kernel_idx.size()));
    for (std::size_t c = 0; c < kernel_idx.size(); ++c)
      kb.col(static_cast<Index>(c)) = ea.eigenvectors.col(kernel_idx[c]);
    const Matrix mk = kb.transpose() * m * kb;
    const SymEig ek = sym_eig(mk);
    if (ek.eigenvalues[ek.eigenvalues.size() - 1] > tol * m_scale)
      return ExtendedReal::infinity();
  }
  if (range_idx.empty()) return ExtendedReal(0.0);

  // whiten: columns q_i / sqrt(lambda_i) reduce the pencil to a standard problem
  Matrix w(n, static_cast<Index>(range_idx.size()));
  for (std::size_t c = 0; c < range_idx.size(); ++c)
    w.col(static_cast<Index>(c)) =
        ea.eigenvectors.col(range_idx[c]) / std::sqrt(ea.eigenvalues[range_idx[c]]);
  const Matrix reduced = w.transpose() * m * w;
  const SymEig er = sym_eig(reduced);
  return ExtendedReal(std::max(0.0, er.eigenvalues[er.eigenvalues.size() - 1]));
}

} // namespace atamg

#endif
