#ifndef ATAMG_BLOCK_SPARSE_HPP
#define ATAMG_BLOCK_SPARSE_HPP

#include "atamg/types.hpp"

#include <algorithm>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace atamg {

/// Compressed sparse rows of dense blocks with one fixed (possibly
/// rectangular) block shape per matrix. Column indices are strictly
/// increasing within each row. Immutable after construction.
class BlockSparseMatrix {
public:
  using BlockRef = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
  using ConstBlockRef =
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

  BlockSparseMatrix() : block_rows_(0), block_cols_(0), br_(0), bc_(0), row_ptr_{0} {}

  BlockSparseMatrix(Index block_rows, Index block_cols, Index br, Index bc,
                    std::vector<Index> row_ptr, std::vector<Index> col_idx,
                    std::vector<double> values)
      : block_rows_(block_rows), block_cols_(block_cols), br_(br), bc_(bc),
        row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)), values_(std::move(values)) {
    if (static_cast<Index>(row_ptr_.size()) != block_rows_ + 1)
      throw std::invalid_argument("BlockSparseMatrix: bad row pointer size");
    if (values_.size() != col_idx_.size() * static_cast<std::size_t>(br_ * bc_))
      throw std::invalid_argument("BlockSparseMatrix: bad value buffer size");
    for (Index i = 0; i < block_rows_; ++i)
      for (Index e = row_ptr_[i]; e + 1 < row_ptr_[i + 1]; ++e)
        if (col_idx_[e] >= col_idx_[e + 1])
          throw std::invalid_argument("BlockSparseMatrix: column indices not strictly increasing");
  }

  Index block_rows() const { return block_rows_; }
  Index block_cols() const { return block_cols_; }
  Index block_height() const { return br_; }
  Index block_width() const { return bc_; }
  Index rows() const { return block_rows_ * br_; }
  Index cols() const { return block_cols_ * bc_; }
  Index nonzero_blocks() const { return static_cast<Index>(col_idx_.size()); }
  Index nonzeros() const { return nonzero_blocks() * br_ * bc_; }

  Index row_begin(Index i) const { return row_ptr_[i]; }
  Index row_end(Index i) const { return row_ptr_[i + 1]; }
  Index col(Index e) const { return col_idx_[e]; }

  ConstBlockRef block(Index e) const {
    return ConstBlockRef(values_.data() + e * br_ * bc_, br_, bc_);
  }

  /// Block at (i, j), or nullptr-like empty optional semantics via found flag.
  const double *find_block(Index i, Index j) const {
    const auto first = col_idx_.begin() + row_ptr_[i];
    const auto last = col_idx_.begin() + row_ptr_[i + 1];
    const auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) return nullptr;
    const Index e = static_cast<Index>(it - col_idx_.begin());
    return values_.data() + e * br_ * bc_;
  }

  Matrix block_at(Index i, Index j) const {
    const double *p = find_block(i, j);
    if (!p) return Matrix::Zero(br_, bc_);
    return ConstBlockRef(p, br_, bc_);
  }

  /// y = A x with x laid out block-column-wise (block j occupies
  /// [j*bc, (j+1)*bc)).
  Vector multiply(const Vector &x) const {
    if (x.size() != cols()) throw std::invalid_argument("multiply: dimension mismatch");
    Vector y = Vector::Zero(rows());
    for (Index i = 0; i < block_rows_; ++i)
      for (Index e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e)
        y.segment(i * br_, br_).noalias() += block(e) * x.segment(col_idx_[e] * bc_, bc_);
    return y;
  }

  /// y = A^T x.
  Vector multiply_transpose(const Vector &x) const {
    if (x.size() != rows()) throw std::invalid_argument("multiply_transpose: dimension mismatch");
    Vector y = Vector::Zero(cols());
    for (Index i = 0; i < block_rows_; ++i)
      for (Index e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e)
        y.segment(col_idx_[e] * bc_, bc_).noalias() +=
            block(e).transpose() * x.segment(i * br_, br_);
    return y;
  }

  Matrix dense() const {
    Matrix d = Matrix::Zero(rows(), cols());
    for (Index i = 0; i < block_rows_; ++i)
      for (Index e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e)
        d.block(i * br_, col_idx_[e] * bc_, br_, bc_) = block(e);
    return d;
  }

  /// Diagonal blocks (requires a square block shape).
  std::vector<Matrix> diagonal_blocks() const {
    std::vector<Matrix> diag(static_cast<std::size_t>(block_rows_));
    for (Index i = 0; i < block_rows_; ++i) diag[static_cast<std::size_t>(i)] = block_at(i, i);
    return diag;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  bool structurally_symmetric() const {
    if (block_rows_ != block_cols_ || br_ != bc_) return false;
    for (Index i = 0; i < block_rows_; ++i)
      for (Index e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e)
        if (!find_block(col_idx_[e], i)) return false;
    return true;
  }

  /// max |A_ij - A_ji^T| over all stored blocks; requires square shape.
  double symmetry_error() const {
    double err = 0.0;
    for (Index i = 0; i < block_rows_; ++i)
      for (Index e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e) {
        const Matrix diff = Matrix(block(e)) - block_at(col_idx_[e], i).transpose();
        err = std::max(err, diff.cwiseAbs().maxCoeff());
      }
    return err;
  }

  void write(std::ostream &os) const {
    os << "blocksparse " << block_rows_ << ' ' << block_cols_ << ' ' << br_ << ' ' << bc_ << '\n';
    os << std::setprecision(17);
    for (Index i = 0; i < block_rows_; ++i)
      for (Index e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e) {
        os << i << ' ' << col_idx_[e];
        const double *p = values_.data() + e * br_ * bc_;
        for (Index v = 0; v < br_ * bc_; ++v) os << ' ' << p[v];
        os << '\n';
      }
  }

  static BlockSparseMatrix read(std::istream &is);

private:
  Index block_rows_, block_cols_;
  Index br_, bc_;
  std::vector<Index> row_ptr_;
  std::vector<Index> col_idx_;
  std::vector<double> values_;
};

/// Row-wise accumulation buffer used to assemble a BlockSparseMatrix.
/// Blocks added to the same position are summed; the compressed result
/// has sorted column indices and a deterministic per-entry summation
/// order (insertion order is irrelevant once compressed).
class BlockSparseBuilder {
public:
  BlockSparseBuilder(Index block_rows, Index block_cols, Index br, Index bc)
      : block_rows_(block_rows), block_cols_(block_cols), br_(br), bc_(bc),
        rows_(static_cast<std::size_t>(block_rows)) {}

  Index block_rows() const { return block_rows_; }
  Index block_height() const { return br_; }
  Index block_width() const { return bc_; }

  template <typename Derived>
  void add(Index i, Index j, const Eigen::MatrixBase<Derived> &b) {
    if (i < 0 || i >= block_rows_ || j < 0 || j >= block_cols_)
      throw std::out_of_range("BlockSparseBuilder::add: index out of range");
    if (b.rows() != br_ || b.cols() != bc_)
      throw std::invalid_argument("BlockSparseBuilder::add: block shape mismatch");
    auto &row = rows_[static_cast<std::size_t>(i)];
    auto it = row.find(j);
    if (it == row.end())
      row.emplace(j, b.eval());
    else
      it->second += b;
  }

  bool has(Index i, Index j) const {
    return rows_[static_cast<std::size_t>(i)].count(j) != 0;
  }

  BlockSparseMatrix compress() const {
    std::vector<Index> row_ptr(static_cast<std::size_t>(block_rows_) + 1, 0);
    Index nnz = 0;
    for (Index i = 0; i < block_rows_; ++i) {
      nnz += static_cast<Index>(rows_[static_cast<std::size_t>(i)].size());
      row_ptr[static_cast<std::size_t>(i) + 1] = nnz;
    }
    std::vector<Index> col_idx;
    col_idx.reserve(static_cast<std::size_t>(nnz));
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(nnz * br_ * bc_));
    for (Index i = 0; i < block_rows_; ++i)
      for (const auto &[j, b] : rows_[static_cast<std::size_t>(i)]) {
        col_idx.push_back(j);
        for (Index r = 0; r < br_; ++r)
          for (Index c = 0; c < bc_; ++c) values.push_back(b(r, c));
      }
    return BlockSparseMatrix(block_rows_, block_cols_, br_, bc_, std::move(row_ptr),
                             std::move(col_idx), std::move(values));
  }

private:
  Index block_rows_, block_cols_;
  Index br_, bc_;
  std::vector<std::map<Index, Matrix>> rows_;
};

inline BlockSparseMatrix BlockSparseMatrix::read(std::istream &is) {
  std::string tag;
  Index block_rows, block_cols, br, bc;
  if (!(is >> tag >> block_rows >> block_cols >> br >> bc) || tag != "blocksparse")
    throw std::runtime_error("BlockSparseMatrix::read: bad header");
  BlockSparseBuilder builder(block_rows, block_cols, br, bc);
  Index i, j;
  Matrix b(br, bc);
  while (is >> i >> j) {
    for (Index r = 0; r < br; ++r)
      for (Index c = 0; c < bc; ++c)
        if (!(is >> b(r, c))) throw std::runtime_error("BlockSparseMatrix::read: truncated block");
    builder.add(i, j, b);
  }
  return builder.compress();
}

inline BlockSparseMatrix block_identity(Index block_rows, Index k) {
  BlockSparseBuilder b(block_rows, block_rows, k, k);
  for (Index i = 0; i < block_rows; ++i) b.add(i, i, Matrix::Identity(k, k));
  return b.compress();
}

/// C = A B for conforming block shapes (A blocks r x m, B blocks m x c).
inline BlockSparseMatrix multiply(const BlockSparseMatrix &a, const BlockSparseMatrix &b) {
  if (a.block_cols() != b.block_rows() || a.block_width() != b.block_height())
    throw std::invalid_argument("multiply: block shape mismatch");
  BlockSparseBuilder out(a.block_rows(), b.block_cols(), a.block_height(), b.block_width());
  for (Index i = 0; i < a.block_rows(); ++i)
    for (Index e = a.row_begin(i); e < a.row_end(i); ++e) {
      const Index k = a.col(e);
      const auto ab = a.block(e);
      for (Index f = b.row_begin(k); f < b.row_end(k); ++f)
        out.add(i, b.col(f), ab * b.block(f));
    }
  return out.compress();
}

/// Galerkin triple product P^T A P for a square, symmetric-structured A.
inline BlockSparseMatrix galerkin_product(const BlockSparseMatrix &p,
                                          const BlockSparseMatrix &a) {
  if (a.block_rows() != a.block_cols() || a.block_height() != a.block_width())
    throw std::invalid_argument("galerkin_product: A must be square-blocked");
  if (a.block_cols() != p.block_rows() || a.block_width() != p.block_height())
    throw std::invalid_argument("galerkin_product: shape mismatch");
  const BlockSparseMatrix ap = multiply(a, p);
  BlockSparseBuilder out(p.block_cols(), p.block_cols(), p.block_width(), p.block_width());
  for (Index i = 0; i < p.block_rows(); ++i)
    for (Index e = p.row_begin(i); e < p.row_end(i); ++e) {
      const auto pb = p.block(e);
      for (Index f = ap.row_begin(i); f < ap.row_end(i); ++f)
        out.add(p.col(e), ap.col(f), pb.transpose() * ap.block(f));
    }
  return out.compress();
}

} // namespace atamg

#endif
