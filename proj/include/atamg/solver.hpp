#ifndef ATAMG_SOLVER_HPP
#define ATAMG_SOLVER_HPP

#include "atamg/coarsening.hpp"
#include "atamg/smoothing.hpp"
#include "atamg/topology.hpp"

#include <Eigen/Cholesky>

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace atamg {

enum class SmootherKind { BlockJacobi, BlockGaussSeidel, BlockL1 };

/// Stationary block smoother with pseudo-inverted diagonal blocks. The
/// l1 variant augments each diagonal block with the row sums of absolute
/// off-block entries.
struct Smoother {
  SmootherKind kind = SmootherKind::BlockGaussSeidel;
  std::vector<Matrix> block_inverse;

  /// One sweep x <- x + M^{-1}(b - A x); `transpose` applies M^T instead
  /// (reverse sweep for Gauss-Seidel, identical for Jacobi and l1).
  void apply(const BlockSparseMatrix &a, const Vector &b, Vector &x, bool transpose) const;
};

Smoother make_smoother(const BlockSparseMatrix &a, SmootherKind kind, double tol = kRankTol);

/// Dense factorization of the regularized coarsest matrix
/// A_L + (I - E_L E_L^T).
struct CoarsestFactor {
  Matrix regularized;
  Eigen::LDLT<Matrix> factor;
  VertexKernelBasis basis;

  Vector solve(const Vector &b) const { return factor.solve(b); }
};

CoarsestFactor coarsest_solve_factorize(const BlockSparseMatrix &a_coarsest,
                                        const VertexKernelBasis &basis, double tol = kRankTol);

/// One symmetric application x' = x + B_TG^{-1}(b - A x): pre-smooth,
/// exact coarse correction through P, post-smooth with the transposed
/// smoother.
Vector two_grid_apply(const BlockSparseMatrix &a, const Smoother &m, const BlockSparseMatrix &p,
                      const CoarsestFactor &coarse, const Vector &b, const Vector &x0);

struct HierarchyConfig {
  CoarseningParams coarsening;
  SmoothingParams smoothing;
  bool smoothed_prolongation = true;
  SmootherKind smoother = SmootherKind::BlockGaussSeidel;
  std::vector<int> rounds_per_level;  // last entry repeats; empty = coarsening.rounds
  std::vector<Index> caps_per_level;  // last entry repeats; empty = smoothing.cap
  Index coarse_static = 40;           // stop at min(coarse_static, n0/coarse_reduction)
  double coarse_reduction = 100.0;
  int max_levels = 25;
  double stall_fraction = 0.95;       // < 5% vertex reduction counts as a stall
  int pre_smooth = 1;
  int post_smooth = 1;
};

struct Level {
  BlockSparseMatrix matrix;
  AuxTopology topology;
  Agglomeration agg;
  BlockSparseMatrix prolongation; // operator used for the Galerkin product
  BlockSparseMatrix tentative;    // unsmoothed transport (diagnostics)
  Smoother smoother;
};

/// Multigrid hierarchy; apply() runs one V-cycle as B^{-1}.
struct Hierarchy {
  std::vector<Level> levels;      // all levels above the coarsest
  BlockSparseMatrix coarsest;     // coarsest-level matrix
  AuxTopology coarsest_topology;
  CoarsestFactor coarsest_factor;
  bool stalled = false;           // coarsening stalled before the target size
  int pre_smooth = 1;
  int post_smooth = 1;

  int level_count() const { return static_cast<int>(levels.size()) + 1; }
  Index coarsest_vertices() const { return coarsest.block_rows(); }
  std::vector<Index> level_vertex_counts() const;
  std::vector<Index> level_nonzeros() const;
  double vertex_complexity() const;
  double operator_complexity() const;

  Vector apply(const Vector &b) const;

private:
  Vector cycle(std::size_t level, const Vector &b) const;
};

Hierarchy setup_hierarchy(const BlockSparseMatrix &a, const AuxTopology &topology,
                          const HierarchyConfig &config);

struct SolveReport {
  bool converged = false;
  int iterations = 0;
  double final_residual = 0.0;      // relative preconditioned residual
  double ritz_min = 0.0, ritz_max = 0.0, cond_estimate = 1.0;
  int levels = 1;
  Index coarsest_vertices = 0;
  std::vector<Index> level_vertices;
  double vertex_complexity = 1.0, operator_complexity = 1.0;
  double setup_seconds = 0.0, solve_seconds = 0.0;

  static std::string csv_header();
  void write_csv_row(std::ostream &os, bool with_times = true) const;
  void write_table(std::ostream &os, bool with_times = true) const;
};

/// Preconditioned conjugate gradients with a Lanczos condition estimate
/// assembled from the iteration coefficients. Reduces the preconditioned
/// residual norm sqrt(r^T B^{-1} r) by rtol relative to the start.
SolveReport pcg(const BlockSparseMatrix &a, const Vector &b,
                const std::function<Vector(const Vector &)> &preconditioner, Vector &x,
                double rtol, int maxit);

/// Eigen-based counterpart of gen_eig_sup for dense diagnostic sizes;
/// algorithmically independent of the Jacobi-rotation path.
ExtendedReal dense_gen_eig_sup(const Matrix &m, const Matrix &a, double tol = kRankTol);

struct TwoGridDiagnostics {
  double kappa = 1.0;      // lambda_max / lambda_min over the positive spectrum
  double lambda_min = 1.0; // extreme eigenvalues of the (B_TG, A) pencil
  double lambda_max = 1.0;
};

/// Dense condition diagnostics of a preconditioner action against an SPD
/// (or constrained-SPD) matrix; sizes are guarded to ~3200 unknowns.
TwoGridDiagnostics dense_preconditioner_condition(
    const BlockSparseMatrix &a, const std::function<Vector(const Vector &)> &apply_binv);

TwoGridDiagnostics dense_two_grid_condition(const BlockSparseMatrix &a, const Smoother &m,
                                            const BlockSparseMatrix &p);

/// K_TG of the auxiliary-side pencil: sup over ker(A_hat)-perp of the
/// D-hat best-fit complement energy against the auxiliary energy.
double ktg_constant(const BlockSparseMatrix &aux, const BlockSparseMatrix &p,
                    double tol = kRankTol);

} // namespace atamg

#endif
