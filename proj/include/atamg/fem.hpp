#ifndef ATAMG_FEM_HPP
#define ATAMG_FEM_HPP

#include "atamg/block_sparse.hpp"
#include "atamg/mesh.hpp"

#include <vector>

namespace atamg {

/// Per-element coefficients: (alpha, beta) for the scalar problem,
/// (mu, lambda, beta) for elasticity. Unused entries stay at defaults.
struct CoefficientField {
  std::vector<double> alpha;  // scalar diffusion, > 0
  std::vector<double> mu;     // shear modulus, > 0
  std::vector<double> lambda; // divergence penalty, >= 0
  std::vector<double> beta;   // L2 mass weight, >= 0

  static CoefficientField uniform_scalar(Index elements, double alpha, double beta);
  static CoefficientField uniform_elasticity(Index elements, double mu, double lambda,
                                             double beta);
};

/// Diagonal chain of boxes [(i-1)/n, i/n]^d tagged with the hard material,
/// soft everywhere else; decided by element centroid.
CoefficientField boxes_coefficients(const StructuredMesh &mesh, Index n_boxes,
                                    double mu_soft, double lambda_soft, double mu_hard,
                                    double lambda_hard);

/// P1 element matrix of alpha grad(u).grad(v) + beta u v on one simplex.
Matrix scalar_element_matrix(const StructuredMesh &mesh, Index element, double alpha,
                             double beta);

/// P1 element matrix of mu eps(u):eps(v) + lambda div(u) div(v) + beta u.v,
/// ordered vertex-major with d displacement components per vertex.
Matrix elasticity_element_matrix(const StructuredMesh &mesh, Index element, double mu,
                                 double lambda, double beta);

/// Assembled scalar matrix without boundary conditions (k = 1 blocks).
BlockSparseMatrix assemble_scalar_matrix(const StructuredMesh &mesh,
                                         const CoefficientField &coeffs);

/// Assembled elasticity matrix without boundary conditions (d x d blocks).
BlockSparseMatrix assemble_elasticity_matrix(const StructuredMesh &mesh,
                                             const CoefficientField &coeffs);

/// Replace rows/columns of flagged vertices by identity blocks.
BlockSparseMatrix constrain_dirichlet(const BlockSparseMatrix &a,
                                      const std::vector<bool> &dirichlet);

struct AssembledProblem {
  BlockSparseMatrix matrix;        // Dirichlet-constrained system matrix
  BlockSparseMatrix raw_matrix;    // same bilinear form without constraints
  std::vector<bool> dirichlet;     // V_D flags per vertex
};

AssembledProblem assemble_scalar(const StructuredMesh &mesh, const CoefficientField &coeffs,
                                 const std::vector<BoxFace> &dirichlet_tags);

AssembledProblem assemble_elasticity(const StructuredMesh &mesh, const CoefficientField &coeffs,
                                     const std::vector<BoxFace> &dirichlet_tags);

} // namespace atamg

#endif
