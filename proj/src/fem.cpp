#include "atamg/fem.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace atamg {

namespace {

/// Constant P1 shape gradients on a simplex, one column per vertex.
Matrix shape_gradients(const StructuredMesh &mesh, Index element, double &volume) {
  const int d = mesh.dim;
  const auto &el = mesh.elements[static_cast<std::size_t>(element)];
  Matrix edges(d, d);
  for (int c = 0; c < d; ++c)
    edges.col(c) = (mesh.vertices[static_cast<std::size_t>(el[static_cast<std::size_t>(c) + 1])] -
                    mesh.vertices[static_cast<std::size_t>(el[0])])
                       .head(d);
  volume = mesh.element_volume(element);
  if (std::abs(volume) < 1e-300) throw std::runtime_error("degenerate element");
  // gradients of barycentric coordinates 1..d are the rows of edges^{-1}
  const Matrix grad_later = edges.inverse().eval();
  Matrix grads(d, d + 1);
  grads.col(0) = -grad_later.colwise().sum().transpose();
  for (int c = 0; c < d; ++c) grads.col(c + 1) = grad_later.row(c).transpose();
  return grads;
}

} // namespace

CoefficientField CoefficientField::uniform_scalar(Index elements, double alpha, double beta) {
  CoefficientField f;
  f.alpha.assign(static_cast<std::size_t>(elements), alpha);
  f.beta.assign(static_cast<std::size_t>(elements), beta);
  return f;
}

CoefficientField CoefficientField::uniform_elasticity(Index elements, double mu, double lambda,
                                                      double beta) {
  CoefficientField f;
  f.mu.assign(static_cast<std::size_t>(elements), mu);
  f.lambda.assign(static_cast<std::size_t>(elements), lambda);
  f.beta.assign(static_cast<std::size_t>(elements), beta);
  return f;
}

CoefficientField boxes_coefficients(const StructuredMesh &mesh, Index n_boxes, double mu_soft,
                                    double lambda_soft, double mu_hard, double lambda_hard) {
  if (n_boxes < 2) throw std::invalid_argument("boxes_coefficients: need at least 2 boxes");
  CoefficientField f = CoefficientField::uniform_elasticity(mesh.element_count(), mu_soft,
                                                            lambda_soft, 0.0);
  const double w = 1.0 / static_cast<double>(n_boxes);
  for (Index e = 0; e < mesh.element_count(); ++e) {
    const Vec3 c = mesh.element_centroid(e);
    for (Index b = 0; b < n_boxes; ++b) {
      const double lo = static_cast<double>(b) * w;
      const double hi = lo + w;
      bool inside = true;
      for (int a = 0; a < mesh.dim; ++a)
        if (c[a] < lo || c[a] > hi) {
          inside = false;
          break;
        }
      if (inside) {
        f.mu[static_cast<std::size_t>(e)] = mu_hard;
        f.lambda[static_cast<std::size_t>(e)] = lambda_hard;
        break;
      }
    }
  }
  return f;
}

Matrix scalar_element_matrix(const StructuredMesh &mesh, Index element, double alpha,
                             double beta) {
  const int d = mesh.dim;
  double volume = 0.0;
  const Matrix grads = shape_gradients(mesh, element, volume);
  Matrix k = alpha * volume * (grads.transpose() * grads);
  if (beta != 0.0) {
    // exact P1 mass matrix on a simplex
    const double scale = beta * volume / static_cast<double>((d + 1) * (d + 2));
    for (int a = 0; a <= d; ++a)
      for (int b = 0; b <= d; ++b) k(a, b) += scale * (a == b ? 2.0 : 1.0);
  }
  return k;
}

Matrix elasticity_element_matrix(const StructuredMesh &mesh, Index element, double mu,
                                 double lambda, double beta) {
  const int d = mesh.dim;
  double volume = 0.0;
  const Matrix grads = shape_gradients(mesh, element, volume);
  const int nv = d + 1;
  Matrix k = Matrix::Zero(nv * d, nv * d);
  const double mass = beta * volume / static_cast<double>((d + 1) * (d + 2));
  for (int a = 0; a < nv; ++a)
    for (int b = 0; b < nv; ++b) {
      const double gg = grads.col(a).dot(grads.col(b));
      for (int l = 0; l < d; ++l)
        for (int m = 0; m < d; ++m) {
          double v = volume * (0.5 * mu * (gg * (l == m ? 1.0 : 0.0) + grads(m, a) * grads(l, b)) +
                               lambda * grads(l, a) * grads(m, b));
          if (l == m) v += mass * (a == b ? 2.0 : 1.0);
          k(a * d + l, b * d + m) += v;
        }
    }
  return k;
}

namespace {

BlockSparseMatrix assemble(const StructuredMesh &mesh, int k,
                           const std::function<Matrix(Index)> &element_matrix) {
  const Index n = mesh.vertex_count();
  BlockSparseBuilder builder(n, n, k, k);
  for (Index e = 0; e < mesh.element_count(); ++e) {
    const Matrix ke = element_matrix(e);
    const auto &el = mesh.elements[static_cast<std::size_t>(e)];
    const int nv = mesh.dim + 1;
    for (int a = 0; a < nv; ++a)
      for (int b = 0; b < nv; ++b)
        builder.add(el[static_cast<std::size_t>(a)], el[static_cast<std::size_t>(b)],
                    ke.block(a * k, b * k, k, k));
  }
  return builder.compress();
}

} // namespace

BlockSparseMatrix assemble_scalar_matrix(const StructuredMesh &mesh,
                                         const CoefficientField &coeffs) {
  return assemble(mesh, 1, [&](Index e) {
    return scalar_element_matrix(mesh, e, coeffs.alpha[static_cast<std::size_t>(e)],
                                 coeffs.beta.empty() ? 0.0
                                                     : coeffs.beta[static_cast<std::size_t>(e)]);
  });
}

BlockSparseMatrix assemble_elasticity_matrix(const StructuredMesh &mesh,
                                             const CoefficientField &coeffs) {
  if (mesh.dim < 2)
    throw std::invalid_argument("assemble_elasticity_matrix: dim must be 2 or 3");
  return assemble(mesh, mesh.dim, [&](Index e) {
    return elasticity_element_matrix(
        mesh, e, coeffs.mu[static_cast<std::size_t>(e)],
        coeffs.lambda.empty() ? 0.0 : coeffs.lambda[static_cast<std::size_t>(e)],
        coeffs.beta.empty() ? 0.0 : coeffs.beta[static_cast<std::size_t>(e)]);
  });
}

BlockSparseMatrix constrain_dirichlet(const BlockSparseMatrix &a,
                                      const std::vector<bool> &dirichlet) {
  const Index n = a.block_rows();
  const Index k = a.block_height();
  BlockSparseBuilder builder(n, n, k, k);
  for (Index i = 0; i < n; ++i) {
    if (dirichlet[static_cast<std::size_t>(i)]) {
      builder.add(i, i, Matrix::Identity(k, k));
      continue;
    }
    for (Index e = a.row_begin(i); e < a.row_end(i); ++e) {
      const Index j = a.col(e);
      if (i != j && dirichlet[static_cast<std::size_t>(j)]) continue;
      builder.add(i, j, Matrix(a.block(e)));
    }
  }
  return builder.compress();
}

AssembledProblem assemble_scalar(const StructuredMesh &mesh, const CoefficientField &coeffs,
                                 const std::vector<BoxFace> &dirichlet_tags) {
  AssembledProblem p;
  p.raw_matrix = assemble_scalar_matrix(mesh, coeffs);
  p.dirichlet = mesh.dirichlet_flags(dirichlet_tags);
  p.matrix = constrain_dirichlet(p.raw_matrix, p.dirichlet);
  return p;
}

AssembledProblem assemble_elasticity(const StructuredMesh &mesh, const CoefficientField &coeffs,
                                     const std::vector<BoxFace> &dirichlet_tags) {
  AssembledProblem p;
  p.raw_matrix = assemble_elasticity_matrix(mesh, coeffs);
  p.dirichlet = mesh.dirichlet_flags(dirichlet_tags);
  p.matrix = constrain_dirichlet(p.raw_matrix, p.dirichlet);
  return p;
}

} // namespace atamg
