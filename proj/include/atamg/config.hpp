#ifndef ATAMG_CONFIG_HPP
#define ATAMG_CONFIG_HPP

#include "atamg/fem.hpp"
#include "atamg/solver.hpp"

#include <iosfwd>
#include <string>

namespace atamg {

/// Everything a run needs, parsed from a flat `key = value` file with `#`
/// comments. Unknown keys are rejected with a diagnostic naming the key.
struct RunConfig {
  std::string problem = "poisson3d"; // poisson1d/2d/3d, elasticity2d/3d, boxes2d/3d
  Index n = 8;                       // cells per axis
  double alpha = 1.0;
  double beta = 0.0;
  double mu = 1.0;
  double lambda = 0.0;
  double mu_hard = 1e4;
  double lambda_hard = 1e4;
  Index n_boxes = 11;
  double beam_aspect = 4.0;          // beam length relative to thickness
  std::string dirichlet = "auto";    // auto | none | left | all

  double sigma = 0.0;                // 0 = default (20 scalar, 40 elasticity)
  int delta = 1;
  int pick_rule = 1;                 // R: 1 = mu_s candidate, 0 = mu_p candidate
  std::string rounds = "";           // comma list, last repeats; default per problem
  std::string criteria = "robust";   // robust | scalar

  std::string prolongation = "smoothed"; // tentative | smoothed
  double omega = 2.0 / 3.0;
  std::string cap = "4";             // comma list, last repeats

  std::string smoother = "gs";       // gs | jacobi | l1
  Index coarse_static = 40;
  double coarse_reduction = 100.0;
  int max_levels = 25;
  int pre_smooth = 1;
  int post_smooth = 1;

  double rtol = 1e-6;
  int maxit = 500;
  std::uint64_t seed = 1;

  double effective_sigma(bool elasticity) const {
    if (sigma > 0.0) return sigma;
    return elasticity ? 40.0 : 20.0;
  }

  /// Echo of every key in file order, for report headers.
  std::string echo() const;
};

RunConfig parse_config(std::istream &is);
RunConfig parse_config_file(const std::string &path);

/// Assembled matrix, rhs and auxiliary topology for one of the built-in
/// model problems. The topology is built from the unconstrained matrix so
/// boundary couplings fold into coarse vertex weights; the solve runs on
/// the constrained one.
struct Problem {
  StructuredMesh mesh;
  BlockSparseMatrix matrix;
  AuxTopology topology;
  Vector rhs;
  bool elasticity = false;
};

Problem build_problem(const RunConfig &config);

HierarchyConfig make_hierarchy_config(const RunConfig &config, bool elasticity);

} // namespace atamg

#endif
