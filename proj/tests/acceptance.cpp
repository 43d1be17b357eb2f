// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are fixed here, not configurable.

#include "atamg/config.hpp"
#include "atamg/dense.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <iomanip>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include "test_support.hpp"

using namespace atamg;
using namespace atamg::testing;

namespace {

int failures = 0;

struct Criterion {
  std::ostringstream detail;
  bool ok = true;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void require(bool condition, const std::string &what) {
    if (!condition) {
      ok = false;
      detail << " FAILED[" << what << "]";
    }
  }
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  void finish(int number, const std::string &title) {
    const double t = seconds();
    std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << number << ": " << title << " ("
              << detail.str() << (detail.str().empty() ? "" : "; ") << std::fixed
              << std::setprecision(1) << t << " s)\n"
              << std::defaultfloat << std::flush;
    if (!ok) ++failures;
  }
};

Vector rigid_coarse_mode(const Agglomeration &agg, Index k, int d, const Vector &tr,
                         const Vector &ro) {
  Vector u(agg.coarse_count() * k);
  for (Index g = 0; g < agg.coarse_count(); ++g) {
    u.segment(g * k, d) =
        tr + skew_matrix(d, agg.coarse_positions[static_cast<std::size_t>(g)]) * ro;
    u.segment(g * k + d, k - d) = ro;
  }
  return u;
}

// ---------------------------------------------------------------------------
// 1. Exact Galerkin commutation of the coarse topology
void criterion_1() {
  Criterion c;
  SplitMix64 rng(1001);
  int tested = 0;
  double worst = 0.0;
  while (tested < 210) {
    const int pick = tested % 3;
    const TopologyKind kind = pick == 0 ? TopologyKind::Scalar : TopologyKind::Elasticity;
    const int dim = pick == 2 ? 3 : 2;
    AuxTopology t = random_topology(rng, kind, dim, 7 + static_cast<Index>(rng.below(5)), true, 6);
    for (Index v = 0; v < t.vertex_count(); ++v)
      if (rng.uniform() < 0.1) t.dirichlet[static_cast<std::size_t>(v)] = true;
    const Agglomeration agg = random_agglomeration(rng, t);
    if (agg.coarse_count() == 0) continue;
    ++tested;

    const BlockSparseMatrix ahat = assemble_aux_matrix(t);
    const BlockSparseMatrix p = build_tentative_prolongation(t, agg);
    const Matrix direct = assemble_aux_matrix(coarsen_topology(t, agg)).dense();
    const Matrix galerkin = galerkin_product(p, ahat).dense();
    const double scale = std::max(1.0, galerkin.cwiseAbs().maxCoeff());
    worst = std::max(worst, (direct - galerkin).cwiseAbs().maxCoeff() / scale);
  }
  c.require(worst <= 1e-11, "entrywise 1e-11");
  c.require(c.seconds() < 30.0, "runtime < 30 s");
  c.detail << tested << " instances, worst rel. error " << worst;
  c.finish(1, "coarse topology commutes with the Galerkin product");
}

// ---------------------------------------------------------------------------
// 2. Kernel exactness of tentative and smoothed prolongations
void criterion_2() {
  Criterion c;
  SplitMix64 rng(2002);
  double worst_energy = 0.0, worst_diff = 0.0;

  // random auxiliary topologies, all rigid modes
  for (int trial = 0; trial < 12; ++trial) {
    const int d = 2 + trial % 2;
    const AuxTopology t = random_topology(rng, TopologyKind::Elasticity, d, 9, false, 7);
    CoarseningParams params;
    params.sigma = 1e12; // merge everything pairwise
    params.rounds = 2;
    const Agglomeration agg = successive_matching(t, params);
    if (agg.coarse_count() == 0) continue;
    const BlockSparseMatrix ahat = assemble_aux_matrix(t);
    const BlockSparseMatrix p = build_tentative_prolongation(t, agg);
    SmoothingParams sp;
    sp.cap = 3;
    const FilteredAuxMatrix f = build_filtered_aux(t, ahat, agg, sp);
    const BlockSparseMatrix ps = smooth_prolongation(f, t, agg, p, 2.0 / 3.0);

    const Index k = t.k();
    for (int mode = 0; mode < k; ++mode) {
      Vector tr = Vector::Zero(d), ro = Vector::Zero(k - d);
      if (mode < d)
        tr[mode] = 1.0;
      else
        ro[mode - d] = 1.0;
      const Vector uc = rigid_coarse_mode(agg, k, d, tr, ro);
      const Vector lifted = p.multiply(uc);
      worst_energy = std::max(worst_energy, ahat.multiply(lifted).cwiseAbs().maxCoeff() /
                                                (ahat.max_abs() * uc.cwiseAbs().maxCoeff()));
      worst_diff = std::max(worst_diff, (ps.multiply(uc) - lifted).cwiseAbs().maxCoeff());
    }
  }

  // scalar constants
  for (int trial = 0; trial < 6; ++trial) {
    const AuxTopology t = random_topology(rng, TopologyKind::Scalar, 2, 10, false, 6);
    CoarseningParams params;
    params.sigma = 1e12;
    params.rounds = 2;
    const Agglomeration agg = successive_matching(t, params);
    const BlockSparseMatrix ahat = assemble_aux_matrix(t);
    const BlockSparseMatrix p = build_tentative_prolongation(t, agg);
    SmoothingParams sp;
    sp.cap = 2;
    const BlockSparseMatrix ps =
        smooth_prolongation(build_filtered_aux(t, ahat, agg, sp), t, agg, p, 2.0 / 3.0);
    const Vector ones = Vector::Ones(agg.coarse_count());
    worst_energy = std::max(worst_energy,
                            ahat.multiply(p.multiply(ones)).cwiseAbs().maxCoeff() / ahat.max_abs());
    worst_diff =
        std::max(worst_diff, (ps.multiply(ones) - p.multiply(ones)).cwiseAbs().maxCoeff());
  }

  // finest-level elasticity through the displacement restriction
  for (int d = 2; d <= 3; ++d) {
    const StructuredMesh mesh = make_structured_mesh(d, d == 2 ? 6 : 3);
    const CoefficientField coeffs =
        CoefficientField::uniform_elasticity(mesh.element_count(), 1.0, 0.4, 0.0);
    const BlockSparseMatrix a = assemble_elasticity_matrix(mesh, coeffs);
    const AuxTopology t = build_elasticity_topology(
        a, mesh.vertices, std::vector<bool>(static_cast<std::size_t>(mesh.vertex_count()), false));
    CoarseningParams params;
    const Agglomeration agg = successive_matching(t, params);
    const BlockSparseMatrix pf = build_tentative_prolongation(t, agg, true);
    SmoothingParams sp;
    sp.cap = 4;
    const BlockSparseMatrix ps =
        smooth_prolongation(build_filtered_aux(t, a, agg, sp), t, agg, pf, 2.0 / 3.0);
    const Index k = t.k();
    for (int mode = 0; mode < k; ++mode) {
      Vector tr = Vector::Zero(d), ro = Vector::Zero(k - d);
      if (mode < d)
        tr[mode] = 1.0;
      else
        ro[mode - d] = 1.0;
      const Vector uc = rigid_coarse_mode(agg, k, d, tr, ro);
      const Vector lifted = pf.multiply(uc);
      worst_energy = std::max(worst_energy, a.multiply(lifted).cwiseAbs().maxCoeff() /
                                                (a.max_abs() * uc.cwiseAbs().maxCoeff()));
      worst_diff = std::max(worst_diff, (ps.multiply(uc) - lifted).cwiseAbs().maxCoeff());
    }
  }

  c.require(worst_energy <= 1e-10, "zero transported energy 1e-10");
  c.require(worst_diff <= 1e-12, "smoothed == tentative on kernels 1e-12");
  c.detail << "energy " << worst_energy << ", smoothed-vs-tentative " << worst_diff;
  c.finish(2, "prolongations preserve kernel vectors exactly");
}

// ---------------------------------------------------------------------------
// 3. mu chain: hand values and the pair bound
void criterion_3() {
  Criterion c;
  SplitMix64 rng(3003);

  // exact hand values from the pair / common-neighbor configurations
  {
    const double e = 2.5;
    AuxTopology pair;
    pair.kind = TopologyKind::Scalar;
    pair.positions = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
    pair.vertex_weights.assign(2, Matrix::Zero(1, 1));
    pair.dirichlet.assign(2, false);
    pair.edges.push_back({0, 1, e * Matrix::Ones(1, 1)});
    const MeasureContext pctx(pair);
    c.require(std::abs(mu_pair(pctx, 0, 1, 0).value() - 0.5) <= 1e-12, "pair value 1/2 (delta 0)");
    c.require(std::abs(mu_pair(pctx, 0, 1, 1).value() - 0.5) <= 1e-12, "pair value 1/2 (delta 1)");

    AuxTopology tri = pair;
    tri.positions.push_back(Vec3(0.5, 1, 0));
    tri.vertex_weights.push_back(Matrix::Zero(1, 1));
    tri.dirichlet.push_back(false);
    tri.edges.push_back({0, 2, e * Matrix::Ones(1, 1)});
    tri.edges.push_back({1, 2, e * Matrix::Ones(1, 1)});
    const MeasureContext tctx(tri);
    c.require(std::abs(mu_pair(tctx, 0, 1, 1).value() - 0.8) <= 1e-12, "triple value 0.8");
    c.require(std::abs(mu_pair(tctx, 0, 1, 0).value() - 1.0) <= 1e-12, "triple value 1.0");
  }

  // equality on 100 weight-free random pairs
  int tested = 0;
  double worst_rel = 0.0;
  while (tested < 100) {
    const int pick = tested % 3;
    const TopologyKind kind = pick == 0 ? TopologyKind::Scalar : TopologyKind::Elasticity;
    const AuxTopology t = random_topology(rng, kind, pick == 2 ? 3 : 2, 5, false, 4);
    const MeasureContext ctx(t);
    if (!ctx.edge(1, 2)) continue;
    const int delta = tested % 2;
    const ExtendedReal mp = mu_pair(ctx, 1, 2, delta);
    const ExtendedReal mg = mu_agglomerate_value(ctx, {1, 2}, delta);
    if (!mp.is_finite() || !mg.is_finite()) continue;
    ++tested;
    worst_rel = std::max(worst_rel, std::abs(mg.value() - mp.value()) /
                                        std::max(1e-300, mp.value()));
  }
  c.require(worst_rel <= 1e-8, "mu_g == mu_p (M = 0) rel 1e-8");

  // upper bound with vertex weights
  double worst_excess = 0.0;
  for (int trial = 0; trial < 60; ++trial) {
    const AuxTopology t = random_topology(
        rng, trial % 2 == 0 ? TopologyKind::Scalar : TopologyKind::Elasticity, 2, 5, true, 4);
    const MeasureContext ctx(t);
    if (!ctx.edge(1, 2)) continue;
    const int delta = trial % 2;
    const ExtendedReal mp = mu_pair(ctx, 1, 2, delta);
    const ExtendedReal mg = mu_agglomerate_value(ctx, {1, 2}, delta);
    if (!mp.is_finite()) continue;
    worst_excess = std::max(worst_excess, mg.value() - mp.value());
  }
  c.require(worst_excess <= 1e-8, "mu_g <= mu_p + 1e-8");
  c.detail << tested << " weight-free pairs, worst rel " << worst_rel << ", worst excess "
           << worst_excess;
  c.finish(3, "pairwise measure bounds the agglomerate measure");
}

// ---------------------------------------------------------------------------
// 4. Two-grid bound: K_TG against the measure suprema, and A <= B_TG
void criterion_4() {
  Criterion c;

  struct Case {
    std::string name;
    AuxTopology topology;
    double sigma;
  };
  std::vector<Case> cases;

  { // scalar with mass on part of the domain: those vertices drop by mu_D
    const StructuredMesh mesh = make_structured_mesh(2, 9);
    CoefficientField coeffs = CoefficientField::uniform_scalar(mesh.element_count(), 1.0, 0.0);
    for (Index e = 0; e < mesh.element_count(); ++e)
      if (mesh.element_centroid(e)[0] < 0.3) coeffs.beta[static_cast<std::size_t>(e)] = 60.0;
    const BlockSparseMatrix a = assemble_scalar_matrix(mesh, coeffs);
    cases.push_back({"scalar+mass", build_scalar_topology(a, mesh.vertices,
                                                           std::vector<bool>(100, false)),
                     20.0});
  }
  { // scalar Dirichlet folded into vertex weights (one coarsening step)
    const StructuredMesh mesh = make_structured_mesh(2, 9);
    const CoefficientField coeffs =
        CoefficientField::uniform_scalar(mesh.element_count(), 1.0, 0.0);
    const AssembledProblem fem = assemble_scalar(mesh, coeffs, {BoxFace::XLo, BoxFace::XHi,
                                                                BoxFace::YLo, BoxFace::YHi});
    const AuxTopology t = build_scalar_topology(fem.raw_matrix, mesh.vertices, fem.dirichlet);
    Agglomeration singles;
    singles.dropped = fem.dirichlet;
    for (Index v = 0; v < t.vertex_count(); ++v)
      if (!fem.dirichlet[static_cast<std::size_t>(v)]) singles.agglomerates.push_back({v});
    singles.coarse_positions = Agglomeration::centroids(singles.agglomerates, t.positions);
    cases.push_back({"scalar folded dirichlet", coarsen_topology(t, singles), 20.0});
  }
  { // free 2d elasticity beam: singular auxiliary matrix, empty drop set
    const StructuredMesh mesh = make_box_mesh(2, {12, 3, 1}, {4.0, 1.0, 1.0});
    const CoefficientField coeffs =
        CoefficientField::uniform_elasticity(mesh.element_count(), 1.0, 0.0, 0.0);
    const BlockSparseMatrix a = assemble_elasticity_matrix(mesh, coeffs);
    cases.push_back({"free 2d beam",
                     build_elasticity_topology(a, mesh.vertices,
                                               std::vector<bool>(
                                                   static_cast<std::size_t>(mesh.vertex_count()),
                                                   false)),
                     40.0});
  }
  { // 3d elasticity with Dirichlet couplings folded (second-level object)
    const StructuredMesh mesh = make_box_mesh(3, {8, 2, 2}, {4.0, 1.0, 1.0});
    const CoefficientField coeffs =
        CoefficientField::uniform_elasticity(mesh.element_count(), 1.0, 0.5, 0.0);
    const AssembledProblem fem = assemble_elasticity(mesh, coeffs, {BoxFace::XLo});
    const AuxTopology t = build_elasticity_topology(fem.raw_matrix, mesh.vertices, fem.dirichlet);
    Agglomeration singles;
    singles.dropped = fem.dirichlet;
    for (Index v = 0; v < t.vertex_count(); ++v)
      if (!fem.dirichlet[static_cast<std::size_t>(v)]) singles.agglomerates.push_back({v});
    singles.coarse_positions = Agglomeration::centroids(singles.agglomerates, t.positions);
    cases.push_back({"3d beam folded dirichlet", coarsen_topology(t, singles), 40.0});
  }

  for (const Case &instance : cases) {
    CoarseningParams params;
    params.sigma = instance.sigma;
    params.rounds = 2;
    const Agglomeration agg = successive_matching(instance.topology, params);
    if (agg.coarse_count() == 0) {
      c.require(false, instance.name + ": empty coarsening");
      continue;
    }
    const bool scalar = instance.topology.kind == TopologyKind::Scalar;

    // For scalar problems the bound is asserted in the theorem's raw form:
    // dropped vertices enter through mu_D, agglomerate measures through the
    // unfolded weights. For elasticity, dropped couplings fold into vertex
    // weights first (the object the matching decisions were made on);
    // without the fold the unweighted agglomerate pencil may have no finite
    // constant at all.
    AuxTopology object = instance.topology;
    Agglomeration object_agg = agg;
    double bound = 0.0;
    if (scalar) {
      const MeasureContext ctx(instance.topology);
      for (Index v = 0; v < instance.topology.vertex_count(); ++v) {
        if (!agg.dropped[static_cast<std::size_t>(v)]) continue;
        if (instance.topology.dirichlet[static_cast<std::size_t>(v)]) continue;
        const ExtendedReal mu =
            mu_dirichlet(ctx.diag[static_cast<std::size_t>(v)],
                         instance.topology.vertex_weights[static_cast<std::size_t>(v)]);
        c.require(mu.is_finite(), instance.name + ": dropped vertex has finite mu_D");
        if (mu.is_finite()) bound = std::max(bound, mu.value());
      }
    } else {
      std::vector<Index> to_ref(static_cast<std::size_t>(instance.topology.vertex_count()), -1);
      Agglomeration singles;
      singles.dropped = agg.dropped;
      for (Index v = 0; v < instance.topology.vertex_count(); ++v)
        if (!agg.dropped[static_cast<std::size_t>(v)]) {
          to_ref[static_cast<std::size_t>(v)] = static_cast<Index>(singles.agglomerates.size());
          singles.agglomerates.push_back({v});
        }
      singles.coarse_positions =
          Agglomeration::centroids(singles.agglomerates, instance.topology.positions);
      object = coarsen_topology(instance.topology, singles);
      object_agg.dropped.assign(static_cast<std::size_t>(object.vertex_count()), false);
      object_agg.agglomerates.clear();
      for (const auto &group : agg.agglomerates) {
        std::vector<Index> mapped;
        for (Index v : group) mapped.push_back(to_ref[static_cast<std::size_t>(v)]);
        std::sort(mapped.begin(), mapped.end());
        object_agg.agglomerates.push_back(std::move(mapped));
      }
      object_agg.coarse_positions =
          Agglomeration::centroids(object_agg.agglomerates, object.positions);
    }

    const BlockSparseMatrix ahat = assemble_aux_matrix(object);
    const BlockSparseMatrix p = build_tentative_prolongation(object, object_agg);
    const double ktg = ktg_constant(ahat, p);
    const MeasureContext ctx(object);
    for (const auto &group : object_agg.agglomerates) {
      const ExtendedReal mu = mu_agglomerate_value(ctx, group, params.delta);
      c.require(mu.is_finite(), instance.name + ": finite mu_g");
      if (mu.is_finite()) bound = std::max(bound, mu.value());
    }
    c.require(ktg <= bound + 1e-6, instance.name + ": K_TG bound");
    c.detail << instance.name << " K_TG " << ktg << " <= " << bound << "; ";
  }

  // A <= B_TG for actual two-grid and V-cycle operators
  {
    RunConfig config;
    config.problem = "poisson2d";
    config.n = 9;
    const Problem problem = build_problem(config);
    HierarchyConfig hc = make_hierarchy_config(config, false);
    hc.max_levels = 2;
    const Hierarchy tg = setup_hierarchy(problem.matrix, problem.topology, hc);
    const TwoGridDiagnostics d = dense_preconditioner_condition(
        problem.matrix, [&](const Vector &b) { return tg.apply(b); });
    c.require(d.lambda_max <= 1.0 + 1e-10, "scalar A <= B_TG");
    c.detail << "scalar lmax(Binv A) " << d.lambda_max << "; ";
  }
  {
    RunConfig config;
    config.problem = "elasticity2d";
    config.n = 3;
    const Problem problem = build_problem(config);
    HierarchyConfig hc = make_hierarchy_config(config, true);
    hc.max_levels = 2;
    const Hierarchy tg = setup_hierarchy(problem.matrix, problem.topology, hc);
    const TwoGridDiagnostics d = dense_preconditioner_condition(
        problem.matrix, [&](const Vector &b) { return tg.apply(b); });
    c.require(d.lambda_max <= 1.0 + 1e-10, "elasticity A <= B_TG");

    HierarchyConfig vc = make_hierarchy_config(config, true);
    vc.max_levels = 3;
    vc.coarse_static = 4;
    vc.coarse_reduction = 1e9;
    const Hierarchy vcycle = setup_hierarchy(problem.matrix, problem.topology, vc);
    const TwoGridDiagnostics dv = dense_preconditioner_condition(
        problem.matrix, [&](const Vector &b) { return vcycle.apply(b); });
    c.require(dv.lambda_max <= 1.0 + 1e-10, "elasticity A <= B_VC");
    c.detail << "elasticity lmax " << d.lambda_max << " (TG) " << dv.lambda_max << " (VC)";
  }

  c.require(c.seconds() < 120.0, "runtime < 2 min");
  c.finish(4, "K_TG bounded by the measure suprema and A <= B_TG");
}

// ---------------------------------------------------------------------------
// 5. Robustness contrast on the 2d boxes problem
Index box_of(const Vec3 &x, Index n_boxes, int dim) {
  // strict-interior box id, -1 for shared corners / outside
  Index found = -1;
  for (Index b = 0; b < n_boxes; ++b) {
    const double lo = static_cast<double>(b) / static_cast<double>(n_boxes);
    const double hi = static_cast<double>(b + 1) / static_cast<double>(n_boxes);
    bool inside = true, strict = false;
    for (int a = 0; a < dim; ++a) {
      if (x[a] < lo - 1e-12 || x[a] > hi + 1e-12) inside = false;
      if (x[a] > lo + 1e-12 && x[a] < hi - 1e-12) strict = true;
    }
    if (inside && strict) {
      if (found >= 0) return -1;
      found = b;
    }
    if (inside && !strict) return -1; // corner vertex shared between boxes
  }
  return found;
}

void criterion_5() {
  Criterion c;
  RunConfig config;
  config.problem = "boxes2d";
  config.n = 33;
  config.n_boxes = 11;
  config.prolongation = "tentative";
  config.rounds = "5";
  const Problem problem = build_problem(config);

  double kappa_robust = 0.0, kappa_scalar = 0.0;
  for (const bool robust : {true, false}) {
    config.criteria = robust ? "robust" : "scalar";
    HierarchyConfig hc = make_hierarchy_config(config, true);
    hc.max_levels = 2;
    const Hierarchy h = setup_hierarchy(problem.matrix, problem.topology, hc);
    const TwoGridDiagnostics d = dense_preconditioner_condition(
        problem.matrix, [&](const Vector &b) { return h.apply(b); });
    (robust ? kappa_robust : kappa_scalar) = d.kappa;

    if (robust) {
      // robust agglomerates never straddle two box interiors
      const Agglomeration &agg = h.levels[0].agg;
      int straddles = 0;
      for (const auto &group : agg.agglomerates) {
        Index box = -1;
        bool mixed = false;
        for (Index v : group) {
          const Index b = box_of(problem.mesh.vertices[static_cast<std::size_t>(v)], 11, 2);
          if (b < 0) continue;
          if (box >= 0 && b != box) mixed = true;
          box = b;
        }
        if (mixed) ++straddles;
      }
      c.require(straddles == 0, "no robust agglomerate spans two boxes");
    }
  }

  c.require(kappa_robust <= 20.0, "robust kappa <= 20");
  c.require(kappa_scalar / kappa_robust >= 10.0, "kappa ratio >= 10");
  c.require(c.seconds() < 300.0, "runtime < 5 min");
  c.detail << "kappa robust " << kappa_robust << ", scalar-only " << kappa_scalar << ", ratio "
           << kappa_scalar / kappa_robust;
  c.finish(5, "robust coarsening keeps the boxes problem well conditioned");
}

// ---------------------------------------------------------------------------
// 6. Scalar model problem trend
void criterion_6() {
  Criterion c;
  std::vector<int> its;
  for (Index n : {8, 12, 16}) {
    RunConfig config;
    config.problem = "poisson3d";
    config.n = n;
    const Problem problem = build_problem(config);
    const Hierarchy h = setup_hierarchy(problem.matrix, problem.topology,
                                        make_hierarchy_config(config, false));
    Vector x = Vector::Zero(problem.matrix.rows());
    const SolveReport r = pcg(
        problem.matrix, problem.rhs, [&](const Vector &b) { return h.apply(b); }, x, 1e-6, 200);
    c.require(r.converged, "n=" + std::to_string(n) + " converged");
    c.require(r.iterations <= 30, "n=" + std::to_string(n) + " its <= 30");
    c.require(h.operator_complexity() <= 1.5, "n=" + std::to_string(n) + " OC <= 1.5");
    c.require(h.vertex_complexity() <= 1.2, "n=" + std::to_string(n) + " VC <= 1.2");
    its.push_back(r.iterations);
    c.detail << "n=" << n << ": its " << r.iterations << " VC "
             << std::setprecision(3) << h.vertex_complexity() << " OC "
             << h.operator_complexity() << "; ";
  }
  const int lo = *std::min_element(its.begin(), its.end());
  const int hi = *std::max_element(its.begin(), its.end());
  c.require(hi <= lo + (lo + 1) / 2, "iteration growth <= 50% across the sweep");
  c.finish(6, "Poisson 3d sweep stays flat");
}

// ---------------------------------------------------------------------------
// 7. Elasticity model problem trend
void criterion_7() {
  Criterion c;
  for (const auto &[name, n] : std::vector<std::pair<std::string, Index>>{
           {"elasticity2d", 8}, {"elasticity3d", 4}}) {
    RunConfig config;
    config.problem = name;
    config.n = n;
    const Problem problem = build_problem(config);
    const Hierarchy h = setup_hierarchy(problem.matrix, problem.topology,
                                        make_hierarchy_config(config, true));
    Vector x = Vector::Zero(problem.matrix.rows());
    const SolveReport r = pcg(
        problem.matrix, problem.rhs, [&](const Vector &b) { return h.apply(b); }, x, 1e-6, 200);
    c.require(r.converged, name + " converged");
    c.require(r.iterations <= 60, name + " its <= 60");
    c.require(h.operator_complexity() <= 1.7, name + " OC <= 1.7");
    c.detail << name << ": its " << r.iterations << " OC " << std::setprecision(3)
             << h.operator_complexity() << "; ";
  }
  c.finish(7, "elasticity beams converge at bounded complexity");
}

// ---------------------------------------------------------------------------
// 8. Boxes 3d at desk scale
void criterion_8() {
  Criterion c;
  RunConfig config;
  config.problem = "boxes3d";
  config.n = 12;
  config.n_boxes = 3;
  const Problem problem = build_problem(config);

  int its_robust = 0, its_scalar = 0;
  bool scalar_converged = true;
  for (const bool robust : {true, false}) {
    config.criteria = robust ? "robust" : "scalar";
    const Hierarchy h = setup_hierarchy(problem.matrix, problem.topology,
                                        make_hierarchy_config(config, true));
    Vector x = Vector::Zero(problem.matrix.rows());
    const SolveReport r = pcg(
        problem.matrix, problem.rhs, [&](const Vector &b) { return h.apply(b); }, x, 1e-6, 400);
    if (robust) {
      its_robust = r.iterations;
      c.require(r.converged, "robust converged");
      c.require(r.iterations <= 80, "robust its <= 80");

      // box-crossing merges may only swallow whole boxes: on every level the
      // composed agglomerates touching two boxes contain each of them fully
      std::vector<Index> vbox(static_cast<std::size_t>(problem.mesh.vertex_count()));
      std::vector<Index> box_size(3, 0);
      for (Index v = 0; v < problem.mesh.vertex_count(); ++v) {
        vbox[static_cast<std::size_t>(v)] =
            box_of(problem.mesh.vertices[static_cast<std::size_t>(v)], 3, 3);
        if (vbox[static_cast<std::size_t>(v)] >= 0) ++box_size[static_cast<std::size_t>(
            vbox[static_cast<std::size_t>(v)])];
      }
      std::vector<std::vector<Index>> members;
      for (Index v = 0; v < problem.mesh.vertex_count(); ++v) members.push_back({v});
      for (const Level &level : h.levels) {
        std::vector<std::vector<Index>> next;
        for (const auto &g : level.agg.agglomerates) {
          std::vector<Index> m;
          for (Index cur : g)
            m.insert(m.end(), members[static_cast<std::size_t>(cur)].begin(),
                     members[static_cast<std::size_t>(cur)].end());
          next.push_back(std::move(m));
        }
        for (const auto &m : next) {
          std::vector<Index> count(3, 0);
          for (Index v : m)
            if (vbox[static_cast<std::size_t>(v)] >= 0)
              ++count[static_cast<std::size_t>(vbox[static_cast<std::size_t>(v)])];
          int touched = 0;
          bool full = true;
          for (std::size_t b = 0; b < 3; ++b) {
            if (count[b] == 0) continue;
            ++touched;
            if (count[b] != box_size[b]) full = false;
          }
          c.require(touched < 2 || full, "multi-box agglomerates contain whole boxes");
        }
        members = std::move(next);
      }
    } else {
      its_scalar = r.iterations;
      scalar_converged = r.converged;
    }
  }
  c.detail << "its robust " << its_robust << ", scalar-only " << its_scalar
           << (scalar_converged ? "" : " (not converged)");

  const bool iteration_blowup = !scalar_converged || its_scalar > 2 * its_robust;
  if (!iteration_blowup) {
    // fall back to the dense condition-number contrast at a checkable size
    RunConfig small = config;
    small.n = 6;
    small.prolongation = "tentative";
    small.rounds = "5";
    const Problem sp = build_problem(small);
    double kappas[2] = {0.0, 0.0};
    for (const bool robust : {true, false}) {
      small.criteria = robust ? "robust" : "scalar";
      HierarchyConfig hc = make_hierarchy_config(small, true);
      hc.max_levels = 2;
      const Hierarchy h = setup_hierarchy(sp.matrix, sp.topology, hc);
      kappas[robust ? 0 : 1] = dense_preconditioner_condition(
                                   sp.matrix, [&](const Vector &b) { return h.apply(b); })
                                   .kappa;
    }
    c.detail << "; fallback kappa ratio " << kappas[1] / kappas[0];
    c.require(kappas[1] / kappas[0] >= 10.0, "scalar-only 2x iterations or kappa ratio >= 10");
  }
  c.finish(8, "3d boxes chain needs the robust criteria");
}

// ---------------------------------------------------------------------------
// 9. Oracle equivalence for the eigenvalue plumbing
void criterion_9() {
  Criterion c;
  SplitMix64 rng(9009);

  // gen_eig_sup against the Eigen dense route (sizes 2-7)
  double worst_dense = 0.0, worst_scan = 0.0;
  for (int trial = 0; trial < 60; ++trial) {
    const Index n = 2 + static_cast<Index>(rng.below(6));
    const Matrix m = random_psd(rng, n, 1 + static_cast<Index>(rng.below(n)));
    const Matrix a = random_psd(rng, n, n);
    const ExtendedReal ours = gen_eig_sup(m, a);
    const ExtendedReal dense = dense_gen_eig_sup(m, a);
    c.require(ours.is_finite() == dense.is_finite(), "gen_eig_sup finiteness agreement");
    if (ours.is_finite() && dense.is_finite() && dense.value() > 0.0)
      worst_dense = std::max(worst_dense,
                             std::abs(ours.value() - dense.value()) / dense.value());
  }
  // and against 1e5-vector randomized Rayleigh scans on 3x3 pencils
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix m = random_psd(rng, 3, 3);
    const Matrix a = random_psd(rng, 3, 3);
    const ExtendedReal ours = gen_eig_sup(m, a);
    Eigen::SelfAdjointEigenSolver<Matrix> ea(a);
    const Matrix half_inv = ea.operatorInverseSqrt();
    double best = 0.0;
    for (int i = 0; i < 100000; ++i) {
      const Vector v = half_inv * random_vector(rng, 3);
      const double den = v.dot(a * v);
      if (den <= 1e-13) continue;
      best = std::max(best, v.dot(m * v) / den);
    }
    if (ours.value() > 0.0)
      worst_scan = std::max(worst_scan, std::abs(best - ours.value()) / ours.value());
  }
  c.require(worst_dense <= 1e-9, "gen_eig_sup vs dense 1e-9");
  c.require(worst_scan <= 1e-3, "gen_eig_sup vs randomized scan 1e-3");
  c.detail << "gen_eig_sup dense " << worst_dense << " scan " << worst_scan << "; ";

  // mu_agglomerate_value against the Eigen route on the same pencil
  double worst_mu = 0.0;
  int mu_tested = 0;
  for (int trial = 0; trial < 80 && mu_tested < 50; ++trial) {
    const TopologyKind kind = trial % 2 == 0 ? TopologyKind::Scalar : TopologyKind::Elasticity;
    const AuxTopology t = random_topology(rng, kind, 2, 6, trial % 3 == 0, 5);
    const MeasureContext ctx(t);
    const std::vector<Index> members = {1, 2, 3};
    const int delta = trial % 2;
    const AgglomerateForms forms = agglomerate_forms(ctx, members, delta);
    const ExtendedReal ours = mu_agglomerate_value(ctx, members, delta);
    const ExtendedReal dense = dense_gen_eig_sup(forms.lhs, forms.rhs);
    c.require(ours.is_finite() == dense.is_finite(), "mu_g finiteness agreement");
    if (!ours.is_finite()) continue;
    ++mu_tested;
    if (dense.value() > 0.0)
      worst_mu = std::max(worst_mu, std::abs(ours.value() - dense.value()) / dense.value());
  }
  c.require(mu_tested >= 50, "mu_g instance count");
  c.require(worst_mu <= 1e-9, "mu_g vs dense 1e-9");
  c.detail << "mu_g dense " << worst_mu << " (" << mu_tested << " instances); ";

  // two-grid condition against a generalized-pencil route
  double worst_kappa = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 6 + static_cast<Index>(rng.below(5));
    const Index k = 1 + static_cast<Index>(rng.below(2));
    const Matrix g = random_matrix(rng, n * k, n * k);
    BlockSparseBuilder ab(n, n, k, k);
    const Matrix dense_a = g * g.transpose() + static_cast<double>(n) * Matrix::Identity(n * k, n * k);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) ab.add(i, j, dense_a.block(i * k, j * k, k, k));
    const BlockSparseMatrix a = ab.compress();
    BlockSparseBuilder pb(n, (n + 1) / 2, k, k);
    for (Index i = 0; i < n; ++i)
      pb.add(i, i / 2, (Matrix::Identity(k, k) + 0.2 * random_matrix(rng, k, k)).eval());
    const BlockSparseMatrix p = pb.compress();
    const Smoother gs = make_smoother(a, SmootherKind::BlockGaussSeidel);
    const TwoGridDiagnostics ours = dense_two_grid_condition(a, gs, p);

    // oracle: invert the dense B^{-1}, solve the (A, B) pencil directly
    const BlockSparseMatrix coarse = galerkin_product(p, a);
    const CoarsestFactor factor = coarsest_solve_factorize(coarse, vertex_kernel_bases(coarse));
    Matrix binv(n * k, n * k);
    for (Index i = 0; i < n * k; ++i) {
      Vector e = Vector::Zero(n * k);
      e[i] = 1.0;
      binv.col(i) = two_grid_apply(a, gs, p, factor, e, Vector::Zero(n * k));
    }
    binv = 0.5 * (binv + binv.transpose()).eval();
    const Matrix b = binv.inverse();
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> pencil(a.dense(), 0.5 * (b + b.transpose()),
                                                            Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
    const double kappa_oracle =
        pencil.eigenvalues().maxCoeff() / pencil.eigenvalues().minCoeff();
    worst_kappa = std::max(worst_kappa, std::abs(ours.kappa - kappa_oracle) / kappa_oracle);
  }
  c.require(worst_kappa <= 1e-9, "two-grid kappa vs pencil 1e-9");
  c.detail << "kappa " << worst_kappa;
  c.finish(9, "eigenvalue machinery validated against independent oracles");
}

// ---------------------------------------------------------------------------
// 10. Determinism of library entry points and commands
void criterion_10() {
  Criterion c;

  const auto run_once = [](const std::string &name, Index n) {
    RunConfig config;
    config.problem = name;
    config.n = n;
    const Problem problem = build_problem(config);
    const Hierarchy h = setup_hierarchy(problem.matrix, problem.topology,
                                        make_hierarchy_config(config, problem.elasticity));
    Vector x = Vector::Zero(problem.matrix.rows());
    const SolveReport r = pcg(
        problem.matrix, problem.rhs, [&](const Vector &b) { return h.apply(b); }, x, 1e-6, 200);
    std::ostringstream os;
    os.precision(17);
    os << r.iterations << '|' << r.final_residual << '|' << r.cond_estimate << '|'
       << h.vertex_complexity() << '|' << h.operator_complexity();
    for (const Level &l : h.levels) {
      os << "|agg";
      for (const auto &g : l.agg.agglomerates) {
        os << ';';
        for (Index v : g) os << v << ',';
      }
    }
    for (Index i = 0; i < x.size(); i += 17) os << '|' << x[i];
    return os.str();
  };
  for (const auto &[name, n] : std::vector<std::pair<std::string, Index>>{
           {"poisson3d", 8}, {"elasticity2d", 5}, {"boxes2d", 11}}) {
    const std::string first = run_once(name, n);
    const std::string second = run_once(name, n);
    c.require(first == second, name + " library determinism");
  }

  // CLI determinism through the shell
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "atamg_acceptance";
  fs::create_directories(dir);
  const fs::path cfg = dir / "det.cfg";
  std::ofstream(cfg) << "problem = elasticity2d\nn = 4\nseed = 11\n";
  const auto shell = [&](const std::string &cmd, const fs::path &out) {
    const std::string full = std::string(ATAMG_CLI_PATH) + " " + cmd + " > " + out.string() +
                             " 2>&1";
    return std::system(full.c_str());
  };
  const auto slurp = [](const fs::path &p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
  };
  shell("solve --no-times --config " + cfg.string(), dir / "s1.txt");
  shell("solve --no-times --config " + cfg.string(), dir / "s2.txt");
  c.require(slurp(dir / "s1.txt") == slurp(dir / "s2.txt"), "cli solve determinism");
  shell("coarsen --config " + cfg.string() + " --out " + (dir / "agg1").string(), dir / "c1.txt");
  shell("coarsen --config " + cfg.string() + " --out " + (dir / "agg2").string(), dir / "c2.txt");
  c.require(slurp(dir / "agg1.l0.csv") == slurp(dir / "agg2.l0.csv") &&
                !slurp(dir / "agg1.l0.csv").empty(),
            "cli coarsen determinism");

  const fs::path bench_dir = dir / "bench";
  fs::create_directories(bench_dir);
  std::ofstream(bench_dir / "a.cfg") << "problem = poisson2d\nn = 7\n";
  std::ofstream(bench_dir / "b.cfg") << "problem = elasticity2d\nn = 2\n";
  shell("bench --no-times --dir " + bench_dir.string() + " --out " + (dir / "b1.csv").string(),
        dir / "b1.txt");
  shell("bench --no-times --dir " + bench_dir.string() + " --out " + (dir / "b2.csv").string(),
        dir / "b2.txt");
  c.require(slurp(dir / "b1.csv") == slurp(dir / "b2.csv") && !slurp(dir / "b1.csv").empty(),
            "cli bench determinism");
  c.finish(10, "identical runs produce identical output");
}

} // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  if (failures == 0)
    std::cout << "all acceptance criteria passed\n";
  else
    std::cout << failures << " acceptance criteria FAILED\n";
  return failures == 0 ? 0 : 1;
}
