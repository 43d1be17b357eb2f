#include "atamg/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace atamg {

namespace {

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T> T parse_number(const std::string &key, const std::string &value) {
  std::istringstream iss(value);
  T out;
  if (!(iss >> out) || !(iss >> std::ws).eof())
    throw std::runtime_error("config: invalid value '" + value + "' for key '" + key + "'");
  return out;
}

std::vector<int> parse_int_list(const std::string &key, const std::string &value) {
  std::vector<int> out;
  std::istringstream iss(value);
  std::string item;
  while (std::getline(iss, item, ','))
    out.push_back(parse_number<int>(key, trim(item)));
  return out;
}

} // namespace

std::string RunConfig::echo() const {
  std::ostringstream os;
  os << "problem = " << problem << "\nn = " << n << "\nalpha = " << alpha << "\nbeta = " << beta
     << "\nmu = " << mu << "\nlambda = " << lambda << "\nmu_hard = " << mu_hard
     << "\nlambda_hard = " << lambda_hard << "\nn_boxes = " << n_boxes
     << "\nbeam_aspect = " << beam_aspect << "\ndirichlet = " << dirichlet
     << "\nsigma = " << sigma << "\ndelta = " << delta << "\npick_rule = " << pick_rule
     << "\nrounds = " << rounds << "\ncriteria = " << criteria
     << "\nprolongation = " << prolongation << "\nomega = " << omega << "\ncap = " << cap
     << "\nsmoother = " << smoother << "\ncoarse_static = " << coarse_static
     << "\ncoarse_reduction = " << coarse_reduction << "\nmax_levels = " << max_levels
     << "\npre_smooth = " << pre_smooth << "\npost_smooth = " << post_smooth
     << "\nrtol = " << rtol << "\nmaxit = " << maxit << "\nseed = " << seed << '\n';
  return os.str();
}

RunConfig parse_config(std::istream &is) {
  RunConfig c;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: line " + std::to_string(line_no) +
                               " is not of the form key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "problem") c.problem = value;
    else if (key == "n") c.n = parse_number<Index>(key, value);
    else if (key == "alpha") c.alpha = parse_number<double>(key, value);
    else if (key == "beta") c.beta = parse_number<double>(key, value);
    else if (key == "mu") c.mu = parse_number<double>(key, value);
    else if (key == "lambda") c.lambda = parse_number<double>(key, value);
    else if (key == "mu_hard") c.mu_hard = parse_number<double>(key, value);
    else if (key == "lambda_hard") c.lambda_hard = parse_number<double>(key, value);
    else if (key == "n_boxes") c.n_boxes = parse_number<Index>(key, value);
    else if (key == "beam_aspect") c.beam_aspect = parse_number<double>(key, value);
    else if (key == "dirichlet") c.dirichlet = value;
    else if (key == "sigma") c.sigma = parse_number<double>(key, value);
    else if (key == "delta") c.delta = parse_number<int>(key, value);
    else if (key == "pick_rule") c.pick_rule = parse_number<int>(key, value);
    else if (key == "rounds") c.rounds = value;
    else if (key == "criteria") c.criteria = value;
    else if (key == "prolongation") c.prolongation = value;
    else if (key == "omega") c.omega = parse_number<double>(key, value);
    else if (key == "cap") c.cap = value;
    else if (key == "smoother") c.smoother = value;
    else if (key == "coarse_static") c.coarse_static = parse_number<Index>(key, value);
    else if (key == "coarse_reduction") c.coarse_reduction = parse_number<double>(key, value);
    else if (key == "max_levels") c.max_levels = parse_number<int>(key, value);
    else if (key == "pre_smooth") c.pre_smooth = parse_number<int>(key, value);
    else if (key == "post_smooth") c.post_smooth = parse_number<int>(key, value);
    else if (key == "rtol") c.rtol = parse_number<double>(key, value);
    else if (key == "maxit") c.maxit = parse_number<int>(key, value);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
    else
      throw std::runtime_error("config: unknown key '" + key + "' on line " +
                               std::to_string(line_no));
  }

  if (c.problem != "poisson1d" && c.problem != "poisson2d" && c.problem != "poisson3d" &&
      c.problem != "elasticity2d" && c.problem != "elasticity3d" && c.problem != "boxes2d" &&
      c.problem != "boxes3d")
    throw std::runtime_error("config: unknown problem '" + c.problem + "'");
  if (c.n < 1) throw std::runtime_error("config: n must be >= 1");
  if (c.delta != 0 && c.delta != 1) throw std::runtime_error("config: delta must be 0 or 1");
  if (c.pick_rule != 0 && c.pick_rule != 1)
    throw std::runtime_error("config: pick_rule must be 0 or 1");
  if (c.criteria != "robust" && c.criteria != "scalar")
    throw std::runtime_error("config: criteria must be robust or scalar");
  if (c.prolongation != "tentative" && c.prolongation != "smoothed")
    throw std::runtime_error("config: prolongation must be tentative or smoothed");
  if (c.omega <= 0.0 || c.omega > 1.0) throw std::runtime_error("config: omega must be in (0,1]");
  if (c.smoother != "gs" && c.smoother != "jacobi" && c.smoother != "l1")
    throw std::runtime_error("config: smoother must be gs, jacobi or l1");
  if (c.dirichlet != "auto" && c.dirichlet != "none" && c.dirichlet != "left" &&
      c.dirichlet != "all")
    throw std::runtime_error("config: dirichlet must be auto, none, left or all");
  if (c.rtol <= 0.0 || c.rtol >= 1.0) throw std::runtime_error("config: rtol must be in (0,1)");
  if (c.maxit < 1) throw std::runtime_error("config: maxit must be >= 1");
  if (c.sigma < 0.0 || (c.sigma > 0.0 && c.sigma <= 1.0))
    throw std::runtime_error("config: sigma must be > 1 (or 0 for the default)");
  return c;
}

RunConfig parse_config_file(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config: cannot open '" + path + "'");
  return parse_config(is);
}

Problem build_problem(const RunConfig &config) {
  Problem p;
  const std::string &name = config.problem;
  const bool boxes = name.rfind("boxes", 0) == 0;
  p.elasticity = boxes || name.rfind("elasticity", 0) == 0;
  const int dim = name.back() == 'd' ? name[name.size() - 2] - '0' : 0;
  if (dim < 1 || dim > 3) throw std::runtime_error("build_problem: bad problem name");

  std::vector<BoxFace> tags;
  const auto all_faces = [&] {
    std::vector<BoxFace> f;
    for (int a = 0; a < 2 * dim; ++a) f.push_back(static_cast<BoxFace>(a));
    return f;
  };
  if (config.dirichlet == "none") {
    // keep empty
  } else if (config.dirichlet == "left") {
    tags = {BoxFace::XLo};
  } else if (config.dirichlet == "all") {
    tags = all_faces();
  } else { // auto: full boundary for scalar problems, left face otherwise
    tags = p.elasticity ? std::vector<BoxFace>{BoxFace::XLo} : all_faces();
  }

  if (!p.elasticity) {
    p.mesh = make_structured_mesh(dim, config.n);
    const CoefficientField coeffs =
        CoefficientField::uniform_scalar(p.mesh.element_count(), config.alpha, config.beta);
    const AssembledProblem fem = assemble_scalar(p.mesh, coeffs, tags);
    p.matrix = fem.matrix;
    p.topology = build_scalar_topology(fem.raw_matrix, p.mesh.vertices, fem.dirichlet);
  } else {
    if (dim < 2) throw std::runtime_error("build_problem: elasticity needs 2d or 3d");
    CoefficientField coeffs;
    if (boxes) {
      p.mesh = make_structured_mesh(dim, config.n);
      coeffs = boxes_coefficients(p.mesh, config.n_boxes, config.mu, config.lambda,
                                  config.mu_hard, config.lambda_hard);
    } else {
      const Index nx = std::max<Index>(1, static_cast<Index>(std::llround(
                                              config.beam_aspect * static_cast<double>(config.n))));
      p.mesh = make_box_mesh(dim, {nx, config.n, config.n}, {config.beam_aspect, 1.0, 1.0});
      coeffs = CoefficientField::uniform_elasticity(p.mesh.element_count(), config.mu,
                                                    config.lambda, config.beta);
    }
    if (config.beta != 0.0)
      coeffs.beta.assign(static_cast<std::size_t>(p.mesh.element_count()), config.beta);
    const AssembledProblem fem = assemble_elasticity(p.mesh, coeffs, tags);
    p.matrix = fem.matrix;
    p.topology = build_elasticity_topology(fem.raw_matrix, p.mesh.vertices, fem.dirichlet);
  }

  // unit load on free vertices
  p.rhs = Vector::Zero(p.matrix.rows());
  const Index k = p.matrix.block_height();
  for (Index v = 0; v < p.matrix.block_rows(); ++v)
    if (!p.topology.dirichlet[static_cast<std::size_t>(v)])
      p.rhs.segment(v * k, k).setOnes();
  return p;
}

HierarchyConfig make_hierarchy_config(const RunConfig &config, bool elasticity) {
  HierarchyConfig h;
  h.coarsening.sigma = config.effective_sigma(elasticity);
  h.coarsening.delta = config.delta;
  h.coarsening.pick_by_scalar = config.pick_rule == 1;
  h.coarsening.robust = config.criteria == "robust";
  h.smoothing.omega = config.omega;
  h.smoothed_prolongation = config.prolongation == "smoothed";
  if (config.smoother == "gs") h.smoother = SmootherKind::BlockGaussSeidel;
  else if (config.smoother == "jacobi") h.smoother = SmootherKind::BlockJacobi;
  else h.smoother = SmootherKind::BlockL1;
  h.coarse_static = config.coarse_static;
  h.coarse_reduction = config.coarse_reduction;
  h.max_levels = config.max_levels;
  h.pre_smooth = config.pre_smooth;
  h.post_smooth = config.post_smooth;

  std::string rounds = config.rounds;
  if (rounds.empty()) rounds = elasticity ? "5,4" : "4,4,3";
  h.rounds_per_level = parse_int_list("rounds", rounds);
  for (int r : h.rounds_per_level)
    if (r < 1) throw std::runtime_error("config: rounds entries must be >= 1");
  const auto caps = parse_int_list("cap", config.cap);
  for (int c : caps) {
    if (c < 0) throw std::runtime_error("config: cap entries must be >= 0");
    h.caps_per_level.push_back(static_cast<Index>(c));
  }
  return h;
}

} // namespace atamg
