#include "atamg/config.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using namespace atamg;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitMaxit = 2;

struct RunResult {
  SolveReport report;
  Hierarchy hierarchy;
  Problem problem;
};

RunResult run_solve(const RunConfig &config) {
  RunResult r;
  r.problem = build_problem(config);
  const HierarchyConfig hc = make_hierarchy_config(config, r.problem.elasticity);

  const auto t0 = std::chrono::steady_clock::now();
  r.hierarchy = setup_hierarchy(r.problem.matrix, r.problem.topology, hc);
  const auto t1 = std::chrono::steady_clock::now();

  Vector x = Vector::Zero(r.problem.rhs.size());
  r.report = pcg(
      r.problem.matrix, r.problem.rhs,
      [&](const Vector &v) { return r.hierarchy.apply(v); }, x, config.rtol, config.maxit);
  const auto t2 = std::chrono::steady_clock::now();

  r.report.levels = r.hierarchy.level_count();
  r.report.coarsest_vertices = r.hierarchy.coarsest_vertices();
  r.report.level_vertices = r.hierarchy.level_vertex_counts();
  r.report.vertex_complexity = r.hierarchy.vertex_complexity();
  r.report.operator_complexity = r.hierarchy.operator_complexity();
  r.report.setup_seconds = std::chrono::duration<double>(t1 - t0).count();
  r.report.solve_seconds = std::chrono::duration<double>(t2 - t1).count();
  return r;
}

void write_report(std::ostream &os, const RunConfig &config, const SolveReport &report,
                  bool with_times) {
  os << "# configuration\n" << config.echo() << "\n# results\n";
  report.write_table(os, with_times);
}

int cmd_solve(const std::string &config_path, const std::string &report_path,
              const std::string &csv_path, bool with_times) {
  RunConfig config;
  try {
    config = parse_config_file(config_path);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  RunResult result;
  try {
    result = run_solve(config);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }

  write_report(std::cout, config, result.report, with_times);
  if (!report_path.empty()) {
    std::ofstream os(report_path);
    if (!os) {
      std::cerr << "error: cannot write report to '" << report_path << "'\n";
      return kExitError;
    }
    write_report(os, config, result.report, with_times);
  }
  if (!csv_path.empty()) {
    std::ofstream os(csv_path);
    if (!os) {
      std::cerr << "error: cannot write csv to '" << csv_path << "'\n";
      return kExitError;
    }
    os << SolveReport::csv_header() << '\n';
    result.report.write_csv_row(os, with_times);
  }
  return result.report.converged ? kExitOk : kExitMaxit;
}

int dump_level(const std::string &out_prefix, std::size_t level, const AuxTopology &topology,
               const Agglomeration &agg, bool with_topology) {
  const std::string path = out_prefix + ".l" + std::to_string(level) + ".csv";
  std::ofstream os(path);
  if (!os) {
    std::cerr << "error: cannot write '" << path << "'\n";
    return kExitError;
  }
  os << "i,x,y,z,agg_id\n";
  os.precision(17);
  const auto v2c = agg.vertex_to_coarse(topology.vertex_count());
  for (Index v = 0; v < topology.vertex_count(); ++v) {
    const Vec3 &x = topology.positions[static_cast<std::size_t>(v)];
    os << v << ',' << x[0] << ',' << x[1] << ',' << x[2] << ','
       << v2c[static_cast<std::size_t>(v)] << '\n';
  }
  if (with_topology) {
    const std::string tpath = out_prefix + ".topo.l" + std::to_string(level) + ".txt";
    std::ofstream ts(tpath);
    if (!ts) {
      std::cerr << "error: cannot write '" << tpath << "'\n";
      return kExitError;
    }
    topology.write(ts);
  }
  return kExitOk;
}

int cmd_coarsen(const std::string &config_path, const std::string &out_prefix,
                bool with_topology) {
  RunConfig config;
  Problem problem;
  Hierarchy hierarchy;
  try {
    config = parse_config_file(config_path);
    problem = build_problem(config);
    hierarchy = setup_hierarchy(problem.matrix, problem.topology,
                                make_hierarchy_config(config, problem.elasticity));
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }

  std::size_t written = 0;
  for (std::size_t l = 0; l < hierarchy.levels.size(); ++l, ++written) {
    const Level &level = hierarchy.levels[l];
    const int rc = dump_level(out_prefix, l, level.topology, level.agg, with_topology);
    if (rc != kExitOk) return rc;
  }
  if (written == 0) {
    // the problem never coarsened (at or below the direct-solve threshold);
    // dump the finest-level matching anyway
    try {
      const HierarchyConfig hc = make_hierarchy_config(config, problem.elasticity);
      CoarseningParams cp = hc.coarsening;
      if (!hc.rounds_per_level.empty()) cp.rounds = hc.rounds_per_level.front();
      const Agglomeration agg = successive_matching(problem.topology, cp);
      const int rc = dump_level(out_prefix, 0, problem.topology, agg, with_topology);
      if (rc != kExitOk) return rc;
      written = 1;
    } catch (const std::exception &e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitError;
    }
  }
  std::cout << "wrote " << written << " level dump(s) to " << out_prefix << ".l*.csv\n";
  return kExitOk;
}

int cmd_bench(const std::string &dir, const std::string &out_path, bool with_times) {
  std::vector<std::filesystem::path> files;
  try {
    for (const auto &entry : std::filesystem::directory_iterator(dir))
      if (entry.is_regular_file()) files.push_back(entry.path());
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  std::sort(files.begin(), files.end());

  std::ofstream os(out_path);
  if (!os) {
    std::cerr << "error: cannot write '" << out_path << "'\n";
    return kExitError;
  }
  os << "config," << SolveReport::csv_header() << ",status\n";
  for (const auto &file : files) {
    os << file.filename().string() << ',';
    try {
      const RunConfig config = parse_config_file(file.string());
      const RunResult result = run_solve(config);
      os << result.report.levels << ',' << result.report.coarsest_vertices << ','
         << result.report.vertex_complexity << ',' << result.report.operator_complexity << ','
         << result.report.iterations << ',';
      if (with_times)
        os << result.report.setup_seconds << ',' << result.report.solve_seconds;
      else
        os << "-,-";
      os << ',' << (result.report.converged ? "ok" : "maxit") << '\n';
    } catch (const std::exception &e) {
      os << ",,,,,,,error: " << e.what() << '\n';
    }
  }
  return kExitOk;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"auxiliary-topology algebraic multigrid solver"};
  app.require_subcommand(1);

  std::string config_path, report_path, csv_path, out_path, dir_path;
  bool no_times = false;

  auto *solve = app.add_subcommand("solve", "set up the hierarchy and run V-cycle PCG");
  solve->add_option("--config", config_path, "configuration file")->required();
  solve->add_option("--report", report_path, "write the report table to this file");
  solve->add_option("--csv", csv_path, "write a one-row CSV summary to this file");
  solve->add_flag("--no-times", no_times, "omit wall times from outputs (reproducible output)");

  bool with_topology = false;
  auto *coarsen = app.add_subcommand("coarsen", "dump per-level agglomerates as CSV");
  coarsen->add_option("--config", config_path, "configuration file")->required();
  coarsen->add_option("--out", out_path, "output path prefix")->required();
  coarsen->add_flag("--topo", with_topology, "also dump per-level topology text files");

  auto *bench = app.add_subcommand("bench", "run every config in a directory");
  bench->add_option("--dir", dir_path, "directory of configuration files")->required();
  bench->add_option("--out", out_path, "summary CSV path")->required();
  bench->add_flag("--no-times", no_times, "omit wall times from outputs");

  CLI11_PARSE(app, argc, argv);

  if (solve->parsed()) return cmd_solve(config_path, report_path, csv_path, !no_times);
  if (coarsen->parsed()) return cmd_coarsen(config_path, out_path, with_topology);
  return cmd_bench(dir_path, out_path, !no_times);
}
