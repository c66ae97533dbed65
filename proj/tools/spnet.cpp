#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "spnet/analyzer.hpp"
#include "spnet/error.hpp"
#include "spnet/experiments.hpp"
#include "spnet/fibergen.hpp"
#include "spnet/mesh.hpp"
#include "spnet/network_io.hpp"
#include "spnet/solver.hpp"
#include "spnet/sparse_ops.hpp"

namespace {

using namespace spnet;

std::vector<Face> parse_faces(const std::string& text) {
  std::vector<Face> faces;
  std::stringstream in(text);
  std::string token;
  while (std::getline(in, token, ',')) {
    const auto colon = token.find(':');
    if (colon == std::string::npos) throw ConfigError("face '" + token + "' must look like <axis>:low or <axis>:high");
    const int axis = std::stoi(token.substr(0, colon));
    const std::string side = token.substr(colon + 1);
    if (side != "low" && side != "high") throw ConfigError("face side must be low or high, got '" + side + "'");
    faces.push_back(Face{axis, side == "low" ? Side::low : Side::high});
  }
  return faces;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  return out;
}

struct GenerateArgs {
  std::string kind = "uniform";
  std::uint64_t seed = 1;
  double density = 1000.0;
  double fiber_length = 0.05;
  int points = 513;
  std::string out;
  bool hex = false;
};

int run_generate(const GenerateArgs& a) {
  SpatialNetwork net = [&] {
    if (a.kind == "grid") return generate_grid_network(a.points);
    FiberGenConfig config;
    config.kind = parse_fiber_kind(a.kind);
    config.seed = a.seed;
    config.density = a.density;
    config.fiber_length = a.fiber_length;
    FiberNetworkStats stats;
    SpatialNetwork generated = generate_fiber_network(config, &stats);
    std::cerr << "fibers " << stats.fibers << ", intersections " << stats.intersections << ", merged nodes "
              << stats.merged_nodes << ", removed nodes " << stats.removed_nodes << '\n';
    return generated;
  }();
  write_network_file(a.out, net, a.hex ? FloatFormat::hex : FloatFormat::decimal);
  std::cerr << "nodes " << net.node_count() << ", edges " << net.edge_count() << ", total length "
            << net.total_length() << ", longest edge " << net.max_edge_length() << '\n';
  return 0;
}

struct AnalyzeArgs {
  std::string network;
  std::vector<int> grids{4, 8, 16, 32, 64};
  std::string out;
  std::string summary;
  double r0 = 0.0;
  bool dirichlet = true;
};

int run_analyze(const AnalyzeArgs& a) {
  const SpatialNetwork net = read_network_file(a.network);
  PoincareOptions options;
  options.r0 = a.r0;
  options.dirichlet = a.dirichlet;
  const auto analyses = analyze_network(net, a.grids, options);
  auto out = open_output(a.out);
  write_analysis_csv(out, analyses);
  if (!a.summary.empty()) {
    auto s = open_output(a.summary);
    write_analysis_summary_csv(s, analyses);
  }
  std::vector<double> R, inv;
  Index violations = 0;
  std::printf("%6s %10s %10s %10s %12s\n", "grid", "sigma", "mu", "mu_mean", "violations");
  for (const auto& g : analyses) {
    std::printf("%6d %10.4f %10.4f %10.4f %12d\n", g.homogeneity.resolution, g.homogeneity.sigma,
                g.poincare.mu_max, g.poincare.mu_mean, static_cast<int>(g.poincare.violations));
    R.push_back(g.poincare.box_side);
    inv.push_back(g.poincare.mean_inverse_lambda2);
    violations += g.poincare.violations;
  }
  if (R.size() >= 2) std::printf("slope of mean 1/lambda2 against R: %.4f\n", log_log_slope(R, inv));
  if (violations > 0) {
    std::cerr << violations << " boxes could not be connected inside their grown box\n";
    return 2;
  }
  return 0;
}

struct SolveArgs {
  std::string network;
  std::string problem = "heat";
  std::string H = "1/8";
  double tol = 1e-8;
  int max_iterations = 2000;
  std::string report;
  bool reference = false;
  std::string dirichlet;
  int components = 2;
  double strain = 0.2;
  double lateral_load = 1e3;
  int patch_layers = 1;
  std::string solution;
  std::string matrix;
};

int run_solve(const SolveArgs& a) {
  SpatialNetwork net = read_network_file(a.network);
  if (!a.dirichlet.empty()) net = with_dirichlet_faces(net, parse_faces(a.dirichlet));
  Problem problem;
  if (a.problem == "heat") {
    problem = heat_problem(net);
  } else if (a.problem == "structural") {
    problem = structural_problem(net, a.components, a.strain, a.lateral_load);
  } else {
    throw ConfigError("unknown problem '" + a.problem + "'");
  }
  if (!a.matrix.empty()) {
    auto out = open_output(a.matrix);
    write_matrix_market(out, problem.op.matrix);
  }

  const double H = parse_length(a.H);
  const BoxMesh mesh = build_mesh(net, H);
  SchwarzOptions options;
  options.patch_layers = a.patch_layers;
  const SchwarzPreconditioner B(net, mesh, problem.op, options);
  const auto& st = B.stats();
  if (st.mesh_finer_than_2r0) std::cerr << "warning: H is below twice the longest edge\n";
  std::cerr << "free dofs " << problem.op.free_count() << ", coarse dimension " << st.coarse_dimension << ", patches "
            << st.patches << " (" << st.skipped_patches << " skipped), setup " << st.setup_seconds << " s\n";

  Vector reference;
  PCGOptions pcg;
  pcg.tol = a.tol;
  pcg.max_iterations = a.max_iterations;
  if (a.reference) {
    const ReferenceSolution ref = reference_solve(problem.op.matrix, problem.rhs, &B);
    std::cerr << "reference by " << (ref.method == ReferenceSolution::Method::cholesky ? "cholesky" : "pcg")
              << ", relative residual " << ref.relative_residual << '\n';
    reference = ref.u;
    pcg.reference = &reference;
  }
  PCGReport report;
  const Vector u = pcg_solve(problem.op.matrix, problem.rhs, B, pcg, &report);
  std::printf("iterations %d, converged %s\n", report.iterations, report.converged ? "yes" : "no");
  if (a.reference) std::printf("mean rate %.4f, max rate %.4f\n", report.mean_rate, report.max_rate);
  if (!a.report.empty()) {
    auto out = open_output(a.report);
    write_iteration_csv(out, report, a.reference);
  }
  if (!a.solution.empty()) {
    NodeField full = problem.op.lift(u);
    full.values() += problem.boundary.values();
    auto out = open_output(a.solution);
    write_displaced_csv(out, net, full);
  }
  return report.converged ? 0 : 1;
}

struct ExperimentArgs {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

int run_experiment_command(const ExperimentArgs& a) {
  ExperimentConfig config = load_experiment_config(a.config);
  if (a.seed_given) config.seed = a.seed;
  if (!a.out.empty()) config.output_dir = a.out;
  const ExperimentResult result = run_experiment(config, &std::cerr);
  std::printf("run %s\n", result.run_id.c_str());
  for (const auto& f : result.files) std::printf("  %s\n", f.c_str());
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial network solver: fiber network generation, assumption analysis and two-level Schwarz PCG.\n"
               "Thread count: SPNET_NUM_THREADS (default: hardware concurrency)."};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Generate a fiber or grid network");
  generate->add_option("--kind", gen.kind, "uniform | orient-bias | place-bias | grid")
      ->check(CLI::IsMember({"uniform", "orient-bias", "place-bias", "grid"}));
  generate->add_option("--seed", gen.seed, "Random seed");
  generate->add_option("--density", gen.density, "Target total fiber length");
  generate->add_option("--fiber-length", gen.fiber_length, "Fiber length");
  generate->add_option("--points", gen.points, "Grid points per side (grid only)");
  generate->add_option("--out", gen.out, "Network file to write")->required();
  generate->add_flag("--hex", gen.hex, "Write coordinates as hexadecimal floats");

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Homogeneity and Poincare scans of a network");
  analyze->add_option("--network", an.network, "Network file")->required()->check(CLI::ExistingFile);
  analyze->add_option("--grid", an.grids, "Boxes per axis of each scan")->delimiter(',');
  analyze->add_option("--out", an.out, "Per-box CSV report")->required();
  analyze->add_option("--summary", an.summary, "Per-grid summary CSV");
  analyze->add_option("--r0", an.r0, "Growth of the linking region (default: longest edge)");
  analyze->add_flag("!--no-dirichlet", an.dirichlet, "Skip the Dirichlet eigenvalue");

  SolveArgs so;
  auto* solve = app.add_subcommand("solve", "Solve a heat or structural problem with Schwarz-preconditioned CG");
  solve->add_option("--network", so.network, "Network file")->required()->check(CLI::ExistingFile);
  solve->add_option("--problem", so.problem, "heat | structural")->check(CLI::IsMember({"heat", "structural"}));
  solve->add_option("--H", so.H, "Coarse mesh size, e.g. 1/8");
  solve->add_option("--tol", so.tol, "Relative preconditioned residual tolerance");
  solve->add_option("--maxit", so.max_iterations, "Iteration cap");
  solve->add_option("--report", so.report, "Per-iteration CSV report");
  solve->add_flag("--reference", so.reference, "Track K-norm errors against a reference solution");
  solve->add_option("--dirichlet", so.dirichlet, "Override the Dirichlet faces, e.g. 0:low,0:high");
  solve->add_option("--components", so.components, "Structural components (2 or 3)");
  solve->add_option("--strain", so.strain, "Structural boundary displacement g = [strain x1, 0, 0]");
  solve->add_option("--lateral-load", so.lateral_load, "Out-of-plane load density (3 components)");
  solve->add_option("--patch-layers", so.patch_layers, "Element layers of each local patch");
  solve->add_option("--solution", so.solution, "CSV with the solution and displaced coordinates");
  solve->add_option("--matrix", so.matrix, "Matrix Market dump of the free-dof operator");

  ExperimentArgs ex;
  auto* experiment = app.add_subcommand("experiment", "Run a configured study");
  experiment->add_option("--config", ex.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  experiment->add_option("--out", ex.out, "Override the output directory");
  auto* seed_opt = experiment->add_option("--seed", ex.seed, "Override the experiment seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*generate) return run_generate(gen);
    if (*analyze) return run_analyze(an);
    if (*solve) return run_solve(so);
    if (*experiment) {
      ex.seed_given = seed_opt->count() > 0;
      return run_experiment_command(ex);
    }
  } catch (const AssumptionViolation& e) {
    std::cerr << "assumption violated: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
