// Acceptance run: each criterion prints its measurements followed by one
// "[PASS]" or "[FAIL]" line. The exit code is nonzero when any criterion fails.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "spnet/analyzer.hpp"
#include "spnet/experiments.hpp"
#include "spnet/fibergen.hpp"
#include "spnet/mesh.hpp"
#include "spnet/models.hpp"
#include "spnet/network_io.hpp"
#include "spnet/solver.hpp"
#include "spnet/sparse_ops.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace spnet;
using spnet::testing::random_field;
using spnet::testing::random_network;
using spnet::testing::random_vector;

namespace {

struct Verdict {
  bool pass = true;
  std::vector<std::string> failures;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      failures.push_back(what);
    }
  }
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

void say(const std::string& line) { std::cout << "    " << line << std::endl; }

double k_norm(const SparseMatrix& K, const Vector& v) { return std::sqrt(std::max(0.0, v.dot(K * v))); }

Vector dense_solve(const SparseMatrix& K, const Vector& f) { return Eigen::MatrixXd(K).ldlt().solve(f); }

// ---------------------------------------------------------------------------
// Shared data between criteria.

struct GridHeat {
  std::vector<RateRow> rates;
};

struct SeedScan {
  std::uint64_t seed = 0;
  std::vector<int> grids;
  std::vector<double> sigma, mu, box_side, mean_inverse_lambda2;
  Index violations = 0;
  double slope = 0.0;
};

const std::vector<int> kHeatInverseH{4, 8, 16, 32};
const double kTargetGridRates[4][2] = {{0.18, 0.31}, {0.25, 0.33}, {0.27, 0.32}, {0.28, 0.31}};

GridHeat& grid_heat() {
  static GridHeat data = [] {
    GridHeat g;
    const auto net = generate_grid_network(513);
    const Problem problem = heat_problem(net);
    const auto ref = reference_solve(problem.op.matrix, problem.rhs);
    say(fmt("grid network: %d nodes, %d free dofs, reference residual %.2e", net.node_count(),
            problem.op.free_count(), ref.relative_residual));
    g.rates = rate_study("grid", net, problem, kHeatInverseH, SolverSettings{}, &ref.u);
    return g;
  }();
  return data;
}

std::vector<SeedScan>& uniform_scans() {
  static std::vector<SeedScan> scans = [] {
    std::vector<SeedScan> out;
    const std::vector<int> grids{4, 8, 16, 32, 64};
    for (std::uint64_t seed : {1, 2, 3}) {
      FiberGenConfig config;
      config.seed = seed;
      const auto net = generate_fiber_network(config);
      const auto analyses = analyze_network(net, grids);
      SeedScan s;
      s.seed = seed;
      s.grids = grids;
      for (const auto& a : analyses) {
        s.sigma.push_back(a.homogeneity.sigma);
        s.mu.push_back(a.poincare.mu_max);
        s.box_side.push_back(a.poincare.box_side);
        s.mean_inverse_lambda2.push_back(a.poincare.mean_inverse_lambda2);
        s.violations += a.poincare.violations;
      }
      s.slope = log_log_slope(s.box_side, s.mean_inverse_lambda2);
      say(fmt("seed %d: %d nodes, longest edge %.4f, total length %.2f", static_cast<int>(seed), net.node_count(),
              net.max_edge_length(), net.total_length()));
      out.push_back(std::move(s));
    }
    return out;
  }();
  return scans;
}

// ---------------------------------------------------------------------------

Verdict criterion_grid_heat() {
  Verdict v;
  const auto& rows = grid_heat().rates;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i].report;
    const double want_mean = kTargetGridRates[i][0], want_max = kTargetGridRates[i][1];
    say(fmt("H = 1/%-2d  mean %.3f (target %.2f)  max %.3f (target %.2f)  iterations %d", rows[i].inverse_H,
            r.mean_rate, want_mean, r.max_rate, want_max, r.iterations));
    v.require(r.converged, fmt("H = 1/%d did not converge", rows[i].inverse_H));
    v.require(std::abs(r.mean_rate - want_mean) <= 0.05, fmt("mean rate at H = 1/%d", rows[i].inverse_H));
    v.require(std::abs(r.max_rate - want_max) <= 0.05, fmt("max rate at H = 1/%d", rows[i].inverse_H));
  }
  return v;
}

Verdict criterion_cd_stability() {
  Verdict v;
  const auto net = generate_grid_network(513);
  const auto analyses = analyze_network(net, kHeatInverseH);
  const auto table = cd_table(grid_heat().rates, analyses, 3.5);
  for (const auto& row : table) {
    say(fmt("H = 1/%-2d  sigma %.3f  mu %.3f  mean rate %.3f  C_d %.3f", row.inverse_H, row.sigma, row.mu,
            row.mean_rate, row.cd));
    v.require(row.cd >= 3.0 && row.cd <= 3.8, fmt("C_d at H = 1/%d is %.3f", row.inverse_H, row.cd));
  }
  return v;
}

Verdict criterion_assumption_scan() {
  Verdict v;
  for (const auto& s : uniform_scans()) {
    std::string sigmas, mus;
    for (std::size_t i = 0; i < s.grids.size(); ++i) {
      sigmas += fmt(" %.3f", s.sigma[i]);
      mus += fmt(" %.3f", s.mu[i]);
    }
    say(fmt("seed %d  sigma:%s", static_cast<int>(s.seed), sigmas.c_str()));
    say(fmt("seed %d  mu:   %s", static_cast<int>(s.seed), mus.c_str()));
    v.require(s.violations == 0, fmt("seed %d: %d unconnectable boxes", static_cast<int>(s.seed),
                                     static_cast<int>(s.violations)));
    for (std::size_t i = 0; i < 2; ++i) {
      v.require(s.sigma[i] >= 1.0 && s.sigma[i] <= 1.2,
                fmt("seed %d: sigma %.3f at grid %d", static_cast<int>(s.seed), s.sigma[i], s.grids[i]));
      v.require(s.mu[i] >= 0.35 && s.mu[i] <= 0.75,
                fmt("seed %d: mu %.3f at grid %d", static_cast<int>(s.seed), s.mu[i], s.grids[i]));
    }
    for (std::size_t i = 1; i < s.grids.size(); ++i) {
      v.require(s.sigma[i] >= s.sigma[i - 1], fmt("seed %d: sigma drops at grid %d", static_cast<int>(s.seed),
                                                  s.grids[i]));
      v.require(s.mu[i] >= s.mu[i - 1], fmt("seed %d: mu drops at grid %d", static_cast<int>(s.seed), s.grids[i]));
    }
  }
  return v;
}

Verdict criterion_poincare_scaling() {
  Verdict v;
  for (const auto& s : uniform_scans()) {
    say(fmt("seed %d  slope of mean 1/lambda2 against R: %.4f", static_cast<int>(s.seed), s.slope));
    v.require(s.slope >= 1.7 && s.slope <= 2.3, fmt("seed %d: slope %.4f", static_cast<int>(s.seed), s.slope));
  }
  return v;
}

struct SmallSystem {
  std::string name;
  SpatialNetwork net;
  Problem problem;
  double H;
};

std::vector<SmallSystem> small_systems() {
  std::vector<SmallSystem> out;
  for (auto [points, H] : {std::pair{5, 0.5}, std::pair{9, 0.5}, std::pair{9, 0.25}, std::pair{17, 0.25}}) {
    auto net = generate_grid_network(points);
    auto problem = heat_problem(net);
    out.push_back({fmt("grid %dx%d, H = %.2f", points, points, H), std::move(net), std::move(problem), H});
  }
  for (std::uint64_t seed : {1, 2, 3}) {
    FiberGenConfig config;
    config.seed = seed;
    config.density = 18.0;
    config.fiber_length = 0.4;
    auto net = generate_fiber_network(config);
    auto heat = heat_problem(net);
    out.push_back({fmt("fiber seed %d heat, H = 0.50", static_cast<int>(seed)), std::move(net), std::move(heat), 0.5});

    config.density = 14.0;
    auto clamped = with_dirichlet_faces(generate_fiber_network(config), {Face{0, Side::low}, Face{0, Side::high}});
    auto structural = structural_problem(clamped, 2, 0.2, 1e3);
    out.push_back({fmt("fiber seed %d structural, H = 0.50", static_cast<int>(seed)), std::move(clamped),
                   std::move(structural), 0.5});
  }
  return out;
}

Verdict criterion_spectral_bound() {
  Verdict v;
  for (const auto& sys : small_systems()) {
    const SparseMatrix& K = sys.problem.op.matrix;
    const Index n = static_cast<Index>(K.rows());
    v.require(n <= 300, sys.name + " has more than 300 dofs");
    const BoxMesh mesh = build_mesh(sys.net, sys.H);
    const SchwarzPreconditioner B(sys.net, mesh, sys.problem.op);
    const auto spectrum = estimate_P_spectrum(K, B, 80, 300);
    const double rho = theorem_rate(spectrum.condition());
    // Relative energy-norm error reachable in double precision; below it the bound is not checked.
    const Vector k_eigen = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Eigen::MatrixXd(K)).eigenvalues();
    const double floor = 100.0 * std::numeric_limits<double>::epsilon() * std::sqrt(k_eigen.maxCoeff() / k_eigen.minCoeff());
    double worst_ratio = 0.0, worst_step = 0.0;
    for (unsigned t = 0; t < 10; ++t) {
      const Vector f = random_vector(n, 1000 + t);
      const Vector exact = dense_solve(K, f);
      PCGOptions options;
      options.tol = 1e-12;
      options.reference = &exact;
      PCGReport report;
      pcg_solve(K, f, B, options, &report);
      for (std::size_t l = 1; l < report.k_errors.size(); ++l) {
        if (report.k_errors[l] <= floor * report.k_errors[0]) break;
        const double bound = 2.0 * std::pow(rho, static_cast<double>(l));
        worst_ratio = std::max(worst_ratio, report.k_errors[l] / report.k_errors[0] / bound);
        worst_step = std::max(worst_step, report.rates[l - 1]);
      }
    }
    say(fmt("%-34s dofs %3d  lambda [%.4f, %.4f]  bound rate %.3f  largest step %.3f  error/bound %.3f  floor %.0e",
            sys.name.c_str(), n, spectrum.lambda_min, spectrum.lambda_max, rho, worst_step, worst_ratio, floor));
    v.require(spectrum.dense, sys.name + ": spectrum not computed densely");
    v.require(spectrum.lambda_min > 0.0, sys.name + ": nonpositive eigenvalue");
    v.require(worst_ratio <= 1.0 + 1e-8, sys.name + ": error exceeds the bound");
  }
  return v;
}

Verdict criterion_oracles() {
  Verdict v;
  const StructuralParams params;
  double worst_heat = 0.0, worst_structural = 0.0;
  for (unsigned seed = 1; seed <= 6; ++seed) {
    const int d = seed % 2 ? 2 : 3;
    const auto net = random_network(90, 80, seed, d);
    std::vector<double> gamma(net.edge_count());
    for (Index e = 0; e < net.edge_count(); ++e) gamma[e] = 0.1 + 0.9 * CounterRng(seed).uniform(e);
    const SparseMatrix K = heat_matrix(net, HeatParams{gamma});
    const SparseMatrix S = SparseMatrix(tensile_matrix(net, params, d) + bending_matrix(net, params, d));
    for (unsigned t = 0; t < 5; ++t) {
      const NodeField u = random_field(net, 1, 10 * seed + t);
      const double want = spnet::testing::heat_energy(net, gamma, u);
      worst_heat = std::max(worst_heat, std::abs(u.values().dot(K * u.values()) - want) / want);
      const NodeField w = random_field(net, d, 20 * seed + t);
      const double want_s =
          spnet::testing::tensile_energy(net, params, w) + spnet::testing::bending_energy(net, params, w);
      worst_structural = std::max(worst_structural, std::abs(w.values().dot(S * w.values()) - want_s) / want_s);
    }
  }
  say(fmt("quadratic forms: heat %.2e, structural %.2e (relative)", worst_heat, worst_structural));
  v.require(worst_heat <= 1e-10 && worst_structural <= 1e-10, "quadratic forms differ from direct evaluation");

  double worst_pcg = 0.0;
  for (const auto& sys : small_systems()) {
    const SparseMatrix& K = sys.problem.op.matrix;
    const BoxMesh mesh = build_mesh(sys.net, sys.H);
    const SchwarzPreconditioner B(sys.net, mesh, sys.problem.op);
    PCGOptions options;
    options.tol = 1e-14;
    const Vector u = pcg_solve(K, sys.problem.rhs, B, options);
    const Vector exact = dense_solve(K, sys.problem.rhs);
    worst_pcg = std::max(worst_pcg, k_norm(K, u - exact) / k_norm(K, exact));
  }
  say(fmt("PCG against dense solve: %.2e (relative energy norm)", worst_pcg));
  v.require(worst_pcg <= 1e-10, "PCG differs from the dense solve");

  double worst_eig = 0.0;
  for (unsigned seed = 1; seed <= 6; ++seed) {
    const auto net = random_network(100 + 15 * seed, 60 + 10 * seed, 50 + seed);
    const SparseMatrix L = laplacian_matrix(net);
    const Vector mass = net.mass_diagonal();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> dense(Eigen::MatrixXd(L),
                                                                    Eigen::MatrixXd(mass.asDiagonal()));
    const double lambda2 = generalized_eigen_smallest(L, mass, EigenMode::neumann).lambda;
    worst_eig = std::max(worst_eig, std::abs(lambda2 - dense.eigenvalues()[1]) / dense.eigenvalues()[1]);

    std::vector<Index> keep;
    for (Index x = 0; x < net.node_count(); ++x)
      if (x % 5 != 0) keep.push_back(x);
    const SparseMatrix Ld = principal_submatrix(L, keep);
    Vector md(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) md[i] = mass[keep[i]];
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> dense_d(Eigen::MatrixXd(Ld),
                                                                      Eigen::MatrixXd(md.asDiagonal()));
    const double lambda1 = generalized_eigen_smallest(Ld, md, EigenMode::dirichlet).lambda;
    worst_eig = std::max(worst_eig, std::abs(lambda1 - dense_d.eigenvalues()[0]) / dense_d.eigenvalues()[0]);
  }
  say(fmt("eigenvalues against dense generalized solve: %.2e (relative)", worst_eig));
  v.require(worst_eig <= 1e-8, "eigensolver differs from the dense solve");
  return v;
}

Verdict criterion_invariants() {
  Verdict v;
  std::vector<SpatialNetwork> nets;
  nets.push_back(generate_grid_network(65));
  for (std::uint64_t seed : {1, 2}) {
    FiberGenConfig config;
    config.seed = seed;
    config.density = 150.0;
    config.fiber_length = 0.1;
    nets.push_back(generate_fiber_network(config));
  }
  double unity = 0.0, idempotence = 0.0, total = 0.0;
  for (const auto& net : nets) {
    const BoxMesh mesh = build_mesh(net, 0.25);
    const auto basis = restrict_basis(mesh, net);
    const Vector rows = basis.phi * Vector::Ones(mesh.node_count());
    unity = std::max(unity, (rows.array() - 1.0).abs().maxCoeff());
    const auto I = interpolate(mesh, basis, net, NodeField::constant(1, net.node_count(), 2.5), BasisRange::all);
    idempotence = std::max(idempotence, (I.values.values().array() - 2.5).abs().maxCoeff());
    double sum = 0.0;
    for (Index e = 0; e < net.edge_count(); ++e) sum += net.edge_length(e);
    total = std::max(total, std::abs(mass_quadratic(net, NodeField::constant(1, net.node_count(), 1.0)) - sum) / sum);
  }
  say(fmt("partition of unity %.1e, constant interpolation %.1e, total length %.1e", unity, idempotence, total));
  v.require(unity <= 1e-12, "partition of unity");
  v.require(idempotence <= 1e-12, "constant interpolation");
  v.require(total <= 1e-12, "mass of the constant field");

  const StructuralParams params;
  double translation = 0.0, rotation = 0.0;
  for (int d : {2, 3}) {
    const auto net = random_network(90, 100, 70 + d, d);
    const SparseMatrix KT = tensile_matrix(net, params, d);
    const SparseMatrix K = SparseMatrix(KT + bending_matrix(net, params, d));
    const double scale = random_field(net, d, 3).values().dot(K * random_field(net, d, 3).values());
    NodeField shift(d, net.node_count()), rot(d, net.node_count());
    for (int c = 0; c < d; ++c) shift.component(c).setConstant(1.0 + c);
    for (Index x = 0; x < net.node_count(); ++x) {
      const auto& p = net.position(x);
      rot(0, x) = -p[1];
      rot(1, x) = p[0];
    }
    translation = std::max({translation, std::abs(shift.values().dot(KT * shift.values())) / scale,
                            std::abs(shift.values().dot(K * shift.values())) / scale});
    rotation = std::max(rotation, std::abs(rot.values().dot(KT * rot.values())) / scale);
  }
  say(fmt("kernel: translations %.1e, rotations %.1e (relative to a random field)", translation, rotation));
  v.require(translation <= 1e-13 && rotation <= 1e-13, "structural kernel");

  double symmetry = 0.0, growth = 0.0;
  for (const auto& sys : small_systems()) {
    const SparseMatrix& K = sys.problem.op.matrix;
    const BoxMesh mesh = build_mesh(sys.net, sys.H);
    const SchwarzPreconditioner B(sys.net, mesh, sys.problem.op);
    for (unsigned t = 0; t < 10; ++t) {
      const Vector a = random_vector(K.rows(), 2 * t), b = random_vector(K.rows(), 2 * t + 1);
      const double ab = B.apply(a).dot(b), ba = B.apply(b).dot(a);
      symmetry = std::max(symmetry, std::abs(ab - ba) / std::abs(ab));
    }
    const Vector exact = dense_solve(K, sys.problem.rhs);
    PCGOptions options;
    options.tol = 1e-12;
    options.reference = &exact;
    PCGReport report;
    pcg_solve(K, sys.problem.rhs, B, options, &report);
    for (std::size_t l = 1; l < report.k_errors.size(); ++l)
      growth = std::max(growth, report.k_errors[l] / report.k_errors[l - 1] - 1.0);
  }
  say(fmt("preconditioner asymmetry %.1e, largest energy error growth %.1e", symmetry, growth));
  v.require(symmetry <= 1e-10, "preconditioner symmetry");
  v.require(growth <= 1e-10, "energy error monotonicity");
  return v;
}

Verdict criterion_structural_rates() {
  Verdict v;
  struct Case {
    const char* name;
    FiberKind kind;
    int components;
    double strain;
    double target_mean;
  };
  const Case cases[] = {{"tensile", FiberKind::orientation_bias, 2, 0.2, 0.54},
                        {"lateral", FiberKind::placement_bias, 3, 0.1, 0.56}};
  for (const auto& c : cases) {
    for (std::uint64_t seed : {1, 2, 3}) {
      FiberGenConfig config;
      config.kind = c.kind;
      config.seed = seed;
      const auto net = with_dirichlet_faces(generate_fiber_network(config), {Face{0, Side::low}, Face{0, Side::high}});
      const Problem problem = structural_problem(net, c.components, c.strain, 1e3);
      Vector reference = reference_solve(problem.op.matrix, problem.rhs).u;
      const auto rows = rate_study(c.name, net, problem, {4}, SolverSettings{}, &reference);
      const auto& r = rows[0].report;
      double late_max = 0.0;
      for (std::size_t l = 1; l < r.rates.size(); ++l) late_max = std::max(late_max, r.rates[l]);
      say(fmt("%s seed %d: %d dofs, %d iterations, mean %.3f (target %.2f), max %.3f", c.name,
              static_cast<int>(seed), problem.op.free_count(), r.iterations, r.mean_rate, c.target_mean, late_max));
      v.require(r.converged, fmt("%s seed %d did not converge", c.name, static_cast<int>(seed)));
      v.require(std::abs(r.mean_rate - c.target_mean) <= 0.15,
                fmt("%s seed %d: mean rate %.3f", c.name, static_cast<int>(seed), r.mean_rate));
      v.require(late_max <= 0.9, fmt("%s seed %d: rate %.3f above 0.9", c.name, static_cast<int>(seed), late_max));
    }
  }
  return v;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "<missing " + path.string() + ">";
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Verdict criterion_determinism(const std::string& cli, const fs::path& work) {
  Verdict v;
  if (cli.empty()) {
    v.require(false, "no CLI path given (--cli)");
    return v;
  }
  fs::remove_all(work);
  fs::create_directories(work);
  const fs::path network = work / "input_network.txt";
  {
    std::ofstream cfg(work / "heat.json");
    cfg << R"({"schema_version": 1, "experiment": "heat", "inverse_H": [2, 4], "networks": [)"
        << R"({"name": "grid", "kind": "grid", "points_per_side": 33},)"
        << R"({"name": "fiber", "kind": "uniform", "density": 300, "fiber_length": 0.1, "weights": [0.1, 1.0]}]})";
  }
  const auto run = [&](const std::string& args) {
    const std::string command = "\"" + cli + "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(command.c_str());
    v.require(status == 0, "command failed: " + args);
  };
  run("generate --kind uniform --seed 4 --density 300 --fiber-length 0.1 --out " + network.string());

  std::vector<std::string> compared;
  for (const char* tag : {"a", "b"}) {
    const fs::path dir = work / tag;
    fs::create_directories(dir);
    const std::string d = dir.string();
    run("generate --kind place-bias --seed 9 --density 60 --fiber-length 0.1 --hex --out " + d + "/generated.txt");
    run("analyze --network " + network.string() + " --grid 2,4 --out " + d + "/boxes.csv --summary " + d +
        "/summary.csv");
    run("solve --network " + network.string() + " --problem heat --H 1/4 --reference --report " + d +
        "/heat_report.csv --solution " + d + "/heat_solution.csv --matrix " + d + "/heat.mtx");
    run("solve --network " + network.string() +
        " --problem structural --components 3 --strain 0.1 --dirichlet 0:low,0:high --H 1/4 --reference --report " +
        d + "/structural_report.csv --solution " + d + "/structural_solution.csv");
    run("experiment --config " + (work / "heat.json").string() + " --out " + d + "/experiment --seed 3");
  }
  for (const auto& entry : fs::recursive_directory_iterator(work / "a")) {
    if (!entry.is_regular_file() || entry.path().filename() == "timings.csv") continue;
    const fs::path rel = fs::relative(entry.path(), work / "a");
    compared.push_back(rel.string());
    v.require(read_file(entry.path()) == read_file(work / "b" / rel), "files differ: " + rel.string());
  }
  std::sort(compared.begin(), compared.end());
  std::string list;
  for (const auto& f : compared) list += " " + f;
  say(fmt("%d output files compared:", static_cast<int>(compared.size())) + list);
  v.require(compared.size() == 11, "unexpected number of output files");
  return v;
}

} // namespace

int main(int argc, char** argv) {
  std::string cli;
  fs::path work = fs::temp_directory_path() / "spnet_acceptance";
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) {
      cli = argv[++i];
    } else if (arg == "--workdir" && i + 1 < argc) {
      work = argv[++i];
    } else if (arg == "--only" && i + 1 < argc) {
      std::stringstream list(argv[++i]);
      for (std::string item; std::getline(list, item, ',');) only.insert(std::stoi(item));
    } else {
      std::cerr << "usage: acceptance [--cli PATH] [--workdir DIR] [--only 1,2,...]\n";
      return 1;
    }
  }

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"grid heat convergence within 0.05 of the target rates", criterion_grid_heat},
      {"grid C_d estimate in [3.0, 3.8] for every H", criterion_cd_stability},
      {"uniform fiber homogeneity and Poincare constants over 3 seeds", criterion_assumption_scan},
      {"slope of mean 1/lambda2 against R in [1.7, 2.3]", criterion_poincare_scaling},
      {"rate bound from the dense spectrum of BK on small systems", criterion_spectral_bound},
      {"oracle equivalence of forms, PCG and eigensolver", criterion_oracles},
      {"invariant suite", criterion_invariants},
      {"structural rates at H = 1/4 over 3 seeds", criterion_structural_rates},
      {"byte-identical reruns of every command", [&] { return criterion_determinism(cli, work); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i + 1);
    if (!only.empty() && !only.count(number)) continue;
    std::cout << "criterion " << number << ": " << criteria[i].first << std::endl;
    const auto start = std::chrono::steady_clock::now();
    Verdict verdict;
    try {
      verdict = criteria[i].second();
    } catch (const std::exception& e) {
      verdict.require(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (const auto& f : verdict.failures) say("failed: " + f);
    std::cout << (verdict.pass ? "[PASS]" : "[FAIL]") << " criterion " << number << ": " << criteria[i].first
              << fmt(" (%.0f s)", seconds) << std::endl;
    failed += verdict.pass ? 0 : 1;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
