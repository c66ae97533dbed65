#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spnet/analyzer.hpp"
#include "spnet/models.hpp"
#include "spnet/solver.hpp"

namespace spnet {

enum class ExperimentKind { assumption_scan, heat, cd_analysis, structural_tensile, structural_lateral };

ExperimentKind parse_experiment_kind(const std::string& name);
std::string to_string(ExperimentKind kind);

/// Where a network comes from. Generated fiber networks take their seed from
/// the experiment unless one is given here.
struct NetworkSpec {
  std::string name;
  std::string kind = "uniform";  // grid | uniform | orient-bias | place-bias | file
  int points_per_side = 513;
  std::string file;
  std::optional<std::uint64_t> seed;
  double density = 1000.0;
  double fiber_length = 0.05;
  std::optional<std::array<double, 2>> weights;  // conductivities drawn uniformly from [lo, hi]
};

struct SolverSettings {
  double tol = 1e-8;
  int max_iterations = 2000;
  bool reference = true;
  int patch_layers = 1;
};

struct ExperimentConfig {
  int schema_version = 1;
  ExperimentKind kind = ExperimentKind::heat;
  std::vector<NetworkSpec> networks;  // empty selects the defaults of the experiment kind
  std::vector<int> inverse_H{4, 8, 16, 32};
  std::vector<int> grids{4, 8, 16, 32, 64};
  SolverSettings solver;
  std::uint64_t seed = 1;
  std::string output_dir = "results";
  double cd_constant = 3.5;
  std::optional<double> strain;        // boundary displacement g = [strain * x1, 0, 0]
  double lateral_load = 1e3;           // out-of-plane load density of the lateral case
  bool export_displacement = true;

  /// Fills in the kind-specific defaults and checks every field.
  void finalize();
};

/// Reads the JSON config. Unknown keys and a schema_version other than 1 are
/// ConfigErrors.
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);
/// Canonical JSON of a finalized config (sorted keys, defaults included).
std::string canonical_config(const ExperimentConfig& config);

std::uint64_t fnv1a64(std::string_view bytes);

/// Positive length written as a fraction ("1/8") or a decimal ("0.125").
double parse_length(const std::string& text);

/// Realizes a network spec. Every side of the unit square is Dirichlet.
SpatialNetwork build_network(const NetworkSpec& spec, std::uint64_t experiment_seed);

/// One PCG run at one mesh size.
struct RateRow {
  std::string network;
  int inverse_H = 0;
  PCGReport report;
  SchwarzStats stats;
};

/// A linear system on the free dofs together with the data needed to rebuild
/// the full field.
struct Problem {
  AssembledOperator op;
  Vector rhs;
  NodeField boundary;  // values g on all dofs, zero for the heat problem
};

/// (K u, v) = (M 1, v) with zero boundary values.
Problem heat_problem(const SpatialNetwork& net);
/// Structural problem with g = [strain x1, 0, (0)] on the Dirichlet faces and,
/// for three components, the load M [0, 0, -lateral_load].
Problem structural_problem(const SpatialNetwork& net, int components, double strain, double lateral_load);

/// PCG with the two-level preconditioner for each mesh size. When reference
/// is set, K-norm errors are tracked against it.
std::vector<RateRow> rate_study(const std::string& network, const SpatialNetwork& net, const Problem& problem,
                                const std::vector<int>& inverse_H, const SolverSettings& settings,
                                const Vector* reference, std::ostream* log = nullptr);

/// (1 + mean_rate) / (sqrt(sigma) mu (1 - mean_rate)).
double cd_estimate(double sigma, double mu, double mean_rate);
/// (sqrt(kappa) - 1) / (sqrt(kappa) + 1) with sqrt(kappa) = cd sqrt(sigma) mu.
double predicted_rate(double cd, double sigma, double mu);

struct CdRow {
  std::string network;
  int inverse_H = 0;
  double sigma = 0.0;
  double mu = 0.0;
  double mean_rate = 0.0;
  double cd = 0.0;              // estimate from the measured mean rate
  double predicted = 0.0;       // rate predicted from the calibrated constant
};

/// Joins rate rows with scans at the matching resolution (grid == inverse_H).
/// Throws ConfigError when a mesh size has no scan.
std::vector<CdRow> cd_table(const std::vector<RateRow>& rates, const std::vector<GridAnalysis>& scans,
                            double cd_constant);

struct NamedScan {
  std::string network;
  std::vector<GridAnalysis> analyses;
  double slope = 0.0;  // of mean 1 / lambda2 against R, log-log
};

struct ExperimentResult {
  ExperimentKind kind = ExperimentKind::heat;
  std::string run_id;
  std::uint64_t config_hash = 0;
  std::vector<RateRow> rates;
  std::vector<NamedScan> scans;
  std::vector<CdRow> cd;
  std::vector<std::string> files;  // primary outputs, relative to the output directory
};

/// Runs the configured study and writes its tables, a manifest and a timing
/// file into config.output_dir.
ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

/// Per-iteration table: iteration,residual[,k_error,rate].
void write_iteration_csv(std::ostream& out, const PCGReport& report, bool with_errors);

/// Node positions moved by a displacement field: node,x,y,z,u0,u1,u2.
void write_displaced_csv(std::ostream& out, const SpatialNetwork& net, const NodeField& displacement);

} // namespace spnet
