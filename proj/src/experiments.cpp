#include "spnet/experiments.hpp"

#include <json.hpp>

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "spnet/error.hpp"
#include "spnet/fibergen.hpp"
#include "spnet/mesh.hpp"
#include "spnet/network_io.hpp"

namespace spnet {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& item : obj.items())
    if (!allowed.count(item.key())) throw ConfigError("unknown key '" + item.key() + "' in " + where);
}

template <class T>
T get(const json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + std::string(key) + "' in " + where + ": " + e.what());
  }
}

NetworkSpec parse_network(const json& j, std::size_t index) {
  const std::string where = "networks[" + std::to_string(index) + "]";
  check_keys(j, {"name", "kind", "points_per_side", "file", "seed", "density", "fiber_length", "weights"}, where);
  NetworkSpec spec;
  if (j.contains("kind")) spec.kind = get<std::string>(j, "kind", where);
  spec.name = j.contains("name") ? get<std::string>(j, "name", where) : spec.kind;
  if (j.contains("points_per_side")) spec.points_per_side = get<int>(j, "points_per_side", where);
  if (j.contains("file")) spec.file = get<std::string>(j, "file", where);
  if (j.contains("seed")) spec.seed = get<std::uint64_t>(j, "seed", where);
  if (j.contains("density")) spec.density = get<double>(j, "density", where);
  if (j.contains("fiber_length")) spec.fiber_length = get<double>(j, "fiber_length", where);
  if (j.contains("weights")) spec.weights = get<std::array<double, 2>>(j, "weights", where);
  return spec;
}

json network_json(const NetworkSpec& spec) {
  json j = {{"name", spec.name}, {"kind", spec.kind}};
  if (spec.kind == "grid") j["points_per_side"] = spec.points_per_side;
  if (spec.kind == "file") j["file"] = spec.file;
  if (spec.kind != "grid" && spec.kind != "file") {
    j["density"] = spec.density;
    j["fiber_length"] = spec.fiber_length;
    if (spec.seed) j["seed"] = *spec.seed;
  }
  if (spec.weights) j["weights"] = *spec.weights;
  return j;
}

NetworkSpec named(std::string name, std::string kind) {
  NetworkSpec spec;
  spec.name = std::move(name);
  spec.kind = std::move(kind);
  return spec;
}

std::vector<NetworkSpec> default_networks(ExperimentKind kind) {
  switch (kind) {
  case ExperimentKind::assumption_scan:
    return {named("uniform", "uniform"), named("orient-bias", "orient-bias"), named("place-bias", "place-bias")};
  case ExperimentKind::heat: {
    NetworkSpec weighted = named("fiber-weighted", "uniform");
    weighted.weights = std::array<double, 2>{0.1, 1.0};
    return {named("grid", "grid"), named("fiber", "uniform"), weighted};
  }
  case ExperimentKind::cd_analysis:
    return {named("grid", "grid"), named("fiber", "uniform")};
  case ExperimentKind::structural_tensile:
    return {named("orient-bias", "orient-bias")};
  case ExperimentKind::structural_lateral:
    return {named("place-bias", "place-bias")};
  }
  return {};
}

std::vector<Face> x1_faces() { return {Face{0, Side::low}, Face{0, Side::high}}; }

int components_of(ExperimentKind kind) { return kind == ExperimentKind::structural_lateral ? 3 : 2; }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

class Outputs {
public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void write(const std::string& name, const std::string& text) {
    write_text(dir_ / name, text);
    files_.push_back(name);
    hashes_.push_back(fnv1a64(text));
  }

  const fs::path& dir() const { return dir_; }
  const std::vector<std::string>& files() const { return files_; }
  const std::vector<std::uint64_t>& hashes() const { return hashes_; }

private:
  fs::path dir_;
  std::vector<std::string> files_;
  std::vector<std::uint64_t> hashes_;
};

std::string rates_csv(const std::vector<RateRow>& rows) {
  std::ostringstream out;
  out << "network,inverse_H,iterations,converged,mean_rate,max_rate,coarse_dimension,patches\n";
  for (const auto& r : rows)
    out << r.network << ',' << r.inverse_H << ',' << r.report.iterations << ',' << (r.report.converged ? 1 : 0) << ','
        << num(r.report.mean_rate) << ',' << num(r.report.max_rate) << ',' << r.stats.coarse_dimension << ','
        << r.stats.patches << '\n';
  return out.str();
}

std::string errors_csv(const std::vector<RateRow>& rows) {
  std::ostringstream out;
  out << "network,inverse_H,iteration,residual,k_error,rate\n";
  for (const auto& r : rows) {
    const auto& rep = r.report;
    for (std::size_t l = 0; l < rep.residuals.size(); ++l) {
      out << r.network << ',' << r.inverse_H << ',' << l << ',' << num(rep.residuals[l]) << ',';
      out << (l < rep.k_errors.size() ? num(rep.k_errors[l]) : "") << ',';
      out << (l >= 1 && l - 1 < rep.rates.size() ? num(rep.rates[l - 1]) : "") << '\n';
    }
  }
  return out.str();
}

std::string scan_boxes_csv(const std::vector<NamedScan>& scans) {
  std::ostringstream out;
  out << "network,grid,box_index,center_x,center_y,center_z,mass_density,lambda1,lambda2,mu\n";
  for (const auto& s : scans)
    for (const auto& a : s.analyses)
      for (const auto& b : a.poincare.boxes)
        out << s.network << ',' << a.poincare.resolution << ',' << b.box << ',' << num(b.center[0]) << ','
            << num(b.center[1]) << ',' << num(b.center[2]) << ',' << num(b.mass_value) << ',' << num(b.lambda1)
            << ',' << num(b.lambda2) << ',' << num(b.mu) << '\n';
  return out.str();
}

std::string scan_summary_csv(const std::vector<NamedScan>& scans) {
  std::ostringstream out;
  out << "network,grid,box_side,rho,sigma,mu_max,mu_mean,mu_dirichlet_max,mean_inv_lambda2,std_inv_lambda2,"
         "violations\n";
  for (const auto& s : scans)
    for (const auto& a : s.analyses) {
      const auto& h = a.homogeneity;
      const auto& p = a.poincare;
      out << s.network << ',' << h.resolution << ',' << num(h.box_side) << ',' << num(h.rho) << ',' << num(h.sigma)
          << ',' << num(p.mu_max) << ',' << num(p.mu_mean) << ',' << num(p.mu_dirichlet_max) << ','
          << num(p.mean_inverse_lambda2) << ',' << num(p.stddev_inverse_lambda2) << ',' << p.violations << '\n';
    }
  return out.str();
}

std::string scaling_csv(const std::vector<NamedScan>& scans) {
  std::ostringstream out;
  out << "network,slope\n";
  for (const auto& s : scans) out << s.network << ',' << num(s.slope) << '\n';
  return out.str();
}

std::string cd_csv(const std::vector<CdRow>& rows) {
  std::ostringstream out;
  out << "network,inverse_H,sigma,mu,mean_rate,cd,predicted_rate\n";
  for (const auto& r : rows)
    out << r.network << ',' << r.inverse_H << ',' << num(r.sigma) << ',' << num(r.mu) << ',' << num(r.mean_rate)
        << ',' << num(r.cd) << ',' << num(r.predicted) << '\n';
  return out.str();
}

NamedScan scan_network(const std::string& name, const SpatialNetwork& net, const std::vector<int>& grids,
                       bool dirichlet, std::ostream* log) {
  NamedScan scan;
  scan.network = name;
  PoincareOptions options;
  options.dirichlet = dirichlet;
  scan.analyses = analyze_network(net, grids, options);
  std::vector<double> R, inv;
  for (const auto& a : scan.analyses) {
    R.push_back(a.poincare.box_side);
    inv.push_back(a.poincare.mean_inverse_lambda2);
    if (log)
      *log << "[scan] " << name << " grid " << a.homogeneity.resolution << ": sigma " << num(a.homogeneity.sigma)
           << ", mu " << num(a.poincare.mu_max) << ", violations " << a.poincare.violations << '\n';
  }
  scan.slope = R.size() >= 2 ? log_log_slope(R, inv) : std::nan("");
  return scan;
}

} // namespace

ExperimentKind parse_experiment_kind(const std::string& name) {
  if (name == "assumption-scan") return ExperimentKind::assumption_scan;
  if (name == "heat") return ExperimentKind::heat;
  if (name == "cd-analysis") return ExperimentKind::cd_analysis;
  if (name == "structural-tensile") return ExperimentKind::structural_tensile;
  if (name == "structural-lateral") return ExperimentKind::structural_lateral;
  throw ConfigError("unknown experiment kind '" + name + "'");
}

std::string to_string(ExperimentKind kind) {
  switch (kind) {
  case ExperimentKind::assumption_scan: return "assumption-scan";
  case ExperimentKind::heat: return "heat";
  case ExperimentKind::cd_analysis: return "cd-analysis";
  case ExperimentKind::structural_tensile: return "structural-tensile";
  case ExperimentKind::structural_lateral: return "structural-lateral";
  }
  return "unknown";
}

void ExperimentConfig::finalize() {
  if (schema_version != 1) throw ConfigError("unsupported schema_version " + std::to_string(schema_version));
  if (networks.empty()) networks = default_networks(kind);
  std::set<std::string> names;
  for (const auto& spec : networks) {
    if (spec.name.empty()) throw ConfigError("network name must not be empty");
    if (!names.insert(spec.name).second) throw ConfigError("duplicate network name '" + spec.name + "'");
    if (spec.kind == "file") {
      if (!fs::exists(spec.file)) throw ConfigError("network file '" + spec.file + "' does not exist");
    } else if (spec.kind == "grid") {
      if (spec.points_per_side < 2) throw ConfigError("grid needs at least 2 points per side");
    } else {
      parse_fiber_kind(spec.kind);
      if (!(spec.density > 0.0) || !(spec.fiber_length > 0.0))
        throw ConfigError("fiber density and length must be positive");
    }
    if (spec.weights && !((*spec.weights)[0] > 0.0 && (*spec.weights)[0] <= (*spec.weights)[1]))
      throw ConfigError("weights must satisfy 0 < lo <= hi");
  }
  const bool solves = kind != ExperimentKind::assumption_scan;
  if (solves && inverse_H.empty()) throw ConfigError("inverse_H must not be empty");
  for (int h : inverse_H)
    if (h < 1) throw ConfigError("inverse_H entries must be positive integers");
  if (kind == ExperimentKind::assumption_scan && grids.empty()) throw ConfigError("grids must not be empty");
  for (int g : grids)
    if (g < 1) throw ConfigError("grid resolutions must be positive integers");
  if (!(solver.tol > 0.0 && solver.tol < 1.0)) throw ConfigError("solver.tol must lie in (0, 1)");
  if (solver.max_iterations < 1) throw ConfigError("solver.max_iterations must be positive");
  if (solver.patch_layers < 1) throw ConfigError("solver.patch_layers must be positive");
  if (kind == ExperimentKind::cd_analysis && !solver.reference)
    throw ConfigError("cd-analysis needs reference solutions for the rates");
  if (!strain) strain = kind == ExperimentKind::structural_lateral ? 0.1 : 0.2;
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  const std::string where = "config";
  check_keys(j,
             {"schema_version", "experiment", "networks", "inverse_H", "grids", "solver", "seed", "output_dir",
              "cd_constant", "strain", "lateral_load", "export_displacement"},
             where);
  if (!j.contains("schema_version")) throw ConfigError("config needs a schema_version");
  if (!j.contains("experiment")) throw ConfigError("config needs an experiment kind");
  ExperimentConfig c;
  c.schema_version = get<int>(j, "schema_version", where);
  c.kind = parse_experiment_kind(get<std::string>(j, "experiment", where));
  if (j.contains("networks")) {
    const json& list = j.at("networks");
    if (!list.is_array()) throw ConfigError("networks must be an array");
    for (std::size_t i = 0; i < list.size(); ++i) c.networks.push_back(parse_network(list[i], i));
  }
  if (j.contains("inverse_H")) c.inverse_H = get<std::vector<int>>(j, "inverse_H", where);
  if (j.contains("grids")) c.grids = get<std::vector<int>>(j, "grids", where);
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    check_keys(s, {"tol", "max_iterations", "reference", "patch_layers"}, "solver");
    if (s.contains("tol")) c.solver.tol = get<double>(s, "tol", "solver");
    if (s.contains("max_iterations")) c.solver.max_iterations = get<int>(s, "max_iterations", "solver");
    if (s.contains("reference")) c.solver.reference = get<bool>(s, "reference", "solver");
    if (s.contains("patch_layers")) c.solver.patch_layers = get<int>(s, "patch_layers", "solver");
  }
  if (j.contains("seed")) c.seed = get<std::uint64_t>(j, "seed", where);
  if (j.contains("output_dir")) c.output_dir = get<std::string>(j, "output_dir", where);
  if (j.contains("cd_constant")) c.cd_constant = get<double>(j, "cd_constant", where);
  if (j.contains("strain")) c.strain = get<double>(j, "strain", where);
  if (j.contains("lateral_load")) c.lateral_load = get<double>(j, "lateral_load", where);
  if (j.contains("export_displacement")) c.export_displacement = get<bool>(j, "export_displacement", where);
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

std::string canonical_config(const ExperimentConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["experiment"] = to_string(c.kind);
  j["networks"] = json::array();
  for (const auto& spec : c.networks) j["networks"].push_back(network_json(spec));
  if (c.kind == ExperimentKind::assumption_scan)
    j["grids"] = c.grids;
  else
    j["inverse_H"] = c.inverse_H;
  if (c.kind != ExperimentKind::assumption_scan)
    j["solver"] = {{"tol", c.solver.tol},
                   {"max_iterations", c.solver.max_iterations},
                   {"reference", c.solver.reference},
                   {"patch_layers", c.solver.patch_layers}};
  j["seed"] = c.seed;
  if (c.kind == ExperimentKind::cd_analysis) j["cd_constant"] = c.cd_constant;
  if (c.kind == ExperimentKind::structural_tensile || c.kind == ExperimentKind::structural_lateral) {
    j["strain"] = c.strain.value_or(0.0);
    j["export_displacement"] = c.export_displacement;
  }
  if (c.kind == ExperimentKind::structural_lateral) j["lateral_load"] = c.lateral_load;
  return j.dump();
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double parse_length(const std::string& text) {
  auto parse = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse length '" + text + "'");
    }
    if (used != s.size()) throw ConfigError("cannot parse length '" + text + "'");
    return v;
  };
  const auto slash = text.find('/');
  const double v = slash == std::string::npos ? parse(text) : parse(text.substr(0, slash)) / parse(text.substr(slash + 1));
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("length '" + text + "' must be positive");
  return v;
}

SpatialNetwork build_network(const NetworkSpec& spec, std::uint64_t experiment_seed) {
  const std::uint64_t seed = spec.seed.value_or(experiment_seed);
  SpatialNetwork net = [&] {
    if (spec.kind == "grid") return generate_grid_network(spec.points_per_side);
    if (spec.kind == "file") return read_network_file(spec.file);
    FiberGenConfig config;
    config.kind = parse_fiber_kind(spec.kind);
    config.seed = seed;
    config.density = spec.density;
    config.fiber_length = spec.fiber_length;
    return generate_fiber_network(config);
  }();
  if (spec.weights) net = with_uniform_weights(net, (*spec.weights)[0], (*spec.weights)[1], seed);
  return net;
}

Problem heat_problem(const SpatialNetwork& net) {
  Problem p{assemble_heat(net, HeatParams::from_network(net)), Vector(), NodeField(1, net.node_count())};
  const NodeField source(1, net.mass_diagonal());
  p.rhs = build_rhs(p.op, &source, p.boundary);
  return p;
}

Problem structural_problem(const SpatialNetwork& net, int components, double strain, double lateral_load) {
  if (components != 2 && components != 3) throw ConfigError("structural problems have 2 or 3 components");
  Problem p{assemble_structural(net, StructuralParams{}, components), Vector(), NodeField(components, net.node_count())};
  NodeField source(components, net.node_count());
  for (Index x = 0; x < net.node_count(); ++x) {
    p.boundary(0, x) = strain * net.position(x)[0];
    if (components == 3) source(2, x) = -lateral_load * net.node_mass(x);
  }
  p.rhs = build_rhs(p.op, components == 3 ? &source : nullptr, p.boundary);
  return p;
}

std::vector<RateRow> rate_study(const std::string& network, const SpatialNetwork& net, const Problem& problem,
                                const std::vector<int>& inverse_H, const SolverSettings& settings,
                                const Vector* reference, std::ostream* log) {
  std::vector<RateRow> rows;
  for (int h : inverse_H) {
    const BoxMesh mesh = build_mesh(net, 1.0 / h);
    SchwarzOptions options;
    options.patch_layers = settings.patch_layers;
    const SchwarzPreconditioner B(net, mesh, problem.op, options);
    if (log && B.stats().mesh_finer_than_2r0)
      *log << "warning: H = 1/" << h << " is below twice the longest edge of " << network << '\n';
    PCGOptions pcg;
    pcg.tol = settings.tol;
    pcg.max_iterations = settings.max_iterations;
    pcg.reference = reference;
    RateRow row;
    row.network = network;
    row.inverse_H = h;
    row.stats = B.stats();
    pcg_solve(problem.op.matrix, problem.rhs, B, pcg, &row.report);
    if (log) {
      *log << "[solve] " << network << " H = 1/" << h << ": " << row.report.iterations << " iterations";
      if (reference) *log << ", mean rate " << num(row.report.mean_rate) << ", max rate " << num(row.report.max_rate);
      *log << '\n';
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

double cd_estimate(double sigma, double mu, double mean_rate) {
  return (1.0 + mean_rate) / (std::sqrt(sigma) * mu * (1.0 - mean_rate));
}

double predicted_rate(double cd, double sigma, double mu) {
  const double s = cd * std::sqrt(sigma) * mu;
  return (s - 1.0) / (s + 1.0);
}

std::vector<CdRow> cd_table(const std::vector<RateRow>& rates, const std::vector<GridAnalysis>& scans,
                            double cd_constant) {
  std::vector<CdRow> rows;
  for (const auto& r : rates) {
    const GridAnalysis* match = nullptr;
    for (const auto& a : scans)
      if (a.homogeneity.resolution == r.inverse_H) match = &a;
    if (!match)
      throw ConfigError("no scan at grid " + std::to_string(r.inverse_H) + " for network " + r.network);
    CdRow row;
    row.network = r.network;
    row.inverse_H = r.inverse_H;
    row.sigma = match->homogeneity.sigma;
    row.mu = match->poincare.mu_max;
    row.mean_rate = r.report.mean_rate;
    row.cd = cd_estimate(row.sigma, row.mu, row.mean_rate);
    row.predicted = predicted_rate(cd_constant, row.sigma, row.mu);
    rows.push_back(row);
  }
  return rows;
}

void write_iteration_csv(std::ostream& out, const PCGReport& report, bool with_errors) {
  out << (with_errors ? "iteration,residual,k_error,rate\n" : "iteration,residual\n");
  for (std::size_t l = 0; l < report.residuals.size(); ++l) {
    out << l << ',' << num(report.residuals[l]);
    if (with_errors) {
      out << ',' << (l < report.k_errors.size() ? num(report.k_errors[l]) : "");
      out << ',' << (l >= 1 && l - 1 < report.rates.size() ? num(report.rates[l - 1]) : "");
    }
    out << '\n';
  }
}

void write_displaced_csv(std::ostream& out, const SpatialNetwork& net, const NodeField& displacement) {
  if (displacement.node_count() != net.node_count()) throw ShapeError("displacement does not match the network");
  out << "node,x,y,z,u0,u1,u2\n";
  const int n = displacement.components();
  for (Index x = 0; x < net.node_count(); ++x) {
    double u[3] = {0.0, 0.0, 0.0};
    for (int c = 0; c < n; ++c) u[c] = displacement(c, x);
    const Point& p = net.position(x);
    out << x << ',' << num(p[0] + u[0]) << ',' << num(p[1] + u[1]) << ',' << num(p[2] + u[2]) << ',' << num(u[0])
        << ',' << num(u[1]) << ',' << num(u[2]) << '\n';
  }
}

ExperimentResult run_experiment(const ExperimentConfig& input, std::ostream* log) {
  ExperimentConfig config = input;
  config.finalize();
  const std::string canonical = canonical_config(config);
  ExperimentResult result;
  result.kind = config.kind;
  result.config_hash = fnv1a64(canonical);
  result.run_id = to_string(config.kind) + "-" + hex64(result.config_hash).substr(0, 8) + "-s" +
                  std::to_string(config.seed);
  Outputs outputs(config.output_dir);
  std::ostringstream timings;
  timings << "network,inverse_H,stage,seconds\n";
  if (log) *log << "run " << result.run_id << '\n';

  auto solve_all = [&](const std::string& name, const SpatialNetwork& net, const Problem& problem, Vector* kept) {
    Vector reference;
    if (config.solver.reference || kept) {
      const auto start = std::chrono::steady_clock::now();
      reference = reference_solve(problem.op.matrix, problem.rhs).u;
      timings << name << ",,reference," << num(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()) << '\n';
    }
    auto rows = rate_study(name, net, problem, config.inverse_H, config.solver,
                           config.solver.reference ? &reference : nullptr, log);
    for (const auto& r : rows) {
      timings << name << ',' << r.inverse_H << ",setup," << num(r.stats.setup_seconds) << '\n';
      timings << name << ',' << r.inverse_H << ",solve," << num(r.report.solve_seconds) << '\n';
    }
    if (kept) *kept = std::move(reference);
    result.rates.insert(result.rates.end(), rows.begin(), rows.end());
  };

  switch (config.kind) {
  case ExperimentKind::assumption_scan: {
    for (const auto& spec : config.networks) {
      const SpatialNetwork net = build_network(spec, config.seed);
      result.scans.push_back(scan_network(spec.name, net, config.grids, true, log));
    }
    outputs.write("boxes.csv", scan_boxes_csv(result.scans));
    outputs.write("summary.csv", scan_summary_csv(result.scans));
    outputs.write("scaling.csv", scaling_csv(result.scans));
    break;
  }
  case ExperimentKind::heat:
  case ExperimentKind::cd_analysis: {
    for (const auto& spec : config.networks) {
      const SpatialNetwork net = build_network(spec, config.seed);
      const std::size_t first = result.rates.size();
      solve_all(spec.name, net, heat_problem(net), nullptr);
      if (config.kind == ExperimentKind::cd_analysis) {
        NamedScan scan = scan_network(spec.name, net, config.inverse_H, false, log);
        const std::vector<RateRow> rows(result.rates.begin() + static_cast<std::ptrdiff_t>(first), result.rates.end());
        const auto cd = cd_table(rows, scan.analyses, config.cd_constant);
        result.cd.insert(result.cd.end(), cd.begin(), cd.end());
        result.scans.push_back(std::move(scan));
      }
    }
    outputs.write("rates.csv", rates_csv(result.rates));
    outputs.write("errors.csv", errors_csv(result.rates));
    if (config.kind == ExperimentKind::cd_analysis) {
      outputs.write("summary.csv", scan_summary_csv(result.scans));
      outputs.write("cd.csv", cd_csv(result.cd));
    }
    break;
  }
  case ExperimentKind::structural_tensile:
  case ExperimentKind::structural_lateral: {
    const int n = components_of(config.kind);
    for (const auto& spec : config.networks) {
      const SpatialNetwork net = with_dirichlet_faces(build_network(spec, config.seed), x1_faces());
      const Problem problem = structural_problem(net, n, *config.strain, config.lateral_load);
      Vector reference;
      solve_all(spec.name, net, problem, config.export_displacement ? &reference : nullptr);
      if (config.export_displacement) {
        NodeField full = problem.op.lift(reference);
        full.values() += problem.boundary.values();
        std::ostringstream out;
        write_displaced_csv(out, net, full);
        outputs.write("displaced_" + spec.name + ".csv", out.str());
      }
    }
    outputs.write("rates.csv", rates_csv(result.rates));
    outputs.write("errors.csv", errors_csv(result.rates));
    break;
  }
  }

  json manifest;
  manifest["run_id"] = result.run_id;
  manifest["config_hash"] = hex64(result.config_hash);
  manifest["experiment"] = to_string(config.kind);
  manifest["seed"] = config.seed;
  manifest["config"] = json::parse(canonical);
  manifest["files"] = json::array();
  for (std::size_t i = 0; i < outputs.files().size(); ++i)
    manifest["files"].push_back({{"path", outputs.files()[i]}, {"fnv1a64", hex64(outputs.hashes()[i])}});
  write_text(outputs.dir() / "manifest.json", manifest.dump(2) + "\n");
  write_text(outputs.dir() / "timings.csv", timings.str());
  result.files = outputs.files();
  result.files.push_back("manifest.json");
  return result;
}

} // namespace spnet
