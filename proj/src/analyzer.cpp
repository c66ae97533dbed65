#include "spnet/analyzer.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <numeric>
#include <ostream>
#include <string>
#include <unordered_map>

#include "spnet/error.hpp"
#include "spnet/fibergen.hpp"
#include "spnet/parallel.hpp"
#include "spnet/sparse_cholesky.hpp"
#include "spnet/sparse_ops.hpp"
#include "spnet/union_find.hpp"

namespace spnet {

RegularGrid scan_grid(const Domain& domain, int resolution) {
  if (resolution < 1) throw ConfigError("scan resolution must be positive");
  RegularGrid grid;
  grid.domain = domain;
  grid.counts = {1, 1, 1};
  for (int i = 0; i < domain.dimension; ++i) grid.counts[i] = resolution;
  return grid;
}

namespace {

double box_side(const RegularGrid& grid) { return grid.cell_width(0); }

double box_volume(const RegularGrid& grid) {
  double v = 1.0;
  for (int i = 0; i < grid.domain.dimension; ++i) v *= grid.cell_width(i);
  return v;
}

// Nodes of every box in CSR form, each list sorted.
struct BoxMembers {
  std::vector<Index> offsets;
  std::vector<Index> nodes;

  std::span<const Index> of(Index box) const {
    return {nodes.data() + offsets[box], nodes.data() + offsets[box + 1]};
  }
};

BoxMembers box_members(const SpatialNetwork& net, const RegularGrid& grid) {
  const Index boxes = grid.cell_count();
  BoxMembers m;
  m.offsets.assign(boxes + 1, 0);
  std::vector<Index> cell(net.node_count());
  for (Index x = 0; x < net.node_count(); ++x) {
    cell[x] = grid.cell_of(net.position(x));
    ++m.offsets[cell[x] + 1];
  }
  for (Index b = 0; b < boxes; ++b) m.offsets[b + 1] += m.offsets[b];
  m.nodes.resize(net.node_count());
  std::vector<Index> fill(m.offsets.begin(), m.offsets.end() - 1);
  for (Index x = 0; x < net.node_count(); ++x) m.nodes[fill[cell[x]]++] = x;
  return m;
}

ConnectivitySubgraph connect_box(const SpatialNetwork& net, const RegularGrid& grid, Index box,
                                 std::span<const Index> box_nodes, double r0) {
  if (box_nodes.empty()) throw AssumptionViolation("box " + std::to_string(box) + " contains no network nodes");
  const int d = net.dimension();
  ConnectivitySubgraph sub;
  sub.box_node_count = static_cast<Index>(box_nodes.size());

  for (Index x : box_nodes)
    for (const auto& a : net.neighbors(x)) sub.edges.push_back(a.edge);
  std::sort(sub.edges.begin(), sub.edges.end());
  sub.edges.erase(std::unique(sub.edges.begin(), sub.edges.end()), sub.edges.end());
  sub.mandatory_edge_count = static_cast<Index>(sub.edges.size());
  if (sub.edges.empty())
    throw AssumptionViolation("box " + std::to_string(box) + " has no edges; its nodes are isolated");

  for (Index e : sub.edges) {
    sub.nodes.push_back(net.edge(e).a);
    sub.nodes.push_back(net.edge(e).b);
  }
  std::sort(sub.nodes.begin(), sub.nodes.end());
  sub.nodes.erase(std::unique(sub.nodes.begin(), sub.nodes.end()), sub.nodes.end());

  // Component label per subgraph node.
  std::unordered_map<Index, Index> label;
  {
    const Index n = static_cast<Index>(sub.nodes.size());
    auto local = [&](Index x) {
      return static_cast<Index>(std::lower_bound(sub.nodes.begin(), sub.nodes.end(), x) - sub.nodes.begin());
    };
    UnionFind<Index> uf(n);
    for (Index e : sub.edges) uf.unite(local(net.edge(e).a), local(net.edge(e).b));
    Index count = 0;
    const auto labels = uf.labels(&count);
    for (Index i = 0; i < n; ++i) label.emplace(sub.nodes[i], labels[i]);
    if (count == 1) return sub;
  }

  const Box region = grid.cell_box(box).expanded(r0 * (1.0 + 1e-12), d);
  auto inside = [&](Index x) { return region.contains_closed(net.position(x), d); };
  auto components = [&] {
    std::vector<Index> ids;
    for (const auto& [x, l] : label) ids.push_back(l);
    std::sort(ids.begin(), ids.end());
    return static_cast<Index>(std::unique(ids.begin(), ids.end()) - ids.begin());
  };

  const Index main = label.at(sub.nodes.front());
  while (components() > 1) {
    std::unordered_map<Index, std::pair<Index, Index>> parent;  // node -> (previous node, edge)
    std::deque<Index> queue;
    for (Index x : sub.nodes) {
      if (label.at(x) != main || !inside(x)) continue;
      parent.emplace(x, std::make_pair(Index{-1}, Index{-1}));
      queue.push_back(x);
    }
    Index reached = -1;
    while (!queue.empty() && reached < 0) {
      const Index x = queue.front();
      queue.pop_front();
      for (const auto& [y, e] : net.neighbors(x)) {
        if (parent.count(y)) continue;
        if (!inside(y)) continue;
        parent.emplace(y, std::make_pair(x, e));
        const auto it = label.find(y);
        if (it != label.end() && it->second != main) {
          reached = y;
          break;
        }
        queue.push_back(y);
      }
    }
    if (reached < 0)
      throw AssumptionViolation("box " + std::to_string(box) + ": edges cannot be connected inside the box grown by R0");

    const Index joined = label.at(reached);
    for (auto& [x, l] : label)
      if (l == joined) l = main;
    for (Index y = reached; parent.at(y).first >= 0; y = parent.at(y).first) {
      const auto [x, e] = parent.at(y);
      sub.added.push_back(e);
      if (!label.count(x)) {
        label.emplace(x, main);
        sub.nodes.push_back(x);
      }
    }
    std::sort(sub.nodes.begin(), sub.nodes.end());
  }
  std::sort(sub.added.begin(), sub.added.end());
  sub.added.erase(std::unique(sub.added.begin(), sub.added.end()), sub.added.end());
  sub.edges.insert(sub.edges.end(), sub.added.begin(), sub.added.end());
  std::sort(sub.edges.begin(), sub.edges.end());
  sub.edges.erase(std::unique(sub.edges.begin(), sub.edges.end()), sub.edges.end());
  return sub;
}

double mass_norm2(const Vector& m, const Vector& v) { return v.dot(m.cwiseProduct(v)); }

} // namespace

HomogeneityReport homogeneity_scan(const SpatialNetwork& net, int resolution) {
  const RegularGrid grid = scan_grid(net.domain(), resolution);
  HomogeneityReport rep;
  rep.resolution = resolution;
  rep.box_side = box_side(grid);
  rep.max_edge_length = net.max_edge_length();
  rep.values.assign(grid.cell_count(), 0.0);
  for (Index x = 0; x < net.node_count(); ++x) rep.values[grid.cell_of(net.position(x))] += net.node_mass(x);
  const double volume = box_volume(grid);
  for (double& v : rep.values) v /= volume;
  const auto [lo, hi] = std::minmax_element(rep.values.begin(), rep.values.end());
  rep.rho = *lo;
  rep.max_value = *hi;
  rep.empty_boxes = static_cast<Index>(std::count(rep.values.begin(), rep.values.end(), 0.0));
  rep.sigma = rep.rho > 0.0 ? rep.max_value / rep.rho : std::numeric_limits<double>::infinity();
  return rep;
}

ConnectivitySubgraph build_connectivity_subgraph(const SpatialNetwork& net, const RegularGrid& boxes, Index box,
                                                 double r0) {
  if (box < 0 || box >= boxes.cell_count()) throw ShapeError("box index out of range");
  std::vector<Index> members;
  for (Index x = 0; x < net.node_count(); ++x)
    if (boxes.cell_of(net.position(x)) == box) members.push_back(x);
  return connect_box(net, boxes, box, members, r0);
}

SubgraphOperators subgraph_operators(const SpatialNetwork& net, const ConnectivitySubgraph& sub) {
  const Index n = static_cast<Index>(sub.nodes.size());
  auto local = [&](Index x) {
    const auto it = std::lower_bound(sub.nodes.begin(), sub.nodes.end(), x);
    if (it == sub.nodes.end() || *it != x) throw ShapeError("subgraph edge endpoint missing from its node list");
    return static_cast<Index>(it - sub.nodes.begin());
  };
  SubgraphOperators ops;
  ops.mass = Vector::Zero(n);
  Vector diag = Vector::Zero(n);
  std::vector<Eigen::Triplet<double>> lower;
  for (Index e : sub.edges) {
    const Index a = local(net.edge(e).a), b = local(net.edge(e).b);
    const double len = net.edge_length(e);
    ops.mass[a] += 0.5 * len;
    ops.mass[b] += 0.5 * len;
    diag[a] += 1.0 / len;
    diag[b] += 1.0 / len;
    lower.emplace_back(std::max(a, b), std::min(a, b), -1.0 / len);
  }
  for (Index i = 0; i < n; ++i) lower.emplace_back(i, i, diag[i]);
  SparseMatrix L(n, n);
  L.setFromTriplets(lower.begin(), lower.end());
  ops.laplacian = L.selfadjointView<Eigen::Lower>();
  return ops;
}

EigenResult generalized_eigen_smallest(const SparseMatrix& L, const Vector& mass, EigenMode mode,
                                       const EigenOptions& options) {
  const Index n = static_cast<Index>(L.rows());
  if (L.cols() != n || mass.size() != n) throw ShapeError("eigenproblem matrices differ in size");
  if (n == 0 || (mode == EigenMode::neumann && n < 2))
    throw ShapeError("eigenproblem is too small for the requested mode");
  if ((mass.array() <= 0.0).any()) throw ShapeError("mass matrix must be positive");

  const bool neumann = mode == EigenMode::neumann;
  const double total_mass = mass.sum();
  std::vector<Index> kept(neumann ? n - 1 : n);
  std::iota(kept.begin(), kept.end(), Index{0});
  const SparseCholesky chol(neumann ? principal_submatrix(L, kept) : L);

  auto deflate = [&](Vector& v) {
    if (neumann) v.array() -= mass.dot(v) / total_mass;
  };
  // Shift-invert operator: v -> L^+ M v (constants removed in the Neumann case).
  auto apply = [&](const Vector& v) {
    const Vector b = mass.cwiseProduct(v);
    Vector x = Vector::Zero(n);
    if (neumann) {
      x.head(n - 1) = chol.solve(Vector(b.head(n - 1)));
      deflate(x);
    } else {
      x = chol.solve(b);
    }
    return x;
  };

  const Index dim = neumann ? n - 1 : n;
  const int basis = static_cast<int>(std::min<Index>(options.max_basis, dim));
  const CounterRng rng(0x5eed);
  Vector start(n);
  for (Index i = 0; i < n; ++i) start[i] = rng.uniform(i) - 0.5;
  deflate(start);

  EigenResult best;
  best.residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  Eigen::MatrixXd V(n, basis + 1);
  while (true) {
    start /= std::sqrt(mass_norm2(mass, start));
    V.col(0) = start;
    std::vector<double> alpha, beta;
    double theta = 0.0;
    Vector ritz_coeffs;
    int j = 0;
    for (;; ++j) {
      Vector w = apply(V.col(j));
      ++iterations;
      const double a = w.dot(mass.cwiseProduct(V.col(j)));
      alpha.push_back(a);
      for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXd c = V.leftCols(j + 1).transpose() * mass.cwiseProduct(w);
        w -= V.leftCols(j + 1) * c;
      }
      deflate(w);
      const double b = std::sqrt(mass_norm2(mass, w));

      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(j + 1, j + 1);
      for (int i = 0; i <= j; ++i) {
        T(i, i) = alpha[i];
        if (i < j) T(i, i + 1) = T(i + 1, i) = beta[i];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(T);
      theta = eig.eigenvalues()(j);
      ritz_coeffs = eig.eigenvectors().col(j);
      const double estimate = std::abs(b * ritz_coeffs(j));

      const bool exhausted = b <= 1e-13 * std::abs(theta) || j + 1 >= dim;
      const bool full = j + 1 >= basis;
      if (estimate <= 0.1 * options.tol * std::abs(theta) || exhausted || full ||
          iterations >= options.max_iterations)
        break;
      beta.push_back(b);
      V.col(j + 1) = w / b;
    }

    if (!(theta > 0.0)) throw SingularError("eigenproblem operator is not positive definite");
    // One more inverse iteration damps the high-frequency error that the
    // shift-inverted residual estimate cannot see.
    Vector u = apply(V.leftCols(j + 1) * ritz_coeffs);
    ++iterations;
    u /= std::sqrt(mass_norm2(mass, u));
    const double lambda = u.dot(L * u);
    const Vector r = L * u - lambda * mass.cwiseProduct(u);
    const double residual = std::sqrt(r.dot(r.cwiseQuotient(mass)));
    if (residual < best.residual) {
      best.lambda = lambda;
      best.vector = u;
      best.residual = residual;
    }
    best.iterations = iterations;
    if (residual <= options.tol * lambda) return best;
    if (iterations >= options.max_iterations)
      throw ConvergenceError("eigensolver did not converge in " + std::to_string(iterations) +
                             " iterations (last residual " + std::to_string(residual / lambda) + " relative)");
    start = u;
  }
}

PoincareReport poincare_scan(const SpatialNetwork& net, int resolution, const PoincareOptions& options) {
  const RegularGrid grid = scan_grid(net.domain(), resolution);
  const BoxMembers members = box_members(net, grid);
  PoincareReport rep;
  rep.resolution = resolution;
  rep.box_side = box_side(grid);
  rep.r0 = options.r0 > 0.0 ? options.r0 : net.max_edge_length();
  const double R = rep.box_side;
  const double volume = box_volume(grid);
  rep.boxes.resize(grid.cell_count());

  parallel_for(grid.cell_count(), [&](Index b) {
    BoxPoincare& out = rep.boxes[b];
    out.box = b;
    out.center = grid.cell_box(b).center(net.dimension());
    const auto nodes = members.of(b);
    for (Index x : nodes) out.mass_value += net.node_mass(x);
    out.mass_value /= volume;
    ConnectivitySubgraph sub;
    try {
      sub = connect_box(net, grid, b, nodes, rep.r0);
    } catch (const AssumptionViolation&) {
      out.violation = true;
      return;
    }
    out.subgraph_nodes = static_cast<Index>(sub.nodes.size());
    out.added_edges = static_cast<Index>(sub.added.size());
    const SubgraphOperators ops = subgraph_operators(net, sub);
    out.lambda2 = generalized_eigen_smallest(ops.laplacian, ops.mass, EigenMode::neumann, options.eigen).lambda;
    out.mu = 1.0 / (R * std::sqrt(out.lambda2));

    if (!options.dirichlet) return;
    std::vector<Index> interior;
    for (Index i = 0; i < static_cast<Index>(sub.nodes.size()); ++i)
      if (!net.is_dirichlet(sub.nodes[i])) interior.push_back(i);
    if (interior.empty() || interior.size() == sub.nodes.size()) return;
    const SparseMatrix Ld = principal_submatrix(ops.laplacian, interior);
    Vector md(static_cast<Index>(interior.size()));
    for (std::size_t i = 0; i < interior.size(); ++i) md[i] = ops.mass[interior[i]];
    out.lambda1 = generalized_eigen_smallest(Ld, md, EigenMode::dirichlet, options.eigen).lambda;
    out.mu_dirichlet = 1.0 / (R * std::sqrt(out.lambda1));
  });

  double sum_inv = 0.0, sum_inv2 = 0.0, sum_mu = 0.0;
  Index count = 0;
  for (const auto& box : rep.boxes) {
    if (box.violation) {
      ++rep.violations;
      continue;
    }
    const double inv = 1.0 / box.lambda2;
    sum_inv += inv;
    sum_inv2 += inv * inv;
    sum_mu += box.mu;
    ++count;
    rep.mu_max = std::max(rep.mu_max, box.mu);
    if (!std::isnan(box.mu_dirichlet)) rep.mu_dirichlet_max = std::max(rep.mu_dirichlet_max, box.mu_dirichlet);
  }
  if (count > 0) {
    rep.mean_inverse_lambda2 = sum_inv / count;
    rep.mu_mean = sum_mu / count;
    const double var = std::max(0.0, sum_inv2 / count - rep.mean_inverse_lambda2 * rep.mean_inverse_lambda2);
    rep.stddev_inverse_lambda2 = std::sqrt(var);
  }
  return rep;
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ShapeError("slope needs at least two matching points");
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw ShapeError("log-log slope needs positive values");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

std::vector<GridAnalysis> analyze_network(const SpatialNetwork& net, std::span<const int> resolutions,
                                          const PoincareOptions& options) {
  std::vector<GridAnalysis> out;
  for (int g : resolutions) out.push_back({homogeneity_scan(net, g), poincare_scan(net, g, options)});
  return out;
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

} // namespace

void write_analysis_csv(std::ostream& out, const std::vector<GridAnalysis>& analyses) {
  out << "grid,box_index,center_x,center_y,center_z,mass_density,lambda1,lambda2,mu\n";
  for (const auto& a : analyses) {
    for (const auto& b : a.poincare.boxes) {
      out << a.poincare.resolution << ',' << b.box << ',' << num(b.center[0]) << ',' << num(b.center[1]) << ','
          << num(b.center[2]) << ',' << num(b.mass_value) << ',' << num(b.lambda1) << ',' << num(b.lambda2) << ','
          << num(b.mu) << '\n';
    }
  }
}

void write_analysis_summary_csv(std::ostream& out, const std::vector<GridAnalysis>& analyses) {
  out << "grid,box_side,rho,sigma,mu_max,mu_mean,mu_dirichlet_max,mean_inv_lambda2,std_inv_lambda2,violations\n";
  for (const auto& a : analyses) {
    const auto& h = a.homogeneity;
    const auto& p = a.poincare;
    out << p.resolution << ',' << num(p.box_side) << ',' << num(h.rho) << ',' << num(h.sigma) << ','
        << num(p.mu_max) << ',' << num(p.mu_mean) << ',' << num(p.mu_dirichlet_max) << ','
        << num(p.mean_inverse_lambda2) << ',' << num(p.stddev_inverse_lambda2) << ',' << p.violations << '\n';
  }
}

} // namespace spnet
