#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "spnet/network.hpp"

namespace spnet {

/// Boxes of a scan at resolution g: the domain split into g boxes per axis.
/// The box side is the length scale R of that scan.
RegularGrid scan_grid(const Domain& domain, int resolution);

struct HomogeneityReport {
  int resolution = 0;
  double box_side = 0.0;
  std::vector<double> values;  // |1|^2_M of the box divided by the box volume
  double rho = 0.0;            // min over boxes
  double max_value = 0.0;
  double sigma = 1.0;          // max / min, +inf when some box is empty
  Index empty_boxes = 0;
  double max_edge_length = 0.0;
};

HomogeneityReport homogeneity_scan(const SpatialNetwork& net, int resolution);

/// Connected subgraph around one box: every edge with an endpoint in the box,
/// plus shortest linking paths through nodes of the box grown by R0.
struct ConnectivitySubgraph {
  std::vector<Index> nodes;   // sorted global node ids
  std::vector<Index> edges;   // sorted global edge ids
  std::vector<Index> added;   // sorted ids of the edges added to link components
  Index box_node_count = 0;
  Index mandatory_edge_count = 0;
};

/// Throws AssumptionViolation when the box is empty or its edges cannot be
/// linked inside the grown box.
ConnectivitySubgraph build_connectivity_subgraph(const SpatialNetwork& net, const RegularGrid& boxes, Index box,
                                                 double r0);

/// L and M of a subgraph, with local node numbering following `sub.nodes`.
struct SubgraphOperators {
  SparseMatrix laplacian;
  Vector mass;
};

SubgraphOperators subgraph_operators(const SpatialNetwork& net, const ConnectivitySubgraph& sub);

enum class EigenMode { dirichlet, neumann };

struct EigenOptions {
  double tol = 1e-8;
  int max_iterations = 500;
  int max_basis = 120;
};

struct EigenResult {
  double lambda = 0.0;
  Vector vector;           // M-normalized
  double residual = 0.0;   // |L u - lambda M u|_{M^-1}
  int iterations = 0;
};

/// Smallest eigenvalue of L u = lambda diag(mass) u (dirichlet: L already has
/// the boundary rows removed) or the smallest nonzero one (neumann: L is a
/// connected graph Laplacian, the constants are deflated). Shift-invert
/// Lanczos in the mass inner product with full reorthogonalization, restarted
/// from the best Ritz vector when the basis is full. Throws ConvergenceError
/// after max_iterations solves.
EigenResult generalized_eigen_smallest(const SparseMatrix& L, const Vector& mass, EigenMode mode,
                                       const EigenOptions& options = {});

struct BoxPoincare {
  Index box = 0;
  Point center{};
  double mass_value = 0.0;  // |1|^2_M of the box over its volume
  double lambda1 = std::numeric_limits<double>::quiet_NaN();
  double lambda2 = std::numeric_limits<double>::quiet_NaN();
  double mu = std::numeric_limits<double>::quiet_NaN();            // R^-1 lambda2^-1/2
  double mu_dirichlet = std::numeric_limits<double>::quiet_NaN();  // R^-1 lambda1^-1/2
  Index subgraph_nodes = 0;
  Index added_edges = 0;
  bool violation = false;
};

struct PoincareReport {
  int resolution = 0;
  double box_side = 0.0;  // R
  double r0 = 0.0;
  std::vector<BoxPoincare> boxes;
  double mu_max = 0.0;
  double mu_mean = 0.0;
  double mu_dirichlet_max = 0.0;
  double mean_inverse_lambda2 = 0.0;
  double stddev_inverse_lambda2 = 0.0;
  Index violations = 0;
};

struct PoincareOptions {
  double r0 = 0.0;  // 0 selects the longest edge of the network
  bool dirichlet = true;
  EigenOptions eigen;
};

PoincareReport poincare_scan(const SpatialNetwork& net, int resolution, const PoincareOptions& options = {});

/// Least-squares slope of log(y) against log(x).
double log_log_slope(std::span<const double> x, std::span<const double> y);

struct GridAnalysis {
  HomogeneityReport homogeneity;
  PoincareReport poincare;
};

/// Homogeneity and Poincare scans for each resolution, in order.
std::vector<GridAnalysis> analyze_network(const SpatialNetwork& net, std::span<const int> resolutions,
                                          const PoincareOptions& options = {});

/// Tidy CSV, one row per (grid, box):
/// grid,box_index,center_x,center_y,center_z,mass_density,lambda1,lambda2,mu
void write_analysis_csv(std::ostream& out, const std::vector<GridAnalysis>& analyses);

/// One row per grid: grid,box_side,rho,sigma,mu_max,mu_mean,mean_inv_lambda2,std_inv_lambda2,violations
void write_analysis_summary_csv(std::ostream& out, const std::vector<GridAnalysis>& analyses);

} // namespace spnet
