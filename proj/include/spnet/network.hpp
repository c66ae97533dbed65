#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "spnet/geometry.hpp"

namespace spnet {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

struct Edge {
  Index a = 0;
  Index b = 0;
};

/// Raw description of a spatial network, before validation.
struct NetworkData {
  Domain domain;
  std::vector<Point> positions;
  std::vector<Edge> edges;
  std::vector<Face> dirichlet_faces;
  std::vector<double> weights;   // optional per-edge weight; empty when absent
  std::vector<Index> fiber_ids;  // optional per-edge fiber id; empty when absent
};

struct Adjacent {
  Index node;
  Index edge;
};

struct ConnectivityResult {
  bool connected = false;
  Index components = 0;
  std::vector<Index> labels;  // component label per node, 0-based
};

/// Connected components of an undirected graph (union-find).
ConnectivityResult check_connected(Index node_count, std::span<const Edge> edges);

/// Embedded graph with cached edge lengths, CSR adjacency and the Dirichlet
/// node mask. Immutable after construction.
class SpatialNetwork {
public:
  enum class Connectivity { require, allow_disconnected };

  explicit SpatialNetwork(NetworkData data, Connectivity policy = Connectivity::require);

  int dimension() const { return data_.domain.dimension; }
  const Domain& domain() const { return data_.domain; }
  const NetworkData& data() const { return data_; }

  Index node_count() const { return static_cast<Index>(data_.positions.size()); }
  Index edge_count() const { return static_cast<Index>(data_.edges.size()); }

  const Point& position(Index x) const { return data_.positions[x]; }
  std::span<const Point> positions() const { return data_.positions; }
  std::span<const Edge> edges() const { return data_.edges; }
  const Edge& edge(Index e) const { return data_.edges[e]; }
  double edge_length(Index e) const { return lengths_[e]; }
  std::span<const double> edge_lengths() const { return lengths_; }

  std::span<const Adjacent> neighbors(Index x) const {
    return {adjacency_.data() + offsets_[x], adjacency_.data() + offsets_[x + 1]};
  }
  Index degree(Index x) const { return offsets_[x + 1] - offsets_[x]; }

  std::span<const Face> dirichlet_faces() const { return data_.dirichlet_faces; }
  bool is_dirichlet(Index x) const { return dirichlet_[x] != 0; }
  std::span<const std::uint8_t> dirichlet_mask() const { return dirichlet_; }
  Index dirichlet_count() const { return dirichlet_count_; }

  /// Diagonal of M: half the total length of the edges incident to x.
  double node_mass(Index x) const { return mass_[x]; }
  const Vector& mass_diagonal() const { return mass_; }

  double total_length() const { return total_length_; }
  double max_edge_length() const { return max_length_; }

  bool has_weights() const { return !data_.weights.empty(); }
  double weight(Index e) const { return data_.weights[e]; }
  bool has_fiber_ids() const { return !data_.fiber_ids.empty(); }
  Index fiber_id(Index e) const { return data_.fiber_ids[e]; }

  bool connected() const { return connected_; }

private:
  NetworkData data_;
  std::vector<double> lengths_;
  std::vector<Index> offsets_;
  std::vector<Adjacent> adjacency_;
  std::vector<std::uint8_t> dirichlet_;
  Index dirichlet_count_ = 0;
  Vector mass_;
  double total_length_ = 0.0;
  double max_length_ = 0.0;
  bool connected_ = false;
};

/// n-component real function on the nodes, stored component-major:
/// all values of component 0, then component 1, ...
class NodeField {
public:
  NodeField() = default;
  NodeField(int components, Index nodes);
  NodeField(int components, Vector values);

  static NodeField constant(int components, Index nodes, double value);

  int components() const { return components_; }
  Index node_count() const { return nodes_; }

  Vector& values() { return values_; }
  const Vector& values() const { return values_; }

  double& operator()(int c, Index x) { return values_[static_cast<Eigen::Index>(c) * nodes_ + x]; }
  double operator()(int c, Index x) const { return values_[static_cast<Eigen::Index>(c) * nodes_ + x]; }

  auto component(int c) { return values_.segment(static_cast<Eigen::Index>(c) * nodes_, nodes_); }
  auto component(int c) const { return values_.segment(static_cast<Eigen::Index>(c) * nodes_, nodes_); }

private:
  int components_ = 1;
  Index nodes_ = 0;
  Vector values_;
};

/// Explicit node subset N(omega).
struct NodeSet {
  std::vector<Index> nodes;
};

/// Either a box (membership by the half-open convention) or a node set.
using Subdomain = std::variant<Box, NodeSet>;

/// Sorted node indices of N(omega).
std::vector<Index> nodes_in(const SpatialNetwork& net, const Subdomain& omega);

/// True iff the field vanishes at every Dirichlet node (i.e. lies in V).
bool satisfies_dirichlet(const SpatialNetwork& net, const NodeField& v);

/// |v|^2_{M,omega}, summed over components.
double mass_quadratic(const SpatialNetwork& net, const NodeField& v,
                      const std::optional<Subdomain>& omega = std::nullopt);

/// |v|^2_{L,omega}, summed over components.
double laplacian_quadratic(const SpatialNetwork& net, const NodeField& v,
                           const std::optional<Subdomain>& omega = std::nullopt);

NodeField apply_mass(const SpatialNetwork& net, const NodeField& v);
NodeField apply_laplacian(const SpatialNetwork& net, const NodeField& v);

/// Scalar weighted graph Laplacian, entries w_e / |e| with w_e = 1 unless
/// `edge_weights` is given.
SparseMatrix laplacian_matrix(const SpatialNetwork& net, std::span<const double> edge_weights = {});

ConnectivityResult check_connected(const SpatialNetwork& net);

} // namespace spnet
