#include "spnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "spnet/error.hpp"
#include "spnet/union_find.hpp"

namespace spnet {

ConnectivityResult check_connected(Index node_count, std::span<const Edge> edges) {
  ConnectivityResult result;
  if (node_count == 0) return result;
  UnionFind<Index> uf(node_count);
  for (const auto& e : edges) uf.unite(e.a, e.b);
  result.labels = uf.labels(&result.components);
  result.connected = result.components == 1;
  return result;
}

ConnectivityResult check_connected(const SpatialNetwork& net) {
  return check_connected(net.node_count(), net.edges());
}

SpatialNetwork::SpatialNetwork(NetworkData data, Connectivity policy) : data_(std::move(data)) {
  const int d = data_.domain.dimension;
  if (d != 2 && d != 3) throw NetworkError("network dimension must be 2 or 3");
  for (int i = 0; i < d; ++i)
    if (!(data_.domain.lengths[i] > 0.0)) throw NetworkError("domain side lengths must be positive");
  for (int i = d; i < 3; ++i) data_.domain.lengths[i] = 0.0;

  const Index n = node_count();
  for (Index x = 0; x < n; ++x) {
    auto& p = data_.positions[x];
    for (int i = d; i < 3; ++i) p[i] = 0.0;
    if (!data_.domain.contains(p))
      throw NetworkError("node " + std::to_string(x) + " lies outside the domain");
  }
  for (const auto& f : data_.dirichlet_faces)
    if (f.axis < 0 || f.axis >= d) throw NetworkError("Dirichlet face axis out of range");

  const Index m = edge_count();
  if (!data_.weights.empty() && static_cast<Index>(data_.weights.size()) != m)
    throw NetworkError("edge weight count does not match edge count");
  if (!data_.fiber_ids.empty() && static_cast<Index>(data_.fiber_ids.size()) != m)
    throw NetworkError("fiber id count does not match edge count");

  std::unordered_set<std::uint64_t> seen;
  seen.reserve(static_cast<std::size_t>(m) * 2);
  lengths_.resize(m);
  std::vector<Index> degree(n + 1, 0);
  for (Index e = 0; e < m; ++e) {
    const auto [a, b] = data_.edges[e];
    if (a < 0 || b < 0 || a >= n || b >= n)
      throw NetworkError("edge " + std::to_string(e) + " references a missing node");
    if (a == b) throw NetworkError("edge " + std::to_string(e) + " is a self-loop");
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    if (!seen.insert((lo << 32) | hi).second)
      throw NetworkError("duplicate edge " + std::to_string(lo) + "-" + std::to_string(hi));
    const double len = distance(data_.positions[a], data_.positions[b]);
    if (!(len > 0.0)) throw NetworkError("edge " + std::to_string(e) + " has zero length");
    lengths_[e] = len;
    ++degree[a];
    ++degree[b];
    if (!data_.weights.empty() && !(data_.weights[e] > 0.0))
      throw NetworkError("edge weights must be positive");
  }

  offsets_.assign(n + 1, 0);
  for (Index x = 0; x < n; ++x) offsets_[x + 1] = offsets_[x] + degree[x];
  adjacency_.resize(offsets_[n]);
  std::vector<Index> fill(offsets_.begin(), offsets_.end() - 1);
  for (Index e = 0; e < m; ++e) {
    const auto [a, b] = data_.edges[e];
    adjacency_[fill[a]++] = {b, e};
    adjacency_[fill[b]++] = {a, e};
  }

  mass_ = Vector::Zero(n);
  for (Index e = 0; e < m; ++e) {
    const auto [a, b] = data_.edges[e];
    mass_[a] += 0.5 * lengths_[e];
    mass_[b] += 0.5 * lengths_[e];
    total_length_ += lengths_[e];
    max_length_ = std::max(max_length_, lengths_[e]);
  }

  dirichlet_.assign(n, 0);
  for (Index x = 0; x < n; ++x) {
    for (const auto& f : data_.dirichlet_faces) {
      if (on_face(data_.positions[x], f, data_.domain)) {
        dirichlet_[x] = 1;
        ++dirichlet_count_;
        break;
      }
    }
  }

  connected_ = check_connected(n, data_.edges).connected;
  if (policy == Connectivity::require && !connected_)
    throw NetworkError("network is not connected");
}

NodeField::NodeField(int components, Index nodes)
    : components_(components), nodes_(nodes), values_(Vector::Zero(static_cast<Eigen::Index>(components) * nodes)) {
  if (components < 1) throw ShapeError("a node field needs at least one component");
}

NodeField::NodeField(int components, Vector values) : components_(components), values_(std::move(values)) {
  if (components < 1) throw ShapeError("a node field needs at least one component");
  if (values_.size() % components != 0) throw ShapeError("value count is not a multiple of the component count");
  nodes_ = static_cast<Index>(values_.size() / components);
}

NodeField NodeField::constant(int components, Index nodes, double value) {
  NodeField f(components, nodes);
  f.values_.setConstant(value);
  return f;
}

namespace {

void require_shape(const SpatialNetwork& net, const NodeField& v) {
  if (v.node_count() != net.node_count())
    throw ShapeError("field has " + std::to_string(v.node_count()) + " nodes, network has " +
                     std::to_string(net.node_count()));
}

template <class Fn>
void for_each_node(const SpatialNetwork& net, const std::optional<Subdomain>& omega, Fn&& fn) {
  if (!omega) {
    for (Index x = 0; x < net.node_count(); ++x) fn(x);
    return;
  }
  for (Index x : nodes_in(net, *omega)) fn(x);
}

} // namespace

std::vector<Index> nodes_in(const SpatialNetwork& net, const Subdomain& omega) {
  if (const auto* set = std::get_if<NodeSet>(&omega)) {
    std::vector<Index> nodes = set->nodes;
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    for (Index x : nodes)
      if (x < 0 || x >= net.node_count()) throw ShapeError("node set references a missing node");
    return nodes;
  }
  const auto& box = std::get<Box>(omega);
  std::vector<Index> nodes;
  for (Index x = 0; x < net.node_count(); ++x)
    if (box.contains(net.position(x), net.domain())) nodes.push_back(x);
  return nodes;
}

bool satisfies_dirichlet(const SpatialNetwork& net, const NodeField& v) {
  require_shape(net, v);
  for (Index x = 0; x < net.node_count(); ++x) {
    if (!net.is_dirichlet(x)) continue;
    for (int c = 0; c < v.components(); ++c)
      if (v(c, x) != 0.0) return false;
  }
  return true;
}

double mass_quadratic(const SpatialNetwork& net, const NodeField& v, const std::optional<Subdomain>& omega) {
  require_shape(net, v);
  double sum = 0.0;
  for_each_node(net, omega, [&](Index x) {
    for (int c = 0; c < v.components(); ++c) sum += net.node_mass(x) * v(c, x) * v(c, x);
  });
  return sum;
}

double laplacian_quadratic(const SpatialNetwork& net, const NodeField& v, const std::optional<Subdomain>& omega) {
  require_shape(net, v);
  double sum = 0.0;
  for_each_node(net, omega, [&](Index x) {
    for (const auto& [y, e] : net.neighbors(x)) {
      for (int c = 0; c < v.components(); ++c) {
        const double diff = v(c, x) - v(c, y);
        sum += 0.5 * diff * diff / net.edge_length(e);
      }
    }
  });
  return sum;
}

NodeField apply_mass(const SpatialNetwork& net, const NodeField& v) {
  require_shape(net, v);
  NodeField out(v.components(), net.node_count());
  for (int c = 0; c < v.components(); ++c)
    out.component(c) = net.mass_diagonal().cwiseProduct(v.component(c));
  return out;
}

NodeField apply_laplacian(const SpatialNetwork& net, const NodeField& v) {
  require_shape(net, v);
  NodeField out(v.components(), net.node_count());
  for (int c = 0; c < v.components(); ++c) {
    for (Index x = 0; x < net.node_count(); ++x) {
      double acc = 0.0;
      for (const auto& [y, e] : net.neighbors(x)) acc += (v(c, x) - v(c, y)) / net.edge_length(e);
      out(c, x) = acc;
    }
  }
  return out;
}

SparseMatrix laplacian_matrix(const SpatialNetwork& net, std::span<const double> edge_weights) {
  if (!edge_weights.empty() && static_cast<Index>(edge_weights.size()) != net.edge_count())
    throw ShapeError("edge weight count does not match edge count");
  const Index n = net.node_count();
  std::vector<Eigen::Triplet<double>> lower;
  lower.reserve(static_cast<std::size_t>(n) + net.edge_count());
  Vector diag = Vector::Zero(n);
  for (Index e = 0; e < net.edge_count(); ++e) {
    const auto [a, b] = net.edge(e);
    const double w = (edge_weights.empty() ? 1.0 : edge_weights[e]) / net.edge_length(e);
    diag[a] += w;
    diag[b] += w;
    lower.emplace_back(std::max(a, b), std::min(a, b), -w);
  }
  for (Index x = 0; x < n; ++x) lower.emplace_back(x, x, diag[x]);
  SparseMatrix L(n, n);
  L.setFromTriplets(lower.begin(), lower.end());
  SparseMatrix full = L.selfadjointView<Eigen::Lower>();
  return full;
}

} // namespace spnet
