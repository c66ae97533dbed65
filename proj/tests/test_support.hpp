#pragma once

#include <Eigen/Dense>

#include <random>
#include <set>
#include <utility>
#include <vector>

#include "spnet/network.hpp"

namespace spnet::testing {

inline SpatialNetwork make_network(std::vector<Point> positions, std::vector<Edge> edges, std::vector<Face> faces = {},
                                   Domain domain = Domain{},
                                   SpatialNetwork::Connectivity policy = SpatialNetwork::Connectivity::require) {
  NetworkData data;
  data.domain = domain;
  data.positions = std::move(positions);
  data.edges = std::move(edges);
  data.dirichlet_faces = std::move(faces);
  return SpatialNetwork(std::move(data), policy);
}

/// Random connected network on the unit square (or cube): a random spanning
/// tree plus extra chords. Nodes 0 and 1 sit on the faces x = 0 and x = 1 so
/// a Dirichlet condition on those faces always fixes something.
inline SpatialNetwork random_network(Index nodes, Index extra_edges, unsigned seed, int dimension = 2,
                                     std::vector<Face> faces = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  std::vector<Point> pos(nodes, Point{0.0, 0.0, 0.0});
  for (auto& p : pos)
    for (int i = 0; i < dimension; ++i) p[i] = unit(rng);
  pos[0][0] = 0.0;
  if (nodes > 1) pos[1][0] = 1.0;
  std::set<std::pair<Index, Index>> seen;
  std::vector<Edge> edges;
  auto add = [&](Index a, Index b) {
    if (a == b) return;
    const auto key = std::minmax(a, b);
    if (seen.insert(key).second) edges.push_back({a, b});
  };
  for (Index x = 1; x < nodes; ++x) add(x, std::uniform_int_distribution<Index>(0, x - 1)(rng));
  std::uniform_int_distribution<Index> any(0, nodes - 1);
  for (Index k = 0; k < extra_edges; ++k) add(any(rng), any(rng));
  Domain domain;
  domain.dimension = dimension;
  domain.lengths = {1.0, 1.0, dimension == 3 ? 1.0 : 0.0};
  return make_network(std::move(pos), std::move(edges), std::move(faces), domain);
}

inline Vector random_vector(Eigen::Index size, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector v(size);
  for (auto& x : v) x = normal(rng);
  return v;
}

inline NodeField random_field(const SpatialNetwork& net, int components, unsigned seed) {
  return NodeField(components, random_vector(static_cast<Eigen::Index>(components) * net.node_count(), seed));
}

} // namespace spnet::testing
