#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <vector>

#include "spnet/models.hpp"

namespace spnet::testing {

using Eigen::Vector3d;

inline Vector3d at(const SpatialNetwork& net, Index x) {
  const Point& p = net.position(x);
  return {p[0], p[1], p[2]};
}

inline Vector3d displacement(const NodeField& v, Index x) {
  Vector3d u = Vector3d::Zero();
  for (int c = 0; c < v.components(); ++c) u[c] = v(c, x);
  return u;
}

inline double heat_energy(const SpatialNetwork& net, const std::vector<double>& gamma, const NodeField& v) {
  double sum = 0.0;
  for (Index e = 0; e < net.edge_count(); ++e) {
    const auto& edge = net.edge(e);
    const double diff = v(0, edge.a) - v(0, edge.b);
    const double len = (at(net, edge.a) - at(net, edge.b)).norm();
    sum += (gamma.empty() ? 1.0 : gamma[e]) * diff * diff / len;
  }
  return sum;
}

inline double tensile_energy(const SpatialNetwork& net, const StructuralParams& p, const NodeField& v) {
  double sum = 0.0;
  for (const auto& edge : net.edges()) {
    const Vector3d d = at(net, edge.b) - at(net, edge.a);
    const double len = d.norm();
    const double stretch = (displacement(v, edge.b) - displacement(v, edge.a)).dot(d / len);
    sum += p.youngs_modulus * std::numbers::pi * p.wire_radius * p.wire_radius / len * stretch * stretch;
  }
  return sum;
}

// Normal of the plane spanned by two edge directions; for parallel edges the
// first coordinate axis that is far enough from the edge.
inline Vector3d oracle_normal(const Vector3d& dy, const Vector3d& dz) {
  const Vector3d n = dy.cross(dz);
  if (n.norm() > 1e-8) return n.normalized();
  for (int k = 0; k < 3; ++k) {
    const Vector3d c = dy.cross(Vector3d::Unit(k));
    if (c.norm() >= 1.0 / std::sqrt(3.0)) return c.normalized();
  }
  return Vector3d::Zero();
}

inline double bending_energy(const SpatialNetwork& net, const StructuralParams& p, const NodeField& v,
                      bool same_fiber = false) {
  const double EI = p.youngs_modulus * std::numbers::pi * std::pow(p.wire_radius, 4) / 4.0;
  double sum = 0.0;
  for (Index x = 0; x < net.node_count(); ++x) {
    const auto nbrs = net.neighbors(x);
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      for (std::size_t j = i + 1; j < nbrs.size(); ++j) {
        if (same_fiber && net.fiber_id(nbrs[i].edge) != net.fiber_id(nbrs[j].edge)) continue;
        const Index y = nbrs[i].node, z = nbrs[j].node;
        const double ly = (at(net, x) - at(net, y)).norm();
        const double lz = (at(net, x) - at(net, z)).norm();
        const Vector3d dy = (at(net, x) - at(net, y)) / ly;
        const Vector3d dz = (at(net, x) - at(net, z)) / lz;
        const Vector3d normal = oracle_normal(dy, dz);
        const Vector3d wy = displacement(v, y) - displacement(v, x);
        const Vector3d wz = displacement(v, z) - displacement(v, x);
        const double out_of_plane = wy.dot(normal) / ly + wz.dot(normal) / lz;
        const double in_plane = wy.dot(dy.cross(normal)) / ly + wz.dot(dz.cross(normal)) / lz;
        const double gamma = EI / ((ly + lz) * (ly + lz));
        sum += gamma * 0.5 * (ly + lz) * (out_of_plane * out_of_plane + in_plane * in_plane);
      }
    }
  }
  return sum;
}

} // namespace spnet::testing
