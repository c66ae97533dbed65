#include "spnet/models.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "spnet/error.hpp"
#include "spnet/sparse_ops.hpp"

namespace spnet {

HeatParams HeatParams::from_network(const SpatialNetwork& net) {
  HeatParams p;
  if (net.has_weights()) p.conductivity.assign(net.data().weights.begin(), net.data().weights.end());
  return p;
}

double StructuralParams::area() const { return std::numbers::pi * wire_radius * wire_radius; }

double StructuralParams::second_moment() const {
  const double r2 = wire_radius * wire_radius;
  return 0.25 * std::numbers::pi * r2 * r2;
}

double StructuralParams::tensile_stiffness() const { return area() * youngs_modulus; }

double StructuralParams::bending_coefficient(double length_y, double length_z) const {
  const double s = length_y + length_z;
  return youngs_modulus * second_moment() / (s * s);
}

void StructuralParams::validate() const {
  if (!(wire_radius > 0.0)) throw ConfigError("wire radius must be positive");
  if (!(youngs_modulus > 0.0)) throw ConfigError("Young's modulus must be positive");
}

BendingFrame bending_frame(const Eigen::Vector3d& dir_y, const Eigen::Vector3d& dir_z) {
  BendingFrame f;
  const Eigen::Vector3d cross = dir_y.cross(dir_z);
  const double norm = cross.norm();
  if (norm > 1e-8) {
    f.normal = cross / norm;
  } else {
    f.collinear = true;
    const double threshold = 1.0 / std::sqrt(3.0);
    for (int k = 0; k < 3; ++k) {
      const Eigen::Vector3d candidate = dir_y.cross(Eigen::Vector3d::Unit(k));
      const double n = candidate.norm();
      if (n >= threshold) {
        f.normal = candidate / n;
        break;
      }
    }
  }
  f.in_plane_y = dir_y.cross(f.normal);
  f.in_plane_z = dir_z.cross(f.normal);
  return f;
}

Vector AssembledOperator::restrict_free(const NodeField& v) const {
  if (v.components() != components || v.node_count() != node_count)
    throw ShapeError("field shape does not match the operator");
  Vector out(free_count());
  for (Index i = 0; i < free_count(); ++i) out[i] = v.values()[free_dofs[i]];
  return out;
}

Vector AssembledOperator::restrict_fixed(const NodeField& v) const {
  if (v.components() != components || v.node_count() != node_count)
    throw ShapeError("field shape does not match the operator");
  Vector out(fixed_count());
  for (Index i = 0; i < fixed_count(); ++i) out[i] = v.values()[fixed_dofs[i]];
  return out;
}

NodeField AssembledOperator::lift(const Vector& free_values, const NodeField* boundary) const {
  if (free_values.size() != free_count()) throw ShapeError("free vector size does not match the operator");
  NodeField out(components, node_count);
  if (boundary) {
    if (boundary->components() != components || boundary->node_count() != node_count)
      throw ShapeError("boundary field shape does not match the operator");
    for (Index d : fixed_dofs) out.values()[d] = boundary->values()[d];
  }
  for (Index i = 0; i < free_count(); ++i) out.values()[free_dofs[i]] = free_values[i];
  return out;
}

double AssembledOperator::energy(const Vector& free_values) const {
  return free_values.dot(matrix * free_values);
}

AssembledOperator eliminate_dirichlet(const SparseMatrix& full, const SpatialNetwork& net, int components) {
  const Index n = net.node_count();
  const Index dofs = static_cast<Index>(components) * n;
  if (full.rows() != dofs || full.cols() != dofs) throw ShapeError("operator size does not match the network");

  AssembledOperator op;
  op.components = components;
  op.node_count = n;
  op.free_index.assign(dofs, -1);
  for (int c = 0; c < components; ++c) {
    for (Index x = 0; x < n; ++x) {
      const Index dof = c * n + x;
      if (net.is_dirichlet(x)) {
        op.fixed_dofs.push_back(dof);
      } else {
        op.free_index[dof] = static_cast<Index>(op.free_dofs.size());
        op.free_dofs.push_back(dof);
      }
    }
  }
  op.matrix = principal_submatrix(full, op.free_dofs);
  op.coupling = submatrix(full, op.free_dofs, op.fixed_dofs);
  return op;
}

SparseMatrix heat_matrix(const SpatialNetwork& net, const HeatParams& params) {
  if (!params.conductivity.empty()) {
    if (static_cast<Index>(params.conductivity.size()) != net.edge_count())
      throw ShapeError("conductivity count does not match edge count");
    for (double g : params.conductivity)
      if (!(g > 0.0)) throw ConfigError("conductivities must be positive");
  }
  return laplacian_matrix(net, params.conductivity);
}

AssembledOperator assemble_heat(const SpatialNetwork& net, const HeatParams& params) {
  if (net.dirichlet_count() == 0)
    throw SingularError("heat operator needs at least one Dirichlet node");
  auto op = eliminate_dirichlet(heat_matrix(net, params), net, 1);
  if (params.conductivity.empty()) {
    op.alpha = 1.0;
    op.beta = 1.0;
  } else {
    const auto [lo, hi] = std::minmax_element(params.conductivity.begin(), params.conductivity.end());
    op.alpha = *lo;
    op.beta = *hi;
  }
  return op;
}

namespace {

Eigen::Vector3d vec(const Point& p) { return {p[0], p[1], p[2]}; }

void check_components(const SpatialNetwork& net, int components) {
  if (components != 2 && components != 3) throw ConfigError("structural model needs 2 or 3 components");
  if (components == 2 && net.dimension() != 2)
    throw ConfigError("two-component structural model requires a planar network");
}

} // namespace

SparseMatrix tensile_matrix(const SpatialNetwork& net, const StructuralParams& params, int components) {
  params.validate();
  check_components(net, components);
  const Index n = net.node_count();
  const double stiffness = params.tensile_stiffness();
  LowerAssembler asm_(components * n);
  for (Index e = 0; e < net.edge_count(); ++e) {
    const auto [a, b] = net.edge(e);
    const double len = net.edge_length(e);
    const Eigen::Vector3d dir = (vec(net.position(a)) - vec(net.position(b))) / len;
    const double w = stiffness / len;
    for (int i = 0; i < components; ++i) {
      for (int j = 0; j < components; ++j) {
        const double k = w * dir[i] * dir[j];
        if (k == 0.0) continue;
        // Each (i, j) pair is visited twice with rows and columns swapped,
        // so only the copy that lands on or below the diagonal is kept.
        if (i * n + a >= j * n + a) asm_.add(i * n + a, j * n + a, k);
        if (i * n + b >= j * n + b) asm_.add(i * n + b, j * n + b, k);
        if (i * n + a >= j * n + b) asm_.add(i * n + a, j * n + b, -k);
        if (i * n + b >= j * n + a) asm_.add(i * n + b, j * n + a, -k);
      }
    }
  }
  return asm_.finish();
}

SparseMatrix bending_matrix(const SpatialNetwork& net, const StructuralParams& params, int components) {
  params.validate();
  check_components(net, components);
  if (params.pairs == PairPolicy::same_fiber && !net.has_fiber_ids())
    throw ConfigError("same-fiber bending pairs need fiber ids on the network");

  const Index n = net.node_count();
  LowerAssembler asm_(components * n);
  Eigen::MatrixXd local;
  Eigen::VectorXd coeff;
  std::vector<Index> nodes;
  for (Index x = 0; x < n; ++x) {
    const auto nbrs = net.neighbors(x);
    const int deg = static_cast<int>(nbrs.size());
    if (deg < 2) continue;
    // Local dof layout: node slot s (0 = x, 1 + i = i-th neighbour), component c -> 3 s + c.
    const int size = 3 * (deg + 1);
    local.setZero(size, size);
    coeff.resize(size);
    nodes.assign(1, x);
    for (const auto& a : nbrs) nodes.push_back(a.node);
    const Eigen::Vector3d px = vec(net.position(x));
    bool any = false;
    for (int i = 0; i < deg; ++i) {
      for (int j = i + 1; j < deg; ++j) {
        if (params.pairs == PairPolicy::same_fiber && net.fiber_id(nbrs[i].edge) != net.fiber_id(nbrs[j].edge))
          continue;
        const double ly = net.edge_length(nbrs[i].edge);
        const double lz = net.edge_length(nbrs[j].edge);
        const Eigen::Vector3d dy = (px - vec(net.position(nbrs[i].node))) / ly;
        const Eigen::Vector3d dz = (px - vec(net.position(nbrs[j].node))) / lz;
        const BendingFrame frame = bending_frame(dy, dz);
        const double weight = params.bending_coefficient(ly, lz) * 0.5 * (ly + lz);
        for (int mode = 0; mode < 2; ++mode) {
          const Eigen::Vector3d ey = (mode == 0 ? frame.normal : frame.in_plane_y) / ly;
          const Eigen::Vector3d ez = (mode == 0 ? frame.normal : frame.in_plane_z) / lz;
          coeff.setZero();
          coeff.segment<3>(0) = -(ey + ez);
          coeff.segment<3>(3 * (1 + i)) = ey;
          coeff.segment<3>(3 * (1 + j)) = ez;
          local.selfadjointView<Eigen::Lower>().rankUpdate(coeff, weight);
          any = true;
        }
      }
    }
    if (!any) continue;
    for (int s = 0; s <= deg; ++s) {
      for (int c = 0; c < components; ++c) {
        const Index row = c * n + nodes[s];
        for (int t = 0; t <= deg; ++t) {
          for (int k = 0; k < components; ++k) {
            const Index col = k * n + nodes[t];
            if (col > row) continue;
            const int li = 3 * s + c, lj = 3 * t + k;
            const double v = li >= lj ? local(li, lj) : local(lj, li);
            if (v != 0.0) asm_.add(row, col, v);
          }
        }
      }
    }
  }
  return asm_.finish();
}

AssembledOperator assemble_structural(const SpatialNetwork& net, const StructuralParams& params, int components) {
  SparseMatrix full = tensile_matrix(net, params, components);
  {
    SparseMatrix bending = bending_matrix(net, params, components);
    full += bending;
  }
  return eliminate_dirichlet(full, net, components);
}

Vector build_rhs(const AssembledOperator& op, const NodeField* source, const NodeField& boundary) {
  Vector rhs = Vector::Zero(op.free_count());
  if (source) rhs = op.restrict_free(*source);
  const Vector g_free = op.restrict_free(boundary);
  const Vector g_fixed = op.restrict_fixed(boundary);
  if (g_free.size() && g_free.lpNorm<Eigen::Infinity>() > 0.0) rhs -= op.matrix * g_free;
  if (g_fixed.size() && g_fixed.lpNorm<Eigen::Infinity>() > 0.0) rhs -= op.coupling * g_fixed;
  return rhs;
}

} // namespace spnet
