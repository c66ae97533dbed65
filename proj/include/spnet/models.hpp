#pragma once

#include <Eigen/Core>

#include <optional>
#include <vector>

#include "spnet/network.hpp"

namespace spnet {

/// Per-edge conductivities of the heat model. An empty list means 1 on every edge.
struct HeatParams {
  std::vector<double> conductivity;

  static HeatParams uniform() { return {}; }
  /// Conductivities taken from the network's edge weights (1 when absent).
  static HeatParams from_network(const SpatialNetwork& net);
};

enum class PairPolicy { all_neighbors, same_fiber };

/// Steel-wire material constants of the fiber structural model.
struct StructuralParams {
  double wire_radius = 2.5e-3;
  double youngs_modulus = 210e9;
  PairPolicy pairs = PairPolicy::all_neighbors;

  double area() const;
  double second_moment() const;
  /// Edge stiffness A E.
  double tensile_stiffness() const;
  /// E I (|x-y| + |x-z|)^-2 for the two edge lengths meeting at x.
  double bending_coefficient(double length_y, double length_z) const;
  void validate() const;
};

/// Orthonormal directions used by the bending term at node x for the pair {y, z}.
struct BendingFrame {
  Eigen::Vector3d normal;     // first mode, shared by both edges
  Eigen::Vector3d in_plane_y; // second mode for edge x-y
  Eigen::Vector3d in_plane_z; // second mode for edge x-z
  bool collinear = false;
};

/// Frame from the unit edge directions (x - y)/|x - y| and (x - z)/|x - z|.
/// When the two directions are parallel the normal is built from the first
/// standard basis vector e_k with |dir_y x e_k| >= 1/sqrt(3).
BendingFrame bending_frame(const Eigen::Vector3d& dir_y, const Eigen::Vector3d& dir_z);

/// Operator K after eliminating the Dirichlet degrees of freedom.
///
/// Global dofs are component-major (dof = c * N + x). A node is fixed in every
/// component when it lies on a Dirichlet face.
struct AssembledOperator {
  int components = 1;
  Index node_count = 0;
  SparseMatrix matrix;            // free x free
  SparseMatrix coupling;          // free x fixed
  std::vector<Index> free_dofs;   // free index -> global dof
  std::vector<Index> fixed_dofs;  // fixed index -> global dof
  std::vector<Index> free_index;  // global dof -> free index, -1 when fixed
  std::optional<double> alpha;
  std::optional<double> beta;

  Index free_count() const { return static_cast<Index>(free_dofs.size()); }
  Index fixed_count() const { return static_cast<Index>(fixed_dofs.size()); }

  Vector restrict_free(const NodeField& v) const;
  Vector restrict_fixed(const NodeField& v) const;
  /// Node field with the free values and, on fixed dofs, the boundary values (zero by default).
  NodeField lift(const Vector& free_values, const NodeField* boundary = nullptr) const;
  /// (K u, u) on free dofs.
  double energy(const Vector& free_values) const;
};

/// Splits a full symmetric operator into its free block and free/fixed coupling.
AssembledOperator eliminate_dirichlet(const SparseMatrix& full, const SpatialNetwork& net, int components);

/// Weighted Laplacian sum_edges gamma (v(x) - v(y))^2 / |x - y| on all nodes.
SparseMatrix heat_matrix(const SpatialNetwork& net, const HeatParams& params);
/// Heat operator on the free nodes; throws SingularError without Dirichlet nodes.
AssembledOperator assemble_heat(const SpatialNetwork& net, const HeatParams& params);

/// Full-space tensile part for n components (n = 2 keeps the in-plane components).
SparseMatrix tensile_matrix(const SpatialNetwork& net, const StructuralParams& params, int components);
/// Full-space bending part for n components.
SparseMatrix bending_matrix(const SpatialNetwork& net, const StructuralParams& params, int components);
/// Tensile plus bending operator on the free dofs.
AssembledOperator assemble_structural(const SpatialNetwork& net, const StructuralParams& params, int components);

/// Right-hand side on the free dofs: f - K g restricted to free dofs. A null
/// source means f = 0; g must vanish or carry the boundary values.
Vector build_rhs(const AssembledOperator& op, const NodeField* source, const NodeField& boundary);

} // namespace spnet
