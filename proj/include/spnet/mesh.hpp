#pragma once

#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "spnet/network.hpp"

namespace spnet {

/// Uniform hypercube mesh T_H of the domain with Q1 (multilinear) nodal basis.
///
/// Mesh nodes are numbered "free first": indices [0, m0) are the nodes whose
/// basis functions vanish on the Dirichlet faces, [m0, m) the rest. Within
/// each group nodes follow lexicographic lattice order (axis 0 fastest).
class BoxMesh {
public:
  BoxMesh(const Domain& domain, double H, std::span<const Face> dirichlet_faces = {});

  int dimension() const { return grid_.domain.dimension; }
  double H() const { return H_; }
  const Domain& domain() const { return grid_.domain; }
  const RegularGrid& grid() const { return grid_; }
  std::array<int, 3> elements_per_axis() const { return grid_.counts; }

  Index element_count() const { return grid_.cell_count(); }
  Index node_count() const { return static_cast<Index>(lattice_of_.size()); }
  Index free_node_count() const { return free_count_; }

  /// Lattice coordinates (i_1, ..., i_d) of mesh node k.
  std::array<int, 3> node_lattice(Index k) const;
  Point node_position(Index k) const;
  Index node_from_lattice(const std::array<int, 3>& lattice) const;
  bool node_on_dirichlet(Index k) const { return k >= free_count_; }

  Index element_of_point(const Point& p) const { return grid_.cell_of(p); }
  Box element_box(Index e) const { return grid_.cell_box(e); }
  std::array<int, 3> element_coords(Index e) const { return grid_.coords_of(e); }

  /// T_k: the unique element containing mesh node k (half-open convention).
  Index element_of_node(Index k) const;

  /// Mesh nodes at the 2^d corners of element e, lexicographic corner order.
  std::vector<Index> element_corners(Index e) const;

  /// Nonzero Q1 basis values at p, one (mesh node, value) pair per corner of
  /// the containing element with a nonzero value.
  std::vector<std::pair<Index, double>> eval_basis(const Point& p) const;

  /// Elements of U_layers(element e).
  std::vector<Index> patch_of_element(Index e, int layers = 1) const;
  /// Elements of U_layers(y_k).
  std::vector<Index> patch_of_node(Index k, int layers = 1) const;
  /// Elements of U_layers(box) for a box given in domain coordinates.
  std::vector<Index> patch_of_box(const Box& box, int layers = 1) const;

private:
  std::vector<Index> grow(std::array<int, 3> lo, std::array<int, 3> hi, int extra_layers) const;
  Index natural_node(const std::array<int, 3>& lattice) const;

  RegularGrid grid_;
  double H_ = 0.0;
  std::vector<Face> faces_;
  Index free_count_ = 0;
  std::vector<Index> lattice_of_;  // free-first index -> natural lattice id
  std::vector<Index> index_of_;    // natural lattice id -> free-first index
};

/// Mesh for a network's domain and Dirichlet faces. Throws ConfigError when
/// some side length is not an integer multiple of H.
BoxMesh build_mesh(const SpatialNetwork& net, double H);

/// The Q1 basis restricted to the network nodes.
struct BasisRestriction {
  SparseMatrix phi;                                // N x m, entry (x, k) = phi_k(x)
  std::vector<Index> node_element;                 // containing element of each network node
  std::vector<std::vector<Index>> element_nodes;   // network nodes per element (sorted)
  std::vector<double> element_mass;                // |1|^2_{M,T} per element
  std::vector<double> psi;                         // psi_k = |1|^{-2}_{M,T_k}; +inf if T_k is empty

  Index empty_element_count() const;
};

BasisRestriction restrict_basis(const BoxMesh& mesh, const SpatialNetwork& net);

enum class BasisRange { free_only, all };

struct Interpolant {
  Vector coefficients;  // components x (m0 or m), component-major
  NodeField values;     // I v at the network nodes
};

/// Clement-type interpolant I v = sum_k (M_{T_k} psi_k, v) phi_k, applied
/// componentwise. Throws AssumptionViolation when some used T_k has no
/// network nodes.
Interpolant interpolate(const BoxMesh& mesh, const BasisRestriction& basis, const SpatialNetwork& net,
                        const NodeField& v, BasisRange range);

/// Plain-text mesh summary: H, per-axis counts, m, m0 and per-element node counts.
void write_mesh_summary(std::ostream& out, const BoxMesh& mesh, const BasisRestriction& basis);

} // namespace spnet
