#include "spnet/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "spnet/error.hpp"

namespace spnet {

BoxMesh::BoxMesh(const Domain& domain, double H, std::span<const Face> dirichlet_faces)
    : H_(H), faces_(dirichlet_faces.begin(), dirichlet_faces.end()) {
  if (!(H > 0.0)) throw ConfigError("mesh size H must be positive");
  grid_.domain = domain;
  grid_.counts = {1, 1, 1};
  for (int i = 0; i < domain.dimension; ++i) {
    const int n = integer_divisions(domain.lengths[i], H);
    if (n < 0)
      throw ConfigError("side length " + std::to_string(domain.lengths[i]) + " is not an integer multiple of H = " +
                        std::to_string(H));
    grid_.counts[i] = n;
  }

  Index total = 1;
  for (int i = 0; i < dimension(); ++i) total *= grid_.counts[i] + 1;
  std::vector<Index> free_nodes, fixed_nodes;
  for (Index id = 0; id < total; ++id) {
    std::array<int, 3> lat{0, 0, 0};
    Index rest = id;
    for (int i = 0; i < dimension(); ++i) {
      lat[i] = rest % (grid_.counts[i] + 1);
      rest /= grid_.counts[i] + 1;
    }
    bool fixed = false;
    for (const auto& f : faces_) {
      const int target = f.side == Side::low ? 0 : grid_.counts[f.axis];
      if (lat[f.axis] == target) fixed = true;
    }
    (fixed ? fixed_nodes : free_nodes).push_back(id);
  }
  free_count_ = static_cast<Index>(free_nodes.size());
  lattice_of_ = std::move(free_nodes);
  lattice_of_.insert(lattice_of_.end(), fixed_nodes.begin(), fixed_nodes.end());
  index_of_.assign(lattice_of_.size(), 0);
  for (Index k = 0; k < static_cast<Index>(lattice_of_.size()); ++k) index_of_[lattice_of_[k]] = k;
}

Index BoxMesh::natural_node(const std::array<int, 3>& lattice) const {
  Index id = 0;
  for (int i = dimension() - 1; i >= 0; --i) id = id * (grid_.counts[i] + 1) + lattice[i];
  return id;
}

std::array<int, 3> BoxMesh::node_lattice(Index k) const {
  std::array<int, 3> lat{0, 0, 0};
  Index rest = lattice_of_[k];
  for (int i = 0; i < dimension(); ++i) {
    lat[i] = rest % (grid_.counts[i] + 1);
    rest /= grid_.counts[i] + 1;
  }
  return lat;
}

Point BoxMesh::node_position(Index k) const {
  const auto lat = node_lattice(k);
  Point p{0.0, 0.0, 0.0};
  for (int i = 0; i < dimension(); ++i)
    p[i] = lat[i] == grid_.counts[i] ? grid_.domain.lengths[i] : lat[i] * grid_.cell_width(i);
  return p;
}

Index BoxMesh::node_from_lattice(const std::array<int, 3>& lattice) const {
  return index_of_[natural_node(lattice)];
}

Index BoxMesh::element_of_node(Index k) const {
  auto lat = node_lattice(k);
  for (int i = 0; i < dimension(); ++i) lat[i] = std::min(lat[i], grid_.counts[i] - 1);
  return grid_.cell_index(lat);
}

std::vector<Index> BoxMesh::element_corners(Index e) const {
  const auto c = grid_.coords_of(e);
  const int d = dimension();
  std::vector<Index> corners;
  corners.reserve(std::size_t{1} << d);
  for (int bits = 0; bits < (1 << d); ++bits) {
    std::array<int, 3> lat = c;
    for (int i = 0; i < d; ++i) lat[i] += (bits >> i) & 1;
    corners.push_back(node_from_lattice(lat));
  }
  return corners;
}

std::vector<std::pair<Index, double>> BoxMesh::eval_basis(const Point& p) const {
  const int d = dimension();
  const Index e = element_of_point(p);
  const auto c = grid_.coords_of(e);
  const Box box = grid_.cell_box(e);
  std::array<double, 3> xi{0.0, 0.0, 0.0};
  for (int i = 0; i < d; ++i) xi[i] = std::clamp((p[i] - box.lo[i]) / (box.hi[i] - box.lo[i]), 0.0, 1.0);

  std::vector<std::pair<Index, double>> out;
  out.reserve(std::size_t{1} << d);
  for (int bits = 0; bits < (1 << d); ++bits) {
    double value = 1.0;
    std::array<int, 3> lat = c;
    for (int i = 0; i < d; ++i) {
      const int b = (bits >> i) & 1;
      value *= b ? xi[i] : 1.0 - xi[i];
      lat[i] += b;
    }
    if (value != 0.0) out.emplace_back(node_from_lattice(lat), value);
  }
  return out;
}

std::vector<Index> BoxMesh::grow(std::array<int, 3> lo, std::array<int, 3> hi, int extra_layers) const {
  const int d = dimension();
  for (int i = 0; i < d; ++i) {
    lo[i] = std::max(0, lo[i] - extra_layers);
    hi[i] = std::min(grid_.counts[i] - 1, hi[i] + extra_layers);
    if (lo[i] > hi[i]) return {};
  }
  for (int i = d; i < 3; ++i) lo[i] = hi[i] = 0;
  std::vector<Index> out;
  for (int z = lo[2]; z <= hi[2]; ++z)
    for (int y = lo[1]; y <= hi[1]; ++y)
      for (int x = lo[0]; x <= hi[0]; ++x) out.push_back(grid_.cell_index({x, y, z}));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Index> BoxMesh::patch_of_element(Index e, int layers) const {
  if (layers < 1) throw ConfigError("patch layers must be positive");
  const auto c = grid_.coords_of(e);
  return grow(c, c, layers);
}

std::vector<Index> BoxMesh::patch_of_node(Index k, int layers) const {
  if (layers < 1) throw ConfigError("patch layers must be positive");
  const auto lat = node_lattice(k);
  std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
  for (int i = 0; i < dimension(); ++i) {
    lo[i] = lat[i] - 1;
    hi[i] = lat[i];
  }
  return grow(lo, hi, layers - 1);
}

std::vector<Index> BoxMesh::patch_of_box(const Box& box, int layers) const {
  if (layers < 1) throw ConfigError("patch layers must be positive");
  std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
  for (int i = 0; i < dimension(); ++i) {
    const double w = grid_.cell_width(i);
    lo[i] = static_cast<int>(std::ceil(box.lo[i] / w)) - 1;
    hi[i] = static_cast<int>(std::floor(box.hi[i] / w));
  }
  return grow(lo, hi, layers - 1);
}

BoxMesh build_mesh(const SpatialNetwork& net, double H) {
  return BoxMesh(net.domain(), H, net.dirichlet_faces());
}

Index BasisRestriction::empty_element_count() const {
  return static_cast<Index>(std::count_if(element_nodes.begin(), element_nodes.end(),
                                          [](const auto& nodes) { return nodes.empty(); }));
}

BasisRestriction restrict_basis(const BoxMesh& mesh, const SpatialNetwork& net) {
  if (mesh.dimension() != net.dimension()) throw ShapeError("mesh and network dimensions differ");
  BasisRestriction out;
  const Index n = net.node_count();
  out.node_element.resize(n);
  out.element_nodes.assign(mesh.element_count(), {});
  out.element_mass.assign(mesh.element_count(), 0.0);

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(n) << mesh.dimension());
  for (Index x = 0; x < n; ++x) {
    const Index e = mesh.element_of_point(net.position(x));
    out.node_element[x] = e;
    out.element_nodes[e].push_back(x);
    out.element_mass[e] += net.node_mass(x);
    for (const auto& [k, value] : mesh.eval_basis(net.position(x))) triplets.emplace_back(x, k, value);
  }
  out.phi.resize(n, mesh.node_count());
  out.phi.setFromTriplets(triplets.begin(), triplets.end());
  out.phi.makeCompressed();

  out.psi.resize(mesh.node_count());
  for (Index k = 0; k < mesh.node_count(); ++k) {
    const double mass = out.element_mass[mesh.element_of_node(k)];
    out.psi[k] = mass > 0.0 ? 1.0 / mass : std::numeric_limits<double>::infinity();
  }
  return out;
}

Interpolant interpolate(const BoxMesh& mesh, const BasisRestriction& basis, const SpatialNetwork& net,
                        const NodeField& v, BasisRange range) {
  if (v.node_count() != net.node_count()) throw ShapeError("field size does not match the network");
  const Index count = range == BasisRange::free_only ? mesh.free_node_count() : mesh.node_count();
  const int n = v.components();

  Interpolant out;
  out.coefficients = Vector::Zero(static_cast<Eigen::Index>(n) * count);
  for (Index k = 0; k < count; ++k) {
    const Index T = mesh.element_of_node(k);
    if (basis.element_nodes[T].empty())
      throw AssumptionViolation("element " + std::to_string(T) + " (owner of mesh node " + std::to_string(k) +
                                ") contains no network nodes; increase H");
    for (int c = 0; c < n; ++c) {
      double acc = 0.0;
      for (Index x : basis.element_nodes[T]) acc += net.node_mass(x) * v(c, x);
      out.coefficients[static_cast<Eigen::Index>(c) * count + k] = basis.psi[k] * acc;
    }
  }
  out.values = NodeField(n, net.node_count());
  const auto phi = basis.phi.leftCols(count);
  for (int c = 0; c < n; ++c)
    out.values.component(c) = phi * out.coefficients.segment(static_cast<Eigen::Index>(c) * count, count);
  return out;
}

void write_mesh_summary(std::ostream& out, const BoxMesh& mesh, const BasisRestriction& basis) {
  out << "H " << mesh.H() << '\n';
  out << "elements_per_axis";
  for (int i = 0; i < mesh.dimension(); ++i) out << ' ' << mesh.elements_per_axis()[i];
  out << '\n';
  out << "mesh_nodes " << mesh.node_count() << '\n';
  out << "free_mesh_nodes " << mesh.free_node_count() << '\n';
  out << "empty_elements " << basis.empty_element_count() << '\n';
  out << "element_node_counts " << mesh.element_count() << '\n';
  for (Index e = 0; e < mesh.element_count(); ++e) out << e << ' ' << basis.element_nodes[e].size() << '\n';
}

} // namespace spnet
