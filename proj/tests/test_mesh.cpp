#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "spnet/analyzer.hpp"
#include "spnet/error.hpp"
#include "spnet/fibergen.hpp"
#include "spnet/mesh.hpp"
#include "test_support.hpp"

using namespace spnet;
using spnet::testing::make_network;
using spnet::testing::random_field;
using spnet::testing::random_network;

namespace {

Domain unit_square() { return Domain{}; }

std::map<std::pair<double, double>, double> basis_by_position(const BoxMesh& mesh, const Point& p) {
  std::map<std::pair<double, double>, double> out;
  for (const auto& [k, value] : mesh.eval_basis(p)) {
    const Point y = mesh.node_position(k);
    out[{y[0], y[1]}] = value;
  }
  return out;
}

} // namespace

TEST(BoxMesh, CountsElementsAndNodes) {
  const BoxMesh mesh(unit_square(), 0.25);
  EXPECT_EQ(mesh.element_count(), 16);
  EXPECT_EQ(mesh.node_count(), 25);
  EXPECT_EQ(mesh.free_node_count(), 25);

  Domain cube;
  cube.dimension = 3;
  cube.lengths = {1.0, 2.0, 1.0};
  const BoxMesh mesh3(cube, 0.5);
  EXPECT_EQ(mesh3.element_count(), 2 * 4 * 2);
  EXPECT_EQ(mesh3.node_count(), 3 * 5 * 3);
}

TEST(BoxMesh, RejectsNonDividingMeshSize) {
  EXPECT_THROW(BoxMesh(unit_square(), 0.3), ConfigError);
  EXPECT_THROW(BoxMesh(unit_square(), 0.0), ConfigError);
}

TEST(BoxMesh, UpperBoundaryBelongsToLastElement) {
  const BoxMesh mesh(unit_square(), 0.25);
  const auto c = mesh.element_coords(mesh.element_of_point({1.0, 0.5, 0.0}));
  EXPECT_EQ(c[0], 3);
  EXPECT_EQ(c[1], 2);
  const auto inner = mesh.element_coords(mesh.element_of_point({0.5, 0.25, 0.0}));
  EXPECT_EQ(inner[0], 2);
  EXPECT_EQ(inner[1], 1);
}

TEST(BoxMesh, FreeNodesComeFirstAndAvoidDirichletFaces) {
  const BoxMesh mesh(unit_square(), 0.25, all_faces(2));
  EXPECT_EQ(mesh.node_count(), 25);
  EXPECT_EQ(mesh.free_node_count(), 9);
  const Domain dom = unit_square();
  for (Index k = 0; k < mesh.node_count(); ++k) {
    bool on_boundary = false;
    for (const Face& f : all_faces(2)) on_boundary = on_boundary || on_face(mesh.node_position(k), f, dom);
    EXPECT_EQ(on_boundary, mesh.node_on_dirichlet(k)) << "mesh node " << k;
    EXPECT_EQ(mesh.node_from_lattice(mesh.node_lattice(k)), k);
  }

  const BoxMesh one_face(unit_square(), 0.5, std::vector<Face>{Face{0, Side::low}});
  EXPECT_EQ(one_face.free_node_count(), 6);
  for (Index k = 0; k < one_face.free_node_count(); ++k) EXPECT_GT(one_face.node_position(k)[0], 0.0);
}

TEST(BoxMesh, PatchSizes) {
  const BoxMesh mesh(unit_square(), 0.25);
  const Index interior_node = mesh.node_from_lattice({2, 2, 0});
  EXPECT_EQ(mesh.patch_of_node(interior_node).size(), 4u);
  const Index corner_node = mesh.node_from_lattice({0, 0, 0});
  EXPECT_EQ(mesh.patch_of_node(corner_node).size(), 1u);

  const Index interior_element = mesh.element_of_point({0.3, 0.6, 0.0});
  EXPECT_EQ(mesh.patch_of_element(interior_element).size(), 9u);
  const Index corner_element = mesh.element_of_point({0.1, 0.1, 0.0});
  EXPECT_EQ(mesh.patch_of_element(corner_element, 2).size(), 9u);
  EXPECT_EQ(mesh.patch_of_element(corner_element, 1).size(), 4u);
  EXPECT_THROW(mesh.patch_of_element(corner_element, 0), ConfigError);

  // U_2(y) = U(U(y)) for an interior node: 4x4 block.
  EXPECT_EQ(mesh.patch_of_node(interior_node, 2).size(), 16u);

  Box box;
  box.lo = {0.3, 0.3, 0.0};
  box.hi = {0.45, 0.45, 0.0};
  EXPECT_EQ(mesh.patch_of_box(box).size(), 1u);
  box.lo = {0.25, 0.3, 0.0};
  EXPECT_EQ(mesh.patch_of_box(box).size(), 2u);
  EXPECT_EQ(mesh.patch_of_box(box, 2).size(), 9u);
}

TEST(BoxMesh, PatchOfBoxMatchesClosureDefinition) {
  const BoxMesh mesh(unit_square(), 0.125);
  Box box;
  box.lo = {0.25, 0.3, 0.0};
  box.hi = {0.5, 0.41, 0.0};
  const auto patch = mesh.patch_of_box(box);
  std::vector<Index> expected;
  for (Index e = 0; e < mesh.element_count(); ++e) {
    const Box T = mesh.element_box(e);
    bool touches = true;
    for (int i = 0; i < 2; ++i) touches = touches && T.lo[i] <= box.hi[i] && box.lo[i] <= T.hi[i];
    if (touches) expected.push_back(e);
  }
  EXPECT_EQ(patch, expected);
}

TEST(EvalBasis, LagrangeMidpointAndCornerWeights) {
  const BoxMesh mesh(unit_square(), 0.25);
  for (Index k = 0; k < mesh.node_count(); ++k) {
    const auto row = mesh.eval_basis(mesh.node_position(k));
    ASSERT_EQ(row.size(), 1u);
    EXPECT_EQ(row[0].first, k);
    EXPECT_DOUBLE_EQ(row[0].second, 1.0);
  }
  const auto mid = mesh.eval_basis({0.375, 0.625, 0.0});
  ASSERT_EQ(mid.size(), 4u);
  for (const auto& [k, value] : mid) EXPECT_DOUBLE_EQ(value, 0.25);

  const BoxMesh unit(unit_square(), 1.0);
  auto w = basis_by_position(unit, {0.1, 0.2, 0.0});
  EXPECT_NEAR((w[{0.0, 0.0}]), 0.72, 1e-15);
  EXPECT_NEAR((w[{1.0, 0.0}]), 0.08, 1e-15);
  EXPECT_NEAR((w[{0.0, 1.0}]), 0.18, 1e-15);
  EXPECT_NEAR((w[{1.0, 1.0}]), 0.02, 1e-15);
}

TEST(BasisRestriction, PartitionOfUnityAndBounds) {
  for (int dimension : {2, 3}) {
    const auto net = random_network(300, 200, 4 + dimension, dimension, all_faces(dimension));
    const BoxMesh mesh = build_mesh(net, 0.25);
    const auto basis = restrict_basis(mesh, net);
    const Vector rows = basis.phi * Vector::Ones(mesh.node_count());
    for (Index x = 0; x < net.node_count(); ++x) EXPECT_NEAR(rows[x], 1.0, 1e-12);
    for (int k = 0; k < basis.phi.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(basis.phi, k); it; ++it) {
        EXPECT_GE(it.value(), 0.0);
        EXPECT_LE(it.value(), 1.0);
      }
    const int corners = 1 << dimension;
    for (Index x = 0; x < net.node_count(); ++x)
      EXPECT_LE(static_cast<int>(mesh.eval_basis(net.position(x)).size()), corners);
  }
}

TEST(BasisRestriction, LipschitzAlongEdges) {
  const auto net = random_network(400, 600, 12);
  const BoxMesh mesh = build_mesh(net, 0.125);
  const auto basis = restrict_basis(mesh, net);
  const Eigen::MatrixXd phi = Eigen::MatrixXd(basis.phi);
  const double bound = std::sqrt(2.0) / mesh.H();
  for (Index e = 0; e < net.edge_count(); ++e) {
    const auto& edge = net.edge(e);
    const double limit = bound * net.edge_length(e) * (1.0 + 1e-12);
    EXPECT_LE((phi.row(edge.a) - phi.row(edge.b)).cwiseAbs().maxCoeff(), limit) << "edge " << e;
  }
}

TEST(Interpolate, ConstantsAreReproducedWithAllBasisFunctions) {
  const auto net = random_network(500, 300, 21, 2, all_faces(2));
  const BoxMesh mesh = build_mesh(net, 0.25);
  const auto basis = restrict_basis(mesh, net);
  const auto I = interpolate(mesh, basis, net, NodeField::constant(2, net.node_count(), -1.75), BasisRange::all);
  for (Eigen::Index i = 0; i < I.values.values().size(); ++i) EXPECT_NEAR(I.values.values()[i], -1.75, 1e-12);

  const auto again = interpolate(mesh, basis, net, I.values, BasisRange::all);
  EXPECT_LE((again.values.values() - I.values.values()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Interpolate, FreeOnlyDropsBoundaryBasisFunctions) {
  const auto net = random_network(500, 300, 22, 2, all_faces(2));
  const BoxMesh mesh = build_mesh(net, 0.25);
  const auto basis = restrict_basis(mesh, net);
  const auto I = interpolate(mesh, basis, net, NodeField::constant(1, net.node_count(), 1.0), BasisRange::free_only);
  EXPECT_EQ(I.coefficients.size(), mesh.free_node_count());
  bool some_below_one = false;
  for (Index x = 0; x < net.node_count(); ++x) {
    EXPECT_LE(I.values(0, x), 1.0 + 1e-12);
    if (mesh.element_coords(basis.node_element[x])[0] == 0) {
      EXPECT_LT(I.values(0, x), 1.0);
      some_below_one = true;
    }
  }
  EXPECT_TRUE(some_below_one);
}

TEST(Interpolate, CoefficientIsMassWeightedElementAverage) {
  const auto net = random_network(400, 300, 23);
  const BoxMesh mesh = build_mesh(net, 0.25);
  const auto basis = restrict_basis(mesh, net);
  const NodeField v = random_field(net, 1, 5);
  const auto I = interpolate(mesh, basis, net, v, BasisRange::all);
  for (Index k = 0; k < mesh.node_count(); ++k) {
    const Index T = mesh.element_of_node(k);
    double mass = 0.0, weighted = 0.0;
    for (Index x = 0; x < net.node_count(); ++x) {
      if (!mesh.element_box(T).contains(net.position(x), net.domain())) continue;
      mass += net.node_mass(x);
      weighted += net.node_mass(x) * v(0, x);
    }
    EXPECT_NEAR(I.coefficients[k], weighted / mass, 1e-12 * (1.0 + std::abs(weighted / mass)));
    EXPECT_NEAR(basis.psi[k], 1.0 / mass, 1e-12 / mass);
  }
}

TEST(Interpolate, EmptyElementIsAnAssumptionViolation) {
  const auto net = make_network({{0.1, 0.1, 0}, {0.2, 0.2, 0}, {0.9, 0.2, 0}}, {{0, 1}, {1, 2}});
  const BoxMesh mesh = build_mesh(net, 0.5);
  const auto basis = restrict_basis(mesh, net);
  EXPECT_GT(basis.empty_element_count(), 0);
  EXPECT_THROW(interpolate(mesh, basis, net, NodeField::constant(1, 3, 1.0), BasisRange::all), AssumptionViolation);

  std::stringstream summary;
  write_mesh_summary(summary, mesh, basis);
  EXPECT_NE(summary.str().find("empty_elements 2"), std::string::npos);
}

TEST(Interpolate, EnergyBoundWithMeasuredConstants) {
  FiberGenConfig config;
  config.density = 400.0;
  config.seed = 3;
  const auto net = generate_fiber_network(config);
  const int resolution = 8;
  const BoxMesh mesh = build_mesh(net, 1.0 / resolution);
  const auto basis = restrict_basis(mesh, net);
  const std::vector<int> grids{resolution};
  const auto scan = analyze_network(net, grids);
  const double sigma = scan[0].homogeneity.sigma;
  const double mu = scan[0].poincare.mu_max;
  for (unsigned trial = 0; trial < 5; ++trial) {
    const NodeField v = random_field(net, 1, 40 + trial);
    const auto I = interpolate(mesh, basis, net, v, BasisRange::all);
    const double ratio = std::sqrt(laplacian_quadratic(net, I.values) / laplacian_quadratic(net, v));
    EXPECT_LE(ratio, 10.0 * std::sqrt(sigma) * mu);
  }
}
