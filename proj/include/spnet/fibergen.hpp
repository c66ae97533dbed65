#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spnet/network.hpp"

namespace spnet {

/// Counter-based generator: value k of a stream is SplitMix64 applied to
/// (mixed seed + k * golden ratio). Any draw can be recomputed from its
/// index alone, so results do not depend on evaluation order or platform.
class CounterRng {
public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t bits(std::uint64_t counter) const;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform(std::uint64_t counter) const;
  /// Standard normal from two consecutive counters (Box-Muller).
  double normal(std::uint64_t counter) const;

private:
  std::uint64_t key_;
};

std::uint64_t splitmix64(std::uint64_t x);

enum class FiberKind { uniform, orientation_bias, placement_bias };

FiberKind parse_fiber_kind(const std::string& name);
std::string to_string(FiberKind kind);

struct FiberGenConfig {
  FiberKind kind = FiberKind::uniform;
  double fiber_length = 0.05;
  double density = 1000.0;  // target total clipped fiber length
  std::uint64_t seed = 1;
  // Orientation bias: the doubled angle follows a von Mises law.
  double orientation_mean = 0.0;
  double orientation_concentration = 4.0;
  // Placement bias: x1 of the midpoint is, with probability strip_weight,
  // Gaussian around x1 = 0 or x1 = 1 with standard deviation strip_width.
  double strip_weight = 0.5;
  double strip_width = 0.1;
  double merge_tolerance = 0.0;  // 0 selects fiber_length * 1e-4
  std::uint64_t max_fibers = 50'000'000;

  double effective_merge_tolerance() const { return merge_tolerance > 0.0 ? merge_tolerance : fiber_length * 1e-4; }
  void validate() const;
};

/// A straight fiber piece inside the unit square.
struct FiberSegment {
  Point a;
  Point b;
  Index fiber = 0;
};

/// Samples fibers and clips them to the unit square until the summed clipped
/// length reaches the target density. Fibers that miss the square are skipped
/// but still consume their slot of the random stream.
std::vector<FiberSegment> sample_fibers(const FiberGenConfig& config);

/// Clips the segment a-b to the unit square; coordinates cut at a side are set
/// exactly to 0 or 1. Returns false when nothing is left.
bool clip_to_unit_square(Point& a, Point& b);

struct SegmentIntersection {
  enum class Kind { none, point, overlap };
  Kind kind = Kind::none;
  Point point{};    // crossing point, or the start of the overlap
  Point point2{};   // end of the overlap
  double s = 0.0;   // parameter along p1-p2 of `point`
  double t = 0.0;   // parameter along q1-q2 of `point`
  double s2 = 0.0;  // overlap only: parameters of `point2`
  double t2 = 0.0;
};

/// Intersection of the closed planar segments p1-p2 and q1-q2.
SegmentIntersection segment_intersection(const Point& p1, const Point& p2, const Point& q1, const Point& q2);

struct FiberNetworkStats {
  Index fibers = 0;
  Index intersections = 0;
  Index merged_nodes = 0;
  Index removed_nodes = 0;
  Index removed_edges = 0;
};

/// Turns clipped fibers into a network: nodes at fiber ends and crossings,
/// fibers split into edges, near nodes merged, and only the largest connected
/// component kept. Edges carry the id of the fiber they came from.
SpatialNetwork build_fiber_network(std::span<const FiberSegment> fibers, double merge_tolerance,
                                   std::span<const Face> dirichlet_faces, FiberNetworkStats* stats = nullptr);

/// Full pipeline on the unit square, Dirichlet condition on every side.
SpatialNetwork generate_fiber_network(const FiberGenConfig& config, FiberNetworkStats* stats = nullptr);

/// Lattice (i/n, j/n), 0 <= i, j <= n, with unit-spacing edges, on the unit
/// square with the Dirichlet condition on every side. points_per_side = n + 1.
SpatialNetwork generate_grid_network(int points_per_side);

/// Same network with edge weights drawn uniformly from [lo, hi].
SpatialNetwork with_uniform_weights(const SpatialNetwork& net, double lo, double hi, std::uint64_t seed);

/// Same network with another set of Dirichlet faces.
SpatialNetwork with_dirichlet_faces(const SpatialNetwork& net, std::vector<Face> faces);

} // namespace spnet
