#include "spnet/fibergen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

#include "spnet/error.hpp"
#include "spnet/union_find.hpp"

namespace spnet {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x5851F42D4C957F2Dull))) {}

std::uint64_t CounterRng::bits(std::uint64_t counter) const {
  return splitmix64(key_ + counter * 0x9E3779B97F4A7C15ull);
}

double CounterRng::uniform(std::uint64_t counter) const {
  return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t counter) const {
  const double u1 = 1.0 - uniform(counter);  // (0, 1]
  const double u2 = uniform(counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

FiberKind parse_fiber_kind(const std::string& name) {
  if (name == "uniform") return FiberKind::uniform;
  if (name == "orient-bias") return FiberKind::orientation_bias;
  if (name == "place-bias") return FiberKind::placement_bias;
  throw ConfigError("unknown fiber network kind '" + name + "' (expected uniform, orient-bias or place-bias)");
}

std::string to_string(FiberKind kind) {
  switch (kind) {
  case FiberKind::uniform: return "uniform";
  case FiberKind::orientation_bias: return "orient-bias";
  case FiberKind::placement_bias: return "place-bias";
  }
  return "uniform";
}

void FiberGenConfig::validate() const {
  if (!(fiber_length > 0.0)) throw ConfigError("fiber length must be positive");
  if (!(density > 0.0)) throw ConfigError("target density must be positive");
  if (!(effective_merge_tolerance() < fiber_length)) throw ConfigError("merge tolerance must be below the fiber length");
  if (!(orientation_concentration >= 0.0)) throw ConfigError("orientation concentration must be nonnegative");
  if (!(strip_weight >= 0.0 && strip_weight <= 1.0)) throw ConfigError("strip weight must lie in [0, 1]");
  if (!(strip_width > 0.0)) throw ConfigError("strip width must be positive");
}

namespace {

constexpr std::uint64_t kSlotsPerFiber = 64;
constexpr int kVonMisesAttempts = 18;

// Best-Fisher rejection sampler; three draws per attempt starting at `slot`.
double von_mises(const CounterRng& rng, std::uint64_t slot, double mean, double kappa) {
  if (kappa < 1e-8) return mean + std::numbers::pi * (2.0 * rng.uniform(slot) - 1.0);
  const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
  const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
  const double r = (1.0 + rho * rho) / (2.0 * rho);
  for (int attempt = 0; attempt < kVonMisesAttempts; ++attempt) {
    const std::uint64_t s = slot + 3 * attempt;
    const double u1 = rng.uniform(s), u2 = 1.0 - rng.uniform(s + 1), u3 = rng.uniform(s + 2);
    const double z = std::cos(std::numbers::pi * u1);
    const double f = (1.0 + r * z) / (r + z);
    const double c = kappa * (r - f);
    if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0)
      return mean + (u3 > 0.5 ? 1.0 : -1.0) * std::acos(std::clamp(f, -1.0, 1.0));
  }
  return mean;
}

double wrap_half_turn(double angle) {
  double a = std::fmod(angle, std::numbers::pi);
  if (a < 0.0) a += std::numbers::pi;
  return a;
}

double cross2(double ax, double ay, double bx, double by) { return ax * by - ay * bx; }

} // namespace

bool clip_to_unit_square(Point& a, Point& b) {
  const double dx = b[0] - a[0], dy = b[1] - a[1];
  double t0 = 0.0, t1 = 1.0;
  int side0 = -1, side1 = -1;  // which bound cut each end: 0 x=0, 1 x=1, 2 y=0, 3 y=1
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {a[0], 1.0 - a[0], a[1], 1.0 - a[1]};
  for (int k = 0; k < 4; ++k) {
    if (p[k] == 0.0) {
      if (q[k] < 0.0) return false;
      continue;
    }
    const double t = q[k] / p[k];
    if (p[k] < 0.0) {
      if (t > t1) return false;
      if (t > t0) {
        t0 = t;
        side0 = k;
      }
    } else {
      if (t < t0) return false;
      if (t < t1) {
        t1 = t;
        side1 = k;
      }
    }
  }
  if (!(t1 > t0)) return false;
  const Point start{a[0] + t0 * dx, a[1] + t0 * dy, 0.0};
  const Point end{a[0] + t1 * dx, a[1] + t1 * dy, 0.0};
  a = start;
  b = end;
  auto snap = [](Point& p, int side) {
    if (side < 0) return;
    p[side / 2] = (side % 2 == 0) ? 0.0 : 1.0;
  };
  snap(a, side0);
  snap(b, side1);
  for (int i = 0; i < 2; ++i) {
    a[i] = std::clamp(a[i], 0.0, 1.0);
    b[i] = std::clamp(b[i], 0.0, 1.0);
  }
  return a != b;
}

std::vector<FiberSegment> sample_fibers(const FiberGenConfig& config) {
  config.validate();
  const CounterRng rng(config.seed);
  const double r = config.fiber_length;
  std::vector<FiberSegment> fibers;
  double total = 0.0;
  for (std::uint64_t i = 0; total < config.density; ++i) {
    if (i >= config.max_fibers)
      throw GenerationError("target density " + std::to_string(config.density) + " not reached after " +
                            std::to_string(config.max_fibers) + " fibers");
    const std::uint64_t base = i * kSlotsPerFiber;
    double mx = -0.5 * r + (1.0 + r) * rng.uniform(base + 0);
    const double my = -0.5 * r + (1.0 + r) * rng.uniform(base + 1);
    if (config.kind == FiberKind::placement_bias && rng.uniform(base + 2) < config.strip_weight) {
      const double center = rng.uniform(base + 3) < 0.5 ? 0.0 : 1.0;
      mx = center + config.strip_width * rng.normal(base + 4);
    }
    double angle = std::numbers::pi * rng.uniform(base + 6);
    if (config.kind == FiberKind::orientation_bias)
      angle = wrap_half_turn(
          0.5 * von_mises(rng, base + 8, 2.0 * config.orientation_mean, config.orientation_concentration));

    const double hx = 0.5 * r * std::cos(angle), hy = 0.5 * r * std::sin(angle);
    Point a{mx - hx, my - hy, 0.0}, b{mx + hx, my + hy, 0.0};
    if (!clip_to_unit_square(a, b)) continue;
    total += distance(a, b);
    fibers.push_back({a, b, static_cast<Index>(fibers.size())});
  }
  return fibers;
}

SegmentIntersection segment_intersection(const Point& p1, const Point& p2, const Point& q1, const Point& q2) {
  SegmentIntersection out;
  const double rx = p2[0] - p1[0], ry = p2[1] - p1[1];
  const double sx = q2[0] - q1[0], sy = q2[1] - q1[1];
  const double wx = q1[0] - p1[0], wy = q1[1] - p1[1];
  const double rlen = std::hypot(rx, ry), slen = std::hypot(sx, sy);
  const double denom = cross2(rx, ry, sx, sy);

  if (std::abs(denom) > 1e-12 * rlen * slen) {
    double s = cross2(wx, wy, sx, sy) / denom;
    double t = cross2(wx, wy, rx, ry) / denom;
    constexpr double slack = 1e-12;
    if (s < -slack || s > 1.0 + slack || t < -slack || t > 1.0 + slack) return out;
    s = std::clamp(s, 0.0, 1.0);
    t = std::clamp(t, 0.0, 1.0);
    out.kind = SegmentIntersection::Kind::point;
    out.s = s;
    out.t = t;
    if (s == 0.0) out.point = p1;
    else if (s == 1.0) out.point = p2;
    else if (t == 0.0) out.point = q1;
    else if (t == 1.0) out.point = q2;
    else out.point = {p1[0] + s * rx, p1[1] + s * ry, 0.0};
    return out;
  }

  // Parallel: only collinear segments can meet.
  if (std::abs(cross2(wx, wy, rx, ry)) > 1e-12 * rlen * std::max(rlen, std::hypot(wx, wy))) return out;
  const double rr = rx * rx + ry * ry;
  const double a0 = (wx * rx + wy * ry) / rr;
  const double a1 = a0 + (sx * rx + sy * ry) / rr;
  const double lo = std::max(0.0, std::min(a0, a1));
  const double hi = std::min(1.0, std::max(a0, a1));
  if (lo > hi) return out;
  const double ss = sx * sx + sy * sy;
  auto param_on_q = [&](double s) {
    const double px = p1[0] + s * rx - q1[0], py = p1[1] + s * ry - q1[1];
    return std::clamp((px * sx + py * sy) / ss, 0.0, 1.0);
  };
  out.point = {p1[0] + lo * rx, p1[1] + lo * ry, 0.0};
  out.s = lo;
  out.t = param_on_q(lo);
  if (lo == hi) {
    out.kind = SegmentIntersection::Kind::point;
    return out;
  }
  out.kind = SegmentIntersection::Kind::overlap;
  out.point2 = {p1[0] + hi * rx, p1[1] + hi * ry, 0.0};
  out.s2 = hi;
  out.t2 = param_on_q(hi);
  return out;
}

namespace {

// Pairs of nodes closer than tol, found with a uniform hash of cell size tol.
std::vector<std::pair<Index, Index>> close_pairs(const std::vector<Point>& pos, double tol) {
  const Index n = static_cast<Index>(pos.size());
  auto cell = [&](double v) { return static_cast<std::int64_t>(std::floor(v / tol)); };
  auto key = [](std::int64_t cx, std::int64_t cy) {
    return (static_cast<std::uint64_t>(cx + (1 << 30)) << 32) | static_cast<std::uint64_t>(cy + (1 << 30));
  };
  std::vector<std::pair<std::uint64_t, Index>> keyed(n);
  for (Index x = 0; x < n; ++x) keyed[x] = {key(cell(pos[x][0]), cell(pos[x][1])), x};
  std::sort(keyed.begin(), keyed.end());

  std::vector<std::pair<Index, Index>> pairs;
  for (Index x = 0; x < n; ++x) {
    const auto cx = cell(pos[x][0]), cy = cell(pos[x][1]);
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        const std::uint64_t k = key(cx + dx, cy + dy);
        auto it = std::lower_bound(keyed.begin(), keyed.end(), std::make_pair(k, Index{0}));
        for (; it != keyed.end() && it->first == k; ++it) {
          const Index y = it->second;
          if (y <= x) continue;
          if (distance(pos[x], pos[y]) < tol) pairs.emplace_back(x, y);
        }
      }
    }
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

} // namespace

SpatialNetwork build_fiber_network(std::span<const FiberSegment> fibers, double merge_tolerance,
                                   std::span<const Face> dirichlet_faces, FiberNetworkStats* stats) {
  if (!(merge_tolerance > 0.0)) throw ConfigError("merge tolerance must be positive");
  const Index F = static_cast<Index>(fibers.size());
  if (F == 0) throw GenerationError("no fibers to build a network from");

  std::vector<Point> pos;
  // Per fiber: (parameter along the fiber, node).
  std::vector<std::vector<std::pair<double, Index>>> on_fiber(F);
  for (Index f = 0; f < F; ++f) {
    on_fiber[f].push_back({0.0, static_cast<Index>(pos.size())});
    pos.push_back(fibers[f].a);
    on_fiber[f].push_back({1.0, static_cast<Index>(pos.size())});
    pos.push_back(fibers[f].b);
  }

  // Candidate pairs from uniform bins with side close to the longest fiber.
  double longest = 0.0;
  for (const auto& s : fibers) longest = std::max(longest, distance(s.a, s.b));
  const int bins = std::clamp(static_cast<int>(1.0 / std::max(longest, 1e-9)), 1, 4096);
  auto bin = [&](double v) { return std::clamp(static_cast<int>(v * bins), 0, bins - 1); };
  std::vector<std::pair<std::int64_t, Index>> binned;
  binned.reserve(static_cast<std::size_t>(F) * 4);
  for (Index f = 0; f < F; ++f) {
    const auto& s = fibers[f];
    const int x0 = bin(std::min(s.a[0], s.b[0])), x1 = bin(std::max(s.a[0], s.b[0]));
    const int y0 = bin(std::min(s.a[1], s.b[1])), y1 = bin(std::max(s.a[1], s.b[1]));
    for (int bx = x0; bx <= x1; ++bx)
      for (int by = y0; by <= y1; ++by) binned.emplace_back(static_cast<std::int64_t>(by) * bins + bx, f);
  }
  std::sort(binned.begin(), binned.end());
  std::vector<std::uint64_t> candidates;
  for (std::size_t i = 0; i < binned.size();) {
    std::size_t j = i;
    while (j < binned.size() && binned[j].first == binned[i].first) ++j;
    for (std::size_t u = i; u < j; ++u)
      for (std::size_t v = u + 1; v < j; ++v)
        candidates.push_back((static_cast<std::uint64_t>(binned[u].second) << 32) |
                             static_cast<std::uint64_t>(binned[v].second));
    i = j;
  }
  binned.clear();
  binned.shrink_to_fit();
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  Index crossings = 0;
  for (const std::uint64_t c : candidates) {
    const Index f = static_cast<Index>(c >> 32), g = static_cast<Index>(c & 0xFFFFFFFFu);
    const auto hit = segment_intersection(fibers[f].a, fibers[f].b, fibers[g].a, fibers[g].b);
    if (hit.kind == SegmentIntersection::Kind::none) continue;
    ++crossings;
    const Index node = static_cast<Index>(pos.size());
    pos.push_back(hit.point);
    on_fiber[f].push_back({hit.s, node});
    on_fiber[g].push_back({hit.t, node});
    if (hit.kind == SegmentIntersection::Kind::overlap) {
      const Index node2 = static_cast<Index>(pos.size());
      pos.push_back(hit.point2);
      on_fiber[f].push_back({hit.s2, node2});
      on_fiber[g].push_back({hit.t2, node2});
    }
  }
  candidates.clear();
  candidates.shrink_to_fit();

  // Split fibers at their nodes.
  std::vector<Edge> edges;
  std::vector<Index> edge_fiber;
  for (Index f = 0; f < F; ++f) {
    auto& list = on_fiber[f];
    std::sort(list.begin(), list.end());
    for (std::size_t k = 1; k < list.size(); ++k) {
      edges.push_back({list[k - 1].second, list[k].second});
      edge_fiber.push_back(f);
    }
    list.clear();
    list.shrink_to_fit();
  }

  // Merge node clusters closer than the tolerance until none remain.
  const Index created = static_cast<Index>(pos.size());
  std::vector<Index> node_of(created);
  for (Index x = 0; x < created; ++x) node_of[x] = x;
  for (int round = 0; round < 32; ++round) {
    const auto pairs = close_pairs(pos, merge_tolerance);
    if (pairs.empty()) break;
    const Index n = static_cast<Index>(pos.size());
    UnionFind<Index> uf(n);
    for (const auto& [x, y] : pairs) uf.unite(x, y);
    Index groups = 0;
    const auto label = uf.labels(&groups);
    std::vector<Point> sum(groups, Point{0.0, 0.0, 0.0});
    std::vector<Index> count(groups, 0);
    std::vector<std::array<std::uint8_t, 2>> low(groups, {0, 0}), high(groups, {0, 0});
    for (Index x = 0; x < n; ++x) {
      const Index g = label[x];
      for (int i = 0; i < 2; ++i) {
        sum[g][i] += pos[x][i];
        if (pos[x][i] == 0.0) low[g][i] = 1;
        if (pos[x][i] == 1.0) high[g][i] = 1;
      }
      ++count[g];
    }
    std::vector<Point> merged(groups);
    for (Index g = 0; g < groups; ++g) {
      for (int i = 0; i < 2; ++i) {
        double v = sum[g][i] / count[g];
        if (low[g][i]) v = 0.0;
        else if (high[g][i]) v = 1.0;
        merged[g][i] = std::clamp(v, 0.0, 1.0);
      }
      merged[g][2] = 0.0;
    }
    for (auto& x : node_of) x = label[x];
    pos = std::move(merged);
  }

  const Index merged_count = static_cast<Index>(pos.size());
  std::vector<Edge> kept;
  std::vector<Index> kept_fiber;
  {
    std::vector<std::uint64_t> seen;
    seen.reserve(edges.size());
    std::vector<std::tuple<std::uint64_t, std::size_t>> order;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const Index a = node_of[edges[e].a], b = node_of[edges[e].b];
      if (a == b) continue;
      const auto lo = static_cast<std::uint64_t>(std::min(a, b)), hi = static_cast<std::uint64_t>(std::max(a, b));
      order.emplace_back((lo << 32) | hi, e);
    }
    std::sort(order.begin(), order.end());
    std::vector<std::size_t> first;
    for (std::size_t k = 0; k < order.size(); ++k)
      if (k == 0 || std::get<0>(order[k]) != std::get<0>(order[k - 1])) first.push_back(std::get<1>(order[k]));
    std::sort(first.begin(), first.end());
    for (const std::size_t e : first) {
      kept.push_back({node_of[edges[e].a], node_of[edges[e].b]});
      kept_fiber.push_back(edge_fiber[e]);
    }
  }

  // Largest connected component.
  UnionFind<Index> uf(merged_count);
  for (const auto& e : kept) uf.unite(e.a, e.b);
  Index best = -1;
  Index best_size = 0;
  for (Index x = 0; x < merged_count; ++x) {
    const Index root = uf.find(x);
    const Index size = uf.set_size(root);
    if (size > best_size) {
      best_size = size;
      best = root;
    }
  }

  // Renumber surviving nodes along a coarse spatial ordering for locality.
  std::vector<std::tuple<int, int, Index>> order;
  for (Index x = 0; x < merged_count; ++x) {
    if (uf.find(x) != best) continue;
    const int cx = std::min(255, static_cast<int>(pos[x][0] * 256)), cy = std::min(255, static_cast<int>(pos[x][1] * 256));
    order.emplace_back(cy, cx, x);
  }
  std::sort(order.begin(), order.end());
  std::vector<Index> new_id(merged_count, -1);
  NetworkData data;
  data.domain.dimension = 2;
  data.domain.lengths = {1.0, 1.0, 0.0};
  data.dirichlet_faces.assign(dirichlet_faces.begin(), dirichlet_faces.end());
  for (const auto& [cy, cx, x] : order) {
    new_id[x] = static_cast<Index>(data.positions.size());
    data.positions.push_back(pos[x]);
  }
  Index removed_edges = 0;
  for (std::size_t e = 0; e < kept.size(); ++e) {
    const Index a = new_id[kept[e].a], b = new_id[kept[e].b];
    if (a < 0 || b < 0) {
      ++removed_edges;
      continue;
    }
    data.edges.push_back({a, b});
    data.fiber_ids.push_back(kept_fiber[e]);
  }

  if (stats) {
    stats->fibers = F;
    stats->intersections = crossings;
    stats->merged_nodes = created - merged_count;
    stats->removed_nodes = merged_count - static_cast<Index>(data.positions.size());
    stats->removed_edges = removed_edges;
  }
  if (data.edges.empty()) throw GenerationError("fiber network has no edges");
  return SpatialNetwork(std::move(data));
}

SpatialNetwork generate_fiber_network(const FiberGenConfig& config, FiberNetworkStats* stats) {
  const auto fibers = sample_fibers(config);
  const auto faces = all_faces(2);
  return build_fiber_network(fibers, config.effective_merge_tolerance(), faces, stats);
}

SpatialNetwork generate_grid_network(int points_per_side) {
  if (points_per_side < 2) throw ConfigError("a grid network needs at least 2 points per side");
  const int n = points_per_side - 1;
  NetworkData data;
  data.domain.dimension = 2;
  data.domain.lengths = {1.0, 1.0, 0.0};
  data.dirichlet_faces = all_faces(2);
  auto id = [&](int i, int j) { return static_cast<Index>(j) * points_per_side + i; };
  data.positions.reserve(static_cast<std::size_t>(points_per_side) * points_per_side);
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      data.positions.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n, 0.0});
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      if (i < n) data.edges.push_back({id(i, j), id(i + 1, j)});
      if (j < n) data.edges.push_back({id(i, j), id(i, j + 1)});
    }
  }
  return SpatialNetwork(std::move(data));
}

SpatialNetwork with_uniform_weights(const SpatialNetwork& net, double lo, double hi, std::uint64_t seed) {
  if (!(lo > 0.0 && hi >= lo)) throw ConfigError("weight range must satisfy 0 < lo <= hi");
  const CounterRng rng(seed, 0x7765696768747321ull);
  NetworkData data = net.data();
  data.weights.resize(net.edge_count());
  for (Index e = 0; e < net.edge_count(); ++e) data.weights[e] = lo + (hi - lo) * rng.uniform(e);
  return SpatialNetwork(std::move(data));
}

SpatialNetwork with_dirichlet_faces(const SpatialNetwork& net, std::vector<Face> faces) {
  NetworkData data = net.data();
  data.dirichlet_faces = std::move(faces);
  return SpatialNetwork(std::move(data));
}

} // namespace spnet
