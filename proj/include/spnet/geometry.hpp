#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace spnet {

using Index = int;

/// Point in R^d, d <= 3. Unused trailing coordinates are zero.
using Point = std::array<double, 3>;

inline double distance(const Point& a, const Point& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

/// Closed hyper-rectangle [0, l_1] x ... x [0, l_d].
struct Domain {
  int dimension = 2;
  std::array<double, 3> lengths{1.0, 1.0, 0.0};

  bool contains(const Point& p) const {
    for (int i = 0; i < dimension; ++i)
      if (!(p[i] >= 0.0 && p[i] <= lengths[i])) return false;
    return true;
  }

  double volume() const {
    double v = 1.0;
    for (int i = 0; i < dimension; ++i) v *= lengths[i];
    return v;
  }
};

enum class Side : std::uint8_t { low, high };

/// One face of the domain: {x : x_axis = 0} (low) or {x : x_axis = l_axis} (high).
struct Face {
  int axis = 0;
  Side side = Side::low;

  friend bool operator==(const Face&, const Face&) = default;
};

/// All 2d faces of a d-dimensional box.
inline std::vector<Face> all_faces(int dimension) {
  std::vector<Face> faces;
  for (int a = 0; a < dimension; ++a) {
    faces.push_back({a, Side::low});
    faces.push_back({a, Side::high});
  }
  return faces;
}

/// Whether p lies on the face, within 1e-12 of the face's axis extent.
inline bool on_face(const Point& p, const Face& f, const Domain& dom) {
  const double extent = dom.lengths[f.axis];
  const double target = f.side == Side::low ? 0.0 : extent;
  return std::abs(p[f.axis] - target) <= 1e-12 * extent;
}

/// Axis-aligned box [lo, hi). An upper bound is closed when it reaches the
/// upper boundary of the domain, so the boxes of a regular tiling partition
/// the closed domain.
struct Box {
  Point lo{0.0, 0.0, 0.0};
  Point hi{0.0, 0.0, 0.0};

  static Box centered(const Point& center, double half_width, int dimension) {
    Box b;
    for (int i = 0; i < dimension; ++i) {
      b.lo[i] = center[i] - half_width;
      b.hi[i] = center[i] + half_width;
    }
    return b;
  }

  Point center(int dimension) const {
    Point c{0.0, 0.0, 0.0};
    for (int i = 0; i < dimension; ++i) c[i] = 0.5 * (lo[i] + hi[i]);
    return c;
  }

  bool contains(const Point& p, const Domain& dom) const {
    for (int i = 0; i < dom.dimension; ++i) {
      const double l = dom.lengths[i];
      const bool closed = hi[i] >= l - 1e-12 * l;
      if (p[i] < lo[i]) return false;
      if (closed ? p[i] > hi[i] : p[i] >= hi[i]) return false;
    }
    return true;
  }

  bool contains_closed(const Point& p, int dimension) const {
    for (int i = 0; i < dimension; ++i)
      if (p[i] < lo[i] || p[i] > hi[i]) return false;
    return true;
  }

  Box expanded(double by, int dimension) const {
    Box b = *this;
    for (int i = 0; i < dimension; ++i) {
      b.lo[i] -= by;
      b.hi[i] += by;
    }
    return b;
  }
};

/// Regular tiling of the domain into counts[0] x ... x counts[d-1] cells.
/// Cell lookup uses floor with clamping so the upper boundary belongs to the
/// last cell along each axis.
struct RegularGrid {
  Domain domain;
  std::array<int, 3> counts{1, 1, 1};

  Index cell_count() const {
    Index n = 1;
    for (int i = 0; i < domain.dimension; ++i) n *= counts[i];
    return n;
  }

  double cell_width(int axis) const { return domain.lengths[axis] / counts[axis]; }

  int axis_cell(double x, int axis) const {
    const double s = x / domain.lengths[axis] * counts[axis];
    int c = static_cast<int>(std::floor(s));
    if (c < 0) c = 0;
    if (c >= counts[axis]) c = counts[axis] - 1;
    return c;
  }

  std::array<int, 3> cell_coords(const Point& p) const {
    std::array<int, 3> c{0, 0, 0};
    for (int i = 0; i < domain.dimension; ++i) c[i] = axis_cell(p[i], i);
    return c;
  }

  Index cell_index(const std::array<int, 3>& c) const {
    Index idx = 0;
    for (int i = domain.dimension - 1; i >= 0; --i) idx = idx * counts[i] + c[i];
    return idx;
  }

  std::array<int, 3> coords_of(Index cell) const {
    std::array<int, 3> c{0, 0, 0};
    for (int i = 0; i < domain.dimension; ++i) {
      c[i] = cell % counts[i];
      cell /= counts[i];
    }
    return c;
  }

  Index cell_of(const Point& p) const { return cell_index(cell_coords(p)); }

  Box cell_box(Index cell) const {
    const auto c = coords_of(cell);
    Box b;
    for (int i = 0; i < domain.dimension; ++i) {
      const double w = cell_width(i);
      b.lo[i] = c[i] * w;
      b.hi[i] = (c[i] + 1 == counts[i]) ? domain.lengths[i] : (c[i] + 1) * w;
    }
    return b;
  }
};

/// Number of cells of width `width` along an extent, or -1 when the extent is
/// not an integer multiple of the width (relative tolerance 1e-9).
inline int integer_divisions(double extent, double width) {
  const double q = extent / width;
  const double r = std::round(q);
  if (r < 1.0 || std::abs(q - r) > 1e-9 * std::max(1.0, q)) return -1;
  return static_cast<int>(r);
}

} // namespace spnet
