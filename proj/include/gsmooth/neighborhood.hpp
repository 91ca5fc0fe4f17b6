#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "gsmooth/core.hpp"

namespace gsmooth {

struct Offset {
  int dx = 0;
  int dy = 0;
  friend bool operator==(const Offset&, const Offset&) = default;
};

struct Coord {
  int x = 0;
  int y = 0;
  friend bool operator==(const Coord&, const Coord&) = default;
};

/// Neighborhood offsets in row-major order (dy, then dx).
struct OffsetSet {
  std::vector<Offset> offsets;
  int radius = 0;
  int stride = 1;

  std::size_t size() const { return offsets.size(); }
  auto begin() const { return offsets.begin(); }
  auto end() const { return offsets.end(); }
  const Offset& operator[](std::size_t k) const { return offsets[k]; }

  bool contains(Offset o) const {
    return std::find(offsets.begin(), offsets.end(), o) != offsets.end();
  }
};

/// Per-axis sample positions {-r + t*s : t = 0..floor(2r/s)}, closed under
/// negation so the resulting stencil stays symmetric when s does not divide 2r.
inline std::vector<int> dilated_axis(int radius, int stride) {
  std::vector<int> axis;
  for (int t = 0; t <= (2 * radius) / stride; ++t) axis.push_back(-radius + t * stride);
  const std::size_t n = axis.size();
  for (std::size_t i = 0; i < n; ++i) axis.push_back(-axis[i]);
  std::sort(axis.begin(), axis.end());
  axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
  return axis;
}

inline OffsetSet dilated_offsets(const NeighborhoodSpec& spec) {
  spec.validate();
  OffsetSet set;
  set.radius = spec.radius;
  set.stride = spec.stride;
  const std::vector<int> axis = dilated_axis(spec.radius, spec.stride);
  for (int dy : axis)
    for (int dx : axis) {
      if (!spec.include_center && dx == 0 && dy == 0) continue;
      set.offsets.push_back({dx, dy});
    }
  if (spec.include_center && !set.contains({0, 0})) {
    // Odd r with even s skips the center row and column; the data term still
    // needs the pixel itself.
    set.offsets.push_back({0, 0});
    std::sort(set.offsets.begin(), set.offsets.end(), [](Offset a, Offset b) {
      return a.dy != b.dy ? a.dy < b.dy : a.dx < b.dx;
    });
  }
  return set;
}

inline bool in_bounds(int x, int y, int width, int height) {
  return x >= 0 && y >= 0 && x < width && y < height;
}

/// In-bounds neighbors of `pixel`; the neighborhood is truncated at borders.
inline std::vector<Coord> clipped_neighbors(Coord pixel, const OffsetSet& offsets, int width,
                                            int height) {
  std::vector<Coord> out;
  out.reserve(offsets.size());
  for (const Offset& o : offsets) {
    const int x = pixel.x + o.dx;
    const int y = pixel.y + o.dy;
    if (in_bounds(x, y, width, height)) out.push_back({x, y});
  }
  return out;
}

/// Offsets pointing forward in row-major order; each unordered pair of a
/// symmetric set is represented exactly once.
inline std::vector<Offset> forward_half(const OffsetSet& set) {
  std::vector<Offset> half;
  for (const Offset& o : set)
    if (o.dy > 0 || (o.dy == 0 && o.dx > 0)) half.push_back(o);
  return half;
}

}  // namespace gsmooth
