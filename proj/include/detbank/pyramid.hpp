#pragma once

// Spatial pyramid geometry over the normalized image [0,1]^2.
//
// A level with subdivision n is an n x n grid enumerated row-major (row runs
// along y). Levels are concatenated in the given order, so with the default
// {1, 2, 4} flat index 0 is the whole image and R = 21. Cells are half-open
// [lo, hi) except that the last row and column also include the far edge 1.0,
// which makes every level an exact partition of the unit square.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "detbank/core.hpp"

namespace detbank {

struct Region {
  std::size_t level_index = 0;
  std::uint32_t subdivisions = 1;
  std::uint32_t row = 0;
  std::uint32_t col = 0;
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
  std::size_t flat_index = 0;

  bool contains(Point p) const noexcept {
    const bool last_col = col + 1 == subdivisions;
    const bool last_row = row + 1 == subdivisions;
    const bool in_x = p.x >= x0 && (p.x < x1 || (last_col && p.x <= x1));
    const bool in_y = p.y >= y0 && (p.y < y1 || (last_row && p.y <= y1));
    return in_x && in_y;
  }

  friend bool operator==(const Region&, const Region&) = default;
};

namespace detail {

inline double cell_edge(std::uint32_t k, std::uint32_t n) noexcept {
  return k == n ? 1.0 : static_cast<double>(k) / static_cast<double>(n);
}

// Index of the half-open cell containing v in [0,1], agreeing exactly with
// Region::contains at the cell edges.
inline std::uint32_t cell_coordinate(double v, std::uint32_t n) noexcept {
  if (!(v > 0.0)) return 0;
  if (v >= 1.0) return n - 1;
  auto k = static_cast<std::uint32_t>(std::floor(v * n));
  if (k > n - 1) k = n - 1;
  while (k > 0 && v < cell_edge(k, n)) --k;
  while (k + 1 < n && v >= cell_edge(k + 1, n)) ++k;
  return k;
}

}  // namespace detail

inline std::vector<Region> enumerate_regions(std::span<const std::uint32_t> levels) {
  if (levels.empty()) throw Error("pyramid: empty level list");
  std::vector<Region> out;
  for (std::size_t li = 0; li < levels.size(); ++li) {
    const auto n = levels[li];
    if (n < 1) throw Error("pyramid: subdivisions must be >= 1");
    for (std::uint32_t row = 0; row < n; ++row) {
      for (std::uint32_t col = 0; col < n; ++col) {
        Region r;
        r.level_index = li;
        r.subdivisions = n;
        r.row = row;
        r.col = col;
        r.x0 = detail::cell_edge(col, n);
        r.x1 = detail::cell_edge(col + 1, n);
        r.y0 = detail::cell_edge(row, n);
        r.y1 = detail::cell_edge(row + 1, n);
        r.flat_index = out.size();
        out.push_back(r);
      }
    }
  }
  return out;
}

// Flat indices of the regions containing `center`, one per level, in level
// order. Linear scan over `regions`.
inline std::vector<std::size_t> region_membership(Point center, std::span<const Region> regions) {
  std::vector<std::size_t> out;
  std::size_t last_level = SIZE_MAX;
  for (const auto& r : regions) {
    if (r.level_index == last_level) continue;
    if (r.contains(center)) {
      out.push_back(r.flat_index);
      last_level = r.level_index;
    }
  }
  return out;
}

// Precomputed pyramid for the hot path: constant-time cell lookup per level.
class Pyramid {
 public:
  explicit Pyramid(std::vector<std::uint32_t> levels) : levels_(std::move(levels)) {
    regions_ = enumerate_regions(levels_);
    offsets_.reserve(levels_.size());
    std::size_t off = 0;
    for (auto n : levels_) {
      offsets_.push_back(off);
      off += std::size_t{n} * n;
    }
  }

  std::size_t region_count() const noexcept { return regions_.size(); }
  std::size_t level_count() const noexcept { return levels_.size(); }
  const std::vector<Region>& regions() const noexcept { return regions_; }
  const std::vector<std::uint32_t>& levels() const noexcept { return levels_; }

  // Writes one flat index per level into `out` (size >= level_count()).
  void membership(Point p, std::span<std::size_t> out) const noexcept {
    for (std::size_t li = 0; li < levels_.size(); ++li) {
      const auto n = levels_[li];
      const auto row = detail::cell_coordinate(p.y, n);
      const auto col = detail::cell_coordinate(p.x, n);
      out[li] = offsets_[li] + std::size_t{row} * n + col;
    }
  }

 private:
  std::vector<std::uint32_t> levels_;
  std::vector<Region> regions_;
  std::vector<std::size_t> offsets_;
};

}  // namespace detbank
