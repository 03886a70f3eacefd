#pragma once

// Random instance generators and the brute-force statistics oracle shared by
// the unit, property and acceptance suites.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "detbank/detbank.hpp"

namespace detbank::testing {

inline std::vector<std::string> category_names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("cat" + std::to_string(i));
  return out;
}

// Coordinate in [0,1]; a third of the draws land exactly on an edge of the
// 1/2, 1/3, 1/4 or 1/8 grids.
inline double random_coordinate(Rng& rng) {
  if (rng.uniform() < 0.33) {
    static const double denoms[] = {2.0, 3.0, 4.0, 8.0};
    const double d = denoms[rng.index(4)];
    return static_cast<double>(rng.index(static_cast<std::size_t>(d) + 1)) / d;
  }
  return rng.uniform();
}

// Normalized box whose center is (cx, cy).
inline BoundingBox box_around(double cx, double cy, double hw, double hh, double score) {
  return {cx - hw, cy - hh, cx + hw, cy + hh, score};
}

inline std::vector<double> random_thresholds(Rng& rng, std::size_t max_t = 5) {
  const std::size_t t = 1 + rng.index(max_t);
  std::vector<double> out;
  while (out.size() < t) {
    // coarse grid so detection scores hit thresholds exactly now and then
    const double v = -1.5 + 0.1 * static_cast<double>(rng.index(21));
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline BankConfig random_config(Rng& rng, std::size_t max_c = 20) {
  BankConfig cfg;
  cfg.categories = category_names(1 + rng.index(max_c));
  cfg.thresholds = random_thresholds(rng);
  static const std::vector<std::vector<std::uint32_t>> level_sets{{1, 2, 4}, {1}, {1, 3}, {2, 4}, {1, 2, 4, 8}};
  cfg.pyramid_levels = level_sets[rng.index(level_sets.size())];
  cfg.nms_iou = rng.uniform() < 0.2 ? 1.0 : 0.3 + 0.5 * rng.uniform();
  return cfg;
}

inline double random_score(Rng& rng) {
  if (rng.uniform() < 0.25) return -1.5 + 0.1 * static_cast<double>(rng.index(21));
  return rng.uniform(-1.8, 0.8);
}

// Normalized frame (width = height = 1) with up to max_p detections.
inline FrameDetections random_frame(Rng& rng, std::size_t categories, std::size_t max_p) {
  FrameDetections f;
  f.frame_index = rng.index(1000);
  const std::size_t p = rng.index(max_p + 1);
  for (std::size_t i = 0; i < p; ++i) {
    DetectionRecord d;
    d.category = rng.index(categories);
    const double cx = random_coordinate(rng), cy = random_coordinate(rng);
    const double hw = 0.005 + 0.1 * rng.uniform(), hh = 0.005 + 0.1 * rng.uniform();
    d.box = box_around(cx, cy, hw, hh, random_score(rng));
    if (rng.uniform() < 0.5) d.scale = static_cast<std::uint32_t>(rng.index(4));
    f.detections.push_back(d);
  }
  return f;
}

// Detections as a SuppressedFrame without running suppression; the
// statistics definitions do not depend on how the set was produced.
inline SuppressedFrame as_suppressed(const FrameDetections& f) {
  SuppressedFrame s;
  s.frame_index = f.frame_index;
  s.detections = f.detections;
  return s;
}

// Direct evaluation of the three keyframe statistics: for every (c, r, t),
// loop over all detections and apply the center-in-cell and score >= t
// indicators. Cell membership is re-derived here from the grid definition.
inline std::vector<double> brute_force_statistics(const SuppressedFrame& frame, const BankConfig& cfg) {
  struct Cell {
    double x0, x1, y0, y1;
    bool last_col, last_row;
  };
  std::vector<Cell> cells;
  for (auto n : cfg.pyramid_levels)
    for (std::uint32_t row = 0; row < n; ++row)
      for (std::uint32_t col = 0; col < n; ++col)
        cells.push_back({col / double(n), col + 1 == n ? 1.0 : (col + 1) / double(n), row / double(n),
                         row + 1 == n ? 1.0 : (row + 1) / double(n), col + 1 == n, row + 1 == n});

  const std::size_t C = cfg.categories.size(), R = cells.size(), T = cfg.thresholds.size();
  const std::size_t S = cfg.statistics.size();
  std::vector<double> out(C * R * T * S, 0.0);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t r = 0; r < R; ++r) {
      const auto& cell = cells[r];
      for (std::size_t t = 0; t < T; ++t) {
        double ds = 0.0, dn = 0.0;
        for (const auto& d : frame.detections) {
          if (d.category != c) continue;
          const double cx = 0.5 * (d.box.x1 + d.box.x2), cy = 0.5 * (d.box.y1 + d.box.y2);
          const bool in_x = cx >= cell.x0 && (cx < cell.x1 || (cell.last_col && cx <= cell.x1));
          const bool in_y = cy >= cell.y0 && (cy < cell.y1 || (cell.last_row && cy <= cell.y1));
          const double in_cell = (in_x && in_y) ? 1.0 : 0.0;
          const double above = d.box.score >= cfg.thresholds[t] ? 1.0 : 0.0;
          if (in_cell * above != 0.0) {
            ds += d.box.score;
            dn += 1.0;
          }
        }
        const std::size_t base = ((c * R + r) * T + t) * S;
        std::size_t s = 0;
        if (cfg.statistics.sum) out[base + s++] = ds;
        if (cfg.statistics.count) out[base + s++] = dn;
        if (cfg.statistics.binary) out[base + s++] = dn > 0.0 ? 1.0 : 0.0;
      }
    }
  }
  return out;
}

// Pixel-space video with random frames, for ingestion round trips.
inline VideoDetections random_pixel_video(Rng& rng, const std::string& id, std::size_t categories) {
  VideoDetections v;
  v.video_id = id;
  if (rng.uniform() < 0.7) v.label = static_cast<int>(1 + rng.index(15));
  const std::size_t k = 1 + rng.index(5);
  std::uint64_t idx = rng.index(3);
  for (std::size_t i = 0; i < k; ++i) {
    FrameDetections f;
    f.frame_index = idx;
    idx += 1 + rng.index(40);
    f.width = static_cast<std::uint32_t>(16 + rng.index(1900));
    f.height = static_cast<std::uint32_t>(16 + rng.index(1000));
    const std::size_t p = rng.index(6);
    for (std::size_t j = 0; j < p; ++j) {
      DetectionRecord d;
      d.category = rng.index(categories);
      const double x = rng.uniform(-50.0, f.width + 50.0), y = rng.uniform(-50.0, f.height + 50.0);
      d.box = {x, y, x + rng.uniform(0.5, 200.0), y + rng.uniform(0.5, 200.0), rng.normal(-0.8, 0.5)};
      if (rng.uniform() < 0.4) d.scale = static_cast<std::uint32_t>(rng.index(10));
      f.detections.push_back(d);
    }
    v.frames.push_back(std::move(f));
  }
  return v;
}

}  // namespace detbank::testing
