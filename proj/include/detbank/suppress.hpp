#pragma once

// Detection images: score thresholding, cross-scale pooling and per-category
// greedy non-maximum suppression.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "detbank/core.hpp"

namespace detbank {

struct SuppressedFrame {
  std::uint64_t frame_index = 0;
  std::vector<DetectionRecord> detections;  // scale erased, grouped by category

  friend bool operator==(const SuppressedFrame&, const SuppressedFrame&) = default;
};

inline double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

// Greedy NMS over detections of a single category. Candidates are visited by
// descending score, ties by ascending input position; a candidate survives
// unless its IoU with an already kept box exceeds `iou_thresh`. The result
// is in visiting order.
inline std::vector<DetectionRecord> greedy_nms(std::span<const DetectionRecord> dets, double iou_thresh) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].box.score > dets[b].box.score;
  });

  std::vector<DetectionRecord> kept;
  for (std::size_t idx : order) {
    const auto& cand = dets[idx];
    bool suppressed = false;
    for (const auto& k : kept) {
      if (iou(k.box, cand.box) > iou_thresh) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(cand);
  }
  return kept;
}

// Builds the detection image of one normalized frame: drop scores below the
// lowest threshold, pool all scales of a category, suppress per category, and
// concatenate categories in configuration order.
inline SuppressedFrame build_detection_image(const FrameDetections& frame, const BankConfig& config) {
  const double floor = config.min_threshold();
  const std::size_t n_cat = config.categories.size();

  std::vector<std::vector<DetectionRecord>> per_cat(n_cat);
  for (const auto& d : frame.detections) {
    if (d.category >= n_cat) throw Error("detection category index out of range");
    if (d.box.score < floor) continue;
    DetectionRecord r = d;
    r.scale.reset();
    per_cat[d.category].push_back(r);
  }

  SuppressedFrame out;
  out.frame_index = frame.frame_index;
  for (const auto& group : per_cat) {
    if (group.empty()) continue;
    auto kept = greedy_nms(group, config.nms_iou);
    out.detections.insert(out.detections.end(), kept.begin(), kept.end());
  }
  return out;
}

}  // namespace detbank
