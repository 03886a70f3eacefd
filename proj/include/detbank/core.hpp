#pragma once

// Domain types for per-keyframe detections, the bank configuration, and the
// line-delimited detection stream reader/writer.
//
// Stream grammar (UTF-8, one record per line, tab separated):
//
//   video_id  frame_index  frame_width  frame_height  category  x1  y1  x2  y2  score  [scale]
//
// Coordinates are pixels. Lines starting with '#' are comments, except two
// directives that are still comments to any other reader:
//
//   #frame  video_id  frame_index  frame_width  frame_height   declares a keyframe
//   #label  video_id  label                                    attaches an event label
//
// A keyframe exists if it is declared or if any record references it, so
// frames without detections survive a round trip.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "detbank/error.hpp"
#include "detbank/text.hpp"

namespace detbank {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct BoundingBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;
  double score = 0.0;

  Point center() const noexcept { return {0.5 * (x1 + x2), 0.5 * (y1 + y2)}; }
  double width() const noexcept { return x2 - x1; }
  double height() const noexcept { return y2 - y1; }
  double area() const noexcept { return width() * height(); }

  bool valid() const noexcept {
    return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2) &&
           std::isfinite(score) && x1 < x2 && y1 < y2;
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct DetectionRecord {
  std::size_t category = 0;  // index into BankConfig::categories
  BoundingBox box;
  std::optional<std::uint32_t> scale;

  friend bool operator==(const DetectionRecord&, const DetectionRecord&) = default;
};

struct FrameDetections {
  std::uint64_t frame_index = 0;
  std::uint32_t width = 1;
  std::uint32_t height = 1;
  std::vector<DetectionRecord> detections;

  friend bool operator==(const FrameDetections&, const FrameDetections&) = default;
};

struct VideoDetections {
  std::string video_id;
  std::optional<int> label;
  std::vector<FrameDetections> frames;

  friend bool operator==(const VideoDetections&, const VideoDetections&) = default;
};

// ---------------------------------------------------------------------------
// Bank configuration
// ---------------------------------------------------------------------------

enum class Pooling { mean, max, both };

inline std::string_view to_string(Pooling p) {
  switch (p) {
    case Pooling::mean: return "mean";
    case Pooling::max: return "max";
    case Pooling::both: return "both";
  }
  return "mean";
}

inline std::optional<Pooling> parse_pooling(std::string_view s) {
  if (s == "mean") return Pooling::mean;
  if (s == "max") return Pooling::max;
  if (s == "both") return Pooling::both;
  return std::nullopt;
}

inline std::size_t pooling_blocks(Pooling p) { return p == Pooling::both ? 2 : 1; }

// Enabled per-cell statistics. Storage order is always (sum, count, binary),
// skipping disabled ones.
struct StatisticSet {
  bool sum = true;
  bool count = true;
  bool binary = true;

  std::size_t size() const noexcept { return std::size_t{sum} + count + binary; }
  bool empty() const noexcept { return size() == 0; }

  // Offsets within one (c, r, t) group; -1 when disabled.
  int sum_offset() const noexcept { return sum ? 0 : -1; }
  int count_offset() const noexcept { return count ? int{sum} : -1; }
  int binary_offset() const noexcept { return binary ? int{sum} + int{count} : -1; }

  friend bool operator==(const StatisticSet&, const StatisticSet&) = default;
};

inline StatisticSet parse_statistics(std::string_view s, std::size_t line = 0) {
  StatisticSet set{false, false, false};
  for (const auto& name : text::parse_name_list(s)) {
    if (name == "sum") set.sum = true;
    else if (name == "count") set.count = true;
    else if (name == "binary") set.binary = true;
    else throw ParseError(line, "unknown statistic '" + name + "' (expected sum, count, binary)");
  }
  return set;
}

inline std::string to_string(const StatisticSet& s) {
  std::string out;
  auto add = [&](const char* n) {
    if (!out.empty()) out += ',';
    out += n;
  };
  if (s.sum) add("sum");
  if (s.count) add("count");
  if (s.binary) add("binary");
  return out;
}

inline const std::vector<double>& default_thresholds() {
  static const std::vector<double> t{-1.1, -0.9, -0.7, -0.5};
  return t;
}

inline const std::vector<std::uint32_t>& default_levels() {
  static const std::vector<std::uint32_t> l{1, 2, 4};
  return l;
}

struct BankConfig {
  std::vector<std::string> categories;
  std::vector<double> thresholds = default_thresholds();
  std::vector<std::uint32_t> pyramid_levels = default_levels();
  double nms_iou = 0.5;
  Pooling pooling = Pooling::mean;
  StatisticSet statistics;

  double min_threshold() const { return thresholds.front(); }

  // Throws Error describing the first violated invariant.
  void validate() const {
    if (categories.empty()) throw Error("config: category list is empty");
    for (std::size_t i = 0; i < categories.size(); ++i) {
      if (categories[i].empty()) throw Error("config: empty category name");
      for (std::size_t j = 0; j < i; ++j)
        if (categories[i] == categories[j])
          throw Error("config: duplicate category '" + categories[i] + "'");
    }
    if (thresholds.empty()) throw Error("config: threshold list is empty");
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      if (!std::isfinite(thresholds[i])) throw Error("config: non-finite threshold");
      if (i > 0 && !(thresholds[i - 1] < thresholds[i]))
        throw Error("config: thresholds must be strictly ascending");
    }
    if (pyramid_levels.empty()) throw Error("config: pyramid level list is empty");
    for (auto n : pyramid_levels)
      if (n < 1) throw Error("config: pyramid subdivisions must be >= 1");
    if (!(nms_iou > 0.0 && nms_iou <= 1.0)) throw Error("config: nms_iou must lie in (0, 1]");
    if (statistics.empty()) throw Error("config: no statistics enabled");
  }

  std::optional<std::size_t> category_index(std::string_view name) const {
    for (std::size_t i = 0; i < categories.size(); ++i)
      if (categories[i] == name) return i;
    return std::nullopt;
  }
};

// Reads a `key = value` bank config. Keys: categories, thresholds, levels,
// nms_iou, pooling, stats. Only `categories` is required.
inline BankConfig parse_bank_config(std::string_view data) {
  BankConfig cfg;
  for (const auto& [key, kv] : text::parse_key_values(data)) {
    if (key == "categories") cfg.categories = text::parse_name_list(kv.value);
    else if (key == "thresholds") cfg.thresholds = text::parse_real_list(kv.value, kv.line);
    else if (key == "levels") cfg.pyramid_levels = text::parse_int_list<std::uint32_t>(kv.value, kv.line);
    else if (key == "nms_iou") {
      auto v = text::parse_real(kv.value);
      if (!v) throw ParseError(kv.line, "bad nms_iou");
      cfg.nms_iou = *v;
    } else if (key == "pooling") {
      auto p = parse_pooling(kv.value);
      if (!p) throw ParseError(kv.line, "pooling must be mean, max or both");
      cfg.pooling = *p;
    } else if (key == "stats") cfg.statistics = parse_statistics(kv.value, kv.line);
    else throw ParseError(kv.line, "unknown config key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

inline std::string format_bank_config(const BankConfig& cfg) {
  std::string out = "categories = ";
  for (std::size_t i = 0; i < cfg.categories.size(); ++i) {
    if (i) out += ',';
    out += cfg.categories[i];
  }
  out += "\nthresholds = ";
  for (std::size_t i = 0; i < cfg.thresholds.size(); ++i) {
    if (i) out += ',';
    text::append_real(out, cfg.thresholds[i]);
  }
  out += "\nlevels = ";
  for (std::size_t i = 0; i < cfg.pyramid_levels.size(); ++i) {
    if (i) out += ',';
    text::append_int(out, cfg.pyramid_levels[i]);
  }
  out += "\nnms_iou = ";
  text::append_real(out, cfg.nms_iou);
  out += "\npooling = ";
  out += to_string(cfg.pooling);
  out += "\nstats = " + to_string(cfg.statistics) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Detection stream
// ---------------------------------------------------------------------------

namespace detail {

struct FrameBuilder {
  FrameDetections frame;
  bool dims_set = false;
};

struct VideoBuilder {
  std::optional<int> label;
  std::map<std::uint64_t, FrameBuilder> frames;
};

inline void set_frame_dims(FrameBuilder& fb, std::uint32_t w, std::uint32_t h, std::size_t line) {
  if (fb.dims_set && (fb.frame.width != w || fb.frame.height != h))
    throw ParseError(line, "frame " + std::to_string(fb.frame.frame_index) +
                               " has conflicting dimensions");
  fb.frame.width = w;
  fb.frame.height = h;
  fb.dims_set = true;
}

inline std::uint32_t parse_dimension(std::string_view s, const char* what, std::size_t line) {
  auto v = text::parse_int<std::int64_t>(s);
  if (!v) throw ParseError(line, std::string("bad ") + what + " '" + std::string(s) + "'");
  if (*v <= 0 || *v > std::int64_t{UINT32_MAX})
    throw ParseError(line, std::string("non-positive frame ") + what + " " + std::string(s));
  return static_cast<std::uint32_t>(*v);
}

inline std::uint64_t parse_frame_index(std::string_view s, std::size_t line) {
  auto v = text::parse_int<std::uint64_t>(s);
  if (!v) throw ParseError(line, "bad frame_index '" + std::string(s) + "'");
  return *v;
}

inline double parse_finite(std::string_view s, const char* what, std::size_t line) {
  auto v = text::parse_real(s);
  if (!v || !std::isfinite(*v))
    throw ParseError(line, std::string("bad ") + what + " '" + std::string(s) + "'");
  return *v;
}

}  // namespace detail

// Parses a detection stream. Categories are resolved against `categories`
// (the configured universe); an unknown name is an error. Videos come back
// sorted by video_id, frames ascending by frame_index, records in file order.
inline std::vector<VideoDetections> parse_detection_stream(std::string_view data,
                                                           const std::vector<std::string>& categories) {
  std::unordered_map<std::string_view, std::size_t> cat_index;
  for (std::size_t i = 0; i < categories.size(); ++i) cat_index.emplace(categories[i], i);

  std::map<std::string, detail::VideoBuilder, std::less<>> videos;
  auto video_for = [&](std::string_view id, std::size_t line) -> detail::VideoBuilder& {
    if (id.empty()) throw ParseError(line, "empty video_id");
    auto it = videos.find(id);
    if (it == videos.end()) it = videos.emplace(std::string(id), detail::VideoBuilder{}).first;
    return it->second;
  };
  auto frame_for = [](detail::VideoBuilder& v, std::uint64_t idx) -> detail::FrameBuilder& {
    auto [it, inserted] = v.frames.try_emplace(idx);
    if (inserted) it->second.frame.frame_index = idx;
    return it->second;
  };

  text::for_each_line(data, [&](std::size_t no, std::string_view line) {
    if (line.empty()) return;
    if (line.front() == '#') {
      auto f = text::split(line, '\t');
      if (f[0] == "#frame") {
        if (f.size() != 5) throw ParseError(no, "#frame directive needs 4 fields");
        auto& v = video_for(f[1], no);
        auto& fb = frame_for(v, detail::parse_frame_index(f[2], no));
        detail::set_frame_dims(fb, detail::parse_dimension(f[3], "width", no),
                               detail::parse_dimension(f[4], "height", no), no);
      } else if (f[0] == "#label") {
        if (f.size() != 3) throw ParseError(no, "#label directive needs 2 fields");
        auto label = text::parse_int<int>(f[2]);
        if (!label) throw ParseError(no, "bad label '" + std::string(f[2]) + "'");
        auto& v = video_for(f[1], no);
        if (v.label && *v.label != *label)
          throw ParseError(no, "conflicting labels for video '" + std::string(f[1]) + "'");
        v.label = *label;
      }
      return;
    }
    if (text::trim(line).empty()) return;

    auto f = text::split(line, '\t');
    if (f.size() != 10 && f.size() != 11)
      throw ParseError(no, "expected 10 or 11 tab-separated fields, got " + std::to_string(f.size()));
    auto& v = video_for(f[0], no);
    auto& fb = frame_for(v, detail::parse_frame_index(f[1], no));
    detail::set_frame_dims(fb, detail::parse_dimension(f[2], "width", no),
                           detail::parse_dimension(f[3], "height", no), no);
    auto cat = cat_index.find(f[4]);
    if (cat == cat_index.end()) throw ParseError(no, "unknown category '" + std::string(f[4]) + "'");

    DetectionRecord rec;
    rec.category = cat->second;
    rec.box.x1 = detail::parse_finite(f[5], "x1", no);
    rec.box.y1 = detail::parse_finite(f[6], "y1", no);
    rec.box.x2 = detail::parse_finite(f[7], "x2", no);
    rec.box.y2 = detail::parse_finite(f[8], "y2", no);
    rec.box.score = detail::parse_finite(f[9], "score", no);
    if (!(rec.box.x1 < rec.box.x2 && rec.box.y1 < rec.box.y2))
      throw ParseError(no, "box must satisfy x1 < x2 and y1 < y2");
    if (f.size() == 11 && !f[10].empty()) {
      auto s = text::parse_int<std::uint32_t>(f[10]);
      if (!s) throw ParseError(no, "bad scale '" + std::string(f[10]) + "'");
      rec.scale = *s;
    }
    fb.frame.detections.push_back(rec);
  });

  std::vector<VideoDetections> out;
  out.reserve(videos.size());
  for (auto& [id, vb] : videos) {
    VideoDetections v;
    v.video_id = id;
    v.label = vb.label;
    for (auto& [idx, fb] : vb.frames) v.frames.push_back(std::move(fb.frame));
    if (v.frames.empty()) throw Error("video '" + id + "' has no keyframes");
    out.push_back(std::move(v));
  }
  return out;
}

inline void append_detection_stream(std::string& out, const VideoDetections& video,
                                    const std::vector<std::string>& categories) {
  if (video.label) {
    out += "#label\t" + video.video_id + '\t';
    text::append_int(out, *video.label);
    out += '\n';
  }
  for (const auto& frame : video.frames) {
    out += "#frame\t" + video.video_id + '\t';
    text::append_int(out, frame.frame_index);
    out += '\t';
    text::append_int(out, frame.width);
    out += '\t';
    text::append_int(out, frame.height);
    out += '\n';
    for (const auto& d : frame.detections) {
      out += video.video_id;
      out += '\t';
      text::append_int(out, frame.frame_index);
      out += '\t';
      text::append_int(out, frame.width);
      out += '\t';
      text::append_int(out, frame.height);
      out += '\t';
      out += categories.at(d.category);
      for (double v : {d.box.x1, d.box.y1, d.box.x2, d.box.y2, d.box.score}) {
        out += '\t';
        text::append_real(out, v);
      }
      if (d.scale) {
        out += '\t';
        text::append_int(out, *d.scale);
      }
      out += '\n';
    }
  }
}

inline std::string write_detection_stream(const std::vector<VideoDetections>& videos,
                                          const std::vector<std::string>& categories) {
  std::string out;
  for (const auto& v : videos) append_detection_stream(out, v, categories);
  return out;
}

// Checks the per-video invariants (K >= 1, strictly ascending frames, box
// validity, category range).
inline void validate_video(const VideoDetections& v, std::size_t category_count) {
  if (v.frames.empty()) throw Error("video '" + v.video_id + "' has no keyframes");
  for (std::size_t i = 0; i < v.frames.size(); ++i) {
    const auto& f = v.frames[i];
    if (i > 0 && !(v.frames[i - 1].frame_index < f.frame_index))
      throw Error("video '" + v.video_id + "': frames not strictly ascending at frame " +
                  std::to_string(f.frame_index));
    if (f.width == 0 || f.height == 0)
      throw Error("video '" + v.video_id + "' frame " + std::to_string(f.frame_index) +
                  ": non-positive dimensions");
    for (const auto& d : f.detections) {
      if (d.category >= category_count)
        throw Error("video '" + v.video_id + "' frame " + std::to_string(f.frame_index) +
                    ": category index out of range");
      if (!d.box.valid())
        throw Error("video '" + v.video_id + "' frame " + std::to_string(f.frame_index) +
                    ": invalid box");
    }
  }
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

// Maps pixel boxes into [0,1]^2, clipping to the frame. Boxes with no area
// left after clipping are dropped and counted in `dropped`. The result has
// width = height = 1.
inline FrameDetections normalize_coordinates(const FrameDetections& frame, std::size_t* dropped = nullptr) {
  if (frame.width == 0 || frame.height == 0) throw Error("normalize: non-positive frame dimensions");
  const double w = frame.width;
  const double h = frame.height;
  FrameDetections out;
  out.frame_index = frame.frame_index;
  out.detections.reserve(frame.detections.size());
  std::size_t n_dropped = 0;
  for (const auto& d : frame.detections) {
    DetectionRecord r = d;
    r.box.x1 = std::clamp(d.box.x1 / w, 0.0, 1.0);
    r.box.x2 = std::clamp(d.box.x2 / w, 0.0, 1.0);
    r.box.y1 = std::clamp(d.box.y1 / h, 0.0, 1.0);
    r.box.y2 = std::clamp(d.box.y2 / h, 0.0, 1.0);
    if (r.box.x1 < r.box.x2 && r.box.y1 < r.box.y2) {
      out.detections.push_back(r);
    } else {
      ++n_dropped;
    }
  }
  if (dropped) *dropped += n_dropped;
  return out;
}

}  // namespace detbank
