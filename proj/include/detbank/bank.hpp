#pragma once

// Detection Bank statistics and video-level features.
//
// Per keyframe k, category c, region r and threshold t:
//   sum    D_S = sum of scores s >= t of detections centered in r
//   count  D_N = number of such detections
//   binary D_0 = [D_N > 0]
// Keyframe tensors are pooled elementwise (mean over all K frames, or max)
// into a sparse video vector with flat index ((c * R + r) * T + t) * S + s.
// With pooling = both the mean block precedes the max block.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "detbank/core.hpp"
#include "detbank/error.hpp"
#include "detbank/pyramid.hpp"
#include "detbank/suppress.hpp"
#include "detbank/text.hpp"

namespace detbank {

// Shape of a feature vector as carried by the feature-file header. C, R, T, S
// are zero and pooling is empty for vectors that are not a single bank block
// (fused or externally supplied features).
struct FeatureLayout {
  std::size_t dimension = 0;
  std::size_t categories = 0;
  std::size_t regions = 0;
  std::size_t thresholds = 0;
  std::size_t statistics = 0;
  std::optional<Pooling> pooling;

  static FeatureLayout for_config(const BankConfig& cfg) {
    FeatureLayout l;
    l.categories = cfg.categories.size();
    l.regions = 0;
    for (auto n : cfg.pyramid_levels) l.regions += std::size_t{n} * n;
    l.thresholds = cfg.thresholds.size();
    l.statistics = cfg.statistics.size();
    l.pooling = cfg.pooling;
    l.dimension = l.block_dimension() * pooling_blocks(cfg.pooling);
    return l;
  }

  static FeatureLayout opaque(std::size_t dim) {
    FeatureLayout l;
    l.dimension = dim;
    return l;
  }

  std::size_t block_dimension() const noexcept { return categories * regions * thresholds * statistics; }
  bool is_bank() const noexcept { return pooling.has_value(); }

  friend bool operator==(const FeatureLayout&, const FeatureLayout&) = default;
};

struct SparseEntry {
  std::uint32_t index = 0;
  double value = 0.0;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

struct FeatureVector {
  FeatureLayout layout;
  std::vector<SparseEntry> entries;  // strictly ascending index, nonzero values

  std::size_t dimension() const noexcept { return layout.dimension; }
  std::size_t nonzeros() const noexcept { return entries.size(); }

  double at(std::size_t index) const noexcept {
    auto it = std::lower_bound(entries.begin(), entries.end(), index,
                               [](const SparseEntry& e, std::size_t i) { return e.index < i; });
    return (it != entries.end() && it->index == index) ? it->value : 0.0;
  }

  std::vector<double> to_dense() const {
    std::vector<double> d(layout.dimension, 0.0);
    for (const auto& e : entries) d[e.index] = e.value;
    return d;
  }

  static FeatureVector from_dense(FeatureLayout layout, std::span<const double> dense) {
    FeatureVector f;
    f.layout = layout;
    for (std::size_t i = 0; i < dense.size(); ++i)
      if (dense[i] != 0.0) f.entries.push_back({static_cast<std::uint32_t>(i), dense[i]});
    return f;
  }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

inline double sparsity(const FeatureVector& f) noexcept {
  if (f.layout.dimension == 0) return 0.0;
  return static_cast<double>(f.entries.size()) / static_cast<double>(f.layout.dimension);
}

// ---------------------------------------------------------------------------
// Keyframe statistics
// ---------------------------------------------------------------------------

struct StatTensor {
  std::uint64_t frame_index = 0;
  std::size_t categories = 0;
  std::size_t regions = 0;
  std::size_t thresholds = 0;
  std::size_t statistics = 0;
  std::vector<double> values;

  std::size_t flat(std::size_t c, std::size_t r, std::size_t t, std::size_t s) const noexcept {
    return ((c * regions + r) * thresholds + t) * statistics + s;
  }
  double at(std::size_t c, std::size_t r, std::size_t t, std::size_t s) const noexcept {
    return values[flat(c, r, t, s)];
  }
  bool same_shape(const StatTensor& o) const noexcept {
    return categories == o.categories && regions == o.regions && thresholds == o.thresholds &&
           statistics == o.statistics && values.size() == o.values.size();
  }

  friend bool operator==(const StatTensor&, const StatTensor&) = default;
};

namespace detail {

// Accumulates one suppressed frame into a dense (c, r, t, s) buffer. Each
// touched (c, r, t) group base is appended once to `touched`, tracked via
// `group_seen` (one flag per group, must start cleared).
inline void accumulate_frame(const SuppressedFrame& frame, const Pyramid& pyramid, const BankConfig& config,
                             std::span<double> values, std::vector<std::uint32_t>& touched,
                             std::vector<char>& group_seen) {
  const std::size_t n_cat = config.categories.size();
  const std::size_t R = pyramid.region_count();
  const std::size_t T = config.thresholds.size();
  const std::size_t S = config.statistics.size();
  const int so = config.statistics.sum_offset();
  const int co = config.statistics.count_offset();
  const int bo = config.statistics.binary_offset();
  const auto& th = config.thresholds;

  std::size_t cells[64];
  std::vector<std::size_t> cell_heap;
  std::span<std::size_t> cell_span;
  if (pyramid.level_count() <= 64) {
    cell_span = std::span<std::size_t>(cells, pyramid.level_count());
  } else {
    cell_heap.resize(pyramid.level_count());
    cell_span = cell_heap;
  }

  for (const auto& d : frame.detections) {
    if (d.category >= n_cat) throw Error("frame statistics: detection category outside configuration");
    const double s = d.box.score;
    // thresholds t with s >= t form a prefix of the ascending list
    const auto n_pass = static_cast<std::size_t>(std::upper_bound(th.begin(), th.end(), s) - th.begin());
    if (n_pass == 0) continue;
    pyramid.membership(d.box.center(), cell_span);
    for (std::size_t r : cell_span) {
      const std::size_t group0 = (d.category * R + r) * T;
      for (std::size_t t = 0; t < n_pass; ++t) {
        const std::size_t group = group0 + t;
        const std::size_t base = group * S;
        if (!group_seen[group]) {
          group_seen[group] = 1;
          touched.push_back(static_cast<std::uint32_t>(group));
        }
        if (so >= 0) values[base + so] += s;
        if (co >= 0) values[base + co] += 1.0;
        if (bo >= 0) values[base + bo] = 1.0;
      }
    }
  }
}

}  // namespace detail

// Statistics of one suppressed, normalized keyframe.
inline StatTensor frame_statistics(const SuppressedFrame& frame, const Pyramid& pyramid, const BankConfig& config) {
  StatTensor out;
  out.frame_index = frame.frame_index;
  out.categories = config.categories.size();
  out.regions = pyramid.region_count();
  out.thresholds = config.thresholds.size();
  out.statistics = config.statistics.size();
  const std::size_t groups = out.categories * out.regions * out.thresholds;
  out.values.assign(groups * out.statistics, 0.0);
  std::vector<std::uint32_t> touched;
  std::vector<char> seen(groups, 0);
  detail::accumulate_frame(frame, pyramid, config, out.values, touched, seen);
  return out;
}

// Elementwise pooling of keyframe tensors. Mean sums in the given order and
// divides by K, counting frames without detections.
inline FeatureVector pool_video(std::span<const StatTensor> tensors, Pooling mode) {
  if (tensors.empty()) throw Error("empty video");
  const auto& first = tensors.front();
  for (const auto& t : tensors)
    if (!t.same_shape(first)) throw Error("pool: keyframe tensor layout mismatch");

  FeatureLayout layout;
  layout.categories = first.categories;
  layout.regions = first.regions;
  layout.thresholds = first.thresholds;
  layout.statistics = first.statistics;
  layout.pooling = mode;
  const std::size_t block = first.values.size();
  layout.dimension = block * pooling_blocks(mode);

  std::vector<double> dense(layout.dimension, 0.0);
  const double K = static_cast<double>(tensors.size());
  if (mode != Pooling::max) {
    for (std::size_t i = 0; i < block; ++i) {
      double acc = 0.0;
      for (const auto& t : tensors) acc += t.values[i];
      dense[i] = acc / K;
    }
  }
  if (mode != Pooling::mean) {
    const std::size_t off = mode == Pooling::both ? block : 0;
    for (std::size_t i = 0; i < block; ++i) {
      double m = tensors.front().values[i];
      for (const auto& t : tensors) m = std::max(m, t.values[i]);
      dense[off + i] = m;
    }
  }
  return FeatureVector::from_dense(layout, dense);
}

// Reusable per-thread extraction state: suppress, accumulate and pool the
// keyframes of one video at a time without materializing dense keyframe
// tensors. Produces bit-identical output to the dense path.
class Extractor {
 public:
  explicit Extractor(BankConfig config) : config_(std::move(config)), pyramid_(config_.pyramid_levels) {
    config_.validate();
    layout_ = FeatureLayout::for_config(config_);
    const std::size_t groups = config_.categories.size() * pyramid_.region_count() * config_.thresholds.size();
    const std::size_t block = groups * config_.statistics.size();
    frame_values_.assign(block, 0.0);
    group_seen_.assign(groups, 0);
    video_sum_.assign(block, 0.0);
    video_max_.assign(block, 0.0);
    video_frames_.assign(groups, 0);
  }

  const BankConfig& config() const noexcept { return config_; }
  const Pyramid& pyramid() const noexcept { return pyramid_; }
  const FeatureLayout& layout() const noexcept { return layout_; }

  // Number of boxes dropped by normalization so far.
  std::size_t dropped_boxes() const noexcept { return dropped_; }
  std::size_t processed_detections() const noexcept { return detections_; }

  FeatureVector assemble(const VideoDetections& video) {
    if (video.frames.empty()) throw Error("video '" + video.video_id + "': empty video");
    const std::size_t S = config_.statistics.size();
    video_groups_.clear();

    for (const auto& raw : video.frames) {
      detections_ += raw.detections.size();
      auto frame = normalize_coordinates(raw, &dropped_);
      auto image = build_detection_image(frame, config_);
      frame_groups_.clear();
      detail::accumulate_frame(image, pyramid_, config_, frame_values_, frame_groups_, group_seen_);
      for (auto g : frame_groups_) {
        group_seen_[g] = 0;
        if (video_frames_[g] == 0) video_groups_.push_back(g);
        const std::size_t base = std::size_t{g} * S;
        for (std::size_t s = 0; s < S; ++s) {
          const double v = frame_values_[base + s];
          if (video_frames_[g] == 0) {
            video_sum_[base + s] = v;
            video_max_[base + s] = v;
          } else {
            video_sum_[base + s] += v;
            video_max_[base + s] = std::max(video_max_[base + s], v);
          }
          frame_values_[base + s] = 0.0;
        }
        ++video_frames_[g];
      }
    }

    std::sort(video_groups_.begin(), video_groups_.end());
    const double K = static_cast<double>(video.frames.size());
    const std::size_t block = layout_.block_dimension();
    FeatureVector out;
    out.layout = layout_;
    std::vector<SparseEntry> max_block;
    for (auto g : video_groups_) {
      const std::size_t base = std::size_t{g} * S;
      const bool all_frames = video_frames_[g] == video.frames.size();
      for (std::size_t s = 0; s < S; ++s) {
        const auto idx = static_cast<std::uint32_t>(base + s);
        if (config_.pooling != Pooling::max) {
          const double m = video_sum_[base + s] / K;
          if (m != 0.0) out.entries.push_back({idx, m});
        }
        if (config_.pooling != Pooling::mean) {
          double m = video_max_[base + s];
          if (!all_frames) m = std::max(m, 0.0);
          const auto off = static_cast<std::uint32_t>(config_.pooling == Pooling::both ? block : 0);
          if (m != 0.0) max_block.push_back({idx + off, m});
        }
        video_sum_[base + s] = 0.0;
        video_max_[base + s] = 0.0;
      }
      video_frames_[g] = 0;
    }
    if (config_.pooling == Pooling::max) {
      out.entries = std::move(max_block);
    } else {
      out.entries.insert(out.entries.end(), max_block.begin(), max_block.end());
    }
    return out;
  }

 private:
  BankConfig config_;
  Pyramid pyramid_;
  FeatureLayout layout_;
  std::vector<double> frame_values_;
  std::vector<char> group_seen_;
  std::vector<std::uint32_t> frame_groups_;
  std::vector<double> video_sum_;
  std::vector<double> video_max_;
  std::vector<std::size_t> video_frames_;
  std::vector<std::uint32_t> video_groups_;
  std::size_t dropped_ = 0;
  std::size_t detections_ = 0;
};

// Video feature for one video: normalize, suppress, accumulate per keyframe,
// pool per configured mode.
inline FeatureVector assemble_feature(const VideoDetections& video, const BankConfig& config) {
  Extractor ex(config);
  return ex.assemble(video);
}

// ---------------------------------------------------------------------------
// Feature files
//
//   #DB v1 dim=<D> C=<C> R=<R> T=<T> S=<S> pooling=<mean|max|both|none>
//   <video_id> <label|?> <idx>:<val> <idx>:<val> ...
//
// Indices are 0-based flat indices in strictly ascending order; values use
// 17 significant digits.
// ---------------------------------------------------------------------------

struct FeatureRecord {
  std::string video_id;
  std::optional<int> label;
  FeatureVector feature;

  friend bool operator==(const FeatureRecord&, const FeatureRecord&) = default;
};

struct FeatureFile {
  FeatureLayout layout;
  std::vector<FeatureRecord> records;

  friend bool operator==(const FeatureFile&, const FeatureFile&) = default;
};

inline std::string format_feature_header(const FeatureLayout& l) {
  std::string out = "#DB v1 dim=";
  text::append_int(out, l.dimension);
  out += " C=";
  text::append_int(out, l.categories);
  out += " R=";
  text::append_int(out, l.regions);
  out += " T=";
  text::append_int(out, l.thresholds);
  out += " S=";
  text::append_int(out, l.statistics);
  out += " pooling=";
  out += l.pooling ? to_string(*l.pooling) : std::string_view("none");
  out += '\n';
  return out;
}

inline void append_sparse_payload(std::string& out, std::span<const SparseEntry> entries) {
  for (const auto& e : entries) {
    out += ' ';
    text::append_int(out, e.index);
    out += ':';
    text::append_real(out, e.value);
  }
}

inline void append_feature_record(std::string& out, const FeatureRecord& rec) {
  out += rec.video_id;
  out += ' ';
  if (rec.label) text::append_int(out, *rec.label);
  else out += '?';
  append_sparse_payload(out, rec.feature.entries);
  out += '\n';
}

inline std::string write_feature_file(const FeatureFile& file) {
  std::string out = format_feature_header(file.layout);
  for (const auto& r : file.records) append_feature_record(out, r);
  return out;
}

// Single vector with a placeholder id.
inline std::string serialize_feature(const FeatureVector& f, std::string_view video_id = "-",
                                     std::optional<int> label = std::nullopt) {
  FeatureFile file;
  file.layout = f.layout;
  file.records.push_back({std::string(video_id), label, f});
  return write_feature_file(file);
}

namespace detail {

inline FeatureLayout parse_feature_header(std::string_view line, std::size_t no) {
  auto tok = text::split_ws(line);
  if (tok.size() < 3 || tok[0] != "#DB" || tok[1] != "v1") throw ParseError(no, "expected '#DB v1' header");
  FeatureLayout l;
  bool have_dim = false;
  for (std::size_t i = 2; i < tok.size(); ++i) {
    auto eq = tok[i].find('=');
    if (eq == std::string_view::npos) throw ParseError(no, "header field " + std::to_string(i + 1) + ": expected key=value");
    auto key = tok[i].substr(0, eq);
    auto val = tok[i].substr(eq + 1);
    if (key == "pooling") {
      if (val == "none") l.pooling.reset();
      else if (auto p = parse_pooling(val)) l.pooling = *p;
      else throw ParseError(no, "header field " + std::to_string(i + 1) + ": bad pooling '" + std::string(val) + "'");
      continue;
    }
    auto v = text::parse_int<std::size_t>(val);
    if (!v) throw ParseError(no, "header field " + std::to_string(i + 1) + ": bad value '" + std::string(val) + "'");
    if (key == "dim") {
      l.dimension = *v;
      have_dim = true;
    } else if (key == "C") l.categories = *v;
    else if (key == "R") l.regions = *v;
    else if (key == "T") l.thresholds = *v;
    else if (key == "S") l.statistics = *v;
    else throw ParseError(no, "header field " + std::to_string(i + 1) + ": unknown key '" + std::string(key) + "'");
  }
  if (!have_dim) throw ParseError(no, "header lacks dim=");
  if (l.dimension > UINT32_MAX) throw ParseError(no, "dimension too large");
  if (l.pooling && l.block_dimension() * pooling_blocks(*l.pooling) != l.dimension)
    throw ParseError(no, "dim does not equal C*R*T*S per pooling block");
  return l;
}

}  // namespace detail

inline FeatureFile read_feature_file(std::string_view data) {
  FeatureFile file;
  bool have_header = false;
  text::for_each_line(data, [&](std::size_t no, std::string_view line) {
    if (text::trim(line).empty()) return;
    if (!have_header) {
      file.layout = detail::parse_feature_header(line, no);
      have_header = true;
      return;
    }
    if (line.front() == '#') return;
    auto tok = text::split_ws(line);
    if (tok.size() < 2) throw ParseError(no, "expected '<video_id> <label>' before payload");
    FeatureRecord rec;
    rec.video_id = std::string(tok[0]);
    if (tok[1] != "?") {
      auto lab = text::parse_int<int>(tok[1]);
      if (!lab) throw ParseError(no, "field 2: bad label '" + std::string(tok[1]) + "'");
      rec.label = *lab;
    }
    rec.feature.layout = file.layout;
    rec.feature.entries.reserve(tok.size() - 2);
    long long prev = -1;
    for (std::size_t i = 2; i < tok.size(); ++i) {
      const auto field = "field " + std::to_string(i + 1);
      auto colon = tok[i].find(':');
      if (colon == std::string_view::npos) throw ParseError(no, field + ": expected idx:val");
      auto idx = text::parse_int<std::uint64_t>(tok[i].substr(0, colon));
      auto val = text::parse_real(tok[i].substr(colon + 1));
      if (!idx) throw ParseError(no, field + ": bad index");
      if (!val || !std::isfinite(*val)) throw ParseError(no, field + ": bad value");
      if (*idx >= file.layout.dimension)
        throw ParseError(no, field + ": index " + std::to_string(*idx) + " >= dim " + std::to_string(file.layout.dimension));
      if (static_cast<long long>(*idx) <= prev) throw ParseError(no, field + ": indices must be strictly ascending");
      prev = static_cast<long long>(*idx);
      if (*val != 0.0) rec.feature.entries.push_back({static_cast<std::uint32_t>(*idx), *val});
    }
    file.records.push_back(std::move(rec));
  });
  if (!have_header) throw ParseError(0, "feature file lacks '#DB v1' header");
  return file;
}

// Reads a single-vector serialization (header plus at most one line).
inline FeatureVector deserialize_feature(std::string_view data) {
  auto file = read_feature_file(data);
  if (file.records.size() > 1) throw ParseError(0, "expected a single feature vector");
  if (file.records.empty()) {
    FeatureVector f;
    f.layout = file.layout;
    return f;
  }
  return std::move(file.records.front().feature);
}

}  // namespace detbank
