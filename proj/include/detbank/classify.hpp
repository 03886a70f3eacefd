#pragma once

// Forced-choice event classification: stratified corpus splits, one-vs-rest
// linear hinge-loss training, accuracy, DET curves, and feature fusion.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "detbank/bank.hpp"
#include "detbank/error.hpp"
#include "detbank/parallel.hpp"
#include "detbank/random.hpp"
#include "detbank/text.hpp"

namespace detbank {

struct LabeledFeatureSet {
  FeatureLayout layout;
  std::vector<std::string> ids;
  std::vector<FeatureVector> features;
  std::vector<int> labels;

  std::size_t size() const noexcept { return features.size(); }
  bool empty() const noexcept { return features.empty(); }

  void validate() const {
    if (features.size() != labels.size() || features.size() != ids.size())
      throw Error("feature set: ids, features and labels differ in length");
    for (std::size_t i = 0; i < features.size(); ++i)
      if (features[i].layout.dimension != layout.dimension)
        throw Error("feature set: video '" + ids[i] + "' has dimension " +
                    std::to_string(features[i].layout.dimension) + ", expected " +
                    std::to_string(layout.dimension));
  }

  // Sorted distinct labels.
  std::vector<int> classes() const {
    std::vector<int> c(labels);
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    return c;
  }

  LabeledFeatureSet subset(std::span<const std::size_t> idx) const {
    LabeledFeatureSet out;
    out.layout = layout;
    for (auto i : idx) {
      out.ids.push_back(ids[i]);
      out.features.push_back(features[i]);
      out.labels.push_back(labels[i]);
    }
    return out;
  }

  static LabeledFeatureSet from_file(const FeatureFile& file) {
    LabeledFeatureSet out;
    out.layout = file.layout;
    for (const auto& r : file.records) {
      if (!r.label) throw Error("video '" + r.video_id + "' has no label");
      out.ids.push_back(r.video_id);
      out.features.push_back(r.feature);
      out.labels.push_back(*r.label);
    }
    return out;
  }

  FeatureFile to_file() const {
    FeatureFile f;
    f.layout = layout;
    for (std::size_t i = 0; i < size(); ++i) f.records.push_back({ids[i], labels[i], features[i]});
    return f;
  }
};

// ---------------------------------------------------------------------------
// Splitting
// ---------------------------------------------------------------------------

struct SplitRatios {
  double train = 0.4;
  double validation = 0.2;
  double test = 0.4;

  void validate() const {
    if (!(train > 0.0 && validation > 0.0 && test > 0.0)) throw Error("split ratios must be positive");
    if (std::abs(train + validation + test - 1.0) > 1e-9) throw Error("split ratios must sum to 1");
  }

  friend bool operator==(const SplitRatios&, const SplitRatios&) = default;
};

struct SplitIndices {
  std::vector<std::size_t> train, validation, test;
  std::vector<int> undersized_classes;  // placed wholly in training
};

// Stratified split of item positions. Global sizes are floor(ratio * N) for
// train and validation with the remainder in test; every class with >= 3
// members has at least one item in every split. Per-class shares are
// allocated by largest remainder, ties by ascending class label.
inline SplitIndices split_indices(std::span<const int> labels, const SplitRatios& ratios, std::uint64_t seed) {
  ratios.validate();
  const std::size_t n = labels.size();
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < n; ++i) by_class[labels[i]].push_back(i);

  // independent deterministic shuffle per class
  std::size_t ci = 0;
  for (auto& [label, items] : by_class) {
    Rng rng(derive_seed(seed, 0x5b1c, static_cast<std::uint64_t>(ci++)));
    rng.shuffle(std::span<std::size_t>(items));
  }

  const auto target_train = static_cast<std::size_t>(std::floor(ratios.train * static_cast<double>(n)));
  const auto target_val = static_cast<std::size_t>(std::floor(ratios.validation * static_cast<double>(n)));

  struct Alloc {
    int label;
    std::size_t n, train, val;
    bool eligible;
  };
  std::vector<Alloc> alloc;
  SplitIndices out;
  std::size_t sum_train = 0, sum_val = 0;
  for (const auto& [label, items] : by_class) {
    Alloc a{label, items.size(), 0, 0, items.size() >= 3};
    if (!a.eligible) {
      a.train = a.n;
      out.undersized_classes.push_back(label);
    } else {
      a.train = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(ratios.train * a.n)));
      a.val = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(ratios.validation * a.n)));
      while (a.train + a.val >= a.n) {  // keep one for test
        if (a.train >= a.val && a.train > 1) --a.train;
        else --a.val;
      }
    }
    sum_train += a.train;
    sum_val += a.val;
    alloc.push_back(a);
  }

  // Move single items between test and the given split to approach the
  // global target, preferring classes whose exact share is furthest off.
  auto rebalance = [&](std::size_t Alloc::*field, double ratio, std::size_t& sum, std::size_t target) {
    while (sum != target) {
      const bool grow = sum < target;
      std::optional<std::size_t> best;
      double best_gap = 0.0;
      for (std::size_t k = 0; k < alloc.size(); ++k) {
        auto& a = alloc[k];
        if (!a.eligible) continue;
        const std::size_t test_n = a.n - a.train - a.val;
        if (grow && test_n <= 1) continue;
        if (!grow && a.*field <= 1) continue;
        const double gap = grow ? ratio * a.n - a.*field : a.*field - ratio * a.n;
        if (!best || gap > best_gap) {
          best = k;
          best_gap = gap;
        }
      }
      if (!best) break;
      if (grow) {
        ++(alloc[*best].*field);
        ++sum;
      } else {
        --(alloc[*best].*field);
        --sum;
      }
    }
  };
  rebalance(&Alloc::train, ratios.train, sum_train, target_train);
  rebalance(&Alloc::val, ratios.validation, sum_val, target_val);

  std::size_t k = 0;
  for (const auto& [label, items] : by_class) {
    const auto& a = alloc[k++];
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i < a.train) out.train.push_back(items[i]);
      else if (i < a.train + a.val) out.validation.push_back(items[i]);
      else out.test.push_back(items[i]);
    }
  }
  for (auto* v : {&out.train, &out.validation, &out.test}) std::sort(v->begin(), v->end());
  return out;
}

struct CorpusSplit {
  LabeledFeatureSet train, validation, test;
  std::vector<int> undersized_classes;
};

inline CorpusSplit split_corpus(const LabeledFeatureSet& set, const SplitRatios& ratios, std::uint64_t seed) {
  auto idx = split_indices(set.labels, ratios, seed);
  return {set.subset(idx.train), set.subset(idx.validation), set.subset(idx.test), idx.undersized_classes};
}

// ---------------------------------------------------------------------------
// Linear one-vs-rest model
// ---------------------------------------------------------------------------

struct TrainOptions {
  std::size_t epochs = 50;
  bool maxabs_scaling = false;
  std::size_t jobs = 1;
};

struct LinearOvrModel {
  std::vector<int> classes;
  std::size_t dimension = 0;
  std::vector<std::vector<double>> weights;  // one dense vector per class
  std::vector<double> biases;
  double reg = 0.0;
  std::uint64_t seed = 0;
  std::size_t epochs = 0;
  bool maxabs_scaling = false;
  SplitRatios split;           // protocol used to carve the training set
  std::uint64_t split_seed = 0;

  double decision(std::size_t k, const FeatureVector& f) const {
    double acc = biases[k];
    const auto& w = weights[k];
    for (const auto& e : f.entries) acc += w[e.index] * e.value;
    return acc;
  }

  friend bool operator==(const LinearOvrModel&, const LinearOvrModel&) = default;
};

inline std::vector<double> decision_values(const LinearOvrModel& model, const FeatureVector& f) {
  if (f.layout.dimension != model.dimension)
    throw Error("dimension mismatch: feature has " + std::to_string(f.layout.dimension) + ", model expects " +
                std::to_string(model.dimension));
  std::vector<double> out(model.classes.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = model.decision(k, f);
  return out;
}

// Argmax over class decision values; ties go to the lowest class index.
inline int predict_forced_choice(const LinearOvrModel& model, const FeatureVector& f) {
  auto d = decision_values(model, f);
  std::size_t best = 0;
  for (std::size_t k = 1; k < d.size(); ++k)
    if (d[k] > d[best]) best = k;
  return model.classes[best];
}

inline double accuracy(const LinearOvrModel& model, const LabeledFeatureSet& set) {
  if (set.empty()) throw Error("accuracy of an empty set");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < set.size(); ++i)
    if (predict_forced_choice(model, set.features[i]) == set.labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(set.size());
}

namespace detail {

// Pegasos-style stochastic subgradient descent on
//   reg/2 |w|^2 + mean_i max(0, 1 - y_i (w.x_i + b))
// with the bias as a weight on a constant feature. w is kept as scale * v so
// the shrink step is O(1) on sparse inputs.
inline void train_binary(const LabeledFeatureSet& set, int positive, double reg, std::size_t epochs, std::uint64_t seed,
                         std::vector<double>& w_out, double& b_out) {
  const std::size_t n = set.size();
  std::vector<double> v(set.layout.dimension, 0.0);
  double vb = 0.0;
  double scale = 1.0;
  std::vector<std::size_t> order(n);
  std::uint64_t t = 0;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(seed, 0x7a11, epoch));
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (reg * static_cast<double>(t));
      const double y = set.labels[i] == positive ? 1.0 : -1.0;
      const auto& x = set.features[i];
      double margin = vb;
      for (const auto& e : x.entries) margin += v[e.index] * e.value;
      margin *= scale * y;

      const double shrink = 1.0 - eta * reg;
      if (shrink <= 0.0) {
        std::fill(v.begin(), v.end(), 0.0);
        vb = 0.0;
        scale = 1.0;
      } else {
        scale *= shrink;
      }
      if (margin < 1.0) {
        const double step = eta * y / scale;
        for (const auto& e : x.entries) v[e.index] += step * e.value;
        vb += step;
      }
      if (scale < 1e-9) {
        for (auto& vi : v) vi *= scale;
        vb *= scale;
        scale = 1.0;
      }
    }
  }
  for (auto& vi : v) vi *= scale;
  w_out = std::move(v);
  b_out = vb * scale;
}

}  // namespace detail

// Per-dimension max |x| over a set; dimensions that are all zero get 1.
inline std::vector<double> maxabs_scales(const LabeledFeatureSet& set) {
  std::vector<double> s(set.layout.dimension, 0.0);
  for (const auto& f : set.features)
    for (const auto& e : f.entries) s[e.index] = std::max(s[e.index], std::abs(e.value));
  for (auto& v : s)
    if (v == 0.0) v = 1.0;
  return s;
}

inline LabeledFeatureSet apply_scales(const LabeledFeatureSet& set, std::span<const double> scales) {
  LabeledFeatureSet out = set;
  for (auto& f : out.features)
    for (auto& e : f.entries) e.value /= scales[e.index];
  return out;
}

// One-vs-rest linear max-margin training. Deterministic for fixed
// (data, reg, seed, epochs) regardless of `jobs`. With max-abs scaling the
// scale factors are folded into the returned weights, so the model applies
// to unscaled features.
inline LinearOvrModel train_ovr_linear(const LabeledFeatureSet& train, double reg, std::uint64_t seed,
                                       const TrainOptions& opts = {}) {
  train.validate();
  if (!(reg > 0.0) || !std::isfinite(reg)) throw Error("regularization must be positive");
  auto classes = train.classes();
  if (classes.size() < 2) throw Error("training set needs at least two classes");

  std::vector<double> scales;
  const LabeledFeatureSet* data = &train;
  LabeledFeatureSet scaled;
  if (opts.maxabs_scaling) {
    scales = maxabs_scales(train);
    scaled = apply_scales(train, scales);
    data = &scaled;
  }

  LinearOvrModel model;
  model.classes = classes;
  model.dimension = train.layout.dimension;
  model.reg = reg;
  model.seed = seed;
  model.epochs = opts.epochs;
  model.maxabs_scaling = opts.maxabs_scaling;
  model.weights.resize(classes.size());
  model.biases.resize(classes.size());
  parallel_for(classes.size(), opts.jobs, [&](std::size_t, std::size_t k) {
    detail::train_binary(*data, classes[k], reg, opts.epochs, seed, model.weights[k], model.biases[k]);
    if (opts.maxabs_scaling)
      for (std::size_t d = 0; d < model.dimension; ++d) model.weights[k][d] /= scales[d];
  });
  return model;
}

inline const std::vector<double>& default_reg_grid() {
  static const std::vector<double> g{1e-4, 1e-3, 1e-2, 1e-1};
  return g;
}

struct RegSelection {
  double reg = 0.0;
  std::vector<std::pair<double, double>> validation_accuracy;  // (reg, accuracy)
};

// Picks the grid value with the highest validation accuracy; ties go to the
// earlier grid entry.
inline RegSelection select_regularization(const LabeledFeatureSet& train, const LabeledFeatureSet& validation,
                                          std::span<const double> grid, std::uint64_t seed,
                                          const TrainOptions& opts = {}) {
  if (grid.empty()) throw Error("empty regularization grid");
  RegSelection sel;
  double best = -1.0;
  for (double reg : grid) {
    auto m = train_ovr_linear(train, reg, seed, opts);
    const double acc = accuracy(m, validation);
    sel.validation_accuracy.emplace_back(reg, acc);
    if (acc > best) {
      best = acc;
      sel.reg = reg;
    }
  }
  return sel;
}

// ---------------------------------------------------------------------------
// DET curves
// ---------------------------------------------------------------------------

struct DetPoint {
  double false_alarm = 0.0;
  double miss = 0.0;

  friend bool operator==(const DetPoint&, const DetPoint&) = default;
};

// Sweeps a decision threshold from +inf down through every distinct score.
// Starts at (0, 1), ends at (1, 0); false-alarm rate is non-decreasing and
// miss rate non-increasing along the result.
inline std::vector<DetPoint> det_curve_from_scores(std::span<const double> scores, std::span<const char> positive) {
  if (scores.size() != positive.size()) throw Error("det: score and label counts differ");
  std::size_t P = 0;
  for (char p : positive) P += p ? 1 : 0;
  const std::size_t N = scores.size() - P;
  if (P == 0) throw Error("det: no positive examples");
  if (N == 0) throw Error("det: no negative examples");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<DetPoint> curve{{0.0, 1.0}};
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      if (positive[order[i]]) ++tp;
      else ++fp;
      ++i;
    }
    curve.push_back({static_cast<double>(fp) / N, static_cast<double>(P - tp) / P});
  }
  return curve;
}

inline std::vector<DetPoint> det_curve(const LinearOvrModel& model, const LabeledFeatureSet& set, int event) {
  auto it = std::find(model.classes.begin(), model.classes.end(), event);
  if (it == model.classes.end()) throw Error("det: class " + std::to_string(event) + " not in model");
  const auto k = static_cast<std::size_t>(it - model.classes.begin());
  std::vector<double> scores;
  std::vector<char> pos;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (set.features[i].layout.dimension != model.dimension) throw Error("det: dimension mismatch");
    scores.push_back(model.decision(k, set.features[i]));
    pos.push_back(set.labels[i] == event ? 1 : 0);
  }
  return det_curve_from_scores(scores, pos);
}

// Curve point closest to false_alarm == miss.
inline DetPoint equal_error_point(std::span<const DetPoint> curve) {
  if (curve.empty()) throw Error("det: empty curve");
  DetPoint best = curve.front();
  for (const auto& p : curve)
    if (std::abs(p.false_alarm - p.miss) < std::abs(best.false_alarm - best.miss)) best = p;
  return best;
}

inline std::string format_det_curve(std::span<const DetPoint> curve) {
  std::string out = "# false_alarm miss\n";
  for (const auto& p : curve) {
    text::append_real(out, p.false_alarm);
    out += ' ';
    text::append_real(out, p.miss);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fusion
// ---------------------------------------------------------------------------

// Concatenates per-video vectors with index offsets equal to the cumulative
// input dimensions. When at most one input has a nonzero dimension its
// layout is kept, so fusing with an empty set is the identity.
inline LabeledFeatureSet fuse_features(std::span<const LabeledFeatureSet> sets) {
  if (sets.empty()) throw Error("fuse: no inputs");
  const auto& ref = sets.front();
  for (const auto& s : sets) {
    s.validate();
    if (s.size() != ref.size()) throw Error("fuse: inputs hold different numbers of videos");
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s.ids[i] != ref.ids[i] || s.labels[i] != ref.labels[i])
        throw Error("fuse: video order or label mismatch at '" + ref.ids[i] + "'");
    }
  }

  std::size_t total = 0;
  std::size_t nonempty = 0;
  const LabeledFeatureSet* only = &ref;
  for (const auto& s : sets) {
    total += s.layout.dimension;
    if (s.layout.dimension > 0) {
      ++nonempty;
      only = &s;
    }
  }
  if (total > UINT32_MAX) throw Error("fuse: fused dimension too large");
  if (nonempty <= 1) {
    LabeledFeatureSet out = *only;
    out.ids = ref.ids;
    out.labels = ref.labels;
    return out;
  }

  LabeledFeatureSet out;
  out.layout = FeatureLayout::opaque(total);
  out.ids = ref.ids;
  out.labels = ref.labels;
  out.features.resize(ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    auto& f = out.features[i];
    f.layout = out.layout;
    std::uint32_t offset = 0;
    for (const auto& s : sets) {
      for (const auto& e : s.features[i].entries) f.entries.push_back({e.index + offset, e.value});
      offset += static_cast<std::uint32_t>(s.layout.dimension);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model files
//
//   #DBMODEL v1 dim=<D> classes=<c1,c2,...> reg=<r> seed=<s> epochs=<e>
//       scaling=<none|maxabs> split=<tr,va,te> split_seed=<s>      (one line)
//   <class> <bias> <idx>:<w> ...                                 (per class)
// ---------------------------------------------------------------------------

inline std::string write_model(const LinearOvrModel& m) {
  std::string out = "#DBMODEL v1 dim=";
  text::append_int(out, m.dimension);
  out += " classes=";
  for (std::size_t k = 0; k < m.classes.size(); ++k) {
    if (k) out += ',';
    text::append_int(out, m.classes[k]);
  }
  out += " reg=";
  text::append_real(out, m.reg);
  out += " seed=";
  text::append_int(out, m.seed);
  out += " epochs=";
  text::append_int(out, m.epochs);
  out += m.maxabs_scaling ? " scaling=maxabs" : " scaling=none";
  out += " split=";
  text::append_real(out, m.split.train);
  out += ',';
  text::append_real(out, m.split.validation);
  out += ',';
  text::append_real(out, m.split.test);
  out += " split_seed=";
  text::append_int(out, m.split_seed);
  out += '\n';
  for (std::size_t k = 0; k < m.classes.size(); ++k) {
    text::append_int(out, m.classes[k]);
    out += ' ';
    text::append_real(out, m.biases[k]);
    for (std::size_t d = 0; d < m.dimension; ++d) {
      if (m.weights[k][d] == 0.0) continue;
      out += ' ';
      text::append_int(out, d);
      out += ':';
      text::append_real(out, m.weights[k][d]);
    }
    out += '\n';
  }
  return out;
}

inline LinearOvrModel read_model(std::string_view data) {
  LinearOvrModel m;
  bool have_header = false;
  std::size_t next_class = 0;
  text::for_each_line(data, [&](std::size_t no, std::string_view line) {
    if (text::trim(line).empty()) return;
    auto tok = text::split_ws(line);
    if (!have_header) {
      if (tok.size() < 2 || tok[0] != "#DBMODEL" || tok[1] != "v1") throw ParseError(no, "expected '#DBMODEL v1' header");
      bool have_dim = false, have_classes = false;
      for (std::size_t i = 2; i < tok.size(); ++i) {
        auto eq = tok[i].find('=');
        if (eq == std::string_view::npos) throw ParseError(no, "header field " + std::to_string(i + 1) + ": expected key=value");
        auto key = tok[i].substr(0, eq);
        auto val = tok[i].substr(eq + 1);
        if (key == "dim") {
          auto v = text::parse_int<std::size_t>(val);
          if (!v) throw ParseError(no, "bad dim");
          m.dimension = *v;
          have_dim = true;
        } else if (key == "classes") {
          m.classes = text::parse_int_list<int>(val, no);
          have_classes = true;
        } else if (key == "reg") {
          auto v = text::parse_real(val);
          if (!v) throw ParseError(no, "bad reg");
          m.reg = *v;
        } else if (key == "seed") {
          auto v = text::parse_int<std::uint64_t>(val);
          if (!v) throw ParseError(no, "bad seed");
          m.seed = *v;
        } else if (key == "epochs") {
          auto v = text::parse_int<std::size_t>(val);
          if (!v) throw ParseError(no, "bad epochs");
          m.epochs = *v;
        } else if (key == "scaling") {
          if (val != "none" && val != "maxabs") throw ParseError(no, "bad scaling");
          m.maxabs_scaling = val == "maxabs";
        } else if (key == "split") {
          auto r = text::parse_real_list(val, no);
          if (r.size() != 3) throw ParseError(no, "split needs three ratios");
          m.split = {r[0], r[1], r[2]};
        } else if (key == "split_seed") {
          auto v = text::parse_int<std::uint64_t>(val);
          if (!v) throw ParseError(no, "bad split_seed");
          m.split_seed = *v;
        } else {
          throw ParseError(no, "unknown header key '" + std::string(key) + "'");
        }
      }
      if (!have_dim || !have_classes) throw ParseError(no, "header needs dim= and classes=");
      m.weights.assign(m.classes.size(), std::vector<double>(m.dimension, 0.0));
      m.biases.assign(m.classes.size(), 0.0);
      have_header = true;
      return;
    }
    if (line.front() == '#') return;
    if (next_class >= m.classes.size()) throw ParseError(no, "more weight lines than classes");
    if (tok.size() < 2) throw ParseError(no, "expected '<class> <bias>'");
    auto cls = text::parse_int<int>(tok[0]);
    if (!cls || *cls != m.classes[next_class]) throw ParseError(no, "field 1: expected class " + std::to_string(m.classes[next_class]));
    auto bias = text::parse_real(tok[1]);
    if (!bias || !std::isfinite(*bias)) throw ParseError(no, "field 2: bad bias");
    m.biases[next_class] = *bias;
    for (std::size_t i = 2; i < tok.size(); ++i) {
      auto colon = tok[i].find(':');
      auto idx = colon == std::string_view::npos ? std::nullopt : text::parse_int<std::size_t>(tok[i].substr(0, colon));
      auto val = colon == std::string_view::npos ? std::nullopt : text::parse_real(tok[i].substr(colon + 1));
      if (!idx || !val || !std::isfinite(*val)) throw ParseError(no, "field " + std::to_string(i + 1) + ": expected idx:val");
      if (*idx >= m.dimension) throw ParseError(no, "field " + std::to_string(i + 1) + ": index out of range");
      m.weights[next_class][*idx] = *val;
    }
    ++next_class;
  });
  if (!have_header) throw ParseError(0, "model file lacks header");
  if (next_class != m.classes.size()) throw ParseError(0, "model file has fewer weight lines than classes");
  return m;
}

}  // namespace detbank
