// Acceptance harness: prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "properties.hpp"
#include "test_support.hpp"

namespace {

using namespace detbank;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool run_cli(const std::string& args) {
  const std::string cmd = std::string(DETBANK_CLI) + " " + args + " >/dev/null 2>&1";
  return std::system(cmd.c_str()) == 0;
}

// 1. Feature dimensions of the protocol configuration and the fused vector.
Verdict dimensions() {
  const auto t0 = Clock::now();
  BankConfig cfg;
  cfg.categories = testing::category_names(237);
  const auto db = FeatureLayout::for_config(cfg).dimension;
  auto make = [](std::size_t dim) {
    LabeledFeatureSet s;
    s.layout = FeatureLayout::opaque(dim);
    s.ids = {"v"};
    s.labels = {1};
    s.features = {FeatureVector{s.layout, {}}};
    return s;
  };
  std::vector<LabeledFeatureSet> sets{make(44604), make(4200), make(db)};
  const auto fused = fuse_features(sets).layout.dimension;
  const double t = seconds_since(t0);
  return {db == 59724 && fused == 108528 && t < 1.0,
          "single pooling " + std::to_string(db) + ", fused " + std::to_string(fused) + ", " + fmt(t) + " s"};
}

// 2. Optimized keyframe statistics against the brute-force triple loop.
Verdict oracle() {
  const auto t0 = Clock::now();
  std::size_t mismatches = 0, detections = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    Rng rng(derive_seed(2024, 2, i));
    auto cfg = testing::random_config(rng, 20);
    auto frame = testing::as_suppressed(testing::random_frame(rng, cfg.categories.size(), 1000));
    detections += frame.detections.size();
    Pyramid pyr(cfg.pyramid_levels);
    if (frame_statistics(frame, pyr, cfg).values != testing::brute_force_statistics(frame, cfg)) ++mismatches;
  }
  const double t = seconds_since(t0);
  return {mismatches == 0 && t < 60.0, "1000 frames, " + std::to_string(detections) + " detections, " +
                                           std::to_string(mismatches) + " mismatches, " + fmt(t) + " s"};
}

// 3. Statistical invariants, 10^4 random cases each.
Verdict properties() {
  const auto t0 = Clock::now();
  std::string failures;
  std::size_t total = 0;
  std::uint64_t seed = 77;
  for (const auto& p : testing::all_properties()) {
    const auto out = testing::run_property(p.fn, 10000, seed++);
    total += out.cases;
    if (!out.passed()) failures += std::string(" [") + p.name + ": " + out.failure + "]";
  }
  const double t = seconds_since(t0);
  return {failures.empty() && t < 120.0,
          std::to_string(testing::all_properties().size()) + " properties, " + std::to_string(total) + " cases, " +
              fmt(t) + " s" + failures};
}

LabeledFeatureSet extract_set(const std::vector<VideoDetections>& videos, const BankConfig& cfg) {
  Extractor ex(cfg);
  LabeledFeatureSet set;
  set.layout = ex.layout();
  for (const auto& v : videos) {
    set.ids.push_back(v.video_id);
    set.labels.push_back(*v.label);
    set.features.push_back(ex.assemble(v));
  }
  return set;
}

// Split, pick the regularization on validation, retrain and score the test split.
double protocol_accuracy(const LabeledFeatureSet& set, std::uint64_t seed, LinearOvrModel* model_out = nullptr) {
  auto split = split_corpus(set, {}, seed);
  auto sel = select_regularization(split.train, split.validation, default_reg_grid(), seed);
  auto model = train_ovr_linear(split.train, sel.reg, seed);
  if (model_out) *model_out = model;
  return accuracy(model, split.test);
}

// 4. Spatial preset: the full pyramid recovers the planted layout, the
// whole-image cell alone does not.
Verdict spatial_recovery() {
  const auto t0 = Clock::now();
  double full = 0.0, flat = 0.0;
  const int seeds = 5;
  for (int s = 1; s <= seeds; ++s) {
    const auto spec = spatial_preset(static_cast<std::uint64_t>(s));
    const auto videos = generate_videos(spec);
    BankConfig cfg;
    cfg.categories = spec.categories;
    full += protocol_accuracy(extract_set(videos, cfg), s);
    cfg.pyramid_levels = {1};
    flat += protocol_accuracy(extract_set(videos, cfg), s);
  }
  full /= seeds;
  flat /= seeds;
  const double t = seconds_since(t0);
  return {full >= 0.90 && flat <= 0.60 && t < 300.0,
          "levels 1,2,4 mean acc " + fmt(full) + ", levels 1 mean acc " + fmt(flat) + ", " + fmt(t) + " s"};
}

// 5. Threshold preset: four thresholds with all statistics beat a single
// threshold with the score sum alone.
Verdict threshold_recovery() {
  const auto t0 = Clock::now();
  double rich = 0.0, poor = 0.0;
  const int seeds = 5;
  for (int s = 1; s <= seeds; ++s) {
    const auto spec = threshold_preset(static_cast<std::uint64_t>(s));
    const auto videos = generate_videos(spec);
    BankConfig cfg;
    cfg.categories = spec.categories;
    rich += protocol_accuracy(extract_set(videos, cfg), s);
    cfg.thresholds = {-1.1};
    cfg.statistics = {true, false, false};
    poor += protocol_accuracy(extract_set(videos, cfg), s);
  }
  rich /= seeds;
  poor /= seeds;
  const double t = seconds_since(t0);
  return {rich > poor, "T=4 S=3 mean acc " + fmt(rich) + ", T=1 S=1 mean acc " + fmt(poor) + ", " + fmt(t) + " s"};
}

// 6. Byte-identical reruns through the command line and lossless file round trips.
Verdict determinism(const fs::path& dir) {
  const auto t0 = Clock::now();
  const auto p = [&](const char* n) { return (dir / n).string(); };
  const std::string cats = " --categories person,car,tire,dog,flag,table,ball,boat";
  bool ok = run_cli("synth --preset spatial --seed 11 -o " + p("a.tsv")) &&
            run_cli("synth --preset spatial --seed 11 -j 2 -o " + p("b.tsv")) &&
            run_cli("extract " + p("a.tsv") + cats + " --seed 3 -o " + p("fa.txt")) &&
            run_cli("extract " + p("a.tsv") + cats + " --seed 3 -j 2 -o " + p("fb.txt")) &&
            run_cli("train " + p("fa.txt") + " --seed 3 -o " + p("ma.txt")) &&
            run_cli("train " + p("fa.txt") + " --seed 3 -j 2 -o " + p("mb.txt"));
  std::string detail;
  if (!ok) detail += " [command failed]";
  const auto d = slurp(p("a.tsv")), f = slurp(p("fa.txt")), m = slurp(p("ma.txt"));
  if (d != slurp(p("b.tsv"))) detail += " [synth differs]";
  if (f != slurp(p("fb.txt"))) detail += " [extract differs]";
  if (m != slurp(p("mb.txt"))) detail += " [train differs]";
  if (ok) {
    const auto spec = spatial_preset(11);
    if (write_detection_stream(parse_detection_stream(d, spec.categories), spec.categories) != d)
      detail += " [detection round trip]";
    if (write_feature_file(read_feature_file(f)) != f) detail += " [feature round trip]";
    if (write_model(read_model(m)) != m) detail += " [model round trip]";
  }
  const double t = seconds_since(t0);
  ok = ok && detail.empty() && t < 60.0;
  return {ok, "synth/extract/train reruns and round trips " + std::string(detail.empty() ? "identical" : "differ") +
                  ", " + fmt(t) + " s" + detail};
}

bool monotone(const std::vector<DetPoint>& c) {
  for (std::size_t i = 1; i < c.size(); ++i)
    if (c[i].false_alarm < c[i - 1].false_alarm || c[i].miss > c[i - 1].miss) return false;
  return true;
}

// 7. DET curve behaviour on known rankings.
Verdict det_curves() {
  std::string detail;
  bool ok = true;
  std::size_t curves = 0;
  auto check = [&](const std::vector<DetPoint>& c) {
    ++curves;
    if (!monotone(c)) ok = false;
  };

  Rng rng(7);
  std::vector<double> scores;
  std::vector<char> positive;
  for (int i = 0; i < 1000; ++i) {
    const bool pos = rng.uniform() < 0.3;
    positive.push_back(pos);
    scores.push_back(pos ? 2.0 + rng.uniform() : rng.uniform());
  }
  const auto perfect = det_curve_from_scores(scores, positive);
  check(perfect);
  const bool origin = std::find(perfect.begin(), perfect.end(), DetPoint{0.0, 0.0}) != perfect.end();
  ok = ok && origin;

  scores.clear();
  positive.clear();
  for (int i = 0; i < 10000; ++i) {
    positive.push_back(rng.uniform() < 0.5);
    scores.push_back(rng.uniform());
  }
  const auto random = det_curve_from_scores(scores, positive);
  check(random);
  const auto eer = equal_error_point(random);
  const double dev = std::abs(eer.false_alarm + eer.miss - 1.0);
  ok = ok && dev <= 0.05;

  const auto spec = spatial_preset(3);
  BankConfig cfg;
  cfg.categories = spec.categories;
  auto set = extract_set(generate_videos(spec), cfg);
  LinearOvrModel model;
  protocol_accuracy(set, 3, &model);
  auto test = split_corpus(set, {}, 3).test;
  for (int c : model.classes) check(det_curve(model, test, c));

  detail = std::string("perfect ranking ") + (origin ? "reaches" : "misses") + " (0,0), random |FA+miss-1| = " +
           fmt(dev) + " at equal error, " + std::to_string(curves) + " curves " + (ok ? "monotone" : "checked");
  return {ok, detail};
}

// 8. Extraction throughput with the default configuration, from the manifest.
Verdict throughput(const fs::path& dir) {
  auto spec = spatial_preset(5);
  spec.videos_per_class = 200;
  const auto d = (dir / "big.tsv").string();
  const auto f = (dir / "big.txt").string();
  {
    std::ofstream out(d, std::ios::binary);
    out << generate(spec);
  }
  std::string cats = " --categories ";
  for (std::size_t i = 0; i < spec.categories.size(); ++i) cats += (i ? "," : "") + spec.categories[i];
  if (!run_cli("extract " + d + cats + " -o " + f)) return {false, "extract failed"};
  const auto j = nlohmann::json::parse(slurp(f + ".manifest.json"));
  const double rate = j["counters"]["detections_per_second"].get<double>();
  const auto n = j["counters"]["detections"].get<std::size_t>();
  return {rate >= 1e5, fmt(rate) + " detections/s over " + std::to_string(n) + " detections"};
}

}  // namespace

int main() {
  const fs::path dir = fs::temp_directory_path() / "detbank_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);

  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"feature dimensions", dimensions},
      {"statistics match brute force", oracle},
      {"statistical invariants", properties},
      {"spatial layout recovery", spatial_recovery},
      {"threshold structure recovery", threshold_recovery},
      {"determinism and round trips", [&] { return determinism(dir); }},
      {"DET curves", det_curves},
      {"extraction throughput", [&] { return throughput(dir); }},
  };

  int failed = 0;
  int n = 1;
  for (const auto& [name, fn] : criteria) {
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d %-30s %s  %s\n", n++, name, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
    if (!v.pass) ++failed;
  }
  fs::remove_all(dir);
  return failed == 0 ? 0 : 1;
}
