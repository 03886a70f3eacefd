// detbank: Detection Bank feature extraction and evaluation.
//
//   detbank synth   --preset spatial --out corpus.tsv
//   detbank extract corpus.tsv --config bank.cfg --out features.db
//   detbank train   features.db --out model.txt
//   detbank eval    model.txt features.db
//   detbank det     model.txt features.db --class 3 --out det3.txt
//   detbank fuse    a.db b.db --out fused.db
//
// Every command writes <out>.manifest.json next to its output.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "detbank/detbank.hpp"

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

constexpr const char* kVersion = "1.0.0";

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw detbank::Error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw detbank::Error("cannot open '" + path + "' for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw detbank::Error("write to '" + path + "' failed");
}

// Wall-clock stage timings plus everything needed to reproduce the run.
class Manifest {
 public:
  explicit Manifest(std::string command) {
    doc_["tool"] = "detbank";
    doc_["version"] = kVersion;
    doc_["command"] = std::move(command);
    doc_["inputs"] = json::array();
    doc_["timings_seconds"] = json::object();
  }

  json& operator[](const char* key) { return doc_[key]; }
  void input(const std::string& path) { doc_["inputs"].push_back(path); }

  template <typename Fn>
  auto stage(const char* name, Fn&& fn) {
    const auto t0 = Clock::now();
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      record(name, t0);
    } else {
      auto r = fn();
      record(name, t0);
      return r;
    }
  }

  void write(const std::string& out_path) {
    doc_["output"] = out_path;
    write_file(out_path + ".manifest.json", doc_.dump(2) + "\n");
  }

 private:
  void record(const char* name, Clock::time_point t0) {
    doc_["timings_seconds"][name] = std::chrono::duration<double>(Clock::now() - t0).count();
  }

  json doc_;
};

json config_json(const detbank::BankConfig& c) {
  return {{"categories", c.categories},
          {"thresholds", c.thresholds},
          {"levels", c.pyramid_levels},
          {"nms_iou", c.nms_iou},
          {"pooling", std::string(detbank::to_string(c.pooling))},
          {"stats", detbank::to_string(c.statistics)}};
}

detbank::LabeledFeatureSet load_labeled(const std::string& path) {
  return detbank::LabeledFeatureSet::from_file(detbank::read_feature_file(read_file(path)));
}

detbank::SplitRatios parse_ratios(const std::string& s) {
  auto r = detbank::text::parse_real_list(s);
  if (r.size() != 3) throw detbank::Error("--ratios needs three comma-separated values");
  detbank::SplitRatios out{r[0], r[1], r[2]};
  out.validate();
  return out;
}

// Evaluation subset of a labeled corpus under the model's split protocol.
detbank::LabeledFeatureSet select_split(const detbank::LabeledFeatureSet& all, const detbank::LinearOvrModel& m,
                                        const std::string& which) {
  if (which == "all") return all;
  auto split = detbank::split_corpus(all, m.split, m.split_seed);
  if (which == "train") return split.train;
  if (which == "validation") return split.validation;
  if (which == "test") return split.test;
  throw detbank::Error("--split must be train, validation, test or all");
}

// ---------------------------------------------------------------------------

struct ExtractArgs {
  std::string detections, config, out;
  std::string categories, thresholds, levels, stats, pooling;
  std::optional<double> nms_iou, min_threshold;
  std::size_t jobs = 1;
  std::uint64_t seed = 0;
};

int run_extract(const ExtractArgs& a) {
  Manifest manifest("extract");
  manifest.input(a.detections);
  detbank::BankConfig cfg;
  if (!a.config.empty()) {
    manifest.input(a.config);
    cfg = detbank::parse_bank_config(read_file(a.config));
  }
  if (!a.categories.empty()) cfg.categories = detbank::text::parse_name_list(a.categories);
  if (!a.thresholds.empty()) cfg.thresholds = detbank::text::parse_real_list(a.thresholds);
  if (!a.levels.empty()) cfg.pyramid_levels = detbank::text::parse_int_list<std::uint32_t>(a.levels);
  if (!a.stats.empty()) cfg.statistics = detbank::parse_statistics(a.stats);
  if (!a.pooling.empty()) {
    auto p = detbank::parse_pooling(a.pooling);
    if (!p) throw detbank::Error("--pooling must be mean, max or both");
    cfg.pooling = *p;
  }
  if (a.nms_iou) cfg.nms_iou = *a.nms_iou;
  if (a.min_threshold) {
    auto& t = cfg.thresholds;
    std::erase_if(t, [&](double v) { return v < *a.min_threshold; });
    if (t.empty() || t.front() != *a.min_threshold) t.insert(t.begin(), *a.min_threshold);
  }
  cfg.validate();

  const auto input = manifest.stage("read", [&] { return read_file(a.detections); });
  const auto videos = manifest.stage("parse", [&] { return detbank::parse_detection_stream(input, cfg.categories); });

  std::vector<std::string> lines(videos.size());
  std::vector<detbank::Extractor> workers;
  const std::size_t jobs = std::max<std::size_t>(1, a.jobs);
  for (std::size_t j = 0; j < std::min(jobs, std::max<std::size_t>(1, videos.size())); ++j) workers.emplace_back(cfg);
  manifest.stage("extract", [&] {
    detbank::parallel_for(videos.size(), jobs, [&](std::size_t w, std::size_t i) {
      const auto& v = videos[i];
      detbank::FeatureRecord rec{v.video_id, v.label, {}};
      try {
        detbank::validate_video(v, cfg.categories.size());
        rec.feature = workers[w].assemble(v);
      } catch (const detbank::Error& e) {
        throw detbank::Error("video '" + v.video_id + "': " + e.what());
      }
      detbank::append_feature_record(lines[i], rec);
    });
  });

  const auto layout = detbank::FeatureLayout::for_config(cfg);
  manifest.stage("write", [&] {
    std::string out = detbank::format_feature_header(layout);
    for (const auto& l : lines) out += l;
    write_file(a.out, out);
  });

  std::size_t detections = 0, dropped = 0;
  for (const auto& w : workers) {
    detections += w.processed_detections();
    dropped += w.dropped_boxes();
  }
  const double extract_s = manifest["timings_seconds"]["extract"].get<double>();
  manifest["seed"] = a.seed;
  manifest["config"] = config_json(cfg);
  manifest["jobs"] = jobs;
  manifest["counters"] = {{"videos", videos.size()},
                          {"detections", detections},
                          {"dropped_boxes", dropped},
                          {"dimension", layout.dimension},
                          {"detections_per_second", extract_s > 0 ? detections / extract_s : 0.0}};
  manifest.write(a.out);
  if (dropped) std::cerr << "extract: dropped " << dropped << " boxes lying outside their frame\n";
  return 0;
}

struct SynthArgs {
  std::string spec, preset, out, write_spec;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
};

int run_synth(const SynthArgs& a) {
  Manifest manifest("synth");
  detbank::SynthSpec spec;
  if (!a.spec.empty()) {
    manifest.input(a.spec);
    spec = detbank::parse_synth_spec(read_file(a.spec));
  } else if (a.preset == "spatial") {
    spec = detbank::spatial_preset();
  } else if (a.preset == "threshold") {
    spec = detbank::threshold_preset();
  } else {
    throw detbank::Error("give --spec FILE or --preset spatial|threshold");
  }
  if (a.seed) spec.seed = *a.seed;
  const auto data = manifest.stage("generate", [&] { return detbank::generate(spec, a.jobs); });
  manifest.stage("write", [&] { write_file(a.out, data); });
  if (!a.write_spec.empty()) write_file(a.write_spec, detbank::format_synth_spec(spec));
  manifest["seed"] = spec.seed;
  manifest["spec"] = a.spec.empty() ? json(a.preset) : json(a.spec);
  manifest["categories"] = spec.categories;
  manifest["counters"] = {{"videos", spec.classes * spec.videos_per_class}, {"bytes", data.size()}};
  manifest.write(a.out);
  return 0;
}

struct TrainArgs {
  std::string features, out, ratios = "0.4,0.2,0.4", reg_grid;
  std::optional<double> reg;
  std::uint64_t seed = 0;
  std::size_t epochs = 50;
  std::string scale = "none";
  std::size_t jobs = 1;
};

int run_train(const TrainArgs& a) {
  Manifest manifest("train");
  manifest.input(a.features);
  const auto all = manifest.stage("read", [&] { return load_labeled(a.features); });
  const auto ratios = parse_ratios(a.ratios);
  auto split = detbank::split_corpus(all, ratios, a.seed);
  for (int c : split.undersized_classes)
    std::cerr << "train: class " << c << " has fewer than 3 videos; placed wholly in training\n";

  if (a.scale != "none" && a.scale != "maxabs") throw detbank::Error("--scale must be none or maxabs");
  detbank::TrainOptions opts;
  opts.epochs = a.epochs;
  opts.maxabs_scaling = a.scale == "maxabs";
  opts.jobs = a.jobs;

  json selection = json::array();
  double reg = 0.0;
  if (a.reg) {
    reg = *a.reg;
  } else {
    auto grid = a.reg_grid.empty() ? detbank::default_reg_grid() : detbank::text::parse_real_list(a.reg_grid);
    auto sel = manifest.stage("select", [&] {
      return detbank::select_regularization(split.train, split.validation, grid, a.seed, opts);
    });
    reg = sel.reg;
    for (auto [r, acc] : sel.validation_accuracy) selection.push_back({{"reg", r}, {"validation_accuracy", acc}});
  }

  auto model = manifest.stage("train", [&] { return detbank::train_ovr_linear(split.train, reg, a.seed, opts); });
  model.split = ratios;
  model.split_seed = a.seed;
  manifest.stage("write", [&] { write_file(a.out, detbank::write_model(model)); });

  manifest["seed"] = a.seed;
  manifest["ratios"] = {ratios.train, ratios.validation, ratios.test};
  manifest["reg"] = reg;
  manifest["reg_selection"] = selection;
  manifest["epochs"] = a.epochs;
  manifest["scale"] = a.scale;
  manifest["counters"] = {{"train", split.train.size()},
                          {"validation", split.validation.size()},
                          {"test", split.test.size()},
                          {"classes", model.classes.size()},
                          {"dimension", model.dimension}};
  manifest.write(a.out);
  return 0;
}

struct EvalArgs {
  std::string model, features, split = "test", out;
  std::uint64_t seed = 0;
};

int run_eval(const EvalArgs& a) {
  Manifest manifest("eval");
  manifest.input(a.model);
  manifest.input(a.features);
  const auto model = detbank::read_model(read_file(a.model));
  const auto set = select_split(load_labeled(a.features), model, a.split);
  if (set.empty()) throw detbank::Error("evaluation split is empty");

  std::vector<std::size_t> per_total(model.classes.size(), 0), per_correct(model.classes.size(), 0);
  std::size_t correct = 0;
  manifest.stage("evaluate", [&] {
    for (std::size_t i = 0; i < set.size(); ++i) {
      const int pred = detbank::predict_forced_choice(model, set.features[i]);
      auto it = std::find(model.classes.begin(), model.classes.end(), set.labels[i]);
      const bool ok = pred == set.labels[i];
      correct += ok;
      if (it != model.classes.end()) {
        const auto k = static_cast<std::size_t>(it - model.classes.begin());
        ++per_total[k];
        per_correct[k] += ok;
      }
    }
  });
  const double acc = static_cast<double>(correct) / static_cast<double>(set.size());

  std::string report = "split " + a.split + "\nvideos " + std::to_string(set.size()) + "\naccuracy ";
  detbank::text::append_real(report, acc);
  report += '\n';
  for (std::size_t k = 0; k < model.classes.size(); ++k) {
    if (per_total[k] == 0) continue;
    report += "class " + std::to_string(model.classes[k]) + " " + std::to_string(per_correct[k]) + "/" +
              std::to_string(per_total[k]) + "\n";
  }
  if (a.out.empty()) {
    std::cout << report;
  } else {
    write_file(a.out, report);
    manifest["seed"] = a.seed;
    manifest["split"] = a.split;
    manifest["accuracy"] = acc;
    manifest.write(a.out);
  }
  return 0;
}

struct DetArgs {
  std::string model, features, split = "test", out;
  int event = 0;
  std::uint64_t seed = 0;
};

int run_det(const DetArgs& a) {
  Manifest manifest("det");
  manifest.input(a.model);
  manifest.input(a.features);
  const auto model = detbank::read_model(read_file(a.model));
  const auto set = select_split(load_labeled(a.features), model, a.split);
  const auto curve = manifest.stage("det", [&] { return detbank::det_curve(model, set, a.event); });
  write_file(a.out, detbank::format_det_curve(curve));
  const auto eer = detbank::equal_error_point(curve);
  manifest["seed"] = a.seed;
  manifest["class"] = a.event;
  manifest["split"] = a.split;
  manifest["equal_error_point"] = {eer.false_alarm, eer.miss};
  manifest.write(a.out);
  return 0;
}

struct FuseArgs {
  std::vector<std::string> inputs;
  std::string out;
  std::uint64_t seed = 0;
};

int run_fuse(const FuseArgs& a) {
  Manifest manifest("fuse");
  std::vector<detbank::LabeledFeatureSet> sets;
  manifest.stage("read", [&] {
    for (const auto& p : a.inputs) {
      manifest.input(p);
      sets.push_back(load_labeled(p));
    }
  });
  const auto fused = manifest.stage("fuse", [&] { return detbank::fuse_features(sets); });
  manifest.stage("write", [&] { write_file(a.out, detbank::write_feature_file(fused.to_file())); });
  manifest["seed"] = a.seed;
  json dims = json::array();
  for (const auto& s : sets) dims.push_back(s.layout.dimension);
  manifest["input_dimensions"] = dims;
  manifest["counters"] = {{"videos", fused.size()}, {"dimension", fused.layout.dimension}};
  manifest.write(a.out);
  return 0;
}

constexpr const char* kFormats = R"(File formats:
  detections  tab-separated, one box per line:
                video_id frame_index frame_width frame_height category x1 y1 x2 y2 score [scale]
              pixel coordinates; '#' starts a comment; directives
                #frame video_id frame_index width height   and   #label video_id label
  bank config key = value lines: categories, thresholds, levels, nms_iou, pooling, stats
  features    header '#DB v1 dim=D C=C R=R T=T S=S pooling=mean|max|both|none', then
                video_id label|? idx:val ...   (0-based ascending indices)
  model       header '#DBMODEL v1 dim=D classes=... reg=... seed=... epochs=... scaling=... split=... split_seed=...'
              then '<class> <bias> idx:w ...' per class
  det points  '# false_alarm miss' then one 'false_alarm miss' pair per line
)";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detection Bank video features: extract, train, evaluate"};
  app.footer(kFormats);
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "Detection stream -> feature file");
  extract->add_option("detections", ex.detections, "Detection stream")->required()->check(CLI::ExistingFile);
  extract->add_option("--config", ex.config, "Bank config file")->check(CLI::ExistingFile);
  extract->add_option("-o,--out", ex.out, "Feature file")->required();
  extract->add_option("--categories", ex.categories, "Comma-separated category names");
  extract->add_option("--thresholds", ex.thresholds, "Ascending thresholds (default -1.1,-0.9,-0.7,-0.5)");
  extract->add_option("--levels", ex.levels, "Pyramid subdivisions (default 1,2,4)");
  extract->add_option("--stats", ex.stats, "Subset of sum,count,binary (default all)");
  extract->add_option("--pooling", ex.pooling, "mean, max or both (default mean)");
  extract->add_option("--nms-iou", ex.nms_iou, "NMS overlap threshold (default 0.5)");
  extract->add_option("--min-threshold", ex.min_threshold, "Lowest threshold; also the suppression floor");
  extract->add_option("-j,--jobs", ex.jobs, "Worker threads");
  extract->add_option("--seed", ex.seed, "Recorded in the manifest");

  SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic detection stream");
  synth->add_option("--spec", sy.spec, "Synth spec file")->check(CLI::ExistingFile);
  synth->add_option("--preset", sy.preset, "spatial or threshold");
  synth->add_option("-o,--out", sy.out, "Detection stream")->required();
  synth->add_option("--write-spec", sy.write_spec, "Also write the effective spec");
  synth->add_option("--seed", sy.seed, "Override the spec seed");
  synth->add_option("-j,--jobs", sy.jobs, "Worker threads");

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train a one-vs-rest linear model");
  train->add_option("features", tr.features, "Labeled feature file")->required()->check(CLI::ExistingFile);
  train->add_option("-o,--out", tr.out, "Model file")->required();
  train->add_option("--ratios", tr.ratios, "train,validation,test fractions");
  train->add_option("--seed", tr.seed, "Split and training seed");
  train->add_option("--reg", tr.reg, "Fixed regularization (skips validation search)");
  train->add_option("--reg-grid", tr.reg_grid, "Comma-separated grid searched on validation");
  train->add_option("--epochs", tr.epochs, "Passes over the training split");
  train->add_option("--scale", tr.scale, "none or maxabs");
  train->add_option("-j,--jobs", tr.jobs, "Worker threads (one class per task)");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Forced-choice accuracy");
  eval->add_option("model", ev.model, "Model file")->required()->check(CLI::ExistingFile);
  eval->add_option("features", ev.features, "Labeled feature file")->required()->check(CLI::ExistingFile);
  eval->add_option("--split", ev.split, "train, validation, test or all");
  eval->add_option("-o,--out", ev.out, "Report file (default stdout)");
  eval->add_option("--seed", ev.seed, "Recorded in the manifest");

  DetArgs dt;
  auto* det = app.add_subcommand("det", "DET curve for one class");
  det->add_option("model", dt.model, "Model file")->required()->check(CLI::ExistingFile);
  det->add_option("features", dt.features, "Labeled feature file")->required()->check(CLI::ExistingFile);
  det->add_option("--class", dt.event, "Event label")->required();
  det->add_option("--split", dt.split, "train, validation, test or all");
  det->add_option("-o,--out", dt.out, "Points file")->required();
  det->add_option("--seed", dt.seed, "Recorded in the manifest");

  FuseArgs fu;
  auto* fuse = app.add_subcommand("fuse", "Concatenate feature files");
  fuse->add_option("inputs", fu.inputs, "Feature files (identical video order)")->required()->check(CLI::ExistingFile);
  fuse->add_option("-o,--out", fu.out, "Fused feature file")->required();
  fuse->add_option("--seed", fu.seed, "Recorded in the manifest");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*extract) return run_extract(ex);
    if (*synth) return run_synth(sy);
    if (*train) return run_train(tr);
    if (*eval) return run_eval(ev);
    if (*det) return run_det(dt);
    if (*fuse) return run_fuse(fu);
  } catch (const std::exception& e) {
    std::cerr << "detbank: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
