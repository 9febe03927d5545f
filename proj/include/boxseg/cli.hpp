/* Copyright 2026 The boxseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

/**
 * @file cli.hpp
 * @brief Subcommands of the boxseg tool: synth, run, eval and serve.
 *
 * Exit codes are 0 for success, 1 for runtime failures and 2 for usage or
 * validation errors. Each subcommand writes a run manifest before it
 * produces any other output.
 */

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "boxseg/annotation.hpp"
#include "boxseg/eval.hpp"
#include "boxseg/io.hpp"
#include "boxseg/pipeline.hpp"
#include "boxseg/segmenter.hpp"
#include "boxseg/service.hpp"
#include "boxseg/synth.hpp"

namespace boxseg {

inline constexpr const char* kToolVersion = "0.1.0";

inline std::string UtcTimestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Everything needed to repeat a run. It carries a timestamp, so it is the one
// file in an output tree that differs between otherwise identical runs.
struct RunManifest {
  std::string subcommand;
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json inputs = nlohmann::json::object();
  nlohmann::json outputs = nlohmann::json::object();
  std::optional<std::uint64_t> seed;

  nlohmann::json ToJson() const {
    nlohmann::json j = {{"subcommand", subcommand}, {"tool_version", kToolVersion},
                        {"config", config},         {"inputs", inputs},
                        {"outputs", outputs},       {"started_at", UtcTimestamp()}};
    j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
    return j;
  }

  void Write(const fs::path& path) const {
    WriteFileAtomic(path, ToJson().dump(2) + "\n");
  }
};

namespace detail {

inline void Require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::kValidation, message);
}

inline Image<std::uint8_t> To8Bit(const GrayImage& img) {
  Image<std::uint8_t> out(img.bounds());
  for (std::size_t i = 0; i < img.size(); ++i)
    out.pixels()[i] = static_cast<std::uint8_t>(
        std::clamp(std::lround(img.pixels()[i] * 255.0), 0L, 255L));
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------- synth

struct SynthOptions {
  fs::path out;
  int n_images = 10;
  SynthConfig config;
};

inline nlohmann::json SynthConfigJson(const SynthConfig& c) {
  return {{"image_size", c.image_size},
          {"n_objects", c.n_objects},
          {"radius_min", c.radius_min},
          {"radius_max", c.radius_max},
          {"harmonic_count", c.harmonic_count},
          {"harmonic_amplitude", c.harmonic_amplitude},
          {"edge_sharpness", c.edge_sharpness},
          {"noise_sigma", c.noise_sigma},
          {"seed", c.seed},
          {"min_separation", c.min_separation},
          {"jitter", c.jitter},
          {"foreground", c.foreground},
          {"background", c.background}};
}

inline int CmdSynth(const SynthOptions& opt, std::ostream& out) {
  detail::Require(opt.n_images >= 1, "--n must be at least 1");
  opt.config.Validate();

  RunManifest manifest;
  manifest.subcommand = "synth";
  manifest.config = SynthConfigJson(opt.config);
  manifest.config["n_images"] = opt.n_images;
  manifest.outputs = {{"out", opt.out.string()}};
  manifest.seed = opt.config.seed;
  manifest.Write(opt.out / "run_manifest.json");

  nlohmann::json images = nlohmann::json::array();
  for (int i = 0; i < opt.n_images; ++i) {
    const std::string id = SynthImageId(i);
    const SynthConfig cfg = ConfigForImage(opt.config, i);
    const SynthImage img = GenerateSynthImage(cfg, id);
    WritePng8(opt.out / "images" / (id + ".png"), detail::To8Bit(img.image));
    WritePng16(opt.out / "gt" / (id + ".png"), img.gt_labels);
    WriteFileAtomic(opt.out / "annotations" / (id + ".json"), SerializeAnnotation(img.annotations));
    images.push_back({{"id", id}, {"seed", cfg.seed}, {"n_objects", img.shapes.size()}});
    out << id << ": " << img.shapes.size() << " objects\n";
  }
  const nlohmann::json listing = {{"tool_version", kToolVersion},
                                  {"config", SynthConfigJson(opt.config)},
                                  {"images", images}};
  WriteFileAtomic(opt.out / "manifest.json", listing.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------- run

// Rough maps read from <dir>/<id>.png or <id>.pgm.
class FileRoughProvider : public RoughProvider {
 public:
  explicit FileRoughProvider(fs::path dir) : dir_(std::move(dir)) {}

  ProbabilityMap Segment(const GrayImage& image, const std::string& image_id) const override {
    for (const char* ext : {".png", ".pgm"}) {
      const fs::path path = dir_ / (image_id + ext);
      if (fs::exists(path)) return ImportProbabilityMap(path, image.bounds());
    }
    throw Error(ErrorCode::kUnreadableFile, "no rough map for " + image_id + " in " + dir_.string());
  }
  std::string name() const override { return "file:" + dir_.string(); }

 private:
  fs::path dir_;
};

struct RunOptions {
  fs::path images;
  fs::path annotations;
  fs::path out;
  std::optional<fs::path> rough;
  bool baseline = false;
  PipelineConfig pipeline;
  int jobs = 0;  // 0: one per hardware thread
};

inline nlohmann::json PipelineConfigJson(const PipelineConfig& c) {
  nlohmann::json gs = {{"n_columns", c.gs.n_columns},
                       {"nodes_per_column", c.gs.nodes_per_column},
                       {"smoothness_delta", c.gs.smoothness_delta},
                       {"exclusion_cost", c.gs.exclusion_cost},
                       {"inclusion_bonus", c.gs.inclusion_bonus},
                       {"presmooth_sigma", c.gs.presmooth_sigma},
                       {"normal_window", c.gs.normal_window}};
  gs["column_half_length"] = c.gs.column_half_length ? nlohmann::json(*c.gs.column_half_length)
                                                     : nlohmann::json(nullptr);
  return {{"k", c.boxgt.k},
          {"spoke_thickness", c.boxgt.spoke_thickness},
          {"iou_threshold", c.match.iou_threshold},
          {"binarize_threshold", c.binarize_threshold},
          {"min_area", c.min_area},
          {"record_timings", c.record_timings},
          {"dump_graphs", c.dump_graphs},
          {"gs", gs}};
}

struct ImageOutcome {
  std::string id;
  bool ok = false;
  std::string summary;
};

inline ImageOutcome ProcessOneImage(const ImageEntry& entry, const RunOptions& opt,
                                    const RoughProvider& provider) {
  ImageOutcome outcome{entry.id};
  try {
    const GrayImage image = LoadIntensityImage(entry.path);
    const fs::path ann_path = opt.annotations / (entry.id + ".json");
    if (!fs::exists(ann_path))
      throw Error(ErrorCode::kUnreadableFile, "missing annotation " + ann_path.string());
    const AnnotationFile ann = ParseAnnotation(ReadFileText(ann_path), ann_path.string());
    if (ann.image != entry.id)
      throw Error(ErrorCode::kValidation,
                  ann_path.string() + " names image '" + ann.image + "', expected '" + entry.id + "'");
    const ProbabilityMap rough = CheckedSegment(provider, image, entry.id);
    const ImageResult result = RunImageWithRough(image, ann, rough, opt.pipeline);
    WriteArtifacts(opt.out, result);
    std::ostringstream s;
    s << result.report["n_boxes"] << " boxes, " << result.report["n_components"] << " components, "
      << result.report["n_matched"] << " matched, " << result.report["n_refined"] << " refined, "
      << result.report["n_fallback"] << " fallback";
    outcome.ok = true;
    outcome.summary = s.str();
  } catch (const std::exception& e) {
    outcome.summary = std::string("FAILED ") + e.what();
  }
  return outcome;
}

inline int CmdRun(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  opt.pipeline.Validate();
  detail::Require(!(opt.rough && opt.baseline), "--rough and --baseline are mutually exclusive");
  detail::Require(opt.jobs >= 0, "--jobs must be >= 0");
  const int jobs = opt.jobs > 0 ? opt.jobs : std::max(1u, std::thread::hardware_concurrency());

  RunManifest manifest;
  manifest.subcommand = "run";
  manifest.config = PipelineConfigJson(opt.pipeline);
  manifest.config["rough_provider"] = opt.rough ? "file" : "baseline";
  manifest.config["jobs"] = jobs;
  manifest.inputs = {{"images", opt.images.string()}, {"annotations", opt.annotations.string()}};
  if (opt.rough) manifest.inputs["rough"] = opt.rough->string();
  manifest.outputs = {{"out", opt.out.string()}};
  manifest.Write(opt.out / "run_manifest.json");

  const std::vector<ImageEntry> entries = ListImages(opt.images);
  if (entries.empty()) {
    err << "error: no .png or .pgm images in " << opt.images.string() << "\n";
    return 1;
  }
  std::unique_ptr<RoughProvider> provider;
  if (opt.rough)
    provider = std::make_unique<FileRoughProvider>(*opt.rough);
  else
    provider = std::make_unique<BaselineProvider>();

  std::vector<ImageOutcome> outcomes(entries.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < entries.size();)
      outcomes[i] = ProcessOneImage(entries[i], opt, *provider);
  };
  std::vector<std::thread> pool;
  const std::size_t n_threads = std::min<std::size_t>(jobs, entries.size());
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  std::size_t failed = 0;
  for (const ImageOutcome& o : outcomes) {
    (o.ok ? out : err) << o.id << ": " << o.summary << "\n";
    failed += !o.ok;
  }
  out << (outcomes.size() - failed) << "/" << outcomes.size() << " images processed\n";
  return failed == outcomes.size() ? 1 : 0;
}

// ---------------------------------------------------------------- eval

// 8-bit files carry label-map codes: 0 background, 255 ignore, anything else
// object. 16-bit files are instance labels where nonzero is object.
inline EvalTarget LoadEvalMask(const fs::path& path) {
  const StoredImage img = ReadStoredImage(path);
  EvalTarget t{Mask(img.values.bounds()), Mask(img.values.bounds())};
  const bool codes = img.bit_depth == 8;
  for (std::size_t i = 0; i < img.values.size(); ++i) {
    const std::uint16_t v = img.values.pixels()[i];
    if (codes && v == 255)
      t.ignore.pixels()[i] = 1;
    else
      t.object.pixels()[i] = v != 0;
  }
  return t;
}

struct EvalOptions {
  fs::path pred;
  fs::path gt;
  fs::path report;
  int morph_steps = 0;
};

inline nlohmann::json ScoreJson(const PixelScore& s) {
  return {{"tp", s.tp}, {"fp", s.fp}, {"fn", s.fn},
          {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

inline int CmdEval(const EvalOptions& opt, std::ostream& out, std::ostream& err) {
  detail::Require(opt.morph_steps >= 0, "--morph-steps must be >= 0");
  const nlohmann::json config = {{"morph_steps", opt.morph_steps},
                                 {"pred_semantics", "8-bit: 255 ignored, other nonzero object; 16-bit: nonzero object"}};

  RunManifest manifest;
  manifest.subcommand = "eval";
  manifest.config = config;
  manifest.inputs = {{"pred", opt.pred.string()}, {"gt", opt.gt.string()}};
  manifest.outputs = {{"report", opt.report.string()}};
  fs::path manifest_path = opt.report;
  manifest_path.replace_extension(".run_manifest.json");
  manifest.Write(manifest_path);

  const std::vector<ImageEntry> preds = ListImages(opt.pred);
  const std::vector<ImageEntry> gts = ListImages(opt.gt);
  if (preds.empty()) {
    err << "error: no prediction masks in " << opt.pred.string() << "\n";
    return 1;
  }
  std::map<std::string, fs::path> gt_by_id;
  for (const ImageEntry& e : gts) gt_by_id[e.id] = e.path;
  std::set<std::string> pred_ids;
  for (const ImageEntry& e : preds) pred_ids.insert(e.id);
  std::vector<std::string> unmatched;
  for (const ImageEntry& e : preds)
    if (!gt_by_id.count(e.id)) unmatched.push_back("pred/" + e.id);
  for (const ImageEntry& e : gts)
    if (!pred_ids.count(e.id)) unmatched.push_back("gt/" + e.id);
  if (!unmatched.empty()) {
    err << "error: unmatched files:";
    for (const std::string& u : unmatched) err << " " << u;
    err << "\n";
    return 1;
  }

  std::vector<PixelScore> scores;
  nlohmann::json per_image = nlohmann::json::array();
  std::string hashes;
  for (const ImageEntry& e : preds) {
    const fs::path& gt_path = gt_by_id.at(e.id);
    const EvalTarget pred = LoadEvalMask(e.path);
    const EvalTarget gt = LoadEvalMask(gt_path);
    const PixelScore s = PixelF1(pred.object, gt);
    scores.push_back(s);
    nlohmann::json j = ScoreJson(s);
    j["id"] = e.id;
    j["pred_sha1"] = GitBlobHash(ReadFileBytes(e.path));
    j["gt_sha1"] = GitBlobHash(ReadFileBytes(gt_path));
    hashes += j["pred_sha1"].get<std::string>() + j["gt_sha1"].get<std::string>();
    if (opt.morph_steps > 0) {
      const MorphBest best = DilateErodeToMaxF1(pred.object, gt, opt.morph_steps);
      j["morph_best_f1"] = best.best_f1;
      j["morph_best_step"] = best.step;
    }
    per_image.push_back(j);
  }
  const PixelScore micro = Aggregate(scores);
  const MacroScore macro = MacroAverage(scores);
  const nlohmann::json report = {
      {"tool_version", kToolVersion},
      {"config", config},
      {"config_hash", GitBlobHash(config.dump())},
      {"inputs_hash", GitBlobHash(hashes)},
      {"n_images", scores.size()},
      {"images", per_image},
      {"aggregate", ScoreJson(micro)},
      {"macro", {{"precision", macro.precision}, {"recall", macro.recall}, {"f1", macro.f1}}}};
  WriteFileAtomic(opt.report, report.dump(2) + "\n");

  std::size_t width = 5;
  for (const ImageEntry& e : preds) width = std::max(width, e.id.size());
  auto row = [&](const std::string& name, double p, double r, double f) {
    out << std::left << std::setw(static_cast<int>(width) + 2) << name << std::right << std::fixed
        << std::setprecision(4) << std::setw(10) << p << std::setw(10) << r << std::setw(10) << f << "\n";
  };
  out << std::left << std::setw(static_cast<int>(width) + 2) << "image" << std::right << std::setw(10)
      << "precision" << std::setw(10) << "recall" << std::setw(10) << "f1" << "\n";
  for (std::size_t i = 0; i < scores.size(); ++i)
    row(preds[i].id, scores[i].precision, scores[i].recall, scores[i].f1);
  row("micro", micro.precision, micro.recall, micro.f1);
  row("macro", macro.precision, macro.recall, macro.f1);
  return 0;
}

// ---------------------------------------------------------------- serve

struct ServeOptions {
  fs::path images;
  fs::path annotations;
  std::string host = "127.0.0.1";
  int port = 8080;
};

inline int CmdServe(const ServeOptions& opt, std::ostream& out, std::ostream& err) {
  detail::Require(opt.port >= 0 && opt.port <= 65535, "--port must lie in [0, 65535]");
  detail::Require(fs::is_directory(opt.images), opt.images.string() + " is not a directory");

  RunManifest manifest;
  manifest.subcommand = "serve";
  manifest.config = {{"host", opt.host}, {"port", opt.port}};
  manifest.inputs = {{"images", opt.images.string()}};
  manifest.outputs = {{"annotations", opt.annotations.string()}};
  fs::create_directories(opt.annotations);
  manifest.Write(opt.annotations / ".run_manifest.json");  // leading dot: not a valid annotation id

  AnnotationService service(opt.images, opt.annotations);
  if (!service.Bind(opt.host, opt.port)) {
    err << "error: cannot bind " << opt.host << ":" << opt.port << " (port in use?)\n";
    return 1;
  }
  out << "serving on http://" << opt.host << ":" << opt.port << "\n" << std::flush;
  return service.ListenAfterBind() ? 0 : 1;
}

// ---------------------------------------------------------------- entry

inline int RunCli(int argc, const char* const* argv, std::ostream& out = std::cout,
                  std::ostream& err = std::cerr) {
  CLI::App app{"Tilted-box weak supervision toolkit", "boxseg"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic image set with annotations");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--n", synth.n_images, "Number of images")->capture_default_str();
  synth_cmd->add_option("--size", synth.config.image_size, "Image side length")->capture_default_str();
  synth_cmd->add_option("--seed", synth.config.seed, "Base seed")->capture_default_str();
  synth_cmd->add_option("--objects", synth.config.n_objects, "Objects per image")->capture_default_str();
  synth_cmd->add_option("--radius-min", synth.config.radius_min)->capture_default_str();
  synth_cmd->add_option("--radius-max", synth.config.radius_max)->capture_default_str();
  synth_cmd->add_option("--harmonics", synth.config.harmonic_count)->capture_default_str();
  synth_cmd->add_option("--amplitude", synth.config.harmonic_amplitude)->capture_default_str();
  synth_cmd->add_option("--sharpness", synth.config.edge_sharpness, "Edge width in pixels")->capture_default_str();
  synth_cmd->add_option("--noise", synth.config.noise_sigma)->capture_default_str();
  synth_cmd->add_option("--separation", synth.config.min_separation, "Minimum gap between objects")
      ->capture_default_str();
  synth_cmd->add_flag("--jitter", synth.config.jitter, "Add +-2 px click noise");

  RunOptions run;
  double half_length = 0.0;
  auto* run_cmd = app.add_subcommand("run", "Run the pipeline over an image directory");
  run_cmd->add_option("--images", run.images)->required();
  run_cmd->add_option("--annotations", run.annotations)->required();
  run_cmd->add_option("--out", run.out)->required();
  auto* rough_opt = run_cmd->add_option("--rough", run.rough, "Directory of rough probability maps");
  auto* baseline_opt = run_cmd->add_flag("--baseline", run.baseline, "Use the built-in baseline segmenter");
  rough_opt->excludes(baseline_opt);
  run_cmd->add_option("--k", run.pipeline.boxgt.k, "Core rectangle scale")->capture_default_str();
  run_cmd->add_option("--spoke-thickness", run.pipeline.boxgt.spoke_thickness)->capture_default_str();
  run_cmd->add_option("--iou-threshold", run.pipeline.match.iou_threshold)->capture_default_str();
  run_cmd->add_option("--threshold", run.pipeline.binarize_threshold, "Rough map binarization threshold")
      ->capture_default_str();
  run_cmd->add_option("--min-area", run.pipeline.min_area)->capture_default_str();
  run_cmd->add_option("--gs-columns", run.pipeline.gs.n_columns)->capture_default_str();
  run_cmd->add_option("--gs-nodes", run.pipeline.gs.nodes_per_column)->capture_default_str();
  run_cmd->add_option("--gs-delta", run.pipeline.gs.smoothness_delta)->capture_default_str();
  auto* half_opt = run_cmd->add_option("--gs-half-length", half_length, "Column half length in pixels");
  run_cmd->add_option("--gs-presmooth", run.pipeline.gs.presmooth_sigma)->capture_default_str();
  run_cmd->add_option("--jobs", run.jobs, "Worker threads (0: all cores)")->capture_default_str();
  run_cmd->add_flag("--timings", run.pipeline.record_timings, "Record wall-clock timings in reports");
  run_cmd->add_flag("--dump-graphs", run.pipeline.dump_graphs, "Write column graphs as CSV");

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score predicted masks against ground truth");
  eval_cmd->add_option("--pred", eval.pred)->required();
  eval_cmd->add_option("--gt", eval.gt)->required();
  eval_cmd->add_option("--report", eval.report)->required();
  eval_cmd->add_option("--morph-steps", eval.morph_steps, "Also report the best F1 over +-N dilations")
      ->capture_default_str();

  ServeOptions serve;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the annotation HTTP API");
  serve_cmd->add_option("--images", serve.images)->required();
  serve_cmd->add_option("--annotations", serve.annotations)->required();
  serve_cmd->add_option("--port", serve.port)->capture_default_str();
  serve_cmd->add_option("--host", serve.host)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << e.what() << "\n\n";
    const auto parsed = app.get_subcommands();
    err << (parsed.empty() ? app.help() : parsed.back()->help());
    return 2;
  }

  try {
    if (synth_cmd->parsed()) return CmdSynth(synth, out);
    if (run_cmd->parsed()) {
      if (half_opt->count()) run.pipeline.gs.column_half_length = half_length;
      return CmdRun(run, out, err);
    }
    if (eval_cmd->parsed()) return CmdEval(eval, out, err);
    if (serve_cmd->parsed()) return CmdServe(serve, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::kValidation ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace boxseg
