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
 * @file pipeline.hpp
 * @brief Box ground truth -> rough segmentation -> box/component matching ->
 * graph-search refinement -> fine ground truth, for one image at a time.
 */

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <sstream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "boxseg/annotation.hpp"
#include "boxseg/boxgt.hpp"
#include "boxseg/geometry.hpp"
#include "boxseg/graphsearch.hpp"
#include "boxseg/io.hpp"
#include "boxseg/segmenter.hpp"

namespace boxseg {

struct MatchConfig {
  double iou_threshold = 0.5;

  void Validate() const {
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0))
      throw Error(ErrorCode::kValidation, "iou_threshold must lie in (0, 1]");
  }
};

struct MatchPair {
  int box = 0;        // index into the box list
  int component = 0;  // component id
  double iou = 0.0;
};

struct MatchResult {
  std::vector<MatchPair> pairs;
  std::vector<int> unmatched_boxes;
  std::vector<int> unmatched_components;
};

// IoU between every box and the same-angle bounding box of every component.
inline std::vector<std::vector<double>> MatchIoUTable(std::span<const TiltedBox> boxes,
                                                      const RoughSegmentation& seg) {
  std::vector<std::vector<double>> table(boxes.size(),
                                         std::vector<double>(seg.components.size(), 0.0));
  for (std::size_t b = 0; b < boxes.size(); ++b)
    for (std::size_t c = 0; c < seg.components.size(); ++c)
      table[b][c] = SameAngleIoU(boxes[b], SameAngleBoundingBox(seg.components[c].mask, boxes[b].angle));
  return table;
}

// One-to-one greedy assignment in descending IoU; pairs below the threshold
// are never formed.
inline MatchResult Match(std::span<const TiltedBox> boxes, const RoughSegmentation& seg,
                         const MatchConfig& config = {}) {
  config.Validate();
  const auto table = MatchIoUTable(boxes, seg);
  struct Candidate {
    double iou;
    int box;
    std::size_t comp;
  };
  std::vector<Candidate> candidates;
  for (std::size_t b = 0; b < boxes.size(); ++b)
    for (std::size_t c = 0; c < seg.components.size(); ++c)
      if (table[b][c] >= config.iou_threshold)
        candidates.push_back({table[b][c], static_cast<int>(b), c});
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.iou > b.iou; });

  std::vector<bool> box_used(boxes.size(), false), comp_used(seg.components.size(), false);
  MatchResult result;
  for (const Candidate& cand : candidates) {
    if (box_used[cand.box] || comp_used[cand.comp]) continue;
    box_used[cand.box] = true;
    comp_used[cand.comp] = true;
    result.pairs.push_back({cand.box, seg.components[cand.comp].id, cand.iou});
  }
  std::sort(result.pairs.begin(), result.pairs.end(),
            [](const MatchPair& a, const MatchPair& b) { return a.box < b.box; });
  for (std::size_t b = 0; b < boxes.size(); ++b)
    if (!box_used[b]) result.unmatched_boxes.push_back(static_cast<int>(b));
  for (std::size_t c = 0; c < seg.components.size(); ++c)
    if (!comp_used[c]) result.unmatched_components.push_back(seg.components[c].id);
  return result;
}

enum class Provenance : std::uint8_t { kBoxGt = 0, kGsMask = 1 };

struct FineGroundTruth {
  LabelMap labels;
  Image<std::uint8_t> provenance;  // Provenance codes
};

// Inside each matched box footprint: mask pixels become OBJECT and the rest
// BACKGROUND. Elsewhere the box ground truth is kept verbatim.
inline FineGroundTruth AssembleFineGt(const LabelMap& box_gt, const MatchResult& matches,
                                      const std::map<int, Mask>& masks,
                                      std::span<const TiltedBox> boxes) {
  const ImageBounds bounds = box_gt.bounds();
  FineGroundTruth fine{box_gt, Image<std::uint8_t>(bounds, static_cast<std::uint8_t>(Provenance::kBoxGt))};
  Mask in_footprint(bounds), is_object(bounds);
  for (const MatchPair& pair : matches.pairs) {
    const auto it = masks.find(pair.component);
    if (it == masks.end())
      throw Error(ErrorCode::kMissingMask,
                  "matched component " + std::to_string(pair.component) + " has no mask");
    RequireSameBounds(it->second.bounds(), bounds, "refined mask");
    const Mask footprint = BoxFootprint(boxes[pair.box], bounds);
    for (std::size_t i = 0; i < footprint.size(); ++i) {
      if (!footprint.pixels()[i]) continue;
      in_footprint.pixels()[i] = 1;
      if (it->second.pixels()[i]) is_object.pixels()[i] = 1;
    }
  }
  for (int r = 0; r < bounds.height; ++r) {
    for (int c = 0; c < bounds.width; ++c) {
      if (!in_footprint.at(r, c)) continue;
      fine.labels.set(r, c, is_object.at(r, c) ? PixelClass::kObject : PixelClass::kBackground);
      fine.provenance.at(r, c) = static_cast<std::uint8_t>(Provenance::kGsMask);
    }
  }
  return fine;
}

struct PipelineConfig {
  BoxGtConfig boxgt;
  MatchConfig match;
  GsConfig gs;
  double binarize_threshold = 0.5;
  std::size_t min_area = 0;
  bool record_timings = false;  // wall-clock times make reports non-reproducible
  bool dump_graphs = false;

  void Validate() const {
    boxgt.Validate();
    match.Validate();
    gs.Validate();
    if (!(binarize_threshold >= 0.0 && binarize_threshold <= 1.0))
      throw Error(ErrorCode::kValidation, "binarize threshold must lie in [0, 1]");
  }
};

struct BoxStatus {
  int object_id = 0;
  std::string status;  // matched-refined | refinement-fallback | filtered | dropped
  int component = 0;
  double iou = 0.0;
  double best_iou = 0.0;
  std::string error;
  std::vector<std::string> warnings;
};

struct ImageResult {
  std::string id;
  LabelMap box_gt;
  RoughSegmentation rough;
  MatchResult matches;
  std::map<int, Mask> refined;  // component id -> mask used in the fine GT
  FineGroundTruth fine_gt;
  std::vector<BoxStatus> statuses;
  std::map<int, std::string> graph_csv;  // component id -> debug dump
  nlohmann::json report;
};

inline Image<std::uint16_t> RefinedLabelImage(const std::map<int, Mask>& refined, ImageBounds bounds) {
  Image<std::uint16_t> out(bounds);
  for (const auto& [id, mask] : refined)
    for (std::size_t i = 0; i < out.size(); ++i)
      if (mask.pixels()[i]) out.pixels()[i] = static_cast<std::uint16_t>(id);
  return out;
}

// Runs every stage given an already computed rough probability map.
inline ImageResult RunImageWithRough(const GrayImage& image, const AnnotationFile& annotations,
                                     const ProbabilityMap& rough, const PipelineConfig& config) {
  config.Validate();
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  RequireSameBounds(annotations.bounds(), image.bounds(), "annotation vs image");
  RequireSameBounds(rough.bounds(), image.bounds(), "rough map vs image");
  ValidateProbabilityMap(rough);

  ImageResult result;
  result.id = annotations.image;
  const std::vector<TiltedBox> boxes = annotations.boxes();
  const BoxGtResult box_gt = RasterizeBoxGt(boxes, image.bounds(), config.boxgt);
  result.box_gt = box_gt.labels;
  const auto t1 = Clock::now();

  result.rough = BinarizeAndLabel(rough, config.binarize_threshold, config.min_area);
  MatchResult matches = Match(boxes, result.rough, config.match);
  const auto iou_table = MatchIoUTable(boxes, result.rough);
  const auto t2 = Clock::now();

  std::map<int, const InstanceMask*> by_id;
  for (const InstanceMask& c : result.rough.components) by_id[c.id] = &c;
  std::vector<BoxStatus> statuses(boxes.size());
  for (std::size_t b = 0; b < boxes.size(); ++b) {
    statuses[b].object_id = annotations.objects[b].id;
    statuses[b].status = "filtered";
    for (double v : iou_table[b]) statuses[b].best_iou = std::max(statuses[b].best_iou, v);
  }

  std::vector<MatchPair> kept;
  if (!matches.pairs.empty()) {
    const DomainCell cell = ComputeDomainCells(result.rough);
    for (const MatchPair& pair : matches.pairs) {
      BoxStatus& st = statuses[pair.box];
      st.component = pair.component;
      st.iou = pair.iou;
      const InstanceMask& comp = *by_id.at(pair.component);
      const TiltedBox& box = boxes[pair.box];
      try {
        RefineResult refined = RefineComponent(image, comp, box, cell, config.gs);
        if (config.dump_graphs) {
          std::ostringstream csv;
          WriteGraphCsv(csv, refined.graph, refined.contour);
          result.graph_csv[pair.component] = csv.str();
        }
        st.status = "matched-refined";
        st.warnings = refined.warnings;
        result.refined[pair.component] = std::move(refined.mask);
        kept.push_back(pair);
      } catch (const Error& e) {
        st.error = e.what();
        Mask fallback = comp.mask;
        const Mask footprint = BoxFootprint(box, image.bounds());
        for (std::size_t i = 0; i < fallback.size(); ++i)
          fallback.pixels()[i] = fallback.pixels()[i] && footprint.pixels()[i];
        if (CountForeground(fallback) == 0) {
          st.status = "dropped";
          continue;
        }
        st.status = "refinement-fallback";
        result.refined[pair.component] = std::move(fallback);
        kept.push_back(pair);
      }
    }
  }
  for (const MatchPair& pair : matches.pairs) {
    if (std::none_of(kept.begin(), kept.end(), [&](const MatchPair& k) { return k.box == pair.box; })) {
      matches.unmatched_boxes.push_back(pair.box);
      matches.unmatched_components.push_back(pair.component);
    }
  }
  std::sort(matches.unmatched_boxes.begin(), matches.unmatched_boxes.end());
  std::sort(matches.unmatched_components.begin(), matches.unmatched_components.end());
  matches.pairs = kept;
  result.matches = matches;
  const auto t3 = Clock::now();

  result.fine_gt = AssembleFineGt(result.box_gt, result.matches, result.refined, boxes);
  result.statuses = statuses;
  const auto t4 = Clock::now();

  nlohmann::json boxes_json = nlohmann::json::array();
  for (const BoxStatus& st : statuses) {
    nlohmann::json j = {{"object_id", st.object_id}, {"status", st.status}, {"best_iou", st.best_iou}};
    if (st.component) {
      j["component"] = st.component;
      j["iou"] = st.iou;
    }
    if (!st.error.empty()) j["error"] = st.error;
    if (!st.warnings.empty()) j["warnings"] = st.warnings;
    boxes_json.push_back(j);
  }
  std::size_t n_refined = 0, n_fallback = 0;
  for (const BoxStatus& st : statuses) {
    n_refined += st.status == "matched-refined";
    n_fallback += st.status == "refinement-fallback";
  }
  result.report = {
      {"image", result.id},
      {"width", image.width()},
      {"height", image.height()},
      {"empty_annotation", box_gt.empty_annotation},
      {"n_boxes", boxes.size()},
      {"n_components", result.rough.components.size()},
      {"n_matched", result.matches.pairs.size()},
      {"n_refined", n_refined},
      {"n_fallback", n_fallback},
      {"unmatched_components", result.matches.unmatched_components},
      {"ignore_pixels_box_gt", result.box_gt.Count(PixelClass::kIgnore)},
      {"ignore_pixels_fine_gt", result.fine_gt.labels.Count(PixelClass::kIgnore)},
      {"boxes", boxes_json},
  };
  if (config.record_timings) {
    auto ms = [](auto a, auto b) { return std::chrono::duration<double, std::milli>(b - a).count(); };
    result.report["timings_ms"] = {{"box_gt", ms(t0, t1)},
                                   {"rough_and_match", ms(t1, t2)},
                                   {"refine", ms(t2, t3)},
                                   {"assemble", ms(t3, t4)}};
  }
  return result;
}

inline ImageResult RunImage(const GrayImage& image, const AnnotationFile& annotations,
                            const RoughProvider& provider, const PipelineConfig& config) {
  const ProbabilityMap rough = CheckedSegment(provider, image, annotations.image);
  return RunImageWithRough(image, annotations, rough, config);
}

// Artifact layout under `out`: boxgt/, rough/, refined/, finegt/, report/
// (and debug/ when graph dumps are enabled).
inline void WriteArtifacts(const fs::path& out, const ImageResult& result) {
  const std::string& id = result.id;
  WriteLabelMap(out / "boxgt" / (id + ".png"), result.box_gt);
  WritePng16(out / "rough" / (id + ".png"), ComponentLabelImage(result.rough));
  WritePng16(out / "refined" / (id + ".png"),
             RefinedLabelImage(result.refined, result.box_gt.bounds()));
  WriteLabelMap(out / "finegt" / (id + ".png"), result.fine_gt.labels);
  WriteFileAtomic(out / "report" / (id + ".json"), result.report.dump(2) + "\n");
  for (const auto& [comp, csv] : result.graph_csv)
    WriteFileAtomic(out / "debug" / (id + "_" + std::to_string(comp) + ".csv"), csv);
}

}  // namespace boxseg
