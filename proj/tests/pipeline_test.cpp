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

#include "boxseg/pipeline.hpp"

#include <random>

#include <gtest/gtest.h>

#include "boxseg/eval.hpp"
#include "boxseg/synth.hpp"
#include "oracles.hpp"

namespace boxseg {
namespace {

Mask Rect(ImageBounds b, int r0, int c0, int rows, int cols) {
  Mask m(b);
  for (int r = r0; r < r0 + rows; ++r)
    for (int c = c0; c < c0 + cols; ++c) m.at(r, c) = 1;
  return m;
}

RoughSegmentation FromMasks(const std::vector<Mask>& masks) {
  RoughSegmentation seg{Mask(masks.front().bounds()), {}};
  for (std::size_t k = 0; k < masks.size(); ++k) {
    seg.components.push_back({static_cast<int>(k) + 1, masks[k]});
    for (std::size_t i = 0; i < masks[k].size(); ++i) seg.foreground.pixels()[i] |= masks[k].pixels()[i];
  }
  return seg;
}

// Axis-aligned box sharing its left/top edge with a 10x10 square at (10,10)
// and stretched vertically to hit a target IoU.
TiltedBox StretchedBox(double iou) {
  TiltedBox b;
  b.half_u = 5;
  b.half_v = 5 / iou;
  b.center = {15, 10 + b.half_v};
  b.object_center = b.center;
  return b;
}

TEST(MatchTest, ExactBoxMatchesWithIoUOne) {
  const ImageBounds bounds{40, 40};
  const RoughSegmentation seg = FromMasks({Rect(bounds, 5, 5, 6, 9), Rect(bounds, 20, 20, 8, 8)});
  const TiltedBox box = SameAngleBoundingBox(seg.components[1].mask, 0.0);
  const MatchResult m = Match(std::vector<TiltedBox>{box}, seg);
  ASSERT_EQ(m.pairs.size(), 1u);
  EXPECT_EQ(m.pairs[0].component, 2);
  EXPECT_DOUBLE_EQ(m.pairs[0].iou, 1.0);
  EXPECT_EQ(m.unmatched_components, std::vector<int>{1});
}

TEST(MatchTest, ThresholdIsInclusiveAtHalf) {
  const ImageBounds bounds{40, 60};
  const RoughSegmentation seg = FromMasks({Rect(bounds, 10, 10, 10, 10)});
  for (double iou : {0.4, 0.49, 0.5, 0.51}) {
    const MatchResult m = Match(std::vector<TiltedBox>{StretchedBox(iou)}, seg);
    const bool expect = iou >= 0.5;
    EXPECT_EQ(m.pairs.size(), expect ? 1u : 0u) << iou;
    EXPECT_EQ(m.unmatched_boxes.size(), expect ? 0u : 1u) << iou;
  }
}

TEST(MatchTest, GreedyEqualsLexicographicOptimum) {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> U(0, 1);
  const ImageBounds bounds{120, 120};
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Mask> masks;
    std::vector<TiltedBox> boxes;
    for (int k = 0; k < 5; ++k) {
      const int r0 = 5 + static_cast<int>(U(rng) * 60), c0 = 5 + static_cast<int>(U(rng) * 60);
      const int h = 8 + static_cast<int>(U(rng) * 30), w = 8 + static_cast<int>(U(rng) * 30);
      masks.push_back(Rect(bounds, r0, c0, h, w));
      TiltedBox b;
      b.center = {c0 + w / 2.0 + (U(rng) - 0.5) * 12, r0 + h / 2.0 + (U(rng) - 0.5) * 12};
      b.half_u = w / 2.0 * (0.7 + 0.6 * U(rng));
      b.half_v = h / 2.0 * (0.7 + 0.6 * U(rng));
      b.object_center = b.center;
      boxes.push_back(b);
    }
    const RoughSegmentation seg = FromMasks(masks);
    const auto table = MatchIoUTable(boxes, seg);
    const MatchResult m = Match(boxes, seg);
    std::map<int, int> got;
    for (const MatchPair& p : m.pairs) {
      EXPECT_GE(p.iou, 0.5);
      got[p.box] = p.component - 1;
    }
    EXPECT_EQ(got, oracle::LexMaxMatching(table, 0.5)) << "trial " << trial;
    std::set<int> comps;
    for (const MatchPair& p : m.pairs) EXPECT_TRUE(comps.insert(p.component).second);
    EXPECT_EQ(m.pairs.size() + m.unmatched_boxes.size(), boxes.size());
    EXPECT_EQ(m.pairs.size() + m.unmatched_components.size(), seg.components.size());
  }
}

TEST(MatchTest, IoUTableAgreesWithRasterization) {
  std::mt19937_64 rng(52);
  const ImageBounds bounds{64, 64};
  const RoughSegmentation seg = FromMasks({oracle::Disk(bounds, {30, 33}, 12)});
  for (int k = 0; k < 5; ++k) {
    TiltedBox b = BoxFromClicks(oracle::RandomClicks(rng, 60));
    const auto t = MatchIoUTable(std::vector<TiltedBox>{b}, seg);
    const TiltedBox comp_box = SameAngleBoundingBox(seg.components[0].mask, b.angle);
    EXPECT_NEAR(t[0][0], oracle::RasterIoU(b, comp_box), 0.01);
  }
}

TEST(MatchTest, EmptyInputs) {
  const MatchResult m = Match({}, RoughSegmentation{Mask(4, 4), {}});
  EXPECT_TRUE(m.pairs.empty());
  MatchConfig bad;
  bad.iou_threshold = 1.01;
  EXPECT_THROW(Match({}, RoughSegmentation{Mask(4, 4), {}}, bad), Error);
}

// Rule-by-rule fine ground truth for one pixel.
std::uint8_t FineOracle(const LabelMap& box_gt, const MatchResult& matches, const std::map<int, Mask>& masks,
                        const std::vector<TiltedBox>& boxes, int r, int c) {
  bool in_fp = false, object = false;
  for (const MatchPair& p : matches.pairs) {
    if (!oracle::InBox(boxes[p.box], PixelCenter(r, c))) continue;
    in_fp = true;
    object = object || masks.at(p.component).at(r, c);
  }
  if (!in_fp) return box_gt.codes().at(r, c);
  return object ? 1 : 0;
}

TEST(AssembleFineGtTest, NoMatchesKeepsBoxGt) {
  std::mt19937_64 rng(53);
  const std::vector<TiltedBox> boxes = {BoxFromClicks(oracle::RandomClicks(rng, 40))};
  const LabelMap gt = RasterizeBoxGt(boxes, {48, 48}).labels;
  const FineGroundTruth fine = AssembleFineGt(gt, MatchResult{}, {}, boxes);
  EXPECT_EQ(fine.labels, gt);
  for (std::uint8_t p : fine.provenance.pixels()) EXPECT_EQ(p, static_cast<std::uint8_t>(Provenance::kBoxGt));
}

TEST(AssembleFineGtTest, CoreRectangleMask) {
  ClickSequence cs;
  cs.orientation_clicks = {Point2{19, 20}, Point2{21, 20}};
  cs.extreme_clicks = {{20, 8}, {20, 32}, {6, 20}, {34, 20}};
  const TiltedBox box = BoxFromClicks(cs);
  const std::vector<TiltedBox> boxes = {box};
  const ImageBounds bounds{40, 40};
  const LabelMap gt = RasterizeBoxGt(boxes, bounds).labels;
  const Mask core = BoxFootprint(CoreRectangle(box, 0.4), bounds);
  MatchResult matches;
  matches.pairs.push_back({0, 1, 0.9});
  const FineGroundTruth fine = AssembleFineGt(gt, matches, {{1, core}}, boxes);
  const Mask fp = BoxFootprint(box, bounds);
  for (int r = 0; r < 40; ++r) {
    for (int c = 0; c < 40; ++c) {
      if (!fp.at(r, c)) {
        EXPECT_EQ(fine.labels.class_of(r, c), gt.class_of(r, c));
        continue;
      }
      EXPECT_EQ(fine.labels.class_of(r, c), core.at(r, c) ? PixelClass::kObject : PixelClass::kBackground);
      EXPECT_EQ(fine.provenance.at(r, c), static_cast<std::uint8_t>(Provenance::kGsMask));
    }
  }
  EXPECT_LT(fine.labels.Count(PixelClass::kIgnore), gt.Count(PixelClass::kIgnore));
  EXPECT_EQ(fine.labels.Count(PixelClass::kIgnore), 0u);
}

TEST(AssembleFineGtTest, SyntheticPartialMatchMatchesOracle) {
  SynthConfig cfg;
  cfg.n_objects = 3;
  cfg.seed = 77;
  const SynthImage s = GenerateSynthImage(cfg, "s");
  const std::vector<TiltedBox> boxes = s.annotations.boxes();
  const LabelMap gt = RasterizeBoxGt(boxes, s.image.bounds()).labels;
  MatchResult matches;
  matches.pairs = {{0, 1, 0.9}, {2, 3, 0.8}};
  matches.unmatched_boxes = {1};
  const std::map<int, Mask> masks = {{1, s.gt_masks[0]}, {3, s.gt_masks[2]}};
  const FineGroundTruth fine = AssembleFineGt(gt, matches, masks, boxes);
  EXPECT_LT(fine.labels.Count(PixelClass::kIgnore), gt.Count(PixelClass::kIgnore));
  for (int r = 0; r < gt.height(); ++r)
    for (int c = 0; c < gt.width(); ++c)
      ASSERT_EQ(fine.labels.codes().at(r, c), FineOracle(gt, matches, masks, boxes, r, c)) << r << "," << c;
}

TEST(AssembleFineGtTest, MissingMaskThrows) {
  MatchResult matches;
  matches.pairs.push_back({0, 4, 0.9});
  TiltedBox b;
  b.center = {5, 5};
  b.half_u = b.half_v = 2;
  try {
    AssembleFineGt(LabelMap({10, 10}), matches, {}, std::vector<TiltedBox>{b});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingMask);
  }
}

ProbabilityMap MaskToMap(const Mask& m) {
  ProbabilityMap p(m.bounds());
  for (std::size_t i = 0; i < m.size(); ++i) p.pixels()[i] = m.pixels()[i];
  return p;
}

TEST(RunImageTest, OneCleanObject) {
  SynthConfig cfg;
  cfg.n_objects = 1;
  cfg.seed = 3;
  const SynthImage s = GenerateSynthImage(cfg, "one");
  const ImageResult res = RunImage(s.image, s.annotations, BaselineProvider(), PipelineConfig{});
  EXPECT_EQ(res.matches.pairs.size(), 1u);
  ASSERT_EQ(res.statuses.size(), 1u);
  EXPECT_EQ(res.statuses[0].status, "matched-refined");
  EXPECT_GE(PixelF1(res.fine_gt.labels.ObjectMask(), s.gt_masks[0]).f1, 0.95);
  EXPECT_EQ(res.report["n_refined"], 1);
  EXPECT_FALSE(res.report.contains("timings_ms"));
}

TEST(RunImageTest, EmptyRoughLeavesBoxGt) {
  SynthConfig cfg;
  cfg.seed = 4;
  const SynthImage s = GenerateSynthImage(cfg, "e");
  const ImageResult res = RunImageWithRough(s.image, s.annotations, ProbabilityMap(s.image.bounds()), {});
  EXPECT_TRUE(res.matches.pairs.empty());
  EXPECT_EQ(res.fine_gt.labels, res.box_gt);
  for (const BoxStatus& st : res.statuses) EXPECT_EQ(st.status, "filtered");
}

TEST(RunImageTest, DimensionMismatchIsAnImageLevelError) {
  SynthConfig cfg;
  const SynthImage s = GenerateSynthImage(cfg, "d");
  try {
    RunImageWithRough(s.image, s.annotations, ProbabilityMap(10, 10), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(RunImageTest, RefinementFailureFallsBackAndEmptyFallbackIsDropped) {
  const ImageBounds bounds{30, 30};
  // A 2x1 component cannot be refined (boundary too short).
  ClickSequence small;
  small.orientation_clicks = {Point2{5.5, 20}, Point2{6.5, 20}};
  small.extreme_clicks = {{6, 19.5}, {6, 20.5}, {5, 20}, {7, 20}};
  // A box whose footprint misses the pixel centers of its component.
  ClickSequence thin;
  thin.orientation_clicks = {Point2{20.5, 6.1}, Point2{21.5, 6.1}};
  thin.extreme_clicks = {{21, 5.6}, {21, 6.6}, {20, 6.1}, {22, 6.1}};
  AnnotationFile ann;
  ann.image = "f";
  ann.width = ann.height = 30;
  ann.objects = {{0, small, BoxFromClicks(small)}, {1, thin, BoxFromClicks(thin)}};
  Mask rough(bounds);
  rough.at(19, 5) = rough.at(19, 6) = 1;
  rough.at(5, 20) = rough.at(5, 21) = 1;
  PipelineConfig cfg;
  cfg.match.iou_threshold = 0.2;
  const ImageResult res = RunImageWithRough(GrayImage(bounds), ann, MaskToMap(rough), cfg);
  ASSERT_EQ(res.statuses.size(), 2u);
  EXPECT_EQ(res.statuses[0].status, "refinement-fallback");
  EXPECT_FALSE(res.statuses[0].error.empty());
  EXPECT_EQ(res.statuses[1].status, "dropped");
  EXPECT_EQ(res.matches.pairs.size(), 1u);
  EXPECT_EQ(res.matches.unmatched_boxes, std::vector<int>{1});
  EXPECT_EQ(res.report["n_fallback"], 1);
}

TEST(RunImageTest, ArtifactsAreReproducible) {
  SynthConfig cfg;
  cfg.seed = 9;
  const SynthImage s = GenerateSynthImage(cfg, "rep");
  oracle::TempDir a("arta"), b("artb");
  PipelineConfig pc;
  pc.dump_graphs = true;
  WriteArtifacts(a.path(), RunImage(s.image, s.annotations, BaselineProvider(), pc));
  WriteArtifacts(b.path(), RunImage(s.image, s.annotations, BaselineProvider(), pc));
  const auto ta = oracle::ReadTree(a.path());
  EXPECT_EQ(ta, oracle::ReadTree(b.path()));
  for (const char* dir : {"boxgt/", "rough/", "refined/", "finegt/", "report/", "debug/"}) {
    EXPECT_TRUE(std::any_of(ta.begin(), ta.end(), [&](const auto& kv) { return kv.first.rfind(dir, 0) == 0; }))
        << dir;
  }
  const LabelMap box_gt = ReadLabelMap(a.path() / "boxgt" / "rep.png");
  const LabelMap fine = ReadLabelMap(a.path() / "finegt" / "rep.png");
  EXPECT_LE(fine.Count(PixelClass::kIgnore), box_gt.Count(PixelClass::kIgnore));
}

}  // namespace
}  // namespace boxseg
