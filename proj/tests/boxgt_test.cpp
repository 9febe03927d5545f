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

#include "boxseg/boxgt.hpp"

#include <random>
#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace boxseg {
namespace {

std::vector<TiltedBox> RandomScene(std::mt19937_64& rng, int count, double span) {
  std::vector<TiltedBox> boxes;
  for (int i = 0; i < count; ++i) boxes.push_back(BoxFromClicks(oracle::RandomClicks(rng, span)));
  return boxes;
}

TEST(RasterizeBoxGtTest, NoBoxesIsAllBackground) {
  const BoxGtResult res = RasterizeBoxGt({}, {8, 8});
  EXPECT_TRUE(res.empty_annotation);
  EXPECT_EQ(res.labels.Count(PixelClass::kBackground), 64u);
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c) EXPECT_EQ(res.labels.weight_of(r, c), 1.0);
}

TEST(RasterizeBoxGtTest, WholeImageBox) {
  ClickSequence cs;
  cs.orientation_clicks = {Point2{9, 10}, Point2{11, 10}};
  cs.extreme_clicks = {{10, 0}, {10, 20}, {0, 10}, {20, 10}};
  const TiltedBox box = BoxFromClicks(cs);
  const BoxGtResult res = RasterizeBoxGt(std::vector<TiltedBox>{box}, {20, 20});
  const LabelMap& m = res.labels;
  EXPECT_FALSE(res.empty_annotation);
  EXPECT_EQ(m.Count(PixelClass::kBackground), 0u);
  // Core: |x - 10| <= 4 and |y - 10| <= 4 on pixel centers.
  for (int r = 6; r < 14; ++r)
    for (int c = 6; c < 14; ++c) EXPECT_EQ(m.class_of(r, c), PixelClass::kObject);
  EXPECT_EQ(m.class_of(0, 9), PixelClass::kObject);   // vertical spoke
  EXPECT_EQ(m.class_of(19, 10), PixelClass::kObject);
  EXPECT_EQ(m.class_of(9, 0), PixelClass::kObject);   // horizontal spoke
  EXPECT_EQ(m.class_of(0, 0), PixelClass::kIgnore);
  EXPECT_EQ(m.class_of(3, 17), PixelClass::kIgnore);
  EXPECT_EQ(m.weight_of(0, 0), 0.0);
  // 8x8 core plus the four 2-px-wide spokes outside it.
  EXPECT_EQ(m.Count(PixelClass::kObject), 64u + 4u * 2u * 6u);
}

TEST(RasterizeBoxGtTest, OverlappingTiltedBoxesMatchOracle) {
  // Build the extreme clicks on the sides of known rectangles.
  auto make = [](Point2 center, double angle, double hu, double hv, Point2 oc) {
    const Point2 eu = AxisU(angle), ev = AxisV(angle);
    ClickSequence cs;
    cs.orientation_clicks = {oc - 2.0 * eu, oc + 2.0 * eu};
    cs.extreme_clicks.top = center - hv * ev + 0.3 * hu * eu;
    cs.extreme_clicks.bottom = center + hv * ev - 0.2 * hu * eu;
    cs.extreme_clicks.left = center - hu * eu + 0.1 * hv * ev;
    cs.extreme_clicks.right = center + hu * eu;
    return BoxFromClicks(cs);
  };
  const std::vector<TiltedBox> boxes = {make({28, 30}, 0.5, 18, 10, {27, 31}),
                                        make({38, 36}, -0.3, 14, 12, {39, 35})};
  const BoxGtResult res = RasterizeBoxGt(boxes, {64, 64});
  const Image<std::uint8_t> expect = oracle::BoxGt(boxes, {64, 64}, 0.4, 1.0);
  EXPECT_EQ(res.labels.codes(), expect);
}

TEST(RasterizeBoxGtTest, RandomScenesMatchOracle) {
  std::mt19937_64 rng(11);
  for (int scene = 0; scene < 5; ++scene) {
    const auto boxes = RandomScene(rng, 1 + scene % 4, 64);
    EXPECT_EQ(RasterizeBoxGt(boxes, {64, 64}).labels.codes(), oracle::BoxGt(boxes, {64, 64}, 0.4, 1.0))
        << "scene " << scene;
  }
}

TEST(RasterizeBoxGtTest, Invariants) {
  std::mt19937_64 rng(12);
  const ImageBounds bounds{64, 64};
  for (int scene = 0; scene < 10; ++scene) {
    const auto boxes = RandomScene(rng, 3, 64);
    const LabelMap full = RasterizeBoxGt(boxes, bounds).labels;
    const LabelMap fewer =
        RasterizeBoxGt(std::span<const TiltedBox>(boxes.data(), boxes.size() - 1), bounds).labels;
    for (int r = 0; r < 64; ++r) {
      for (int c = 0; c < 64; ++c) {
        EXPECT_EQ(full.weight_of(r, c) == 0.0, full.class_of(r, c) == PixelClass::kIgnore);
        if (fewer.class_of(r, c) == PixelClass::kObject)
          EXPECT_EQ(full.class_of(r, c), PixelClass::kObject) << "adding a box removed an object pixel";
      }
    }
    // Core pixels never leave their box.
    for (const TiltedBox& box : boxes) {
      const Mask core = BoxFootprint(CoreRectangle(box, 0.4), bounds);
      const Mask fp = BoxFootprint(box, bounds);
      for (std::size_t i = 0; i < core.size(); ++i)
        if (core.pixels()[i] && fp.pixels()[i]) EXPECT_EQ(full.codes().pixels()[i], 1);
    }
  }
}

TEST(RasterizeBoxGtTest, VanishingCoreAndSpokesLeaveTheCenterPixel) {
  TiltedBox box;
  box.center = {10, 10};
  box.half_u = 6;
  box.half_v = 4;
  box.object_center = {9.3, 10.8};
  box.extreme_points = {box.object_center, box.object_center, box.object_center, box.object_center};
  BoxGtConfig cfg;
  cfg.k = 1e-6;
  cfg.spoke_thickness = 1e-6;
  const LabelMap m = RasterizeBoxGt(std::vector<TiltedBox>{box}, {20, 20}, cfg).labels;
  EXPECT_EQ(m.Count(PixelClass::kObject), 1u);
  EXPECT_EQ(m.class_of(10, 9), PixelClass::kObject);
}

TEST(RasterizeBoxGtTest, RejectsBadConfig) {
  BoxGtConfig cfg;
  cfg.k = 1.0;
  EXPECT_THROW(RasterizeBoxGt({}, {4, 4}, cfg), Error);
  cfg.k = 0.4;
  cfg.spoke_thickness = 0;
  EXPECT_THROW(RasterizeBoxGt({}, {4, 4}, cfg), Error);
}

TEST(SegmentRasterizeTest, PointAndRow) {
  const auto single = SegmentRasterize({0.5, 0.5}, {0.5, 0.5}, 1.0);
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0], (PixelIndex{0, 0}));

  const auto row = SegmentRasterize({0.5, 0.5}, {5.5, 0.5}, 1.0);
  std::set<PixelIndex> got(row.begin(), row.end());
  std::set<PixelIndex> want;
  for (int c = 0; c <= 5; ++c) want.insert({0, c});
  EXPECT_EQ(got, want);
}

TEST(SegmentRasterizeTest, RandomSegmentsStayCloseAndConnected) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> U(2, 38);
  for (int i = 0; i < 200; ++i) {
    const Point2 a{U(rng), U(rng)}, b{U(rng), U(rng)};
    const double t = i % 2 ? 1.0 : 2.5;
    const auto px = SegmentRasterize(a, b, t);
    Mask m(48, 48);
    for (PixelIndex p : px) {
      EXPECT_LE(oracle::SegmentDistance(PixelCenter(p), a, b), t / 2 + 0.71);
      m[p] = 1;
    }
    EXPECT_EQ(oracle::FloodFillComponents(m).size(), 1u);
  }
}

TEST(LabelMapTest, CodesAreValidated) {
  Image<std::uint8_t> codes(3, 1);
  codes.at(0, 0) = 0;
  codes.at(0, 1) = 1;
  codes.at(0, 2) = 255;
  const LabelMap m = LabelMap::FromCodes(codes);
  EXPECT_EQ(m.class_of(0, 2), PixelClass::kIgnore);
  codes.at(0, 1) = 7;
  EXPECT_THROW(LabelMap::FromCodes(codes), Error);
}

}  // namespace
}  // namespace boxseg
