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
 * @file boxgt.hpp
 * @brief Weak per-pixel labels derived from tilted boxes alone.
 *
 * Pixels outside every box are background. Inside a box, the scaled core
 * rectangle around the object center and the four spokes from the object
 * center to the extreme points are object. Everything else is ignored
 * (training weight 0).
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "boxseg/geometry.hpp"
#include "boxseg/image.hpp"

namespace boxseg {

// Persisted codes; bit-exact on disk.
enum class PixelClass : std::uint8_t {
  kBackground = 0,
  kObject = 1,
  kIgnore = 255,
};

class LabelMap {
 public:
  LabelMap() = default;
  explicit LabelMap(ImageBounds bounds, PixelClass fill = PixelClass::kIgnore)
      : classes_(bounds, static_cast<std::uint8_t>(fill)) {}

  int width() const { return classes_.width(); }
  int height() const { return classes_.height(); }
  ImageBounds bounds() const { return classes_.bounds(); }

  PixelClass class_of(int row, int col) const {
    return static_cast<PixelClass>(classes_.at(row, col));
  }
  void set(int row, int col, PixelClass c) {
    classes_.at(row, col) = static_cast<std::uint8_t>(c);
  }
  // Weight is implied by class, so weight 0 holds exactly on IGNORE.
  double weight_of(int row, int col) const {
    return class_of(row, col) == PixelClass::kIgnore ? 0.0 : 1.0;
  }

  std::size_t Count(PixelClass c) const {
    std::size_t n = 0;
    for (std::uint8_t v : classes_.pixels()) n += v == static_cast<std::uint8_t>(c);
    return n;
  }

  Mask ObjectMask() const {
    Mask m(bounds());
    for (std::size_t i = 0; i < m.size(); ++i)
      m.pixels()[i] = classes_.pixels()[i] == static_cast<std::uint8_t>(PixelClass::kObject);
    return m;
  }

  // Raw codes in raster order.
  const Image<std::uint8_t>& codes() const { return classes_; }
  static LabelMap FromCodes(const Image<std::uint8_t>& codes) {
    for (std::uint8_t v : codes.pixels()) {
      if (v != 0 && v != 1 && v != 255)
        throw Error(ErrorCode::kValidation, "label map code " + std::to_string(v));
    }
    LabelMap out;
    out.classes_ = codes;
    return out;
  }

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  Image<std::uint8_t> classes_;
};

struct BoxGtConfig {
  double k = 0.4;               // core half-extents = k * box half-extents
  double spoke_thickness = 1.0;

  void Validate() const {
    if (!(k > 0.0 && k < 1.0)) throw Error(ErrorCode::kValidation, "k must lie in (0, 1)");
    if (!(spoke_thickness > 0.0))
      throw Error(ErrorCode::kValidation, "spoke thickness must be positive");
  }
};

// Pixels whose centers are within thickness/2 of the segment, plus the
// pixels containing the two endpoints. For thickness >= 1 the set is
// 8-connected. Pixels may fall outside any image; callers clip.
inline std::vector<PixelIndex> SegmentRasterize(Point2 a, Point2 b, double thickness) {
  const double reach = thickness / 2;
  const int c0 = static_cast<int>(std::floor(std::min(a.x, b.x) - reach)) - 1;
  const int c1 = static_cast<int>(std::ceil(std::max(a.x, b.x) + reach)) + 1;
  const int r0 = static_cast<int>(std::floor(std::min(a.y, b.y) - reach)) - 1;
  const int r1 = static_cast<int>(std::ceil(std::max(a.y, b.y) + reach)) + 1;
  const PixelIndex pa = ContainingPixel(a);
  const PixelIndex pb = ContainingPixel(b);
  std::vector<PixelIndex> out;
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      const PixelIndex p{r, c};
      if (p == pa || p == pb || DistanceToSegment(PixelCenter(p), a, b) <= reach)
        out.push_back(p);
    }
  }
  return out;
}

// The core rectangle: box orientation, centered on the object center,
// half-extents scaled by k. Pixels must also lie inside the box itself.
inline TiltedBox CoreRectangle(const TiltedBox& box, double k) {
  TiltedBox core = box;
  core.center = box.object_center;
  core.half_u = k * box.half_u;
  core.half_v = k * box.half_v;
  return core;
}

struct BoxGtResult {
  LabelMap labels;
  bool empty_annotation = false;  // no boxes: everything is background
};

inline BoxGtResult RasterizeBoxGt(std::span<const TiltedBox> boxes, ImageBounds bounds,
                                  const BoxGtConfig& config = {}) {
  config.Validate();
  BoxGtResult result{LabelMap(bounds, PixelClass::kBackground), boxes.empty()};
  LabelMap& labels = result.labels;

  // Precedence: OBJECT > BACKGROUND > IGNORE. Covered pixels start as IGNORE.
  for (const TiltedBox& box : boxes) {
    const Mask footprint = BoxFootprint(box, bounds);
    for (int r = 0; r < bounds.height; ++r)
      for (int c = 0; c < bounds.width; ++c)
        if (footprint.at(r, c) && labels.class_of(r, c) == PixelClass::kBackground)
          labels.set(r, c, PixelClass::kIgnore);
  }
  for (const TiltedBox& box : boxes) {
    const TiltedBox core = CoreRectangle(box, config.k);
    const Mask core_mask = BoxFootprint(core, bounds);
    const Mask footprint = BoxFootprint(box, bounds);
    for (int r = 0; r < bounds.height; ++r)
      for (int c = 0; c < bounds.width; ++c)
        if (core_mask.at(r, c) && footprint.at(r, c)) labels.set(r, c, PixelClass::kObject);
    for (Point2 tip : box.extreme_points.as_array()) {
      for (PixelIndex p : SegmentRasterize(box.object_center, tip, config.spoke_thickness))
        if (bounds.Contains(p)) labels.set(p.row, p.col, PixelClass::kObject);
    }
  }
  return result;
}

}  // namespace boxseg
