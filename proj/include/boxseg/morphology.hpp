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

#pragma once

#include <cstdint>
#include <vector>

#include "boxseg/image.hpp"

namespace boxseg {

// Offsets of the Euclidean disk {(dr, dc) : dr^2 + dc^2 <= radius^2}.
inline std::vector<PixelIndex> DiskOffsets(int radius) {
  std::vector<PixelIndex> out;
  for (int dr = -radius; dr <= radius; ++dr)
    for (int dc = -radius; dc <= radius; ++dc)
      if (dr * dr + dc * dc <= radius * radius) out.push_back({dr, dc});
  return out;
}

inline Mask DilateDisk(const Mask& mask, int radius) {
  if (radius <= 0) return mask;
  const auto offsets = DiskOffsets(radius);
  Mask out(mask.bounds());
  for (int r = 0; r < mask.height(); ++r) {
    for (int c = 0; c < mask.width(); ++c) {
      if (!mask.at(r, c)) continue;
      for (PixelIndex o : offsets) {
        const int rr = r + o.row, cc = c + o.col;
        if (mask.bounds().Contains(rr, cc)) out.at(rr, cc) = 1;
      }
    }
  }
  return out;
}

// Pixels outside the image count as background unless outside_is_foreground.
inline Mask ErodeDisk(const Mask& mask, int radius, bool outside_is_foreground = false) {
  if (radius <= 0) return mask;
  const auto offsets = DiskOffsets(radius);
  Mask out(mask.bounds());
  for (int r = 0; r < mask.height(); ++r) {
    for (int c = 0; c < mask.width(); ++c) {
      if (!mask.at(r, c)) continue;
      bool keep = true;
      for (PixelIndex o : offsets) {
        const int rr = r + o.row, cc = c + o.col;
        const bool fg = mask.bounds().Contains(rr, cc) ? mask.at(rr, cc) != 0
                                                       : outside_is_foreground;
        if (!fg) {
          keep = false;
          break;
        }
      }
      out.at(r, c) = keep ? 1 : 0;
    }
  }
  return out;
}

// Repeated unit-disk steps: positive dilates, negative erodes.
inline Mask MorphSteps(const Mask& mask, int steps) {
  Mask out = mask;
  for (int i = 0; i < std::abs(steps); ++i)
    out = steps > 0 ? DilateDisk(out, 1) : ErodeDisk(out, 1);
  return out;
}

inline Mask OpenDisk(const Mask& mask, int radius, bool outside_is_foreground = false) {
  return DilateDisk(ErodeDisk(mask, radius, outside_is_foreground), radius);
}

struct ComponentLabels {
  Image<std::int32_t> labels;        // 0 = background, 1..count
  std::vector<std::size_t> areas;    // areas[id - 1]
  int count() const { return static_cast<int>(areas.size()); }
};

// 8-connected labeling; ids are assigned in raster order of each
// component's first pixel.
inline ComponentLabels LabelComponents8(const Mask& mask) {
  ComponentLabels out{Image<std::int32_t>(mask.bounds()), {}};
  std::vector<PixelIndex> stack;
  for (int r = 0; r < mask.height(); ++r) {
    for (int c = 0; c < mask.width(); ++c) {
      if (!mask.at(r, c) || out.labels.at(r, c)) continue;
      const auto id = static_cast<std::int32_t>(out.areas.size() + 1);
      std::size_t area = 0;
      out.labels.at(r, c) = id;
      stack.push_back({r, c});
      while (!stack.empty()) {
        const PixelIndex p = stack.back();
        stack.pop_back();
        ++area;
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            const int rr = p.row + dr, cc = p.col + dc;
            if (!mask.bounds().Contains(rr, cc)) continue;
            if (!mask.at(rr, cc) || out.labels.at(rr, cc)) continue;
            out.labels.at(rr, cc) = id;
            stack.push_back({rr, cc});
          }
        }
      }
      out.areas.push_back(area);
    }
  }
  return out;
}

inline int CountComponents8(const Mask& mask) {
  return LabelComponents8(mask).count();
}

// Largest 8-connected component; ties go to the earliest in raster order.
inline Mask LargestComponent8(const Mask& mask) {
  const ComponentLabels cl = LabelComponents8(mask);
  Mask out(mask.bounds());
  if (cl.count() == 0) return out;
  std::int32_t best = 1;
  for (int i = 1; i < cl.count(); ++i)
    if (cl.areas[i] > cl.areas[best - 1]) best = i + 1;
  for (std::size_t i = 0; i < out.size(); ++i)
    out.pixels()[i] = cl.labels.pixels()[i] == best ? 1 : 0;
  return out;
}

}  // namespace boxseg
