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
 * @file segmenter.hpp
 * @brief Rough-segmentation providers.
 *
 * A provider turns an image into a foreground probability map. Downstream
 * stages only consume the binarized, labeled components.
 */

#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "boxseg/image.hpp"
#include "boxseg/morphology.hpp"

namespace boxseg {

using ProbabilityMap = Image<float>;

// Throws Validation if any value leaves [0, 1] or is not finite.
inline void ValidateProbabilityMap(const ProbabilityMap& p) {
  for (float v : p.pixels()) {
    if (!(v >= 0.0f && v <= 1.0f))
      throw Error(ErrorCode::kValidation, "probability outside [0, 1]");
  }
}

struct InstanceMask {
  int id = 0;
  Mask mask;
};

struct RoughSegmentation {
  Mask foreground;
  std::vector<InstanceMask> components;

  ImageBounds bounds() const { return foreground.bounds(); }
};

// Labels 8-connected components of p >= threshold and drops those with
// fewer than min_area pixels. Surviving ids are 1..n in raster order.
inline RoughSegmentation BinarizeAndLabel(const ProbabilityMap& p, double threshold = 0.5,
                                          std::size_t min_area = 0) {
  Mask fg(p.bounds());
  for (std::size_t i = 0; i < fg.size(); ++i) fg.pixels()[i] = p.pixels()[i] >= threshold;
  const ComponentLabels cl = LabelComponents8(fg);

  std::vector<int> remap(cl.count() + 1, 0);
  RoughSegmentation seg{Mask(p.bounds()), {}};
  for (int id = 1; id <= cl.count(); ++id) {
    if (cl.areas[id - 1] < min_area) continue;
    remap[id] = static_cast<int>(seg.components.size()) + 1;
    seg.components.push_back({remap[id], Mask(p.bounds())});
  }
  for (int r = 0; r < p.height(); ++r) {
    for (int c = 0; c < p.width(); ++c) {
      const int id = remap[cl.labels.at(r, c)];
      if (id == 0) continue;
      seg.foreground.at(r, c) = 1;
      seg.components[id - 1].mask.at(r, c) = 1;
    }
  }
  return seg;
}

// Builds a segmentation from instance labels (0 = background).
inline RoughSegmentation SegmentationFromLabels(const Image<std::uint16_t>& labels) {
  RoughSegmentation seg{Mask(labels.bounds()), {}};
  std::vector<int> index(65536, -1);
  for (int r = 0; r < labels.height(); ++r) {
    for (int c = 0; c < labels.width(); ++c) {
      const int id = labels.at(r, c);
      if (id == 0) continue;
      if (index[id] < 0) {
        index[id] = static_cast<int>(seg.components.size());
        seg.components.push_back({id, Mask(labels.bounds())});
      }
      seg.components[index[id]].mask.at(r, c) = 1;
      seg.foreground.at(r, c) = 1;
    }
  }
  std::sort(seg.components.begin(), seg.components.end(),
            [](const InstanceMask& a, const InstanceMask& b) { return a.id < b.id; });
  return seg;
}

inline Image<std::uint16_t> ComponentLabelImage(const RoughSegmentation& seg) {
  Image<std::uint16_t> out(seg.bounds());
  for (const InstanceMask& comp : seg.components)
    for (std::size_t i = 0; i < out.size(); ++i)
      if (comp.mask.pixels()[i]) out.pixels()[i] = static_cast<std::uint16_t>(comp.id);
  return out;
}

// Otsu threshold on a 256-bin histogram of [0, 1] values. A constant image
// yields its own value so that everything lands on the foreground side.
inline double OtsuThreshold(const GrayImage& img) {
  std::array<double, 256> hist{};
  for (float v : img.pixels())
    hist[std::clamp(static_cast<int>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f)), 0, 255)] += 1;
  const double total = static_cast<double>(img.size());
  double sum_all = 0.0;
  for (int i = 0; i < 256; ++i) sum_all += i * hist[i];
  double w0 = 0.0, sum0 = 0.0, best_var = -1.0;
  int best = 0;
  for (int t = 0; t < 256; ++t) {
    w0 += hist[t];
    sum0 += t * hist[t];
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double m0 = sum0 / w0;
    const double m1 = (sum_all - sum0) / w1;
    const double var = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (var > best_var) {
      best_var = var;
      best = t;
    }
  }
  if (best_var < 0.0) return img.pixels().empty() ? 0.5 : std::clamp(img.pixels()[0], 0.0f, 1.0f);
  // Foreground is strictly above bin `best`.
  return (best + 0.5) / 255.0;
}

struct BaselineConfig {
  enum class ThresholdMode { kOtsu, kFixed };
  ThresholdMode mode = ThresholdMode::kOtsu;
  double fixed_threshold = 0.5;
  double smoothing_sigma = 1.0;
  std::size_t min_area = 20;
  int opening_radius = 1;
  bool bright_foreground = true;
};

// Classical stand-in for a learned model: smooth, threshold, open, and drop
// small components. The map is hard (0 or 1).
inline ProbabilityMap BaselineSegment(const GrayImage& image, const BaselineConfig& config = {}) {
  if (image.empty()) throw Error(ErrorCode::kEmptyImage, "baseline segmenter got an empty image");
  GrayImage work = GaussianBlur(image, config.smoothing_sigma);
  if (!config.bright_foreground)
    for (float& v : work.pixels()) v = 1.0f - v;
  const double t = config.mode == BaselineConfig::ThresholdMode::kOtsu
                       ? OtsuThreshold(work)
                       : config.fixed_threshold;
  Mask fg(image.bounds());
  for (std::size_t i = 0; i < fg.size(); ++i) fg.pixels()[i] = work.pixels()[i] >= t;
  fg = OpenDisk(fg, config.opening_radius, /*outside_is_foreground=*/true);

  const ComponentLabels cl = LabelComponents8(fg);
  ProbabilityMap out(image.bounds(), 0.0f);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int id = cl.labels.pixels()[i];
    if (id && cl.areas[id - 1] >= config.min_area) out.pixels()[i] = 1.0f;
  }
  return out;
}

// Contract for anything that produces a rough segmentation: output matches
// the input dimensions with every value in [0, 1]. Implementations must be
// safe to call concurrently on distinct images.
class RoughProvider {
 public:
  virtual ~RoughProvider() = default;
  virtual ProbabilityMap Segment(const GrayImage& image, const std::string& image_id) const = 0;
  virtual std::string name() const = 0;
};

class BaselineProvider : public RoughProvider {
 public:
  explicit BaselineProvider(BaselineConfig config = {}) : config_(config) {}
  ProbabilityMap Segment(const GrayImage& image, const std::string&) const override {
    return BaselineSegment(image, config_);
  }
  std::string name() const override { return "baseline"; }

 private:
  BaselineConfig config_;
};

// Checks a provider's output against the contract.
inline ProbabilityMap CheckedSegment(const RoughProvider& provider, const GrayImage& image,
                                     const std::string& image_id) {
  ProbabilityMap p = provider.Segment(image, image_id);
  RequireSameBounds(p.bounds(), image.bounds(), "rough probability map");
  ValidateProbabilityMap(p);
  return p;
}

}  // namespace boxseg
