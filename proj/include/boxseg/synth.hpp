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
 * @file synth.hpp
 * @brief Synthetic star-shaped objects with exact ground truth and the
 * six-click annotations a careful annotator would produce.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "boxseg/annotation.hpp"
#include "boxseg/geometry.hpp"
#include "boxseg/image.hpp"

namespace boxseg {

struct SynthConfig {
  int image_size = 256;
  int n_objects = 4;
  double radius_min = 18.0;
  double radius_max = 32.0;
  int harmonic_count = 3;
  double harmonic_amplitude = 0.25;  // < 0.35 keeps r(phi) > 0
  double edge_sharpness = 1.0;       // ~10-90% transition width in pixels
  double noise_sigma = 0.05;
  std::uint64_t seed = 42;
  double min_separation = 4.0;
  bool jitter = false;               // uniform +-2 px click noise
  double foreground = 0.75;
  double background = 0.25;
  int max_placement_attempts = 2000;

  void Validate() const {
    if (image_size < 16) throw Error(ErrorCode::kValidation, "image_size must be >= 16");
    if (n_objects < 0) throw Error(ErrorCode::kValidation, "n_objects must be >= 0");
    if (!(radius_min >= 3.0 && radius_max >= radius_min))
      throw Error(ErrorCode::kValidation, "radius range must satisfy 3 <= min <= max");
    if (harmonic_count < 0) throw Error(ErrorCode::kValidation, "harmonic_count must be >= 0");
    if (!(harmonic_amplitude >= 0.0 && harmonic_amplitude < 0.35))
      throw Error(ErrorCode::kValidation, "harmonic_amplitude must lie in [0, 0.35)");
    if (!(edge_sharpness > 0.0)) throw Error(ErrorCode::kValidation, "edge_sharpness must be positive");
    if (!(noise_sigma >= 0.0)) throw Error(ErrorCode::kValidation, "noise_sigma must be >= 0");
  }
};

// Deterministic across platforms: only the raw engine output is used.
class SynthRng {
 public:
  explicit SynthRng(std::uint64_t seed) : engine_(seed) {}
  double Uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform01(); }
  double Normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = Uniform01();
    while (u1 <= 0.0) u1 = Uniform01();
    const double u2 = Uniform01();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2 * std::numbers::pi * u2);
    has_spare_ = true;
    return mag * std::cos(2 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// r(phi) = R * (1 + sum_j a_j cos(j phi + phase_j)), j = 2 .. harmonic_count + 1.
struct StarShape {
  Point2 center;
  double radius = 0.0;
  std::vector<double> amplitudes;
  std::vector<double> phases;

  double RadiusAt(double phi) const {
    double s = 1.0;
    for (std::size_t j = 0; j < amplitudes.size(); ++j)
      s += amplitudes[j] * std::cos((j + 2) * phi + phases[j]);
    return radius * s;
  }
  double BoundingRadius() const {
    double s = 1.0;
    for (double a : amplitudes) s += std::abs(a);
    return radius * s;
  }
  bool Contains(Point2 p) const {
    const Point2 d = p - center;
    return Norm(d) <= RadiusAt(std::atan2(d.y, d.x));
  }
};

struct SynthImage {
  std::string id;
  GrayImage image;                  // quantized to 8-bit levels
  Image<std::uint16_t> gt_labels;   // 0 = background, i + 1 = object i
  std::vector<Mask> gt_masks;
  std::vector<StarShape> shapes;
  AnnotationFile annotations;
};

// Extreme points of a mask at an orientation, on the outer pixel edge of
// the extreme pixel. Ties pick the middle pixel along the other axis.
inline ExtremePoints MaskExtremePoints(const Mask& mask, double angle) {
  const Point2 eu = AxisU(angle), ev = AxisV(angle);
  struct Cand {
    double key, other;
    Point2 p;
  };
  std::vector<Point2> pts;
  for (PixelIndex px : ForegroundPixels(mask)) pts.push_back(PixelCenter(px));
  if (pts.empty()) throw Error(ErrorCode::kEmptyMask, "extreme points of an empty mask");
  auto pick = [&](Point2 axis, Point2 other_axis, bool want_max) {
    double best = want_max ? -1e300 : 1e300;
    for (Point2 p : pts) {
      const double k = Dot(p, axis);
      best = want_max ? std::max(best, k) : std::min(best, k);
    }
    std::vector<std::pair<double, Point2>> ties;
    for (Point2 p : pts)
      if (std::abs(Dot(p, axis) - best) <= 1e-9) ties.push_back({Dot(p, other_axis), p});
    std::sort(ties.begin(), ties.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    const Point2 chosen = ties[(ties.size() - 1) / 2].second;
    return chosen + (want_max ? 0.5 : -0.5) * axis;
  };
  ExtremePoints ex;
  ex.top = pick(ev, eu, false);
  ex.bottom = pick(ev, eu, true);
  ex.left = pick(eu, ev, false);
  ex.right = pick(eu, ev, true);
  return ex;
}

inline SynthImage GenerateSynthImage(const SynthConfig& config, const std::string& id = "synth") {
  config.Validate();
  SynthRng rng(config.seed);
  const int size = config.image_size;
  const ImageBounds bounds{size, size};

  SynthImage out;
  out.id = id;
  for (int i = 0; i < config.n_objects; ++i) {
    StarShape shape;
    shape.radius = rng.Uniform(config.radius_min, config.radius_max);
    for (int j = 0; j < config.harmonic_count; ++j) {
      shape.amplitudes.push_back(config.harmonic_amplitude * rng.Uniform01() /
                                 std::max(1, config.harmonic_count));
      shape.phases.push_back(rng.Uniform(0, 2 * std::numbers::pi));
    }
    const double reach = shape.BoundingRadius();
    const double margin = reach + config.min_separation;
    if (2 * margin >= size)
      throw Error(ErrorCode::kPlacementFailed, "object does not fit in the image");
    bool placed = false;
    for (int attempt = 0; attempt < config.max_placement_attempts && !placed; ++attempt) {
      shape.center = {rng.Uniform(margin, size - margin), rng.Uniform(margin, size - margin)};
      placed = true;
      for (const StarShape& other : out.shapes) {
        if (Distance(other.center, shape.center) <
            reach + other.BoundingRadius() + config.min_separation) {
          placed = false;
          break;
        }
      }
    }
    if (!placed)
      throw Error(ErrorCode::kPlacementFailed,
                  "could not place object " + std::to_string(i) + " after " +
                      std::to_string(config.max_placement_attempts) + " attempts");
    out.shapes.push_back(shape);
  }

  // Rendering: logistic step across the radial boundary plus Gaussian noise.
  const double scale = config.edge_sharpness / 4.4;
  out.image = GrayImage(bounds);
  out.gt_labels = Image<std::uint16_t>(bounds);
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      const Point2 p = PixelCenter(r, c);
      double inside = 0.0;
      for (std::size_t k = 0; k < out.shapes.size(); ++k) {
        const StarShape& s = out.shapes[k];
        const Point2 d = p - s.center;
        const double rho = Norm(d);
        if (rho > s.BoundingRadius() + 6 * config.edge_sharpness + 2) continue;
        const double boundary = s.RadiusAt(std::atan2(d.y, d.x));
        inside = std::max(inside, 1.0 / (1.0 + std::exp(-(boundary - rho) / scale)));
        if (rho <= boundary) out.gt_labels.at(r, c) = static_cast<std::uint16_t>(k + 1);
      }
      double v = config.background + (config.foreground - config.background) * inside +
                 config.noise_sigma * rng.Normal();
      v = std::clamp(v, 0.0, 1.0);
      out.image.at(r, c) = static_cast<float>(std::lround(v * 255.0) / 255.0);
    }
  }

  out.annotations.image = id;
  out.annotations.width = size;
  out.annotations.height = size;
  for (std::size_t k = 0; k < out.shapes.size(); ++k) {
    Mask m(bounds);
    for (std::size_t i = 0; i < m.size(); ++i) m.pixels()[i] = out.gt_labels.pixels()[i] == k + 1;
    out.gt_masks.push_back(m);

    const double theta = rng.Uniform(-std::numbers::pi, std::numbers::pi);
    const Point2 dir{std::cos(theta), std::sin(theta)};
    const Point2 center = out.shapes[k].center;
    ClickSequence clicks;
    clicks.orientation_clicks = {center - 2.0 * dir, center + 2.0 * dir};
    const double angle = OrientationAngle(clicks.orientation_clicks[0], clicks.orientation_clicks[1]);
    clicks.extreme_clicks = MaskExtremePoints(m, angle);

    AnnotatedObject obj;
    obj.id = static_cast<int>(k);
    obj.clicks = clicks;
    obj.box = BoxFromClicks(clicks);
    if (config.jitter) {
      // Redraw until the jittered clicks still form a valid box.
      for (int attempt = 0; attempt < 20; ++attempt) {
        ClickSequence j = clicks;
        auto shake = [&](Point2& p) { p = p + Point2{rng.Uniform(-2, 2), rng.Uniform(-2, 2)}; };
        shake(j.orientation_clicks[0]);
        shake(j.orientation_clicks[1]);
        shake(j.extreme_clicks.top);
        shake(j.extreme_clicks.bottom);
        shake(j.extreme_clicks.left);
        shake(j.extreme_clicks.right);
        try {
          obj.box = BoxFromClicks(j);
          obj.clicks = j;
          break;
        } catch (const Error&) {
        }
      }
    }
    out.annotations.objects.push_back(obj);
  }
  return out;
}

inline std::string SynthImageId(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "synth_%03d", index);
  return buf;
}

// Image i uses a seed derived from (config.seed, i).
inline SynthConfig ConfigForImage(const SynthConfig& config, int index) {
  SynthConfig c = config;
  c.seed = SplitMix64(config.seed ^ SplitMix64(static_cast<std::uint64_t>(index) + 1));
  return c;
}

}  // namespace boxseg
