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
 * @file eval.hpp
 * @brief Pixel-level precision/recall/F1 and dataset aggregation.
 */

#pragma once

#include <openssl/evp.h>

#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "boxseg/boxgt.hpp"
#include "boxseg/image.hpp"
#include "boxseg/morphology.hpp"

namespace boxseg {

struct PixelScore {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  static PixelScore FromCounts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
    PixelScore s{tp, fp, fn};
    s.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    s.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    s.f1 = s.precision + s.recall > 0
               ? 2 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    return s;
  }
};

// Ground truth for scoring: object pixels plus pixels excluded from counting.
struct EvalTarget {
  Mask object;
  Mask ignore;  // empty image means nothing ignored

  static EvalTarget FromMask(const Mask& m) { return {m, Mask()}; }
  static EvalTarget FromLabelMap(const LabelMap& labels) {
    EvalTarget t{labels.ObjectMask(), Mask(labels.bounds())};
    for (int r = 0; r < labels.height(); ++r)
      for (int c = 0; c < labels.width(); ++c)
        t.ignore.at(r, c) = labels.class_of(r, c) == PixelClass::kIgnore;
    return t;
  }
};

inline PixelScore PixelF1(const Mask& pred, const EvalTarget& gt) {
  RequireSameBounds(pred.bounds(), gt.object.bounds(), "pixel_f1");
  const bool has_ignore = !gt.ignore.empty();
  if (has_ignore) RequireSameBounds(gt.ignore.bounds(), gt.object.bounds(), "pixel_f1 ignore");
  std::uint64_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (has_ignore && gt.ignore.pixels()[i]) continue;
    const bool p = pred.pixels()[i] != 0;
    const bool g = gt.object.pixels()[i] != 0;
    tp += p && g;
    fp += p && !g;
    fn += !p && g;
  }
  return PixelScore::FromCounts(tp, fp, fn);
}

inline PixelScore PixelF1(const Mask& pred, const Mask& gt) {
  return PixelF1(pred, EvalTarget::FromMask(gt));
}

struct MorphBest {
  double best_f1 = 0.0;
  int step = 0;  // > 0 dilations, < 0 erosions
};

// Best F1 over k in [-max_steps, max_steps] unit-disk morphology steps.
// Ties keep the step with the smallest |k|, then the erosion side.
inline MorphBest DilateErodeToMaxF1(const Mask& pred, const EvalTarget& gt, int max_steps) {
  RequireSameBounds(pred.bounds(), gt.object.bounds(), "dilate_erode_to_max_f1");
  MorphBest best{PixelF1(pred, gt).f1, 0};
  Mask grown = pred, shrunk = pred;
  for (int k = 1; k <= max_steps; ++k) {
    shrunk = ErodeDisk(shrunk, 1);
    grown = DilateDisk(grown, 1);
    const double fe = PixelF1(shrunk, gt).f1;
    const double fd = PixelF1(grown, gt).f1;
    if (fe > best.best_f1) best = {fe, -k};
    if (fd > best.best_f1) best = {fd, k};
  }
  return best;
}

inline MorphBest DilateErodeToMaxF1(const Mask& pred, const Mask& gt, int max_steps) {
  return DilateErodeToMaxF1(pred, EvalTarget::FromMask(gt), max_steps);
}

// Micro average: summed counts, recomputed ratios.
inline PixelScore Aggregate(std::span<const PixelScore> scores) {
  if (scores.empty()) throw Error(ErrorCode::kEmptyList, "nothing to aggregate");
  std::uint64_t tp = 0, fp = 0, fn = 0;
  for (const PixelScore& s : scores) {
    tp += s.tp;
    fp += s.fp;
    fn += s.fn;
  }
  return PixelScore::FromCounts(tp, fp, fn);
}

struct MacroScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Per-image mean of the ratios; reported next to the micro average.
inline MacroScore MacroAverage(std::span<const PixelScore> scores) {
  if (scores.empty()) throw Error(ErrorCode::kEmptyList, "nothing to aggregate");
  MacroScore m;
  for (const PixelScore& s : scores) {
    m.precision += s.precision;
    m.recall += s.recall;
    m.f1 += s.f1;
  }
  const double n = static_cast<double>(scores.size());
  return {m.precision / n, m.recall / n, m.f1 / n};
}

// Hash of content the way git names blobs: SHA-1 over "blob <size>\0" + data.
inline std::string GitBlobHash(std::span<const std::uint8_t> data) {
  const std::string header = "blob " + std::to_string(data.size()) + '\0';
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
  EVP_DigestUpdate(ctx, header.data(), header.size());
  EVP_DigestUpdate(ctx, data.data(), data.size());
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

inline std::string GitBlobHash(const std::string& text) {
  return GitBlobHash(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace boxseg
