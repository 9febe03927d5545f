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
 * @file image.hpp
 * @brief Dense 2-D rasters and continuous pixel coordinates.
 *
 * Pixel (row i, column j) covers [j, j+1) x [i, i+1) in continuous
 * coordinates, so its center is (j + 0.5, i + 0.5). x grows with the column
 * index and y grows downwards with the row index.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "boxseg/error.hpp"

namespace boxseg {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend Point2 operator*(Point2 p, double s) { return {s * p.x, s * p.y}; }
  friend bool operator==(Point2 a, Point2 b) = default;
};

inline double Dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double Cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double Norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double Distance(Point2 a, Point2 b) { return Norm(a - b); }
inline Point2 Midpoint(Point2 a, Point2 b) { return 0.5 * (a + b); }

inline bool IsFinite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

// Distance from p to the closed segment [a, b].
inline double DistanceToSegment(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = Dot(ab, ab);
  if (len2 == 0.0) return Distance(p, a);
  const double t = std::clamp(Dot(p - a, ab) / len2, 0.0, 1.0);
  return Distance(p, a + t * ab);
}

struct PixelIndex {
  int row = 0;
  int col = 0;
  friend bool operator==(PixelIndex, PixelIndex) = default;
  friend auto operator<=>(PixelIndex, PixelIndex) = default;
};

inline Point2 PixelCenter(int row, int col) { return {col + 0.5, row + 0.5}; }
inline Point2 PixelCenter(PixelIndex p) { return PixelCenter(p.row, p.col); }

// Pixel whose half-open square contains the point.
inline PixelIndex ContainingPixel(Point2 p) {
  return {static_cast<int>(std::floor(p.y)), static_cast<int>(std::floor(p.x))};
}

struct ImageBounds {
  int width = 0;
  int height = 0;

  bool Contains(int row, int col) const {
    return row >= 0 && col >= 0 && row < height && col < width;
  }
  bool Contains(PixelIndex p) const { return Contains(p.row, p.col); }
  bool ContainsPoint(Point2 p) const {
    return p.x >= 0.0 && p.y >= 0.0 && p.x <= width && p.y <= height;
  }
  friend bool operator==(ImageBounds, ImageBounds) = default;
};

template <typename T>
class Image {
 public:
  using value_type = T;

  Image() = default;
  Image(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(std::max(width, 0)) *
                  static_cast<std::size_t>(std::max(height, 0)),
              fill) {}
  explicit Image(ImageBounds bounds, T fill = T{})
      : Image(bounds.width, bounds.height, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  ImageBounds bounds() const { return {width_, height_}; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& at(int row, int col) { return data_[Offset(row, col)]; }
  const T& at(int row, int col) const { return data_[Offset(row, col)]; }
  T& operator[](PixelIndex p) { return at(p.row, p.col); }
  const T& operator[](PixelIndex p) const { return at(p.row, p.col); }

  std::span<T> pixels() { return data_; }
  std::span<const T> pixels() const { return data_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t Offset(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

// Grayscale intensities rescaled to [0, 1].
using GrayImage = Image<float>;
// Binary mask, 0 or 1 per pixel.
using Mask = Image<std::uint8_t>;

inline void RequireSameBounds(ImageBounds a, ImageBounds b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + ": " + std::to_string(a.width) + "x" +
                    std::to_string(a.height) + " vs " + std::to_string(b.width) +
                    "x" + std::to_string(b.height));
  }
}

inline std::size_t CountForeground(const Mask& mask) {
  return static_cast<std::size_t>(
      std::count_if(mask.pixels().begin(), mask.pixels().end(),
                    [](std::uint8_t v) { return v != 0; }));
}

inline std::vector<PixelIndex> ForegroundPixels(const Mask& mask) {
  std::vector<PixelIndex> out;
  for (int r = 0; r < mask.height(); ++r)
    for (int c = 0; c < mask.width(); ++c)
      if (mask.at(r, c)) out.push_back({r, c});
  return out;
}

// Bilinear interpolation at a continuous point, treating pixel values as
// samples at pixel centers. Points outside the image are clamped to the
// nearest edge sample.
template <typename T>
double SampleBilinear(const Image<T>& img, Point2 p) {
  const double fx = std::clamp(p.x - 0.5, 0.0, img.width() - 1.0);
  const double fy = std::clamp(p.y - 0.5, 0.0, img.height() - 1.0);
  const int c0 = static_cast<int>(std::floor(fx));
  const int r0 = static_cast<int>(std::floor(fy));
  const int c1 = std::min(c0 + 1, img.width() - 1);
  const int r1 = std::min(r0 + 1, img.height() - 1);
  const double ax = fx - c0;
  const double ay = fy - r0;
  const double top = (1 - ax) * img.at(r0, c0) + ax * img.at(r0, c1);
  const double bottom = (1 - ax) * img.at(r1, c0) + ax * img.at(r1, c1);
  return (1 - ay) * top + ay * bottom;
}

// Separable Gaussian blur with replicated borders. sigma <= 0 is a copy.
inline GrayImage GaussianBlur(const GrayImage& img, double sigma) {
  if (sigma <= 0.0 || img.empty()) return img;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += kernel[i + radius];
  }
  for (double& k : kernel) k /= sum;

  const int w = img.width();
  const int h = img.height();
  GrayImage tmp(w, h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += kernel[i + radius] * img.at(r, std::clamp(c + i, 0, w - 1));
      tmp.at(r, c) = static_cast<float>(acc);
    }
  }
  GrayImage out(w, h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += kernel[i + radius] * tmp.at(std::clamp(r + i, 0, h - 1), c);
      out.at(r, c) = static_cast<float>(acc);
    }
  }
  return out;
}

}  // namespace boxseg
