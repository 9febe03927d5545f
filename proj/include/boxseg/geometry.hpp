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
 * @file geometry.hpp
 * @brief Tilted boxes from six-click annotations.
 *
 * A box is described in its own rotated frame: the u-axis points along the
 * box angle and the v-axis is the u-axis turned a quarter turn towards +y.
 * "Top"/"bottom" extreme points bound v, "left"/"right" bound u.
 */

#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "boxseg/error.hpp"
#include "boxseg/image.hpp"

namespace boxseg {

inline constexpr double kBoxTolerance = 1e-9;

struct ExtremePoints {
  Point2 top;
  Point2 bottom;
  Point2 left;
  Point2 right;

  std::array<Point2, 4> as_array() const { return {top, bottom, left, right}; }
  friend bool operator==(const ExtremePoints&, const ExtremePoints&) = default;
};

struct ClickSequence {
  std::array<Point2, 2> orientation_clicks;
  ExtremePoints extreme_clicks;
};

// Maps any angle onto [-pi/2, pi/2): a box orientation is a line direction.
inline double NormalizeLineAngle(double angle) {
  constexpr double kPi = std::numbers::pi;
  double a = std::fmod(angle + kPi / 2, kPi);
  if (a < 0) a += kPi;
  a -= kPi / 2;
  if (a >= kPi / 2) a -= kPi;
  return a;
}

inline double LineAngleDifference(double a, double b) {
  return std::abs(NormalizeLineAngle(a - b));
}

inline Point2 AxisU(double angle) { return {std::cos(angle), std::sin(angle)}; }
inline Point2 AxisV(double angle) { return {-std::sin(angle), std::cos(angle)}; }

struct FramePoint {
  double u = 0.0;
  double v = 0.0;
};

struct TiltedBox {
  Point2 center;
  double angle = 0.0;
  double half_u = 0.0;
  double half_v = 0.0;
  Point2 object_center;
  ExtremePoints extreme_points;

  Point2 axis_u() const { return AxisU(angle); }
  Point2 axis_v() const { return AxisV(angle); }

  FramePoint ToFrame(Point2 p) const {
    const Point2 d = p - center;
    return {Dot(d, axis_u()), Dot(d, axis_v())};
  }
  Point2 FromFrame(FramePoint f) const {
    return center + f.u * axis_u() + f.v * axis_v();
  }

  bool Contains(Point2 p, double tol = kBoxTolerance) const {
    const FramePoint f = ToFrame(p);
    return std::abs(f.u) <= half_u + tol && std::abs(f.v) <= half_v + tol;
  }

  double Area() const { return 4.0 * half_u * half_v; }

  // Corners in order (-u,-v), (+u,-v), (+u,+v), (-u,+v).
  std::array<Point2, 4> Corners() const {
    return {FromFrame({-half_u, -half_v}), FromFrame({half_u, -half_v}),
            FromFrame({half_u, half_v}), FromFrame({-half_u, half_v})};
  }
};

// Checks both box invariants: every extreme point lies on the boundary side
// it names and inside the box. Returns the worst violation in frame units.
inline double ExtremePointViolation(const TiltedBox& box) {
  const FramePoint t = box.ToFrame(box.extreme_points.top);
  const FramePoint b = box.ToFrame(box.extreme_points.bottom);
  const FramePoint l = box.ToFrame(box.extreme_points.left);
  const FramePoint r = box.ToFrame(box.extreme_points.right);
  double worst = 0.0;
  worst = std::max(worst, std::abs(std::abs(t.v) - box.half_v));
  worst = std::max(worst, std::abs(std::abs(b.v) - box.half_v));
  worst = std::max(worst, std::abs(std::abs(l.u) - box.half_u));
  worst = std::max(worst, std::abs(std::abs(r.u) - box.half_u));
  for (FramePoint f : {t, b, l, r}) {
    worst = std::max(worst, std::abs(f.u) - box.half_u);
    worst = std::max(worst, std::abs(f.v) - box.half_v);
  }
  return worst;
}

inline double OrientationAngle(Point2 first, Point2 second) {
  const Point2 d = second - first;
  if (!IsFinite(first) || !IsFinite(second) || (d.x == 0.0 && d.y == 0.0)) {
    throw Error(ErrorCode::kDegenerateOrientation,
                "orientation clicks must be finite and distinct");
  }
  return NormalizeLineAngle(std::atan2(d.y, d.x));
}

// The box edges pass through the rotated-frame coordinates of the extreme
// clicks. Each opposing pair may arrive in either order along its axis since
// angle normalization can flip the axis direction relative to the click
// vector.
inline TiltedBox BoxFromClicks(const ClickSequence& clicks) {
  const double angle =
      OrientationAngle(clicks.orientation_clicks[0], clicks.orientation_clicks[1]);
  const ExtremePoints& ex = clicks.extreme_clicks;
  for (Point2 p : ex.as_array()) {
    if (!IsFinite(p)) throw Error(ErrorCode::kDegenerateBox, "non-finite extreme click");
  }
  const Point2 eu = AxisU(angle);
  const Point2 ev = AxisV(angle);
  const double u0 = Dot(ex.left, eu), u1 = Dot(ex.right, eu);
  const double v0 = Dot(ex.top, ev), v1 = Dot(ex.bottom, ev);

  TiltedBox box;
  box.angle = angle;
  box.half_u = std::abs(u1 - u0) / 2;
  box.half_v = std::abs(v1 - v0) / 2;
  if (!(box.half_u > 0.0) || !(box.half_v > 0.0)) {
    throw Error(ErrorCode::kDegenerateBox,
                "extreme clicks span zero width or height in the rotated frame");
  }
  box.center = ((u0 + u1) / 2) * eu + ((v0 + v1) / 2) * ev;
  box.object_center = Midpoint(clicks.orientation_clicks[0], clicks.orientation_clicks[1]);
  box.extreme_points = ex;

  // Scale-aware slack so large coordinates do not trip on rounding.
  const double scale = 1.0 + std::max({std::abs(box.center.x), std::abs(box.center.y),
                                       box.half_u, box.half_v});
  if (ExtremePointViolation(box) > kBoxTolerance * scale) {
    throw Error(ErrorCode::kDegenerateBox,
                "an extreme click lies outside the box spanned by the others");
  }
  return box;
}

// Minimal rectangle at `angle` covering the pixel squares of all foreground
// pixels, measured on pixel centers and padded by half a pixel per side.
// Extreme points are the touching pixel centers (first in raster order on
// ties).
inline TiltedBox SameAngleBoundingBox(const Mask& mask, double angle) {
  const Point2 eu = AxisU(angle);
  const Point2 ev = AxisV(angle);
  double umin = std::numeric_limits<double>::infinity(), umax = -umin;
  double vmin = umin, vmax = -umin;
  ExtremePoints ex;
  bool any = false;
  for (int r = 0; r < mask.height(); ++r) {
    for (int c = 0; c < mask.width(); ++c) {
      if (!mask.at(r, c)) continue;
      any = true;
      const Point2 p = PixelCenter(r, c);
      const double u = Dot(p, eu), v = Dot(p, ev);
      if (u < umin) { umin = u; ex.left = p; }
      if (u > umax) { umax = u; ex.right = p; }
      if (v < vmin) { vmin = v; ex.top = p; }
      if (v > vmax) { vmax = v; ex.bottom = p; }
    }
  }
  if (!any) throw Error(ErrorCode::kEmptyMask, "same-angle bounding box of an empty mask");
  TiltedBox box;
  box.angle = angle;
  box.half_u = (umax - umin) / 2 + 0.5;
  box.half_v = (vmax - vmin) / 2 + 0.5;
  box.center = ((umin + umax) / 2) * eu + ((vmin + vmax) / 2) * ev;
  box.object_center = box.center;
  box.extreme_points = ex;
  return box;
}

// IoU of two boxes that share an orientation, as axis-aligned rectangles in
// the common rotated frame.
inline double SameAngleIoU(const TiltedBox& a, const TiltedBox& b) {
  if (LineAngleDifference(a.angle, b.angle) > kBoxTolerance) {
    throw Error(ErrorCode::kAngleMismatch, "same-angle IoU needs equal box angles");
  }
  const Point2 eu = a.axis_u();
  const Point2 ev = a.axis_v();
  const double au = Dot(a.center, eu), av = Dot(a.center, ev);
  const double bu = Dot(b.center, eu), bv = Dot(b.center, ev);
  const double iu = std::max(0.0, std::min(au + a.half_u, bu + b.half_u) -
                                      std::max(au - a.half_u, bu - b.half_u));
  const double iv = std::max(0.0, std::min(av + a.half_v, bv + b.half_v) -
                                      std::max(av - a.half_v, bv - b.half_v));
  const double inter = iu * iv;
  const double uni = a.Area() + b.Area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

// Pixels whose centers lie inside the box.
inline Mask BoxFootprint(const TiltedBox& box, ImageBounds bounds) {
  Mask out(bounds);
  const auto corners = box.Corners();
  double xmin = corners[0].x, xmax = xmin, ymin = corners[0].y, ymax = ymin;
  for (Point2 p : corners) {
    xmin = std::min(xmin, p.x); xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y); ymax = std::max(ymax, p.y);
  }
  const int c0 = std::max(0, static_cast<int>(std::floor(xmin)) - 1);
  const int c1 = std::min(bounds.width - 1, static_cast<int>(std::ceil(xmax)) + 1);
  const int r0 = std::max(0, static_cast<int>(std::floor(ymin)) - 1);
  const int r1 = std::min(bounds.height - 1, static_cast<int>(std::ceil(ymax)) + 1);
  for (int r = r0; r <= r1; ++r)
    for (int c = c0; c <= c1; ++c)
      if (box.Contains(PixelCenter(r, c))) out.at(r, c) = 1;
  return out;
}

struct GridLine {
  Point2 a;
  Point2 b;
  bool along_orientation = true;  // parallel to the u-axis when true
};

struct AssistiveGrid {
  double angle = 0.0;
  Point2 origin;
  double spacing = 0.0;
  std::vector<GridLine> lines;
};

namespace detail {

// Clips the infinite line origin + t*dir to [0,w]x[0,h] (Liang-Barsky).
inline bool ClipLine(Point2 origin, Point2 dir, ImageBounds bounds, Point2& a, Point2& b) {
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  const double p[4] = {-dir.x, dir.x, -dir.y, dir.y};
  const double q[4] = {origin.x, bounds.width - origin.x, origin.y, bounds.height - origin.y};
  for (int i = 0; i < 4; ++i) {
    if (std::abs(p[i]) < 1e-15) {
      if (q[i] < 0) return false;
      continue;
    }
    const double t = q[i] / p[i];
    if (p[i] < 0) t0 = std::max(t0, t);
    else t1 = std::min(t1, t);
  }
  if (t0 > t1) return false;
  a = origin + t0 * dir;
  b = origin + t1 * dir;
  return true;
}

}  // namespace detail

// Lines parallel and perpendicular to the orientation, spaced `spacing`
// apart, with one line of each family through the midpoint of the clicks.
inline AssistiveGrid MakeAssistiveGrid(const std::array<Point2, 2>& orientation_clicks,
                                       ImageBounds bounds, double spacing) {
  if (!(spacing > 0.0)) throw Error(ErrorCode::kValidation, "grid spacing must be positive");
  AssistiveGrid grid;
  grid.angle = OrientationAngle(orientation_clicks[0], orientation_clicks[1]);
  grid.origin = Midpoint(orientation_clicks[0], orientation_clicks[1]);
  grid.spacing = spacing;
  const Point2 eu = AxisU(grid.angle);
  const Point2 ev = AxisV(grid.angle);
  const std::array<Point2, 4> corners = {Point2{0, 0}, Point2{double(bounds.width), 0},
                                         Point2{double(bounds.width), double(bounds.height)},
                                         Point2{0, double(bounds.height)}};
  for (bool along : {true, false}) {
    const Point2 dir = along ? eu : ev;
    const Point2 offset_axis = along ? ev : eu;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (Point2 c : corners) {
      const double s = Dot(c - grid.origin, offset_axis);
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    const long k0 = static_cast<long>(std::ceil(lo / spacing));
    const long k1 = static_cast<long>(std::floor(hi / spacing));
    for (long k = k0; k <= k1; ++k) {
      GridLine line;
      line.along_orientation = along;
      const Point2 through = grid.origin + (k * spacing) * offset_axis;
      if (detail::ClipLine(through, dir, bounds, line.a, line.b)) grid.lines.push_back(line);
    }
  }
  return grid;
}

}  // namespace boxseg
