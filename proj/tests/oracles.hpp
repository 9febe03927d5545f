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

// Reference implementations used by the tests. Each one recomputes a result
// from first principles, by brute force, without calling the routine it
// checks.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "boxseg/annotation.hpp"
#include "boxseg/geometry.hpp"
#include "boxseg/image.hpp"
#include "boxseg/io.hpp"
#include "boxseg/segmenter.hpp"

namespace boxseg::oracle {

// Rectangle as four corners in drawing order.
struct Quad {
  std::array<Point2, 4> p;
};

inline Quad QuadOf(Point2 center, double angle, double hu, double hv) {
  const double c = std::cos(angle), s = std::sin(angle);
  auto at = [&](double u, double v) { return Point2{center.x + u * c - v * s, center.y + u * s + v * c}; };
  return {{at(-hu, -hv), at(hu, -hv), at(hu, hv), at(-hu, hv)}};
}

// Convex-polygon membership by half-plane signs.
inline bool InQuad(const Quad& q, Point2 x, double eps = 1e-9) {
  int pos = 0, neg = 0;
  for (int i = 0; i < 4; ++i) {
    const Point2 a = q.p[i], b = q.p[(i + 1) % 4];
    const double cr = (b.x - a.x) * (x.y - a.y) - (b.y - a.y) * (x.x - a.x);
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    if (cr > eps * len) ++pos;
    if (cr < -eps * len) ++neg;
  }
  return pos == 0 || neg == 0;
}

inline bool InBox(const TiltedBox& b, Point2 x) { return InQuad(QuadOf(b.center, b.angle, b.half_u, b.half_v), x); }

inline double SegmentDistance(Point2 p, Point2 a, Point2 b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

// Box ground truth, pixel by pixel: 0 background, 1 object, 255 ignore.
inline Image<std::uint8_t> BoxGt(const std::vector<TiltedBox>& boxes, ImageBounds bounds, double k,
                                 double thickness) {
  Image<std::uint8_t> out(bounds);
  for (int r = 0; r < bounds.height; ++r) {
    for (int c = 0; c < bounds.width; ++c) {
      const Point2 p{c + 0.5, r + 0.5};
      bool covered = false, object = false;
      for (const TiltedBox& b : boxes) {
        if (!InBox(b, p)) continue;
        covered = true;
        if (InQuad(QuadOf(b.object_center, b.angle, k * b.half_u, k * b.half_v), p)) object = true;
      }
      for (const TiltedBox& b : boxes) {
        for (Point2 tip : b.extreme_points.as_array()) {
          const bool holds_end = (std::floor(tip.x) == c && std::floor(tip.y) == r) ||
                                 (std::floor(b.object_center.x) == c && std::floor(b.object_center.y) == r);
          if (holds_end || SegmentDistance(p, b.object_center, tip) <= thickness / 2) object = true;
        }
      }
      out.at(r, c) = object ? 1 : covered ? 255 : 0;
    }
  }
  return out;
}

// Breadth-first flood fill with 8-neighbours; returns component sizes in
// raster order of their first pixel.
inline std::vector<std::size_t> FloodFillComponents(const Mask& m) {
  const int w = m.width(), h = m.height();
  std::vector<char> seen(static_cast<std::size_t>(w) * h, 0);
  std::vector<std::size_t> sizes;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!m.at(r, c) || seen[r * w + c]) continue;
      std::deque<std::pair<int, int>> queue{{r, c}};
      seen[r * w + c] = 1;
      std::size_t n = 0;
      while (!queue.empty()) {
        auto [y, x] = queue.front();
        queue.pop_front();
        ++n;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int yy = y + dy, xx = x + dx;
            if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
            if (!m.at(yy, xx) || seen[yy * w + xx]) continue;
            seen[yy * w + xx] = 1;
            queue.push_back({yy, xx});
          }
      }
      sizes.push_back(n);
    }
  }
  return sizes;
}

// Owner of each pixel: nearest foreground pixel over all components, ties to
// the smaller id.
inline Image<std::int32_t> NearestOwner(const RoughSegmentation& seg) {
  Image<std::int32_t> owner(seg.bounds());
  std::vector<std::pair<int, PixelIndex>> pts;
  for (const InstanceMask& comp : seg.components)
    for (int r = 0; r < comp.mask.height(); ++r)
      for (int c = 0; c < comp.mask.width(); ++c)
        if (comp.mask.at(r, c)) pts.push_back({comp.id, {r, c}});
  for (int r = 0; r < owner.height(); ++r) {
    for (int c = 0; c < owner.width(); ++c) {
      long best = std::numeric_limits<long>::max();
      int who = std::numeric_limits<int>::max();
      for (const auto& [id, p] : pts) {
        const long d = long(p.row - r) * (p.row - r) + long(p.col - c) * (p.col - c);
        if (d < best || (d == best && id < who)) {
          best = d;
          who = id;
        }
      }
      owner.at(r, c) = who;
    }
  }
  return owner;
}

// Minimum over all m^n closed selections with cyclic |step| <= delta and the
// forced nodes respected. Returns +inf when nothing is feasible.
inline double ExhaustiveClosedPath(const std::vector<std::vector<double>>& costs, int delta,
                                   const std::map<int, int>& forced = {}) {
  const int n = static_cast<int>(costs.size());
  const int m = static_cast<int>(costs.front().size());
  std::vector<int> sel(n, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      if (std::abs(sel[i] - sel[(i + 1) % n]) > delta) ok = false;
      const auto f = forced.find(i);
      if (f != forced.end() && f->second != sel[i]) ok = false;
    }
    if (ok) {
      double total = 0;
      for (int i = 0; i < n; ++i) total += costs[i][sel[i]];
      best = std::min(best, total);
    }
    int i = 0;
    while (i < n && ++sel[i] == m) sel[i++] = 0;
    if (i == n) break;
  }
  return best;
}

// Crossing-number point-in-polygon.
inline bool InsidePolygon(const std::vector<Point2>& poly, Point2 p) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Point2 a = poly[i], b = poly[j];
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x)
      inside = !inside;
  }
  return inside;
}

// Area-sampled IoU of two boxes on an n x n lattice per unit square.
inline double RasterIoU(const TiltedBox& a, const TiltedBox& b, int n = 8) {
  const Quad qa = QuadOf(a.center, a.angle, a.half_u, a.half_v);
  const Quad qb = QuadOf(b.center, b.angle, b.half_u, b.half_v);
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const Quad* q : {&qa, &qb})
    for (Point2 p : q->p) {
      x0 = std::min(x0, p.x); x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y); y1 = std::max(y1, p.y);
    }
  long inter = 0, uni = 0;
  const double h = 1.0 / n;
  for (double y = std::floor(y0) + h / 2; y < y1; y += h)
    for (double x = std::floor(x0) + h / 2; x < x1; x += h) {
      const bool ia = InQuad(qa, {x, y}), ib = InQuad(qb, {x, y});
      inter += ia && ib;
      uni += ia || ib;
    }
  return uni ? double(inter) / double(uni) : 0.0;
}

// Lexicographically largest one-to-one matching among pairs at or above the
// threshold, compared by the descending list of IoUs. Returns box -> column.
inline std::map<int, int> LexMaxMatching(const std::vector<std::vector<double>>& iou, double threshold) {
  const int nb = static_cast<int>(iou.size());
  const int nc = nb ? static_cast<int>(iou.front().size()) : 0;
  std::vector<double> best_key;
  bool have_best = false;
  std::map<int, int> best;
  std::vector<int> assign(nb, -1);
  std::vector<bool> used(nc, false);
  std::function<void(int)> rec = [&](int b) {
    if (b == nb) {
      std::vector<double> key;
      for (int i = 0; i < nb; ++i)
        if (assign[i] >= 0) key.push_back(iou[i][assign[i]]);
      std::sort(key.rbegin(), key.rend());
      if (!have_best || key > best_key) {
        have_best = true;
        best_key = key;
        best.clear();
        for (int i = 0; i < nb; ++i)
          if (assign[i] >= 0) best[i] = assign[i];
      }
      return;
    }
    assign[b] = -1;
    rec(b + 1);
    for (int c = 0; c < nc; ++c) {
      if (used[c] || iou[b][c] < threshold) continue;
      used[c] = true;
      assign[b] = c;
      rec(b + 1);
      used[c] = false;
      assign[b] = -1;
    }
  };
  rec(0);
  return best;
}

// Random valid six-click sequence. The extreme clicks sit on the four sides
// of a rectangle built from the click direction.
inline ClickSequence RandomClicks(std::mt19937_64& rng, double span = 200.0) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double theta = (U(rng) * 2 - 1) * std::numbers::pi;
  const Point2 eu{std::cos(theta), std::sin(theta)}, ev{-std::sin(theta), std::cos(theta)};
  const Point2 center{U(rng) * span, U(rng) * span};
  const double hu = 1 + 40 * U(rng), hv = 1 + 40 * U(rng);
  const Point2 oc = center + (0.3 * (2 * U(rng) - 1) * hu) * eu + (0.3 * (2 * U(rng) - 1) * hv) * ev;
  const double d = 0.5 + 5 * U(rng);
  ClickSequence cs;
  cs.orientation_clicks = {oc - d * eu, oc + d * eu};
  auto on_side = [&](double u, double v) { return center + u * eu + v * ev; };
  cs.extreme_clicks.top = on_side((2 * U(rng) - 1) * hu, -hv);
  cs.extreme_clicks.bottom = on_side((2 * U(rng) - 1) * hu, hv);
  cs.extreme_clicks.left = on_side(-hu, (2 * U(rng) - 1) * hv);
  cs.extreme_clicks.right = on_side(hu, (2 * U(rng) - 1) * hv);
  return cs;
}

inline Point2 RigidMotion(Point2 p, double phi, Point2 t) {
  const double c = std::cos(phi), s = std::sin(phi);
  return {c * p.x - s * p.y + t.x, s * p.x + c * p.y + t.y};
}

inline ClickSequence MoveClicks(const ClickSequence& cs, double phi, Point2 t) {
  ClickSequence out = cs;
  for (Point2& p : out.orientation_clicks) p = RigidMotion(p, phi, t);
  for (Point2* p : {&out.extreme_clicks.top, &out.extreme_clicks.bottom, &out.extreme_clicks.left,
                    &out.extreme_clicks.right})
    *p = RigidMotion(*p, phi, t);
  return out;
}

// Largest distance from an extreme click to the line of its box side, plus
// how far any click lies outside the box; both in pixels.
inline double BoundaryResidual(const TiltedBox& b) {
  const Quad q = QuadOf(b.center, b.angle, b.half_u, b.half_v);
  auto line_dist = [](Point2 p, Point2 a, Point2 c) {
    return std::abs((c.x - a.x) * (p.y - a.y) - (c.y - a.y) * (p.x - a.x)) / std::hypot(c.x - a.x, c.y - a.y);
  };
  double worst = 0;
  for (Point2 p : b.extreme_points.as_array()) {
    double nearest = 1e300;
    for (int i = 0; i < 4; ++i) nearest = std::min(nearest, line_dist(p, q.p[i], q.p[(i + 1) % 4]));
    worst = std::max(worst, nearest);
    if (!InQuad(q, p, 1e-6)) worst = std::max(worst, 1.0);
  }
  // Each side must carry one click: the two u-extremes lie on opposite u-sides.
  const double c = std::cos(b.angle), s = std::sin(b.angle);
  auto u = [&](Point2 p) { return (p.x - b.center.x) * c + (p.y - b.center.y) * s; };
  auto v = [&](Point2 p) { return -(p.x - b.center.x) * s + (p.y - b.center.y) * c; };
  const ExtremePoints& e = b.extreme_points;
  worst = std::max(worst, std::abs(std::abs(u(e.left) - u(e.right)) - 2 * b.half_u));
  worst = std::max(worst, std::abs(std::abs(v(e.top) - v(e.bottom)) - 2 * b.half_v));
  return worst;
}

// Counts tp/fp/fn directly.
struct Counts {
  std::uint64_t tp = 0, fp = 0, fn = 0;
};

inline Counts CountPixels(const Mask& pred, const Mask& gt) {
  Counts k;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred.pixels()[i], g = gt.pixels()[i];
    k.tp += p && g;
    k.fp += p && !g;
    k.fn += !p && g;
  }
  return k;
}

inline Mask Disk(ImageBounds bounds, Point2 c, double radius) {
  Mask m(bounds);
  for (int r = 0; r < bounds.height; ++r)
    for (int x = 0; x < bounds.width; ++x)
      m.at(r, x) = std::hypot(x + 0.5 - c.x, r + 0.5 - c.y) <= radius;
  return m;
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng{std::random_device{}()};
    path_ = std::filesystem::temp_directory_path() / ("boxseg_" + tag + "_" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Relative path -> bytes for every regular file under root, skipping names in
// `skip`.
inline std::map<std::string, std::string> ReadTree(const std::filesystem::path& root,
                                                   const std::vector<std::string>& skip = {}) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const std::string name = e.path().filename().string();
    if (std::find(skip.begin(), skip.end(), name) != skip.end()) continue;
    const std::string rel = std::filesystem::relative(e.path(), root).string();
    out[rel] = ReadFileText(e.path());
  }
  return out;
}

}  // namespace boxseg::oracle
