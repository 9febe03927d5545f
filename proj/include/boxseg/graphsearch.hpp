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
 * @file graphsearch.hpp
 * @brief Boundary refinement of one rough component by optimal closed-path
 * graph search.
 *
 * The rough component's outer boundary is resampled into columns along its
 * outward normals. Each column holds evenly spaced candidate nodes whose
 * cost is the negated magnitude of the intensity derivative along the column.
 * A dynamic program picks one node per column, minimizing total cost under a
 * cyclic smoothness limit. Box extents, the component's domain cell and the
 * annotated extreme points enter as large additive costs.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "boxseg/geometry.hpp"
#include "boxseg/image.hpp"
#include "boxseg/morphology.hpp"
#include "boxseg/segmenter.hpp"

namespace boxseg {

// ---------------------------------------------------------------------------
// Domain cells
// ---------------------------------------------------------------------------

// Per-pixel owner component id: a nearest-component partition whose cell
// boundaries lie on the medial axis between components.
struct DomainCell {
  Image<std::int32_t> owner;

  Mask CellOf(int id) const {
    Mask m(owner.bounds());
    for (std::size_t i = 0; i < m.size(); ++i) m.pixels()[i] = owner.pixels()[i] == id;
    return m;
  }
  bool Owns(int id, Point2 p) const {
    const PixelIndex px = ContainingPixel(p);
    return owner.bounds().Contains(px) && owner[px] == id;
  }
};

namespace detail {

inline constexpr double kEdtInf = 1e20;

// 1-D squared distance transform (lower envelope of parabolas).
inline void SquaredDistance1d(const std::vector<double>& f, std::vector<double>& d,
                              std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    double s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

// Exact squared Euclidean distance from each pixel center to the nearest
// foreground pixel center.
inline Image<double> SquaredDistanceTransform(const Mask& mask) {
  const int w = mask.width(), h = mask.height();
  Image<double> out(w, h);
  const int n = std::max(w, h);
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);
  f.resize(h); d.resize(h);
  for (int c = 0; c < w; ++c) {
    for (int r = 0; r < h; ++r) f[r] = mask.at(r, c) ? 0.0 : kEdtInf;
    SquaredDistance1d(f, d, v, z);
    for (int r = 0; r < h; ++r) out.at(r, c) = d[r];
  }
  f.resize(w); d.resize(w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) f[c] = out.at(r, c);
    SquaredDistance1d(f, d, v, z);
    for (int c = 0; c < w; ++c) out.at(r, c) = d[c];
  }
  return out;
}

}  // namespace detail

// Owner = nearest component by Euclidean distance between pixel centers,
// ties to the smaller id.
inline DomainCell ComputeDomainCells(const RoughSegmentation& seg) {
  if (seg.components.empty())
    throw Error(ErrorCode::kNoComponents, "domain cells need at least one component");
  std::vector<const InstanceMask*> order;
  for (const InstanceMask& c : seg.components) order.push_back(&c);
  std::sort(order.begin(), order.end(),
            [](const InstanceMask* a, const InstanceMask* b) { return a->id < b->id; });

  DomainCell cell{Image<std::int32_t>(seg.bounds(), order.front()->id)};
  Image<double> best(seg.bounds(), std::numeric_limits<double>::infinity());
  for (const InstanceMask* comp : order) {
    const Image<double> dist = detail::SquaredDistanceTransform(comp->mask);
    for (std::size_t i = 0; i < best.size(); ++i) {
      if (dist.pixels()[i] < best.pixels()[i]) {
        best.pixels()[i] = dist.pixels()[i];
        cell.owner.pixels()[i] = comp->id;
      }
    }
  }
  return cell;
}

// ---------------------------------------------------------------------------
// Boundary tracing
// ---------------------------------------------------------------------------

// Outer boundary of the mask's foreground as a closed polygon on pixel
// corners, traversed with the foreground on the right-hand side of travel
// in image coordinates (clockwise on screen). Diagonal contacts are joined,
// matching 8-connectivity. With several components the loop enclosing the
// largest area is returned.
inline std::vector<Point2> TraceOuterBoundary(const Mask& mask) {
  const int w = mask.width(), h = mask.height();
  const int stride = w + 1;
  auto fg = [&](int r, int c) { return mask.bounds().Contains(r, c) && mask.at(r, c) != 0; };
  auto vid = [&](int x, int y) { return y * stride + x; };

  struct Edge {
    int from, to;
    bool used = false;
  };
  std::vector<Edge> edges;
  std::vector<std::array<int, 2>> out(static_cast<std::size_t>(stride) * (h + 1), {-1, -1});
  auto add = [&](int x0, int y0, int x1, int y1) {
    const int e = static_cast<int>(edges.size());
    edges.push_back({vid(x0, y0), vid(x1, y1)});
    auto& slot = out[vid(x0, y0)];
    (slot[0] < 0 ? slot[0] : slot[1]) = e;
  };
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!fg(r, c)) continue;
      if (!fg(r - 1, c)) add(c, r, c + 1, r);
      if (!fg(r, c + 1)) add(c + 1, r, c + 1, r + 1);
      if (!fg(r + 1, c)) add(c + 1, r + 1, c, r + 1);
      if (!fg(r, c - 1)) add(c, r + 1, c, r);
    }
  }
  auto point = [&](int v) { return Point2{double(v % stride), double(v / stride)}; };

  std::vector<Point2> best;
  double best_area = -1.0;
  for (std::size_t start = 0; start < edges.size(); ++start) {
    if (edges[start].used) continue;
    std::vector<Point2> loop;
    int e = static_cast<int>(start);
    while (!edges[e].used) {
      edges[e].used = true;
      loop.push_back(point(edges[e].from));
      const auto& slot = out[edges[e].to];
      int next = slot[0];
      if (slot[1] >= 0) {
        // Two ways out: take the screen-left turn to keep diagonal
        // neighbours on one boundary.
        const Point2 din = point(edges[e].to) - point(edges[e].from);
        const Point2 d0 = point(edges[slot[0]].to) - point(edges[slot[0]].from);
        next = Cross(din, d0) < 0 ? slot[0] : slot[1];
        if (edges[next].used) next = next == slot[0] ? slot[1] : slot[0];
      }
      e = next;
    }
    double area = 0.0;
    for (std::size_t i = 0; i < loop.size(); ++i)
      area += Cross(loop[i], loop[(i + 1) % loop.size()]);
    area = std::abs(area) / 2;
    if (area > best_area) {
      best_area = area;
      best = std::move(loop);
    }
  }
  return best;
}

// Count of foreground pixels with a 4-neighbour outside the mask.
inline std::size_t BoundaryPixelCount(const Mask& mask) {
  std::size_t n = 0;
  for (int r = 0; r < mask.height(); ++r) {
    for (int c = 0; c < mask.width(); ++c) {
      if (!mask.at(r, c)) continue;
      const int dr[4] = {-1, 1, 0, 0}, dc[4] = {0, 0, -1, 1};
      for (int k = 0; k < 4; ++k) {
        const int rr = r + dr[k], cc = c + dc[k];
        if (!mask.bounds().Contains(rr, cc) || !mask.at(rr, cc)) {
          ++n;
          break;
        }
      }
    }
  }
  return n;
}

// Points at equal arc-length spacing along a closed polygon, starting at its
// first vertex.
inline std::vector<Point2> ResampleClosed(const std::vector<Point2>& poly, int count) {
  const std::size_t n = poly.size();
  std::vector<double> cumulative(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    cumulative[i + 1] = cumulative[i] + Distance(poly[i], poly[(i + 1) % n]);
  const double perimeter = cumulative[n];
  std::vector<Point2> out;
  out.reserve(count);
  std::size_t seg = 0;
  for (int k = 0; k < count; ++k) {
    const double s = perimeter * k / count;
    while (seg + 1 < n && cumulative[seg + 1] <= s) ++seg;
    const double len = cumulative[seg + 1] - cumulative[seg];
    const double t = len > 0 ? (s - cumulative[seg]) / len : 0.0;
    out.push_back(poly[seg] + t * (poly[(seg + 1) % n] - poly[seg]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Column graph
// ---------------------------------------------------------------------------

struct GsConfig {
  int n_columns = 120;
  int nodes_per_column = 61;
  // Unset: 0.5 * sqrt(area / pi) clamped to [5, 40].
  std::optional<double> column_half_length;
  int smoothness_delta = 2;
  double exclusion_cost = 1e6;
  double inclusion_bonus = -1e6;
  // Gaussian pre-smoothing before differentiation; 0 disables.
  double presmooth_sigma = 1.0;
  int normal_window = 5;

  void Validate() const {
    if (n_columns < 8) throw Error(ErrorCode::kValidation, "n_columns must be >= 8");
    if (nodes_per_column < 3 || nodes_per_column % 2 == 0)
      throw Error(ErrorCode::kValidation, "nodes_per_column must be odd and >= 3");
    if (smoothness_delta < 1) throw Error(ErrorCode::kValidation, "smoothness_delta must be >= 1");
    if (column_half_length && !(*column_half_length > 0))
      throw Error(ErrorCode::kValidation, "column_half_length must be positive");
    if (!(exclusion_cost > 0)) throw Error(ErrorCode::kValidation, "exclusion_cost must be positive");
    if (!(inclusion_bonus < 0)) throw Error(ErrorCode::kValidation, "inclusion_bonus must be negative");
  }

  double HalfLengthFor(std::size_t area) const {
    if (column_half_length) return *column_half_length;
    return std::clamp(0.5 * std::sqrt(static_cast<double>(area) / std::numbers::pi), 5.0, 40.0);
  }
};

struct GraphColumn {
  Point2 base;
  Point2 normal;
  std::vector<Point2> nodes;
  std::vector<double> cost;
  std::vector<std::uint8_t> admissible;  // 0 where a hard constraint is violated
  std::optional<int> forced_node;
};

struct ColumnGraph {
  std::vector<GraphColumn> columns;
  int nodes_per_column = 0;
  int smoothness_delta = 1;
  double step = 0.0;
  std::vector<std::string> warnings;

  int size() const { return static_cast<int>(columns.size()); }

  // Geometry-free graph for solver tests: costs[i][j] is node j of column i.
  static ColumnGraph FromCosts(const std::vector<std::vector<double>>& costs, int delta) {
    ColumnGraph g;
    g.smoothness_delta = delta;
    g.nodes_per_column = costs.empty() ? 0 : static_cast<int>(costs.front().size());
    for (const auto& col : costs) {
      GraphColumn c;
      c.cost = col;
      c.admissible.assign(col.size(), 1);
      g.columns.push_back(std::move(c));
    }
    return g;
  }
};

// Offset of node j from the base point along the normal.
inline double NodeOffset(int j, int nodes_per_column, double half_length) {
  const double step = 2.0 * half_length / (nodes_per_column - 1);
  return (j - (nodes_per_column - 1) / 2.0) * step;
}

inline ColumnGraph BuildColumnGraph(const GrayImage& image, const InstanceMask& component,
                                    const TiltedBox& box, const DomainCell& cell,
                                    const GsConfig& config = {}) {
  config.Validate();
  RequireSameBounds(image.bounds(), component.mask.bounds(), "component mask");
  RequireSameBounds(image.bounds(), cell.owner.bounds(), "domain cells");
  const std::size_t area = CountForeground(component.mask);
  if (area == 0) throw Error(ErrorCode::kEmptyMask, "component is empty");
  if (BoundaryPixelCount(component.mask) < 8)
    throw Error(ErrorCode::kDegenerateBoundary, "component boundary has fewer than 8 pixels");

  const std::vector<Point2> outline = TraceOuterBoundary(component.mask);
  const int n = config.n_columns;
  const int m = config.nodes_per_column;
  const std::vector<Point2> base = ResampleClosed(outline, n);

  // Foreground lies to the right of travel, so outward is to the left:
  // left of (dx, dy) in image coordinates is (dy, -dx).
  std::vector<Point2> raw(n);
  for (int i = 0; i < n; ++i) {
    const Point2 t = base[(i + 1) % n] - base[(i + n - 1) % n];
    const double len = Norm(t);
    raw[i] = len > 0 ? Point2{t.y / len, -t.x / len} : Point2{0, 0};
  }
  const int half_window = std::max(0, config.normal_window / 2);
  std::vector<Point2> normals(n);
  for (int i = 0; i < n; ++i) {
    Point2 acc{0, 0};
    for (int k = -half_window; k <= half_window; ++k) acc = acc + raw[((i + k) % n + n) % n];
    const double len = Norm(acc);
    normals[i] = len > 0 ? (1.0 / len) * acc : raw[i];
  }

  const double half_length = config.HalfLengthFor(area);
  ColumnGraph graph;
  graph.nodes_per_column = m;
  graph.smoothness_delta = config.smoothness_delta;
  graph.step = 2.0 * half_length / (m - 1);

  const GrayImage smooth = GaussianBlur(image, config.presmooth_sigma);
  const ImageBounds bounds = image.bounds();
  graph.columns.resize(n);
  for (int i = 0; i < n; ++i) {
    GraphColumn& col = graph.columns[i];
    col.base = base[i];
    col.normal = normals[i];
    col.nodes.resize(m);
    col.cost.resize(m);
    col.admissible.assign(m, 1);
    for (int j = 0; j < m; ++j) {
      const Point2 p = base[i] + NodeOffset(j, m, half_length) * normals[i];
      col.nodes[j] = p;
      const double ahead = SampleBilinear(smooth, p + graph.step * normals[i]);
      const double behind = SampleBilinear(smooth, p - graph.step * normals[i]);
      col.cost[j] = -std::abs(ahead - behind) / (2.0 * graph.step);
      // Half a node of slack keeps the node nearest a box edge admissible.
      const bool inside = bounds.ContainsPoint(p) && box.Contains(p, 0.5 * graph.step) &&
                          cell.Owns(component.id, p);
      if (!inside) {
        col.cost[j] += config.exclusion_cost;
        col.admissible[j] = 0;
      }
    }
  }

  // Each extreme point claims the nearest column not yet claimed.
  const std::array<const char*, 4> names = {"top", "bottom", "left", "right"};
  const auto extremes = box.extreme_points.as_array();
  for (int e = 0; e < 4; ++e) {
    const Point2 target = extremes[e];
    int best_col = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      if (graph.columns[i].forced_node) continue;
      const double d = DistanceToSegment(target, graph.columns[i].nodes.front(),
                                         graph.columns[i].nodes.back());
      if (d < best_dist) {
        best_dist = d;
        best_col = i;
      }
    }
    if (best_col < 0) break;
    GraphColumn& col = graph.columns[best_col];
    const double along = Dot(target - col.nodes.front(), col.normal) / graph.step;
    int node = std::clamp(static_cast<int>(std::lround(along)), 0, m - 1);
    // Extreme points sit on the box edge; prefer the closest node that is
    // inside the box without slack so neighbouring columns can reach it.
    const double nearest = Distance(col.nodes[node], target);
    int inner = -1;
    for (int j = std::max(0, node - 2); j <= std::min(m - 1, node + 2); ++j) {
      if (!col.admissible[j] || !box.Contains(col.nodes[j])) continue;
      if (Distance(col.nodes[j], target) > nearest + graph.step) continue;
      if (inner < 0 || Distance(col.nodes[j], target) < Distance(col.nodes[inner], target)) inner = j;
    }
    if (inner >= 0) node = inner;
    if (best_dist > graph.step || along < -0.5 || along > m - 0.5) {
      graph.warnings.push_back(std::string(names[e]) +
                               " extreme point lies outside every column; clamped to node " +
                               std::to_string(node) + " of column " + std::to_string(best_col));
    }
    col.forced_node = node;
    for (int j = 0; j < m; ++j) {
      if (j == node) {
        col.cost[j] += config.inclusion_bonus;
        if (!col.admissible[j]) col.cost[j] -= config.exclusion_cost;
        col.admissible[j] = 1;
      } else {
        if (col.admissible[j]) col.cost[j] += config.exclusion_cost;
        col.admissible[j] = 0;
      }
    }
  }
  return graph;
}

// ---------------------------------------------------------------------------
// Closed-path solver
// ---------------------------------------------------------------------------

struct Contour {
  std::vector<int> selection;   // node index per column
  std::vector<Point2> points;   // selected node positions, empty without geometry
  double cost = 0.0;            // summed in column order
};

// Sum of selected node costs in column order.
inline double SelectionCost(const ColumnGraph& graph, const std::vector<int>& selection) {
  double total = 0.0;
  for (int i = 0; i < graph.size(); ++i) total += graph.columns[i].cost[selection[i]];
  return total;
}

// Globally minimal closed selection under |sel(i+1) - sel(i)| <= delta,
// cyclically. Forced columns admit only their forced node. With a forced
// column the DP is anchored there; otherwise every start node of column 0 is
// tried and the best closure kept.
inline Contour SolveClosedPath(const ColumnGraph& graph) {
  const int n = graph.size();
  if (n == 0) throw Error(ErrorCode::kInfeasible, "graph has no columns");
  const int m = static_cast<int>(graph.columns.front().cost.size());
  const int delta = graph.smoothness_delta;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  int anchor = 0;
  for (int i = 0; i < n; ++i) {
    if (graph.columns[i].forced_node) {
      anchor = i;
      break;
    }
  }
  auto node_cost = [&](int col, int j) {
    const GraphColumn& c = graph.columns[col];
    if (c.forced_node && *c.forced_node != j) return kInf;
    return c.cost[j];
  };

  std::vector<int> starts;
  if (graph.columns[anchor].forced_node) starts.push_back(*graph.columns[anchor].forced_node);
  else for (int s = 0; s < m; ++s) starts.push_back(s);

  std::vector<double> prev(m), cur(m);
  std::vector<int> back(static_cast<std::size_t>(n) * m, -1);
  double best_total = kInf;
  std::vector<int> best_selection;

  for (int s : starts) {
    std::fill(prev.begin(), prev.end(), kInf);
    prev[s] = node_cost(anchor, s);
    if (prev[s] == kInf) continue;
    for (int k = 1; k < n; ++k) {
      const int col = (anchor + k) % n;
      for (int j = 0; j < m; ++j) {
        double best = kInf;
        int arg = -1;
        for (int i = std::max(0, j - delta); i <= std::min(m - 1, j + delta); ++i) {
          if (prev[i] < best) {
            best = prev[i];
            arg = i;
          }
        }
        const double c = node_cost(col, j);
        cur[j] = (arg < 0 || c == kInf) ? kInf : best + c;
        back[static_cast<std::size_t>(k) * m + j] = arg;
      }
      std::swap(prev, cur);
    }
    double total = kInf;
    int end = -1;
    for (int j = std::max(0, s - delta); j <= std::min(m - 1, s + delta); ++j) {
      if (prev[j] < total) {
        total = prev[j];
        end = j;
      }
    }
    if (end < 0 || !(total < best_total)) continue;
    best_total = total;
    best_selection.assign(n, 0);
    int j = end;
    for (int k = n - 1; k >= 1; --k) {
      best_selection[(anchor + k) % n] = j;
      j = back[static_cast<std::size_t>(k) * m + j];
    }
    best_selection[anchor] = s;
  }
  if (best_selection.empty())
    throw Error(ErrorCode::kInfeasible, "no closed path satisfies the smoothness and forced nodes");

  Contour contour;
  contour.selection = best_selection;
  contour.cost = SelectionCost(graph, best_selection);
  for (int i = 0; i < n; ++i) {
    const GraphColumn& c = graph.columns[i];
    if (!c.admissible.empty() && !c.admissible[best_selection[i]])
      throw Error(ErrorCode::kInfeasible,
                  "optimal path uses an excluded node at column " + std::to_string(i));
    if (!c.nodes.empty()) contour.points.push_back(c.nodes[best_selection[i]]);
  }
  return contour;
}

// ---------------------------------------------------------------------------
// Rasterization
// ---------------------------------------------------------------------------

namespace detail {

inline int OrientSign(Point2 a, Point2 b, Point2 c) {
  const double v = Cross(b - a, c - a);
  return (v > 0) - (v < 0);
}

inline bool OnSegment(Point2 a, Point2 b, Point2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

inline bool SegmentsIntersect(Point2 a, Point2 b, Point2 c, Point2 d) {
  const int o1 = OrientSign(a, b, c), o2 = OrientSign(a, b, d);
  const int o3 = OrientSign(c, d, a), o4 = OrientSign(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && OnSegment(a, b, c)) return true;
  if (o2 == 0 && OnSegment(a, b, d)) return true;
  if (o3 == 0 && OnSegment(c, d, a)) return true;
  if (o4 == 0 && OnSegment(c, d, b)) return true;
  return false;
}

}  // namespace detail

// Drops consecutive duplicate vertices (including across the closure).
inline std::vector<Point2> DedupClosed(const std::vector<Point2>& poly) {
  std::vector<Point2> out;
  for (Point2 p : poly)
    if (out.empty() || !(out.back() == p)) out.push_back(p);
  while (out.size() > 1 && out.front() == out.back()) out.pop_back();
  return out;
}

inline bool IsSimplePolygon(const std::vector<Point2>& polygon) {
  const std::vector<Point2> poly = DedupClosed(polygon);
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = poly[i], b = poly[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) {
        // Adjacent edges share one vertex; they must not fold back onto
        // each other.
        const Point2 c = poly[j], d = poly[(j + 1) % n];
        const Point2 shared = (j == i + 1) ? b : a;
        const Point2 other_first = (j == i + 1) ? a : b;
        const Point2 other_second = (j == i + 1) ? d : c;
        if (detail::OrientSign(other_first, shared, other_second) == 0 &&
            Dot(other_first - shared, other_second - shared) > 0)
          return false;
        continue;
      }
      if (detail::SegmentsIntersect(a, b, poly[j], poly[(j + 1) % n])) return false;
    }
  }
  return true;
}

// Even-odd fill by pixel-center test. Edges are half-open in y so that
// shared vertices are counted once.
inline Mask RasterizePolygon(const std::vector<Point2>& poly, ImageBounds bounds) {
  Mask out(bounds);
  const std::size_t n = poly.size();
  if (n < 3) return out;
  std::vector<double> xs;
  for (int r = 0; r < bounds.height; ++r) {
    const double y = r + 0.5;
    xs.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2 a = poly[i], b = poly[(i + 1) % n];
      if ((a.y <= y && y < b.y) || (b.y <= y && y < a.y)) {
        xs.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      // Centers with x0 <= c + 0.5 < x1.
      const int c0 = std::max(0, static_cast<int>(std::ceil(xs[k] - 0.5)));
      const int c1 = std::min(bounds.width - 1, static_cast<int>(std::ceil(xs[k + 1] - 0.5)) - 1);
      for (int c = c0; c <= c1; ++c) out.at(r, c) = 1;
    }
  }
  return out;
}

inline Mask ContourToMask(const std::vector<Point2>& contour, ImageBounds bounds) {
  if (!IsSimplePolygon(contour))
    throw Error(ErrorCode::kSelfIntersecting, "contour is not a simple polygon");
  Mask mask = RasterizePolygon(DedupClosed(contour), bounds);
  if (CountForeground(mask) == 0)
    throw Error(ErrorCode::kEmptyMask, "contour covers no pixel center");
  return mask;
}

// ---------------------------------------------------------------------------
// Composition
// ---------------------------------------------------------------------------

struct RefineResult {
  Mask mask;
  Contour contour;
  ColumnGraph graph;
  std::vector<std::string> warnings;
};

// The refined mask is clipped to the box footprint and the component's
// domain cell and reduced to its largest 8-connected piece, so it is a
// single component that cannot overlap another component's result.
inline RefineResult RefineComponent(const GrayImage& image, const InstanceMask& component,
                                    const TiltedBox& box, const DomainCell& cell,
                                    const GsConfig& config = {}) {
  RefineResult result;
  result.graph = BuildColumnGraph(image, component, box, cell, config);
  result.contour = SolveClosedPath(result.graph);
  result.warnings = result.graph.warnings;
  Mask raw = ContourToMask(result.contour.points, image.bounds());
  const Mask footprint = BoxFootprint(box, image.bounds());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!footprint.pixels()[i] || cell.owner.pixels()[i] != component.id) raw.pixels()[i] = 0;
  }
  result.mask = LargestComponent8(raw);
  if (CountForeground(result.mask) == 0)
    throw Error(ErrorCode::kEmptyMask, "refined mask is empty after clipping");
  return result;
}

// Unfolded cost matrix and chosen path, one row per node.
inline void WriteGraphCsv(std::ostream& os, const ColumnGraph& graph, const Contour& contour) {
  os << "column,node,cost,chosen\n";
  for (int i = 0; i < graph.size(); ++i) {
    const GraphColumn& col = graph.columns[i];
    for (int j = 0; j < static_cast<int>(col.cost.size()); ++j) {
      const bool chosen = i < static_cast<int>(contour.selection.size()) && contour.selection[i] == j;
      os << i << ',' << j << ',' << col.cost[j] << ',' << (chosen ? 1 : 0) << '\n';
    }
  }
}

}  // namespace boxseg
