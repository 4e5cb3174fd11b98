/* Copyright 2026 The sketchy Authors. All Rights Reserved.

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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sketchy/common.hpp"

namespace sketchy {

enum class PenState { kDown, kLift, kEnd };

// One stroke-5 sample: absolute position in the unit square plus the pen
// state that follows it (q1 pen stays down, q2 stroke ends, q3 sketch ends).
struct Point5 {
  double x = 0.0;
  double y = 0.0;
  double q1 = 1.0;
  double q2 = 0.0;
  double q3 = 0.0;

  static Point5 make(double x, double y, PenState pen) {
    return {x, y, pen == PenState::kDown ? 1.0 : 0.0,
            pen == PenState::kLift ? 1.0 : 0.0,
            pen == PenState::kEnd ? 1.0 : 0.0};
  }

  bool one_hot() const {
    auto bit = [](double v) { return v == 0.0 || v == 1.0; };
    return bit(q1) && bit(q2) && bit(q3) && q1 + q2 + q3 == 1.0;
  }
  PenState pen() const {
    if (q3 == 1.0) return PenState::kEnd;
    if (q2 == 1.0) return PenState::kLift;
    return PenState::kDown;
  }
  void set_pen(PenState p) { *this = make(x, y, p); }

  bool operator==(const Point5&) const = default;
};

struct SketchVector {
  std::vector<Point5> points;
  std::string id;
  std::string pair_id;

  std::size_t size() const { return points.size(); }
  bool operator==(const SketchVector&) const = default;
};

// Returns an empty string when valid, otherwise the first violated invariant.
inline std::string check_sketch(const SketchVector& s,
                                bool require_unit_square = true) {
  if (s.points.empty()) return "sketch has no points";
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    const Point5& p = s.points[i];
    if (!p.one_hot()) return "point " + std::to_string(i) + " pen state is not one-hot";
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      return "point " + std::to_string(i) + " has non-finite coordinates";
    if (require_unit_square && (p.x < 0.0 || p.x > 1.0 || p.y < 0.0 || p.y > 1.0))
      return "point " + std::to_string(i) + " outside the unit square";
    const bool last = i + 1 == s.points.size();
    if (last && p.q3 != 1.0) return "final point is not marked sketch-end";
    if (!last && p.q3 == 1.0) return "interior point " + std::to_string(i) + " marked sketch-end";
  }
  return {};
}

inline void validate_sketch(const SketchVector& s) {
  const std::string why = check_sketch(s);
  require(why.empty(), "invalid sketch '" + s.id + "': " + why);
}

// Half-open [begin, end) index ranges of the strokes in drawing order.
inline std::vector<std::pair<std::size_t, std::size_t>> stroke_ranges(
    const SketchVector& s) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    if (s.points[i].pen() != PenState::kDown) {
      out.emplace_back(begin, i + 1);
      begin = i + 1;
    }
  }
  if (begin < s.points.size()) out.emplace_back(begin, s.points.size());
  return out;
}

class CanvasSet {
 public:
  CanvasSet() : CanvasSet(std::vector<int>{32, 64, 128, 256}) {}
  explicit CanvasSet(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    require(sizes_.size() >= 2, "canvas set needs at least two sizes");
    for (std::size_t i = 0; i < sizes_.size(); ++i) {
      require(sizes_[i] >= 8, "canvas size below 8");
      if (i > 0) require(sizes_[i] > sizes_[i - 1], "canvas sizes must be strictly increasing");
    }
  }

  std::size_t size() const { return sizes_.size(); }
  int operator[](std::size_t i) const { return sizes_[i]; }
  int largest() const { return sizes_.back(); }
  int smallest() const { return sizes_.front(); }
  const std::vector<int>& sizes() const { return sizes_; }

  std::size_t index_of(int c) const {
    auto it = std::find(sizes_.begin(), sizes_.end(), c);
    require(it != sizes_.end(), "canvas size " + std::to_string(c) + " not in canvas set");
    return static_cast<std::size_t>(it - sizes_.begin());
  }
  bool contains(int c) const {
    return std::find(sizes_.begin(), sizes_.end(), c) != sizes_.end();
  }

 private:
  std::vector<int> sizes_;
};

/// Absolute to per-step delta coordinates. Point 0 keeps its absolute position.
inline SketchVector to_offset(const SketchVector& s) {
  SketchVector out = s;
  for (std::size_t i = 1; i < s.points.size(); ++i) {
    out.points[i].x = s.points[i].x - s.points[i - 1].x;
    out.points[i].y = s.points[i].y - s.points[i - 1].y;
  }
  return out;
}

/// Inverse of to_offset (prefix sums).
inline SketchVector to_absolute(const SketchVector& s) {
  SketchVector out = s;
  for (std::size_t i = 1; i < s.points.size(); ++i) {
    out.points[i].x = out.points[i - 1].x + s.points[i].x;
    out.points[i].y = out.points[i - 1].y + s.points[i].y;
  }
  return out;
}

namespace detail {

inline double point_segment_distance(const Point5& p, const Point5& a, const Point5& b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  if (len2 == 0.0) return std::hypot(p.x - a.x, p.y - a.y);
  const double t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

}  // namespace detail

/// Douglas-Peucker keep-mask for one polyline. Endpoints are always kept; an
/// interior point is kept when its distance to the current chord exceeds eps.
inline std::vector<bool> dp_keep_mask(std::span<const Point5> pts, double eps) {
  std::vector<bool> keep(pts.size(), false);
  if (pts.empty()) return keep;
  keep.front() = keep.back() = true;
  std::vector<std::pair<std::size_t, std::size_t>> stack;
  if (pts.size() > 2) stack.emplace_back(0, pts.size() - 1);
  while (!stack.empty()) {
    auto [lo, hi] = stack.back();
    stack.pop_back();
    double best = -1.0;
    std::size_t best_i = lo;
    for (std::size_t i = lo + 1; i < hi; ++i) {
      const double d = detail::point_segment_distance(pts[i], pts[lo], pts[hi]);
      if (d > best) {
        best = d;
        best_i = i;
      }
    }
    if (best > eps) {
      keep[best_i] = true;
      if (best_i - lo > 1) stack.emplace_back(lo, best_i);
      if (hi - best_i > 1) stack.emplace_back(best_i, hi);
    }
  }
  return keep;
}

namespace detail {

inline std::vector<bool> dp_sketch_mask(const SketchVector& s, double eps) {
  std::vector<bool> keep(s.size(), false);
  for (auto [b, e] : stroke_ranges(s)) {
    auto m = dp_keep_mask(std::span(s.points).subspan(b, e - b), eps);
    std::copy(m.begin(), m.end(), keep.begin() + static_cast<std::ptrdiff_t>(b));
  }
  return keep;
}

inline std::size_t count_kept(const std::vector<bool>& m) {
  return static_cast<std::size_t>(std::count(m.begin(), m.end(), true));
}

}  // namespace detail

/// Caps the point count at t_max. Each stroke is simplified with one shared
/// tolerance, bisected to the smallest value whose total kept count fits.
/// Pen states of kept points are preserved (endpoints are always kept, so
/// every stroke keeps its lift/end marker).
///
/// If the strokes' endpoints alone exceed t_max, whole trailing strokes are
/// dropped and the last kept point becomes the sketch end.
inline SketchVector simplify_dp(const SketchVector& s, std::size_t t_max) {
  require(t_max >= 2, "simplify_dp: t_max must be >= 2");
  if (s.size() <= t_max) return s;

  std::vector<bool> keep;
  double lo = 0.0, hi = 2.0;  // unit-square diagonal < 2
  keep = detail::dp_sketch_mask(s, hi);
  if (detail::count_kept(keep) > t_max) {
    // Endpoint-only simplification still too long.
    SketchVector out;
    out.id = s.id;
    out.pair_id = s.pair_id;
    for (std::size_t i = 0; i < s.size() && out.size() < t_max; ++i)
      if (keep[i]) out.points.push_back(s.points[i]);
    out.points.back().set_pen(PenState::kEnd);
    return out;
  }
  for (int iter = 0; iter < 64; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (detail::count_kept(detail::dp_sketch_mask(s, mid)) <= t_max)
      hi = mid;
    else
      lo = mid;
  }
  keep = detail::dp_sketch_mask(s, hi);

  SketchVector out;
  out.id = s.id;
  out.pair_id = s.pair_id;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (keep[i]) out.points.push_back(s.points[i]);
  return out;
}

/// Prefix of ceil(completion * T) points in drawing order, last point rewritten
/// to sketch-end.
inline SketchVector render_partial(const SketchVector& s, double completion) {
  require(completion > 0.0 && completion <= 1.0,
          "render_partial: completion must lie in (0, 1]");
  require(!s.points.empty(), "render_partial: empty sketch");
  if (completion == 1.0) return s;
  // The small slack keeps products like 0.3 * 10 from rounding up to 4.
  const double want = completion * static_cast<double>(s.size());
  std::size_t n = static_cast<std::size_t>(std::ceil(want - 1e-9));
  n = std::clamp<std::size_t>(n, 1, s.size());
  SketchVector out;
  out.id = s.id;
  out.pair_id = s.pair_id;
  out.points.assign(s.points.begin(), s.points.begin() + static_cast<std::ptrdiff_t>(n));
  out.points.back().set_pen(PenState::kEnd);
  return out;
}

// Completion grid used for abstraction-aware selector training: 0.30, 0.35, ..., 1.00.
inline std::vector<double> completion_grid() {
  std::vector<double> g;
  for (int k = 30; k <= 100; k += 5) g.push_back(k / 100.0);
  return g;
}

}  // namespace sketchy
