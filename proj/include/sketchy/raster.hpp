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
#include <cstdlib>
#include <vector>

#include "sketchy/common.hpp"
#include "sketchy/sketch.hpp"

namespace sketchy {

// c x c x 3 intensity grid, row-major HWC, background 1.0, ink 0.0.
struct RasterImage {
  int canvas = 0;
  std::vector<float> pixels;

  RasterImage() = default;
  explicit RasterImage(int c, float fill = 1.0f)
      : canvas(c), pixels(static_cast<std::size_t>(c) * c * 3, fill) {}

  float at(int row, int col, int ch = 0) const {
    return pixels[(static_cast<std::size_t>(row) * canvas + col) * 3 + ch];
  }
  void set_gray(int row, int col, float v) {
    float* p = &pixels[(static_cast<std::size_t>(row) * canvas + col) * 3];
    p[0] = p[1] = p[2] = v;
  }
  bool operator==(const RasterImage&) const = default;
};

inline constexpr double kRasterMargin = 0.025;

inline int stroke_thickness(int c) {
  return std::max(1, static_cast<int>(std::lround(c / 128.0)));
}

// Unit-square coordinate to pixel index on a c-canvas with the fixed margin.
inline int to_pixel(double u, int c) {
  const double v = (kRasterMargin + (1.0 - 2.0 * kRasterMargin) * u) * (c - 1);
  return std::clamp(static_cast<int>(std::lround(v)), 0, c - 1);
}

namespace detail {

inline void stamp(RasterImage& img, int row, int col, int thickness, float v) {
  const int lo = -(thickness / 2);
  for (int dr = lo; dr < lo + thickness; ++dr)
    for (int dc = lo; dc < lo + thickness; ++dc) {
      const int r = row + dr, c = col + dc;
      if (r >= 0 && r < img.canvas && c >= 0 && c < img.canvas) img.set_gray(r, c, v);
    }
}

}  // namespace detail

// Integer Bresenham line with a square brush; no anti-aliasing.
inline void draw_line(RasterImage& img, int r0, int c0, int r1, int c1, int thickness,
                      float v = 0.0f) {
  int dc = std::abs(c1 - c0), sc = c0 < c1 ? 1 : -1;
  int dr = -std::abs(r1 - r0), sr = r0 < r1 ? 1 : -1;
  int err = dc + dr;
  while (true) {
    detail::stamp(img, r0, c0, thickness, v);
    if (r0 == r1 && c0 == c1) break;
    const int e2 = 2 * err;
    if (e2 >= dr) {
      err += dr;
      c0 += sc;
    }
    if (e2 <= dc) {
      err += dc;
      r0 += sr;
    }
  }
}

/// Renders pen-down segments (point i to i+1 whenever point i has q1 = 1).
inline RasterImage rasterize(const SketchVector& s, int c) {
  require(c >= 8, "rasterize: canvas size must be >= 8");
  RasterImage img(c);
  const int t = stroke_thickness(c);
  for (std::size_t i = 0; i + 1 < s.points.size(); ++i) {
    const Point5& a = s.points[i];
    if (a.pen() != PenState::kDown) continue;
    const Point5& b = s.points[i + 1];
    draw_line(img, to_pixel(a.y, c), to_pixel(a.x, c), to_pixel(b.y, c), to_pixel(b.x, c), t);
  }
  return img;
}

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// Even-odd scanline fill, sampling pixel centers. Coordinates in the unit
// square mapped with the same margin as rasterize.
inline void fill_polygon(RasterImage& img, const std::vector<Vec2>& poly, float v) {
  const int c = img.canvas;
  std::vector<Vec2> p(poly.size());
  for (std::size_t i = 0; i < poly.size(); ++i)
    p[i] = {(kRasterMargin + (1.0 - 2.0 * kRasterMargin) * poly[i].x) * (c - 1),
            (kRasterMargin + (1.0 - 2.0 * kRasterMargin) * poly[i].y) * (c - 1)};
  std::vector<double> xs;
  for (int row = 0; row < c; ++row) {
    const double y = row;
    xs.clear();
    for (std::size_t i = 0; i < p.size(); ++i) {
      const Vec2& a = p[i];
      const Vec2& b = p[(i + 1) % p.size()];
      if ((a.y <= y && b.y > y) || (b.y <= y && a.y > y))
        xs.push_back(a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const int from = std::max(0, static_cast<int>(std::ceil(xs[k])));
      const int to = std::min(c - 1, static_cast<int>(std::floor(xs[k + 1])));
      for (int col = from; col <= to; ++col) img.set_gray(row, col, v);
    }
  }
}

}  // namespace sketchy
