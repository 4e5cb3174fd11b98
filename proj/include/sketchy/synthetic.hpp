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
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "sketchy/common.hpp"
#include "sketchy/raster.hpp"
#include "sketchy/sketch.hpp"

namespace sketchy {

// Desk-scale stand-in for a fine-grained sketch/photo benchmark: each class is
// a base silhouette, each instance perturbs a handful of part attributes.
struct SyntheticConfig {
  int classes = 20;
  int instances = 10;
  int sketches_per_instance = 3;
  std::uint64_t seed = 0;
  int photo_size = 256;
  double jitter = 0.01;
  double stroke_dropout = 0.2;
  double test_fraction = 0.3;
};

struct ClassTemplate {
  int vertices = 5;
  std::vector<double> radial;
  double rx = 0.35;
  double ry = 0.3;
  double rotation = 0.0;
  bool triangular_part = false;
};

// The fine-grained attributes that distinguish instances of one class.
struct InstanceAttributes {
  double aspect = 1.0;
  int notch_edge = 0;
  double notch_pos = 0.5;
  double notch_depth = 0.1;
  double part_dx = 0.0;
  double part_dy = 0.0;
  double part_rx = 0.08;
  double part_ry = 0.08;
  double bar_angle = 0.0;
  double bar_length = 0.25;
  double bar_dx = 0.0;
  double bar_dy = 0.0;

  bool operator==(const InstanceAttributes&) const = default;
};

struct SyntheticPair {
  RasterImage photo;
  std::vector<SketchVector> sketches;
  InstanceAttributes attributes;
};

inline std::string pair_name(int class_id, int instance_id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "c%02d_i%02d", class_id, instance_id);
  return buf;
}

namespace detail {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Quantize to the 8-bit grid so stored PNGs reload bit-identically.
inline void quantize8(RasterImage& img) {
  for (float& v : img.pixels) v = static_cast<float>(std::lround(v * 255.0)) / 255.0f;
}

struct Shapes {
  std::vector<Vec2> body;  // closed polygon including the notch
  std::vector<Vec2> part;  // closed
  std::vector<Vec2> bar;   // closed quadrilateral
};

inline Shapes build_shapes(const ClassTemplate& t, const InstanceAttributes& a) {
  Shapes s;
  const double rx = t.rx * a.aspect, ry = t.ry / a.aspect;
  std::vector<Vec2> corners;
  for (int k = 0; k < t.vertices; ++k) {
    const double th = t.rotation + 2.0 * std::numbers::pi * k / t.vertices;
    corners.push_back({0.5 + t.radial[k] * rx * std::cos(th), 0.5 + t.radial[k] * ry * std::sin(th)});
  }
  for (int k = 0; k < t.vertices; ++k) {
    const Vec2 p = corners[k];
    const Vec2 q = corners[(k + 1) % t.vertices];
    s.body.push_back(p);
    if (k == a.notch_edge) {
      // Inward triangular dent on this edge.
      const double w = 0.06;
      const double ex = q.x - p.x, ey = q.y - p.y;
      const double len = std::hypot(ex, ey);
      const double ux = ex / len, uy = ey / len;
      const Vec2 m{p.x + a.notch_pos * ex, p.y + a.notch_pos * ey};
      Vec2 in{0.5 - m.x, 0.5 - m.y};
      const double il = std::hypot(in.x, in.y);
      in = {in.x / il, in.y / il};
      s.body.push_back({m.x - ux * w * 0.5, m.y - uy * w * 0.5});
      s.body.push_back({m.x + in.x * a.notch_depth, m.y + in.y * a.notch_depth});
      s.body.push_back({m.x + ux * w * 0.5, m.y + uy * w * 0.5});
    }
  }
  const double pcx = 0.5 + a.part_dx, pcy = 0.5 + a.part_dy;
  if (t.triangular_part) {
    for (int k = 0; k < 3; ++k) {
      const double th = -std::numbers::pi / 2 + 2.0 * std::numbers::pi * k / 3;
      s.part.push_back({pcx + a.part_rx * std::cos(th), pcy + a.part_ry * std::sin(th)});
    }
  } else {
    for (int k = 0; k < 10; ++k) {
      const double th = 2.0 * std::numbers::pi * k / 10;
      s.part.push_back({pcx + a.part_rx * std::cos(th), pcy + a.part_ry * std::sin(th)});
    }
  }
  const double bw = 0.02;
  const double cx = 0.5 + a.bar_dx, cy = 0.5 + a.bar_dy;
  const double ux = std::cos(a.bar_angle), uy = std::sin(a.bar_angle);
  const double hl = a.bar_length * 0.5;
  s.bar = {{cx - ux * hl - uy * bw, cy - uy * hl + ux * bw},
           {cx + ux * hl - uy * bw, cy + uy * hl + ux * bw},
           {cx + ux * hl + uy * bw, cy + uy * hl - ux * bw},
           {cx - ux * hl + uy * bw, cy - uy * hl - ux * bw}};
  return s;
}

// Resamples a closed polygon at roughly uniform arc-length spacing, starting
// at vertex `start`. Always includes the original corners. Returns a closed
// polyline (first point repeated at the end).
inline std::vector<Vec2> trace_closed(const std::vector<Vec2>& poly, std::size_t start,
                                      bool reverse, double spacing) {
  const std::size_t n = poly.size();
  std::vector<Vec2> order;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t idx = reverse ? (start + n - k) % n : (start + k) % n;
    order.push_back(poly[idx]);
  }
  order.push_back(order.front());
  std::vector<Vec2> out;
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    const Vec2 p = order[k], q = order[k + 1];
    const int steps = std::max(1, static_cast<int>(std::lround(std::hypot(q.x - p.x, q.y - p.y) / spacing)));
    for (int j = 0; j < steps; ++j) {
      const double t = static_cast<double>(j) / steps;
      out.push_back({p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)});
    }
  }
  out.push_back(order.back());
  return out;
}

}  // namespace detail

inline ClassTemplate class_template(std::uint64_t seed, int class_id) {
  std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(class_id), 0xC1A55ULL));
  ClassTemplate t;
  t.vertices = 3 + static_cast<int>(rng() % 6);
  for (int k = 0; k < t.vertices; ++k) t.radial.push_back(detail::uniform(rng, 0.75, 1.0));
  t.rx = detail::uniform(rng, 0.30, 0.42);
  t.ry = detail::uniform(rng, 0.26, 0.40);
  t.rotation = detail::uniform(rng, 0.0, 2.0 * std::numbers::pi);
  t.triangular_part = (rng() & 1ULL) != 0;
  return t;
}

inline InstanceAttributes instance_attributes(std::uint64_t seed, int class_id, int instance_id) {
  const ClassTemplate t = class_template(seed, class_id);
  std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(class_id),
                               static_cast<std::uint64_t>(instance_id), 0x1D5ULL));
  InstanceAttributes a;
  a.aspect = detail::uniform(rng, 0.8, 1.2);
  a.notch_edge = static_cast<int>(rng() % static_cast<std::uint64_t>(t.vertices));
  a.notch_pos = detail::uniform(rng, 0.3, 0.7);
  a.notch_depth = detail::uniform(rng, 0.06, 0.14);
  a.part_dx = detail::uniform(rng, -0.08, 0.08);
  a.part_dy = detail::uniform(rng, -0.08, 0.08);
  a.part_rx = detail::uniform(rng, 0.05, 0.12);
  a.part_ry = detail::uniform(rng, 0.05, 0.12);
  a.bar_angle = detail::uniform(rng, 0.0, std::numbers::pi);
  a.bar_length = detail::uniform(rng, 0.15, 0.35);
  a.bar_dx = detail::uniform(rng, -0.06, 0.06);
  a.bar_dy = detail::uniform(rng, -0.06, 0.06);
  return a;
}

/// Photo (filled parts) and `n_sketches` sparse noisy contour traces for one
/// instance. Deterministic in (seed, class_id, instance_id).
inline SyntheticPair generate_synthetic_pair(std::uint64_t seed, int class_id, int instance_id,
                                             int n_sketches = 3,
                                             const SyntheticConfig& cfg = {}) {
  require(n_sketches >= 1 && n_sketches <= 5, "sketches per instance must be in [1, 5]");
  const ClassTemplate tmpl = class_template(seed, class_id);
  SyntheticPair out;
  out.attributes = instance_attributes(seed, class_id, instance_id);
  const detail::Shapes shapes = detail::build_shapes(tmpl, out.attributes);
  const std::string pid = pair_name(class_id, instance_id);

  out.photo = RasterImage(cfg.photo_size);
  fill_polygon(out.photo, shapes.body, 0.55f);
  fill_polygon(out.photo, shapes.part, 0.2f);
  fill_polygon(out.photo, shapes.bar, 0.85f);
  detail::quantize8(out.photo);

  for (int k = 0; k < n_sketches; ++k) {
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(class_id),
                                 static_cast<std::uint64_t>(instance_id),
                                 static_cast<std::uint64_t>(k), 0x5CE7ULL));
    std::normal_distribution<double> noise(0.0, cfg.jitter);
    // Mild per-sketch affine distortion on top of per-point jitter.
    const double sx = detail::uniform(rng, 0.95, 1.05), sy = detail::uniform(rng, 0.95, 1.05);
    const double tx = detail::uniform(rng, -0.02, 0.02), ty = detail::uniform(rng, -0.02, 0.02);

    std::vector<std::vector<Vec2>> strokes;
    strokes.push_back(detail::trace_closed(shapes.body, rng() % shapes.body.size(), (rng() & 1ULL) != 0, 0.09));
    if (detail::uniform(rng, 0.0, 1.0) >= cfg.stroke_dropout)
      strokes.push_back(detail::trace_closed(shapes.part, rng() % shapes.part.size(), (rng() & 1ULL) != 0, 0.08));
    if (detail::uniform(rng, 0.0, 1.0) >= cfg.stroke_dropout)
      strokes.push_back(detail::trace_closed(shapes.bar, rng() % shapes.bar.size(), false, 0.1));

    SketchVector sk;
    sk.id = pid + "_s" + std::to_string(k);
    sk.pair_id = pid;
    for (std::size_t si = 0; si < strokes.size(); ++si) {
      const auto& st = strokes[si];
      for (std::size_t j = 0; j < st.size(); ++j) {
        const double x = std::clamp(0.5 + sx * (st[j].x - 0.5) + tx + noise(rng), 0.0, 1.0);
        const double y = std::clamp(0.5 + sy * (st[j].y - 0.5) + ty + noise(rng), 0.0, 1.0);
        const bool stroke_end = j + 1 == st.size();
        const bool sketch_end = stroke_end && si + 1 == strokes.size();
        sk.points.push_back(Point5::make(
            x, y, sketch_end ? PenState::kEnd : stroke_end ? PenState::kLift : PenState::kDown));
      }
    }
    out.sketches.push_back(std::move(sk));
  }
  return out;
}

// Photo of the silhouette only (body + parts as one mask), for IoU-style checks.
inline RasterImage silhouette_mask(std::uint64_t seed, int class_id, int instance_id, int size) {
  const detail::Shapes shapes =
      detail::build_shapes(class_template(seed, class_id), instance_attributes(seed, class_id, instance_id));
  RasterImage img(size);
  fill_polygon(img, shapes.body, 0.0f);
  return img;
}

}  // namespace sketchy
