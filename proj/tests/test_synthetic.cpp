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

#include <gtest/gtest.h>

#include <random>

#include "sketchy/raster.hpp"
#include "sketchy/synthetic.hpp"

namespace sketchy {
namespace {

// Filled first stroke (the body contour trace) of a sketch.
RasterImage filled_body(const SketchVector& s, int size) {
  const auto strokes = stroke_ranges(s);
  std::vector<Vec2> poly;
  for (std::size_t i = strokes[0].first; i < strokes[0].second; ++i) poly.push_back({s.points[i].x, s.points[i].y});
  RasterImage img(size);
  fill_polygon(img, poly, 0.0f);
  return img;
}

double iou(const RasterImage& a, const RasterImage& b) {
  std::size_t inter = 0, uni = 0;
  for (int r = 0; r < a.canvas; ++r)
    for (int c = 0; c < a.canvas; ++c) {
      const bool x = a.at(r, c) < 0.5f, y = b.at(r, c) < 0.5f;
      inter += x && y;
      uni += x || y;
    }
  return uni ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

TEST(Synthetic, Deterministic) {
  const auto a = generate_synthetic_pair(3, 2, 4, 3);
  const auto b = generate_synthetic_pair(3, 2, 4, 3);
  EXPECT_EQ(a.photo, b.photo);
  EXPECT_EQ(a.sketches, b.sketches);
  EXPECT_EQ(a.attributes, b.attributes);
  const auto c = generate_synthetic_pair(4, 2, 4, 3);
  EXPECT_NE(a.sketches, c.sketches);
}

TEST(Synthetic, SketchesAreValidAndLinked) {
  for (int n = 1; n <= 5; ++n) {
    const auto p = generate_synthetic_pair(0, 1, 2, n);
    ASSERT_EQ(p.sketches.size(), static_cast<std::size_t>(n));
    for (const auto& s : p.sketches) {
      EXPECT_TRUE(check_sketch(s).empty()) << check_sketch(s);
      EXPECT_EQ(s.pair_id, pair_name(1, 2));
    }
  }
  EXPECT_THROW(generate_synthetic_pair(0, 0, 0, 0), Error);
  EXPECT_THROW(generate_synthetic_pair(0, 0, 0, 6), Error);
}

TEST(Synthetic, PhotoIsDenseRgbGray) {
  const auto p = generate_synthetic_pair(0, 0, 0, 1);
  ASSERT_EQ(p.photo.canvas, 256);
  std::size_t ink = 0;
  for (int r = 0; r < 256; ++r)
    for (int c = 0; c < 256; ++c) {
      EXPECT_EQ(p.photo.at(r, c, 0), p.photo.at(r, c, 1));
      EXPECT_EQ(p.photo.at(r, c, 0), p.photo.at(r, c, 2));
      ink += p.photo.at(r, c) < 1.0f;
    }
  EXPECT_GT(ink, 256u * 256u / 10u);
}

TEST(Synthetic, InstancesDifferInAttributes) {
  for (int c = 0; c < 10; ++c)
    for (int i = 0; i + 1 < 10; ++i) {
      const auto a = instance_attributes(0, c, i), b = instance_attributes(0, c, i + 1);
      EXPECT_FALSE(a == b);
      EXPECT_NE(generate_synthetic_pair(0, c, i, 1).photo, generate_synthetic_pair(0, c, i + 1, 1).photo);
    }
}

TEST(Synthetic, StrokeDropoutRate) {
  // Body always drawn; part and bar each dropped with probability 0.2.
  std::size_t dropped = 0, total = 0;
  for (int c = 0; c < 20; ++c)
    for (int i = 0; i < 10; ++i)
      for (const auto& s : generate_synthetic_pair(0, c, i, 3).sketches) {
        dropped += 3 - stroke_ranges(s).size();
        total += 2;
      }
  const double rate = static_cast<double>(dropped) / static_cast<double>(total);
  EXPECT_NEAR(rate, 0.2, 0.05);
}

TEST(Synthetic, SketchMatchesOwnSilhouette) {
  std::mt19937_64 rng(0);
  int wins = 0;
  for (int t = 0; t < 100; ++t) {
    const int c = static_cast<int>(rng() % 20), i = static_cast<int>(rng() % 10);
    int j = static_cast<int>(rng() % 9);
    if (j >= i) ++j;
    const auto sk = generate_synthetic_pair(1, c, i, 1).sketches[0];
    const auto body = filled_body(sk, 128);
    wins += iou(body, silhouette_mask(1, c, i, 128)) > iou(body, silhouette_mask(1, c, j, 128));
  }
  EXPECT_GE(wins, 90);
}

}  // namespace
}  // namespace sketchy
