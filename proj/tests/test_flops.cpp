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

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sketchy/flops.hpp"
#include "sketchy/models.hpp"

namespace sketchy {
namespace {

std::string spec_path(const std::string& name) { return std::string(SKETCHY_DATA_DIR) + "/specs/" + name + ".json"; }

LayerSpec conv(int out, int k, int s, int p, bool bias = true) {
  LayerSpec L;
  L.kind = LayerKind::kConv;
  L.out_channels = out;
  L.kernel = k;
  L.stride = s;
  L.padding = p;
  L.bias = bias;
  return L;
}

ModelSpec single(LayerSpec L, int in_ch) {
  ModelSpec m;
  m.name = "one";
  m.input_channels = in_ch;
  m.layers = {L};
  return m;
}

TEST(LayerCost, ConvByHand) {
  // 3x3, 3->8, pad 1 on 8x8: 9*3*8 MACs per output pixel, 64 pixels
  const auto r = profile_model(single(conv(8, 3, 1, 1), 3), 8);
  EXPECT_DOUBLE_EQ(r.total_flops, 2.0 * 9 * 3 * 8 * 64);
  EXPECT_EQ(r.total_params, 9 * 3 * 8 + 8);
  EXPECT_EQ(r.output.channels, 8);
  EXPECT_EQ(r.output.height, 8);
}

TEST(LayerCost, StridedConvShape) {
  const auto r = profile_model(single(conv(4, 4, 2, 1, false), 1), 32);
  EXPECT_EQ(r.output.height, 16);
  EXPECT_DOUBLE_EQ(r.total_flops, 2.0 * 16 * 4 * 16 * 16);
  EXPECT_EQ(r.total_params, 16 * 4);
}

TEST(LayerCost, DepthwiseByHand) {
  LayerSpec L;
  L.kind = LayerKind::kDepthwiseConv;
  L.kernel = 3;
  L.stride = 2;
  L.padding = 1;
  const auto r = profile_model(single(L, 16), 16);
  EXPECT_EQ(r.output.channels, 16);
  EXPECT_EQ(r.output.height, 8);
  EXPECT_DOUBLE_EQ(r.total_flops, 2.0 * 9 * 16 * 64);
  EXPECT_EQ(r.total_params, 9 * 16);
}

TEST(LayerCost, ElementwiseAndPooling) {
  ModelSpec m;
  m.name = "ew";
  m.input_channels = 4;
  LayerSpec act, norm, gap;
  act.kind = LayerKind::kActivation;
  norm.kind = LayerKind::kNorm;
  gap.kind = LayerKind::kPooling;
  gap.global = true;
  m.layers = {norm, act, gap};
  const auto r = profile_model(m, 5);
  ASSERT_EQ(r.layers.size(), 3u);
  EXPECT_DOUBLE_EQ(r.layers[0].flops, 4.0 * 100);
  EXPECT_EQ(r.layers[0].params, 8);
  EXPECT_DOUBLE_EQ(r.layers[1].flops, 2.0 * 100);
  EXPECT_DOUBLE_EQ(r.layers[2].flops, 2.0 * 100);
  EXPECT_EQ(r.output.channels, 4);
  EXPECT_EQ(r.output.height, 1);
}

TEST(LayerCost, LinearByHand) {
  LayerSpec L;
  L.kind = LayerKind::kLinear;
  L.out_channels = 4;
  L.bias = true;
  const auto r = profile_model(single(L, 128), 1);
  EXPECT_DOUBLE_EQ(r.total_flops, 2.0 * 128 * 4);
  EXPECT_EQ(r.total_params, 128 * 4 + 4);
}

TEST(LayerCost, InvalidShapesThrow) {
  EXPECT_THROW(profile_model(single(conv(8, 5, 1, 0), 3), 4), Error);
  EXPECT_THROW(profile_model(single(conv(8, 2, 3, 0), 3), 16), Error);
  EXPECT_THROW(profile_model(single(conv(0, 3, 1, 1), 3), 16), Error);
  // even sizes: (1 - 2) / 2 truncates to 0, which must not pass as a 1x1 output
  EXPECT_THROW(profile_model(single(conv(8, 2, 2, 0), 3), 1), Error);
  LayerSpec pool;
  pool.kind = LayerKind::kPooling;
  pool.kernel = 2;
  pool.stride = 2;
  EXPECT_THROW(profile_model(single(pool, 3), 1), Error);
  EXPECT_EQ(profile_model(single(pool, 3), 3).output.height, 1);
  EXPECT_THROW(profile_model(load_model_spec(std::string(SKETCHY_DATA_DIR) + "/specs/vgg16.json"), 16), Error);
  // 1x1 projections may downsample
  EXPECT_NO_THROW(profile_model(single(conv(8, 1, 2, 0), 3), 16));
  try {
    profile_model(single(conv(8, 5, 1, 0), 3), 4);
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("layer 0"), std::string::npos);
  }
}

TEST(Selector, ParameterCountExact) {
  const ModelSpec sel = selector_spec(128, 4, 100);
  const auto r = profile_model(sel, 1, 100);
  ASSERT_EQ(r.layers.size(), 2u);
  EXPECT_EQ(r.layers[0].params, 51840);
  EXPECT_EQ(r.layers[1].params, 128 * 4 + 4);
}

TEST(Selector, FlopsLinearInSteps) {
  const ModelSpec sel = selector_spec();
  const double per_step = 2.0 * 3 * (5 + 128) * 128;
  const double head = 2.0 * 128 * 4;
  EXPECT_DOUBLE_EQ(selector_flops(sel, 1), per_step + head);
  EXPECT_DOUBLE_EQ(selector_flops(sel, 100), 100 * per_step + head);
  EXPECT_DOUBLE_EQ(selector_flops(sel, 0), selector_flops(sel, 1));
  const double g = selector_flops(sel, 100) / 1e9;
  EXPECT_GE(g, 0.008);
  EXPECT_LE(g, 0.025);
}

TEST(Selector, StoredSpecMatchesBuilder) {
  const ModelSpec stored = load_model_spec(spec_path("canvas-selector"));
  EXPECT_EQ(count_params(stored), count_params(selector_spec()));
  EXPECT_DOUBLE_EQ(profile_model(stored, 1, 100).total_flops, selector_flops(selector_spec(), 100));
}

// Independently known trunk parameter counts (classifier heads removed).
TEST(ReferenceSpecs, FrozenParameterCounts) {
  EXPECT_EQ(count_params(load_model_spec(spec_path("vgg16"))), 14714688);
  EXPECT_EQ(count_params(load_model_spec(spec_path("resnet18"))), 11176512);
  EXPECT_EQ(count_params(load_model_spec(spec_path("mobilenetv2"))), 2223872);
}

TEST(ReferenceSpecs, WithinGoldenTolerance) {
  std::ifstream in(std::string(SKETCHY_DATA_DIR) + "/golden/reference_costs.json");
  ASSERT_TRUE(in.good());
  const auto golden = nlohmann::json::parse(in);
  const int side = golden.at("input_side").get<int>();
  for (const auto& m : golden.at("models")) {
    const auto r = profile_model(load_model_spec(spec_path(m.at("spec"))), side);
    const double f = m.at("flops").get<double>(), p = m.at("params").get<double>();
    EXPECT_LE(std::abs(r.total_flops - f) / f, m.at("flops_rtol").get<double>()) << m.at("spec");
    EXPECT_LE(std::abs(static_cast<double>(r.total_params) - p) / p, m.at("params_rtol").get<double>())
        << m.at("spec");
  }
}

TEST(ReferenceSpecs, FrozenFlops) {
  EXPECT_NEAR(profile_model(load_model_spec(spec_path("vgg16")), 256).total_flops, 40140603392.0, 1.0);
  EXPECT_NEAR(profile_model(load_model_spec(spec_path("resnet18")), 224).total_flops / 1e9, 3.643, 5e-4);
}

TEST(ReferenceSpecs, JsonRoundTrip) {
  for (const char* n : {"vgg16", "resnet18", "mobilenetv2", "canvas-selector"}) {
    const ModelSpec s = load_model_spec(spec_path(n));
    const ModelSpec t = model_from_json(to_json(s));
    EXPECT_EQ(spec_hash(s), spec_hash(t)) << n;
    EXPECT_EQ(count_params(s), count_params(t)) << n;
  }
}

TEST(CanvasTable, StudentRatioAndMonotone) {
  const CanvasSet cs({32, 64, 128, 256});
  for (const ModelSpec& m : {default_student(), default_teacher()}) {
    const FlopsTable t = precompute_canvas_flops(m, cs);
    for (std::size_t i = 1; i < t.size(); ++i) EXPECT_GT(t.q[i], t.q[i - 1]) << m.name;
  }
  const FlopsTable s = precompute_canvas_flops(default_student(), cs);
  EXPECT_NEAR(s.at_canvas(256) / s.at_canvas(32), 63.6, 6.36);
}

TEST(DefaultModels, SizeRelations) {
  const ModelSpec t = default_teacher(), s = default_student();
  EXPECT_GE(static_cast<double>(count_params(t)) / static_cast<double>(count_params(s)), 10.0);
  EXPECT_LT(profile_model(s, 256).total_flops, profile_model(t, 256).total_flops);
  EXPECT_EQ(profile_model(t, 256).output.channels, 64);
  EXPECT_EQ(profile_model(s, 256).output.channels, 64);
  EXPECT_EQ(profile_model(s, 32).output.height, 1);
}

TEST(CanvasTable, ValidationAndLookup) {
  FlopsTable t{{32, 64}, {5.0, 5.0}};
  EXPECT_THROW(validate_table(t), Error);
  t.q = {5.0};
  EXPECT_THROW(validate_table(t), Error);
  t = {{32, 64}, {1.0, 3.0}};
  EXPECT_NO_THROW(validate_table(t));
  EXPECT_DOUBLE_EQ(t.at_canvas(64), 3.0);
  EXPECT_THROW(t.at_canvas(128), Error);
  EXPECT_EQ(flops_table_from_json(to_json(t)), t);
}

TEST(AverageFlops, ByHand) {
  const ModelSpec sel = selector_spec(128, 2, 100);
  const FlopsTable t{{32, 64}, {1000.0, 4000.0}};
  const std::vector<QueryCost> qs = {{10, 0}, {20, 1}};
  const double expect = (selector_flops(sel, 10) + 1000.0 + selector_flops(sel, 20) + 4000.0) / 2;
  EXPECT_DOUBLE_EQ(average_flops_metric(sel, t, qs), expect);
  EXPECT_THROW(average_flops_metric(sel, t, std::vector<QueryCost>{}), Error);
  EXPECT_THROW(average_flops_metric(sel, t, std::vector<QueryCost>{{1, 2}}), Error);
}

TEST(Report, FormatSi) {
  EXPECT_EQ(format_si(40.1406e9), "40.141G");
  EXPECT_EQ(format_si(2.2239e6), "2.224M");
  EXPECT_EQ(format_si(516), "516");
  EXPECT_EQ(format_si(1500), "1.50K");
}

TEST(Report, CsvHasTotalRow) {
  std::ostringstream os;
  write_report_csv(os, profile_model(default_student(), 64));
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("layer,kind", 0), 0u);
  EXPECT_NE(s.find("\ntotal,"), std::string::npos);
}

}  // namespace
}  // namespace sketchy
