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

#include <string>
#include <utility>
#include <vector>

#include "sketchy/layers.hpp"

namespace sketchy {

namespace detail {

inline LayerSpec conv_layer(int out, int k, int s, int p) {
  LayerSpec L;
  L.kind = LayerKind::kConv;
  L.kernel = k;
  L.stride = s;
  L.padding = p;
  L.out_channels = out;
  L.bias = true;
  return L;
}

inline LayerSpec depthwise_layer(int k, int s, int p) {
  LayerSpec L;
  L.kind = LayerKind::kDepthwiseConv;
  L.kernel = k;
  L.stride = s;
  L.padding = p;
  L.bias = true;
  return L;
}

inline LayerSpec relu_layer() {
  LayerSpec L;
  L.kind = LayerKind::kActivation;
  return L;
}

inline LayerSpec gap_layer() {
  LayerSpec L;
  L.kind = LayerKind::kPooling;
  L.global = true;
  return L;
}

}  // namespace detail

// A 4x4/2 stem followed by six plain 3x3 conv blocks. The last conv is
// linear so pooled features can take either sign.
inline ModelSpec default_teacher(int embed_dim = 64) {
  using namespace detail;
  ModelSpec s;
  s.name = "teacher";
  s.role = "teacher";
  s.input_channels = 3;
  s.embed_dim = embed_dim;
  const std::vector<std::pair<int, int>> blocks = {{16, 2}, {32, 2}, {64, 2}, {128, 2}, {192, 2}, {embed_dim, 1}};
  s.layers.push_back(conv_layer(8, 4, 2, 1));
  s.layers.push_back(relu_layer());
  for (auto [out, stride] : blocks) {
    s.layers.push_back(conv_layer(out, 3, stride, 1));
    s.layers.push_back(relu_layer());
  }
  s.layers.pop_back();
  s.layers.push_back(gap_layer());
  return s;
}

// A 4x4/2 conv stem, then depthwise-separable blocks (3x3 depthwise, then
// pointwise + ReLU). Stages of 16, 32 and 64 channels hold a stride-2 and a
// stride-1 block each; a stride-2 block to 128 and a linear stride-2 block to
// embed_dim close it.
inline ModelSpec default_student(int embed_dim = 64) {
  using namespace detail;
  ModelSpec s;
  s.name = "student";
  s.role = "student";
  s.input_channels = 3;
  s.embed_dim = embed_dim;
  s.layers.push_back(conv_layer(8, 4, 2, 1));
  s.layers.push_back(relu_layer());
  const std::vector<std::pair<int, int>> blocks = {{16, 2}, {16, 1}, {32, 2},  {32, 1},
                                                   {64, 2}, {64, 1}, {128, 2}, {embed_dim, 2}};
  for (auto [out, stride] : blocks) {
    s.layers.push_back(depthwise_layer(3, stride, 1));
    s.layers.push_back(conv_layer(out, 1, 1, 0));
    s.layers.push_back(relu_layer());
  }
  s.layers.pop_back();
  s.layers.push_back(gap_layer());
  return s;
}

}  // namespace sketchy
