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

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sketchy/common.hpp"

namespace sketchy {

enum class LayerKind {
  kConv,
  kDepthwiseConv,
  kLinear,
  kRecurrentGated,
  kPooling,
  kActivation,
  kNorm,
};

inline const char* to_string(LayerKind k) {
  switch (k) {
    case LayerKind::kConv: return "conv";
    case LayerKind::kDepthwiseConv: return "depthwise-conv";
    case LayerKind::kLinear: return "linear";
    case LayerKind::kRecurrentGated: return "recurrent-gated";
    case LayerKind::kPooling: return "pooling";
    case LayerKind::kActivation: return "activation";
    case LayerKind::kNorm: return "norm";
  }
  return "?";
}

inline LayerKind layer_kind_from_string(const std::string& s) {
  for (LayerKind k : {LayerKind::kConv, LayerKind::kDepthwiseConv, LayerKind::kLinear,
                      LayerKind::kRecurrentGated, LayerKind::kPooling, LayerKind::kActivation,
                      LayerKind::kNorm})
    if (s == to_string(k)) return k;
  throw Error("unknown layer kind '" + s + "'");
}

// One layer of a sequential model. Channel counts of 0 mean "inherit from the
// incoming shape". `fork` saves the incoming shape before this layer;
// `branch` layers run on the saved shape (chained among themselves) without
// changing the main flow, which is how residual projection shortcuts are
// described.
struct LayerSpec {
  LayerKind kind = LayerKind::kConv;
  int kernel = 1;
  int stride = 1;
  int padding = 0;
  int in_channels = 0;
  int out_channels = 0;
  int hidden = 0;
  int steps = 1;
  bool bias = false;
  bool global = false;
  bool fork = false;
  bool branch = false;

  bool operator==(const LayerSpec&) const = default;
};

struct ModelSpec {
  std::string name;
  std::string role;  // "teacher" | "student" | "selector" | "reference"
  int input_channels = 3;
  int embed_dim = 0;
  std::vector<LayerSpec> layers;

  bool operator==(const ModelSpec&) const = default;
};

// Feature-map (or vector / sequence) shape flowing between layers.
struct Shape {
  int channels = 0;
  int height = 1;
  int width = 1;
  long long numel() const { return static_cast<long long>(channels) * height * width; }
  bool operator==(const Shape&) const = default;
};

struct LayerCost {
  double flops = 0.0;
  long long params = 0;
  Shape out;
};

namespace detail {

// 0 when the window does not fit (plain division would truncate -1/2 to 0).
inline int conv_out(int in, int k, int s, int p) {
  const int span = in + 2 * p - k;
  return span < 0 ? 0 : span / s + 1;
}

}  // namespace detail

/// FLOPs are 2 x MAC-equivalents. Conv/linear/recurrent count their
/// multiply-accumulates (bias adds excluded); a norm layer counts 4 per
/// element, an activation 2 per element, pooling 2 per input element.
/// Parameters include biases and affine norm scale/shift.
inline LayerCost flops_of_layer(const LayerSpec& L, const Shape& in) {
  auto positive = [&](int v, const char* what) {
    require(v > 0, std::string(to_string(L.kind)) + ": " + what + " must be positive");
  };
  LayerCost cost;
  switch (L.kind) {
    case LayerKind::kConv:
    case LayerKind::kDepthwiseConv: {
      positive(L.kernel, "kernel");
      positive(L.stride, "stride");
      require(L.padding >= 0, "conv: padding must be non-negative");
      // 1x1 projection shortcuts downsample with stride 2
      require(L.stride <= L.kernel || L.kernel == 1, "conv: stride larger than kernel");
      require(L.in_channels == 0 || L.in_channels == in.channels,
              "conv: declared in_channels " + std::to_string(L.in_channels) +
                  " does not match incoming " + std::to_string(in.channels));
      const int ho = detail::conv_out(in.height, L.kernel, L.stride, L.padding);
      const int wo = detail::conv_out(in.width, L.kernel, L.stride, L.padding);
      require(ho >= 1 && wo >= 1, "conv: input " + std::to_string(in.height) + "x" +
                                      std::to_string(in.width) + " too small for kernel");
      const long long k2 = static_cast<long long>(L.kernel) * L.kernel;
      if (L.kind == LayerKind::kConv) {
        positive(L.out_channels, "out_channels");
        cost.out = {L.out_channels, ho, wo};
        const double mac = static_cast<double>(k2) * in.channels * L.out_channels * ho * wo;
        cost.flops = 2.0 * mac;
        cost.params = k2 * in.channels * L.out_channels + (L.bias ? L.out_channels : 0);
      } else {
        require(L.out_channels == 0 || L.out_channels == in.channels,
                "depthwise-conv: out_channels must equal in_channels");
        cost.out = {in.channels, ho, wo};
        cost.flops = 2.0 * static_cast<double>(k2) * in.channels * ho * wo;
        cost.params = k2 * in.channels + (L.bias ? in.channels : 0);
      }
      break;
    }
    case LayerKind::kLinear: {
      positive(L.out_channels, "out_channels");
      const long long n_in = in.numel();
      require(L.in_channels == 0 || L.in_channels == n_in, "linear: input width mismatch");
      cost.out = {L.out_channels, 1, 1};
      cost.flops = 2.0 * static_cast<double>(n_in) * L.out_channels;
      cost.params = n_in * L.out_channels + (L.bias ? L.out_channels : 0);
      break;
    }
    case LayerKind::kRecurrentGated: {
      positive(L.hidden, "hidden");
      positive(L.steps, "steps");
      const long long n_in = in.channels;
      require(L.in_channels == 0 || L.in_channels == n_in, "recurrent-gated: input width mismatch");
      const long long h = L.hidden;
      cost.out = {L.hidden, 1, 1};
      cost.flops = 2.0 * 3.0 * static_cast<double>(n_in + h) * h * L.steps;
      cost.params = 3 * ((n_in + h) * h + 2 * h);
      break;
    }
    case LayerKind::kPooling: {
      cost.flops = 2.0 * static_cast<double>(in.numel());
      if (L.global) {
        cost.out = {in.channels, 1, 1};
      } else {
        positive(L.kernel, "kernel");
        positive(L.stride, "stride");
        const int ho = detail::conv_out(in.height, L.kernel, L.stride, L.padding);
        const int wo = detail::conv_out(in.width, L.kernel, L.stride, L.padding);
        require(ho >= 1 && wo >= 1, "pooling: input too small");
        cost.out = {in.channels, ho, wo};
      }
      break;
    }
    case LayerKind::kActivation:
      cost.out = in;
      cost.flops = 2.0 * static_cast<double>(in.numel());
      break;
    case LayerKind::kNorm:
      cost.out = in;
      cost.flops = 2.0 * 2.0 * static_cast<double>(in.numel());
      cost.params = 2LL * in.channels;
      break;
  }
  return cost;
}

struct LayerReport {
  std::size_t index = 0;
  LayerKind kind = LayerKind::kConv;
  Shape in;
  Shape out;
  double flops = 0.0;
  long long params = 0;
};

struct ProfileReport {
  std::string model;
  int input_side = 0;
  int steps = 0;
  std::vector<LayerReport> layers;
  double total_flops = 0.0;
  long long total_params = 0;
  Shape output;
};

/// Walks the layer list from a (input_channels, side, side) input. For
/// sequence models pass `steps` > 0; recurrent layers then use it in place
/// of their declared step count.
inline ProfileReport profile_model(const ModelSpec& spec, int input_side, int steps = 0) {
  require(!spec.layers.empty(), "profile_model: spec '" + spec.name + "' has no layers");
  require(input_side >= 1, "profile_model: input side must be positive");
  ProfileReport rep;
  rep.model = spec.name;
  rep.input_side = input_side;
  rep.steps = steps;
  Shape flow{spec.input_channels, input_side, input_side};
  Shape saved = flow, branch = flow;
  bool in_branch = false;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    LayerSpec L = spec.layers[i];
    if (steps > 0 && L.kind == LayerKind::kRecurrentGated) L.steps = steps;
    if (L.fork) saved = flow;
    Shape in;
    if (L.branch) {
      in = in_branch ? branch : saved;
    } else {
      in = flow;
    }
    LayerCost c;
    try {
      c = flops_of_layer(L, in);
    } catch (const Error& e) {
      throw Error("layer " + std::to_string(i) + " of '" + spec.name + "': " + e.what());
    }
    if (L.branch) {
      branch = c.out;
      in_branch = true;
    } else {
      flow = c.out;
      in_branch = false;
    }
    rep.layers.push_back({i, L.kind, in, c.out, c.flops, c.params});
    rep.total_flops += c.flops;
    rep.total_params += c.params;
  }
  rep.output = flow;
  return rep;
}

inline long long count_params(const ModelSpec& spec) {
  // Parameter counts do not depend on resolution; profile at a size every
  // reference model accepts.
  return profile_model(spec, 256, 1).total_params;
}

// ---------------------------------------------------------------------------
// JSON (de)serialization.

inline nlohmann::json to_json(const LayerSpec& L) {
  nlohmann::json j;
  j["kind"] = to_string(L.kind);
  switch (L.kind) {
    case LayerKind::kConv:
    case LayerKind::kDepthwiseConv:
      j["kernel"] = L.kernel;
      j["stride"] = L.stride;
      j["padding"] = L.padding;
      if (L.in_channels) j["in"] = L.in_channels;
      if (L.out_channels) j["out"] = L.out_channels;
      j["bias"] = L.bias;
      break;
    case LayerKind::kLinear:
      if (L.in_channels) j["in"] = L.in_channels;
      j["out"] = L.out_channels;
      j["bias"] = L.bias;
      break;
    case LayerKind::kRecurrentGated:
      if (L.in_channels) j["in"] = L.in_channels;
      j["hidden"] = L.hidden;
      j["steps"] = L.steps;
      break;
    case LayerKind::kPooling:
      if (L.global) {
        j["global"] = true;
      } else {
        j["kernel"] = L.kernel;
        j["stride"] = L.stride;
        j["padding"] = L.padding;
      }
      break;
    case LayerKind::kActivation:
    case LayerKind::kNorm:
      break;
  }
  if (L.fork) j["fork"] = true;
  if (L.branch) j["branch"] = true;
  return j;
}

inline LayerSpec layer_from_json(const nlohmann::json& j) {
  require(j.is_object() && j.contains("kind"), "layer spec must be an object with a 'kind'");
  LayerSpec L;
  L.kind = layer_kind_from_string(j.at("kind").get<std::string>());
  L.kernel = j.value("kernel", 1);
  L.stride = j.value("stride", 1);
  L.padding = j.value("padding", 0);
  L.in_channels = j.value("in", 0);
  L.out_channels = j.value("out", 0);
  L.hidden = j.value("hidden", 0);
  L.steps = j.value("steps", 1);
  L.bias = j.value("bias", false);
  L.global = j.value("global", false);
  L.fork = j.value("fork", false);
  L.branch = j.value("branch", false);
  return L;
}

inline nlohmann::json to_json(const ModelSpec& s) {
  nlohmann::json j;
  j["name"] = s.name;
  j["role"] = s.role;
  j["input_channels"] = s.input_channels;
  j["embed_dim"] = s.embed_dim;
  j["layers"] = nlohmann::json::array();
  for (const auto& L : s.layers) j["layers"].push_back(to_json(L));
  return j;
}

inline ModelSpec model_from_json(const nlohmann::json& j) {
  require(j.is_object(), "model spec must be a JSON object");
  require(j.contains("layers") && j["layers"].is_array(), "model spec needs a 'layers' array");
  ModelSpec s;
  s.name = j.value("name", std::string("unnamed"));
  s.role = j.value("role", std::string("reference"));
  s.input_channels = j.value("input_channels", 3);
  s.embed_dim = j.value("embed_dim", 0);
  for (const auto& l : j["layers"]) s.layers.push_back(layer_from_json(l));
  return s;
}

inline ModelSpec load_model_spec(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open spec file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed spec file '" + path + "': " + e.what());
  }
  try {
    return model_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed spec file '" + path + "': " + e.what());
  }
}

inline std::uint64_t spec_hash(const ModelSpec& s) { return fnv1a(to_json(s).dump()); }

}  // namespace sketchy
