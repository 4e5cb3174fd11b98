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
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sketchy/checkpoint.hpp"
#include "sketchy/common.hpp"
#include "sketchy/encoder.hpp"
#include "sketchy/flops.hpp"
#include "sketchy/layers.hpp"
#include "sketchy/policy.hpp"
#include "sketchy/retrieval.hpp"

namespace sketchy {

// Encoder checkpoint: header carries the model spec and its hash; the loader
// recomputes the hash and the parameter count before accepting the payload.
inline void save_encoder(const std::string& path, const Encoder<float>& enc, const nlohmann::json& meta = {}) {
  nlohmann::json h = {{"kind", "encoder"},
                      {"spec", to_json(enc.spec())},
                      {"spec_hash", hex64(spec_hash(enc.spec()))},
                      {"dtype", "f32"},
                      {"meta", meta}};
  write_container(path, h, enc.params());
}

inline Encoder<float> load_encoder(const std::string& path, nlohmann::json* meta = nullptr) {
  const Container c = read_container(path);
  require(c.header.value("kind", "") == "encoder", "'" + path + "' is not an encoder checkpoint");
  ModelSpec spec;
  try {
    spec = model_from_json(c.header.at("spec"));
  } catch (const nlohmann::json::exception& e) {
    throw Error("'" + path + "': bad model spec: " + e.what());
  }
  require(c.header.value("spec_hash", "") == hex64(spec_hash(spec)), "'" + path + "': spec hash mismatch");
  Encoder<float> enc(spec);
  require(c.values.size() == enc.num_params(), "'" + path + "': parameter count does not match its spec");
  enc.copy_params_from(std::span<const float>(c.values));
  if (meta) *meta = c.header.value("meta", nlohmann::json::object());
  return enc;
}

inline std::string gallery_index_path(const std::string& path) { return path + ".index.json"; }

// Gallery: container with the embedding matrix plus an id-order sidecar.
inline void save_gallery(const std::string& path, const GalleryStore& g) {
  nlohmann::json h = {{"kind", "gallery"},
                      {"dim", g.dim},
                      {"count", g.size()},
                      {"encoder_hash", hex64(g.encoder_hash)},
                      {"dtype", "f32"}};
  write_container(path, h, g.values);
  std::ofstream os(gallery_index_path(path), std::ios::trunc);
  require(static_cast<bool>(os), "cannot write '" + gallery_index_path(path) + "'");
  os << nlohmann::json({{"ids", g.ids}, {"encoder_hash", hex64(g.encoder_hash)}}).dump(1) << '\n';
}

inline GalleryStore load_gallery(const std::string& path) {
  const Container c = read_container(path);
  require(c.header.value("kind", "") == "gallery", "'" + path + "' is not a gallery");
  std::ifstream is(gallery_index_path(path));
  require(static_cast<bool>(is), "missing artifact '" + gallery_index_path(path) + "'");
  nlohmann::json idx;
  try {
    idx = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed gallery index '" + gallery_index_path(path) + "': " + e.what());
  }
  GalleryStore g;
  g.dim = c.header.at("dim").get<int>();
  const auto ids = idx.at("ids").get<std::vector<std::string>>();
  const std::string hash = c.header.value("encoder_hash", "");
  require(idx.value("encoder_hash", "") == hash, "'" + path + "': sidecar belongs to a different gallery");
  g.encoder_hash = std::stoull(hash, nullptr, 16);
  require(c.values.size() == ids.size() * static_cast<std::size_t>(g.dim), "'" + path + "': size mismatch");
  for (std::size_t i = 0; i < ids.size(); ++i)
    g.add(ids[i], std::span<const float>(c.values.data() + i * g.dim, static_cast<std::size_t>(g.dim)));
  return g;
}

inline void save_policy(const std::string& path, const PolicyParams<float>& p, const nlohmann::json& meta = {}) {
  const ModelSpec spec = selector_spec(p.hidden(), p.canvases());
  nlohmann::json h = {{"kind", "policy"},
                      {"spec", to_json(spec)},
                      {"spec_hash", hex64(spec_hash(spec))},
                      {"hidden", p.hidden()},
                      {"canvases", p.canvases()},
                      {"dtype", "f32"},
                      {"meta", meta}};
  write_container(path, h, p.values());
}

inline PolicyParams<float> load_policy(const std::string& path, nlohmann::json* meta = nullptr) {
  const Container c = read_container(path);
  require(c.header.value("kind", "") == "policy", "'" + path + "' is not a policy checkpoint");
  const int hidden = c.header.at("hidden").get<int>();
  const int K = c.header.at("canvases").get<int>();
  const ModelSpec spec = selector_spec(hidden, K);
  require(c.header.value("spec_hash", "") == hex64(spec_hash(spec)), "'" + path + "': spec hash mismatch");
  PolicyParams<float> p(hidden, K);
  require(c.values.size() == p.total(), "'" + path + "': parameter count mismatch");
  std::copy(c.values.begin(), c.values.end(), p.values().begin());
  if (meta) *meta = c.header.value("meta", nlohmann::json::object());
  return p;
}

inline void save_flops_table(const std::string& path, const FlopsTable& t) {
  std::ofstream os(path, std::ios::trunc);
  require(static_cast<bool>(os), "cannot write '" + path + "'");
  os << to_json(t).dump(2) << '\n';
}

inline FlopsTable load_flops_table(const std::string& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), "missing artifact '" + path + "'");
  try {
    return flops_table_from_json(nlohmann::json::parse(is));
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed FLOPs table '" + path + "': " + e.what());
  }
}

}  // namespace sketchy
