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
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "sketchy/common.hpp"
#include "sketchy/png.hpp"
#include "sketchy/raster.hpp"
#include "sketchy/sketch_io.hpp"
#include "sketchy/synthetic.hpp"

namespace sketchy {

struct Photo {
  std::string pair_id;
  int class_id = 0;
  int instance_id = 0;
  bool test = false;
  RasterImage image;
};

// Sketches reference photos by index. Split is per instance: the last
// ceil(test_fraction * instances) instances of every class are held out, so
// test sketches are matched against unseen photos.
struct Dataset {
  std::vector<Photo> photos;
  std::vector<SketchVector> sketches;
  std::vector<std::size_t> sketch_photo;

  std::vector<std::size_t> photo_indices(bool test) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < photos.size(); ++i)
      if (photos[i].test == test) out.push_back(i);
    return out;
  }
  std::vector<std::size_t> sketch_indices(bool test) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < sketches.size(); ++i)
      if (photos[sketch_photo[i]].test == test) out.push_back(i);
    return out;
  }
};

inline int test_instances(const SyntheticConfig& cfg) {
  const int n = static_cast<int>(std::ceil(cfg.test_fraction * cfg.instances - 1e-9));
  return std::clamp(n, 1, cfg.instances - 1);
}

inline Dataset make_synthetic_dataset(const SyntheticConfig& cfg) {
  require(cfg.classes >= 1, "dataset needs at least one class");
  require(cfg.instances >= 2, "dataset needs at least two instances per class");
  Dataset d;
  const int n_test = test_instances(cfg);
  for (int c = 0; c < cfg.classes; ++c) {
    for (int i = 0; i < cfg.instances; ++i) {
      SyntheticPair p = generate_synthetic_pair(cfg.seed, c, i, cfg.sketches_per_instance, cfg);
      Photo ph;
      ph.pair_id = pair_name(c, i);
      ph.class_id = c;
      ph.instance_id = i;
      ph.test = i >= cfg.instances - n_test;
      ph.image = std::move(p.photo);
      const std::size_t idx = d.photos.size();
      d.photos.push_back(std::move(ph));
      for (auto& s : p.sketches) {
        d.sketches.push_back(std::move(s));
        d.sketch_photo.push_back(idx);
      }
    }
  }
  return d;
}

// Layout: <dir>/sketches.ndjson, <dir>/photos/<pair_id>.png, <dir>/index.json.
inline void save_dataset(const Dataset& d, const std::string& dir, const nlohmann::json& meta = {}) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "photos", ec);
  require(!ec, "cannot create dataset directory '" + dir + "': " + ec.message());
  save_ndjson((fs::path(dir) / "sketches.ndjson").string(), d.sketches);
  nlohmann::json photos = nlohmann::json::array();
  for (const auto& p : d.photos) {
    const std::string rel = "photos/" + p.pair_id + ".png";
    write_png((fs::path(dir) / rel).string(), p.image);
    photos.push_back({{"pair_id", p.pair_id},
                      {"file", rel},
                      {"class", p.class_id},
                      {"instance", p.instance_id},
                      {"split", p.test ? "test" : "train"}});
  }
  nlohmann::json index = {{"version", 1}, {"meta", meta}, {"photos", photos}};
  std::ofstream os(fs::path(dir) / "index.json", std::ios::trunc);
  require(static_cast<bool>(os), "cannot write index in '" + dir + "'");
  os << index.dump(2) << '\n';
}

inline Dataset load_dataset(const std::string& dir, NdjsonStats* stats = nullptr) {
  namespace fs = std::filesystem;
  const fs::path ipath = fs::path(dir) / "index.json";
  std::ifstream is(ipath);
  require(static_cast<bool>(is), "missing artifact '" + ipath.string() + "' (run gen-data first)");
  nlohmann::json index;
  try {
    index = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed dataset index '" + ipath.string() + "': " + e.what());
  }
  Dataset d;
  std::map<std::string, std::size_t> by_id;
  try {
    for (const auto& j : index.at("photos")) {
      Photo p;
      p.pair_id = j.at("pair_id").get<std::string>();
      p.class_id = j.at("class").get<int>();
      p.instance_id = j.at("instance").get<int>();
      p.test = j.at("split").get<std::string>() == "test";
      p.image = read_png((fs::path(dir) / j.at("file").get<std::string>()).string());
      require(by_id.emplace(p.pair_id, d.photos.size()).second, "duplicate pair_id '" + p.pair_id + "'");
      d.photos.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed dataset index '" + ipath.string() + "': " + e.what());
  }
  for (auto& s : load_ndjson((fs::path(dir) / "sketches.ndjson").string(), stats)) {
    const auto it = by_id.find(s.pair_id);
    require(it != by_id.end(), "sketch '" + s.id + "' references unknown pair_id '" + s.pair_id + "'");
    d.sketch_photo.push_back(it->second);
    d.sketches.push_back(std::move(s));
  }
  return d;
}

}  // namespace sketchy
