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
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"
#include "sketchy/common.hpp"
#include "sketchy/sketch.hpp"

namespace sketchy {

struct NdjsonStats {
  std::size_t records = 0;
  std::size_t skipped = 0;
  std::size_t rescaled = 0;
};

namespace detail {

// Min-max normalization into the unit square; one scale for both axes so
// the aspect ratio survives.
inline void rescale_unit(SketchVector& s) {
  double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
  for (const auto& p : s.points) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const double span = std::max(x1 - x0, y1 - y0);
  const double inv = span > 0 ? 1.0 / span : 0.0;
  for (auto& p : s.points) {
    p.x = (p.x - x0) * inv;
    p.y = (p.y - y0) * inv;
  }
}

}  // namespace detail

inline nlohmann::json to_json(const SketchVector& s) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : s.points) pts.push_back({p.x, p.y, p.q1, p.q2, p.q3});
  return {{"id", s.id}, {"pair_id", s.pair_id}, {"points", pts}};
}

inline std::string to_ndjson_line(const SketchVector& s) { return to_json(s).dump(); }

inline void save_ndjson(const std::string& path, const std::vector<SketchVector>& sketches) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(os), "cannot write '" + path + "'");
  for (const auto& s : sketches) os << to_ndjson_line(s) << '\n';
  require(static_cast<bool>(os), "failed writing '" + path + "'");
}

/// Parses stroke-5 NDJSON. Malformed JSON or missing fields raise with the
/// line number; records that violate sketch invariants are skipped.
inline std::vector<SketchVector> load_ndjson(const std::string& path, NdjsonStats* stats = nullptr) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), "missing artifact '" + path + "'");
  NdjsonStats st;
  std::vector<SketchVector> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    SketchVector s;
    try {
      const auto j = nlohmann::json::parse(line);
      s.id = j.at("id").get<std::string>();
      s.pair_id = j.at("pair_id").get<std::string>();
      for (const auto& t : j.at("points")) {
        if (!t.is_array() || t.size() != 5) throw Error("point is not a 5-tuple");
        s.points.push_back({t[0].get<double>(), t[1].get<double>(), t[2].get<double>(),
                            t[3].get<double>(), t[4].get<double>()});
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error("malformed record at line " + std::to_string(lineno) + " (" + where + "): " + e.what());
    } catch (const Error& e) {
      throw Error("malformed record at line " + std::to_string(lineno) + " (" + where + "): " + e.what());
    }
    ++st.records;
    bool outside = false;
    for (const auto& p : s.points)
      if (!(p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0)) outside = true;
    if (outside) {
      detail::rescale_unit(s);
      ++st.rescaled;
    }
    if (!check_sketch(s).empty()) {
      ++st.skipped;
      continue;
    }
    out.push_back(std::move(s));
  }
  if (stats) *stats = st;
  return out;
}

}  // namespace sketchy
