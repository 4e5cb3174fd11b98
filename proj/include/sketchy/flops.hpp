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
#include <cstddef>
#include <iomanip>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sketchy/common.hpp"
#include "sketchy/layers.hpp"
#include "sketchy/sketch.hpp"

namespace sketchy {

// Student cost per canvas size, precomputed once and shared by the selector's
// reward and the evaluation metric.
struct FlopsTable {
  std::vector<int> canvases;
  std::vector<double> q;

  double q_min() const { return q.front(); }
  double q_max() const { return q.back(); }
  std::size_t size() const { return q.size(); }

  double at_canvas(int c) const {
    for (std::size_t i = 0; i < canvases.size(); ++i)
      if (canvases[i] == c) return q[i];
    throw Error("canvas " + std::to_string(c) + " not in FLOPs table");
  }
  bool operator==(const FlopsTable&) const = default;
};

inline void validate_table(const FlopsTable& t) {
  require(t.q.size() >= 2 && t.q.size() == t.canvases.size(), "FLOPs table needs >= 2 entries");
  for (std::size_t i = 1; i < t.q.size(); ++i)
    require(t.q[i] > t.q[i - 1],
            "FLOPs table is not strictly increasing; the model is not resolution dependent");
}

inline FlopsTable precompute_canvas_flops(const ModelSpec& spec, const CanvasSet& canvases) {
  FlopsTable t;
  for (int c : canvases.sizes()) {
    t.canvases.push_back(c);
    t.q.push_back(profile_model(spec, c).total_flops);
  }
  validate_table(t);
  return t;
}

inline nlohmann::json to_json(const FlopsTable& t) {
  return {{"canvases", t.canvases}, {"q", t.q}};
}

inline FlopsTable flops_table_from_json(const nlohmann::json& j) {
  FlopsTable t;
  t.canvases = j.at("canvases").get<std::vector<int>>();
  t.q = j.at("q").get<std::vector<double>>();
  validate_table(t);
  return t;
}

// The canvas selector as a profiled model: one gated recurrent layer over
// stroke-5 input followed by a linear head over K canvases.
inline ModelSpec selector_spec(int hidden = 128, int canvases = 4, int steps = 100) {
  ModelSpec s;
  s.name = "canvas-selector";
  s.role = "selector";
  s.input_channels = 5;
  LayerSpec rnn;
  rnn.kind = LayerKind::kRecurrentGated;
  rnn.in_channels = 5;
  rnn.hidden = hidden;
  rnn.steps = steps;
  LayerSpec head;
  head.kind = LayerKind::kLinear;
  head.in_channels = hidden;
  head.out_channels = canvases;
  head.bias = true;
  s.layers = {rnn, head};
  return s;
}

inline double selector_flops(const ModelSpec& selector, std::size_t steps) {
  return profile_model(selector, 1, static_cast<int>(std::max<std::size_t>(steps, 1))).total_flops;
}

struct QueryCost {
  std::size_t steps = 0;     // capped sequence length seen by the selector
  std::size_t canvas_index = 0;
};

/// Mean over queries of selector FLOPs at the query's length plus student
/// FLOPs at the chosen canvas.
inline double average_flops_metric(const ModelSpec& selector, const FlopsTable& table,
                                   std::span<const QueryCost> queries) {
  require(!queries.empty(), "average_flops_metric: empty evaluation set");
  double sum = 0.0;
  for (const auto& q : queries) {
    require(q.canvas_index < table.size(), "average_flops_metric: canvas index out of range");
    sum += selector_flops(selector, q.steps) + table.q[q.canvas_index];
  }
  return sum / static_cast<double>(queries.size());
}

inline void write_report_csv(std::ostream& os, const ProfileReport& r) {
  os << "layer,kind,in_c,in_h,in_w,out_c,out_h,out_w,flops,params\n";
  for (const auto& l : r.layers)
    os << l.index << ',' << to_string(l.kind) << ',' << l.in.channels << ',' << l.in.height << ','
       << l.in.width << ',' << l.out.channels << ',' << l.out.height << ',' << l.out.width << ','
       << std::setprecision(12) << l.flops << ',' << l.params << '\n';
  os << "total,,,,,,,," << std::setprecision(12) << r.total_flops << ',' << r.total_params << '\n';
}

inline std::string format_si(double v, const char* unit = "") {
  std::ostringstream os;
  os << std::fixed;
  if (v >= 1e9)
    os << std::setprecision(3) << v / 1e9 << "G";
  else if (v >= 1e6)
    os << std::setprecision(3) << v / 1e6 << "M";
  else if (v >= 1e3)
    os << std::setprecision(2) << v / 1e3 << "K";
  else
    os << std::setprecision(0) << v;
  os << unit;
  return os.str();
}

inline void write_report_text(std::ostream& os, const ProfileReport& r) {
  os << r.model << " @ " << r.input_side << "x" << r.input_side;
  if (r.steps > 0) os << " (" << r.steps << " steps)";
  os << "\n";
  for (const auto& l : r.layers)
    os << "  " << std::setw(3) << l.index << "  " << std::left << std::setw(16) << to_string(l.kind)
       << std::right << std::setw(5) << l.in.channels << "x" << l.in.height << "x" << l.in.width
       << " -> " << l.out.channels << "x" << l.out.height << "x" << l.out.width << "  "
       << std::setw(10) << format_si(l.flops) << "  " << std::setw(10) << format_si(static_cast<double>(l.params))
       << "\n";
  os << "  total FLOPs " << format_si(r.total_flops) << ", params "
     << format_si(static_cast<double>(r.total_params)) << "\n";
}

}  // namespace sketchy
