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

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sketchy/common.hpp"
#include "sketchy/distill.hpp"
#include "sketchy/policy.hpp"
#include "sketchy/retrieval.hpp"
#include "sketchy/sketch.hpp"
#include "sketchy/synthetic.hpp"

namespace sketchy {

// Everything an experiment depends on. Serialized as `key = value` lines;
// see keys() for the schema.
struct ExperimentConfig {
  // dataset
  int classes = 20;
  int instances = 10;
  int sketches_per_instance = 3;
  std::uint64_t seed = 0;
  double jitter = 0.01;
  double stroke_dropout = 0.2;
  double test_fraction = 0.3;
  // losses
  double margin = 0.2;
  double lambda = 0.5;
  double beta = 1.0;
  double lambda_r = 0.4;
  double lambda_tri = 0.48;
  double lambda_f = 0.35;
  bool use_rank = true;
  bool use_tri = true;
  bool use_flops = true;
  std::string flops_reward = "sampled";
  bool reward_baseline = false;
  // optimization
  double lr = 1e-3;
  double teacher_lr = 0;  // 0: use lr
  double student_lr = 3e-3;
  double selector_lr = 0;
  int batch = 16;
  int selector_batch = 32;
  int teacher_epochs = 20;
  int student_epochs = 20;
  int selector_epochs = 50;
  // models
  int embed_dim = 64;
  int hidden = 128;
  int t_max = 100;
  std::vector<int> canvases = {32, 64, 128, 256};
  // output
  std::string out = "runs/default";

  double teacher_rate() const { return teacher_lr > 0 ? teacher_lr : lr; }
  double student_rate() const { return student_lr > 0 ? student_lr : lr; }
  double selector_rate() const { return selector_lr > 0 ? selector_lr : lr; }

  SyntheticConfig synthetic() const {
    SyntheticConfig s;
    s.classes = classes;
    s.instances = instances;
    s.sketches_per_instance = sketches_per_instance;
    s.seed = seed;
    s.jitter = jitter;
    s.stroke_dropout = stroke_dropout;
    s.test_fraction = test_fraction;
    return s;
  }
  CanvasSet canvas_set() const { return CanvasSet(canvases); }

  BaselineConfig teacher_config() const {
    BaselineConfig c;
    c.epochs = teacher_epochs;
    c.batch = batch;
    c.lr = teacher_rate();
    c.margin = margin;
    c.canvas = canvas_set().largest();
    c.seed = mix_seed(seed, 0x7EAULL);
    return c;
  }
  DistillConfig student_config() const {
    DistillConfig c;
    c.epochs = student_epochs;
    c.batch = batch;
    c.lr = student_rate();
    c.weights = {lambda, margin, beta};
    c.canvases = canvas_set();
    c.seed = mix_seed(seed, 0x57DULL);
    return c;
  }
  SelectorConfig selector_config() const {
    SelectorConfig c;
    c.epochs = selector_epochs;
    c.batch = selector_batch;
    c.lr = selector_rate();
    c.hidden = hidden;
    c.t_max = static_cast<std::size_t>(t_max);
    c.margin = margin;
    c.reward.lambda_r = lambda_r;
    c.reward.lambda_tri = lambda_tri;
    c.reward.lambda_f = lambda_f;
    c.reward.use_rank = use_rank;
    c.reward.use_tri = use_tri;
    c.reward.use_flops = use_flops;
    c.reward.flops_reward = flops_reward == "expected" ? FlopsReward::kExpected : FlopsReward::kSampled;
    c.baseline = reward_baseline;
    c.seed = mix_seed(seed, 0x5E1ULL);
    return c;
  }

  void validate() const;
  void set(const std::string& key, const std::string& value);
  std::map<std::string, std::string> to_map() const;
  static std::vector<std::string> keys();
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  std::istringstream is(v);
  T out{};
  is >> out;
  require(!is.fail() && is.eof(), "config key '" + key + "': cannot parse '" + v + "'");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw Error("config key '" + key + "': expected a boolean, got '" + v + "'");
}

inline std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<int>(key, trim(item)));
  require(!out.empty(), "config key '" + key + "': empty list");
  return out;
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

struct Field {
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define SKETCHY_NUM(name, type)                                                                     \
  {                                                                                                 \
    #name, {[](ExperimentConfig& c, const std::string& k, const std::string& v) {                   \
              c.name = parse_number<type>(k, v);                                                    \
            },                                                                                      \
            [](const ExperimentConfig& c) { return fmt(static_cast<double>(c.name)); } }             \
  }
#define SKETCHY_INT(name, type)                                                                     \
  {                                                                                                 \
    #name, {[](ExperimentConfig& c, const std::string& k, const std::string& v) {                   \
              c.name = parse_number<type>(k, v);                                                    \
            },                                                                                      \
            [](const ExperimentConfig& c) { return std::to_string(c.name); } }                      \
  }
#define SKETCHY_BOOL(name)                                                                          \
  {                                                                                                 \
    #name, {[](ExperimentConfig& c, const std::string& k, const std::string& v) {                   \
              c.name = parse_bool(k, v);                                                            \
            },                                                                                      \
            [](const ExperimentConfig& c) { return std::string(c.name ? "true" : "false"); } }      \
  }

inline const std::map<std::string, Field>& config_fields() {
  static const std::map<std::string, Field> fields = {
      SKETCHY_INT(classes, int),
      SKETCHY_INT(instances, int),
      SKETCHY_INT(sketches_per_instance, int),
      SKETCHY_INT(seed, std::uint64_t),
      SKETCHY_NUM(jitter, double),
      SKETCHY_NUM(stroke_dropout, double),
      SKETCHY_NUM(test_fraction, double),
      SKETCHY_NUM(margin, double),
      SKETCHY_NUM(lambda, double),
      SKETCHY_NUM(beta, double),
      SKETCHY_NUM(lambda_r, double),
      SKETCHY_NUM(lambda_tri, double),
      SKETCHY_NUM(lambda_f, double),
      SKETCHY_BOOL(use_rank),
      SKETCHY_BOOL(use_tri),
      SKETCHY_BOOL(use_flops),
      {"flops_reward",
       {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
          require(v == "sampled" || v == "expected", "config key '" + k + "': expected sampled|expected");
          c.flops_reward = v;
        },
        [](const ExperimentConfig& c) { return c.flops_reward; }}},
      SKETCHY_BOOL(reward_baseline),
      SKETCHY_NUM(lr, double),
      SKETCHY_NUM(teacher_lr, double),
      SKETCHY_NUM(student_lr, double),
      SKETCHY_NUM(selector_lr, double),
      SKETCHY_INT(batch, int),
      SKETCHY_INT(selector_batch, int),
      SKETCHY_INT(teacher_epochs, int),
      SKETCHY_INT(student_epochs, int),
      SKETCHY_INT(selector_epochs, int),
      SKETCHY_INT(embed_dim, int),
      SKETCHY_INT(hidden, int),
      SKETCHY_INT(t_max, int),
      {"canvases",
       {[](ExperimentConfig& c, const std::string& k, const std::string& v) { c.canvases = parse_int_list(k, v); },
        [](const ExperimentConfig& c) {
          std::string s;
          for (std::size_t i = 0; i < c.canvases.size(); ++i) s += (i ? "," : "") + std::to_string(c.canvases[i]);
          return s;
        }}},
      {"out",
       {[](ExperimentConfig& c, const std::string&, const std::string& v) { c.out = v; },
        [](const ExperimentConfig& c) { return c.out; }}},
  };
  return fields;
}

#undef SKETCHY_NUM
#undef SKETCHY_INT
#undef SKETCHY_BOOL

}  // namespace detail

inline void ExperimentConfig::set(const std::string& key, const std::string& value) {
  const auto& f = detail::config_fields();
  const auto it = f.find(key);
  require(it != f.end(), "unknown config key '" + key + "'");
  it->second.set(*this, key, detail::trim(value));
}

inline std::map<std::string, std::string> ExperimentConfig::to_map() const {
  std::map<std::string, std::string> m;
  for (const auto& [k, f] : detail::config_fields()) m[k] = f.get(*this);
  return m;
}

inline std::vector<std::string> ExperimentConfig::keys() {
  std::vector<std::string> k;
  for (const auto& [name, f] : detail::config_fields()) k.push_back(name);
  return k;
}

inline void ExperimentConfig::validate() const {
  require(classes >= 1 && instances >= 2, "need >= 1 class and >= 2 instances");
  require(sketches_per_instance >= 1 && sketches_per_instance <= 5, "sketches_per_instance must be in [1, 5]");
  require(test_fraction > 0 && test_fraction < 1, "test_fraction must be in (0, 1)");
  require(margin > 0, "margin must be positive");
  require(lambda >= 0 && lambda <= 1, "lambda must be in [0, 1]");
  require(beta > 0, "beta must be positive");
  require(lambda_r >= 0 && lambda_tri >= 0, "reward weights must be >= 0");
  require(lambda_f >= 0 && lambda_f <= 1, "lambda_f must be in [0, 1]");
  require(lr > 0 && teacher_lr >= 0 && student_lr >= 0 && selector_lr >= 0, "learning rates must be positive");
  require(batch >= 1 && selector_batch >= 1, "batch sizes must be >= 1");
  require(teacher_epochs >= 1 && student_epochs >= 1 && selector_epochs >= 1, "epochs must be >= 1");
  require(embed_dim >= 1 && hidden >= 1 && t_max >= 2, "model sizes out of range");
  canvas_set();
}

/// `key = value` lines; '#' starts a comment.
inline void apply_config_text(ExperimentConfig& c, const std::string& text, const std::string& origin = "config") {
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, origin + ":" + std::to_string(lineno) + ": expected key = value");
    try {
      c.set(detail::trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), "cannot read config '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  ExperimentConfig c;
  apply_config_text(c, ss.str(), path);
  return c;
}

inline std::string config_text(const ExperimentConfig& c) {
  std::string s;
  for (const auto& [k, v] : c.to_map()) s += k + " = " + v + "\n";
  return s;
}

}  // namespace sketchy
