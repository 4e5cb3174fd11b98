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

// sketchy: data generation, training, evaluation, sweeps and profiling.
//
//   sketchy gen-data --out runs/a
//   sketchy train-teacher --out runs/a
//   sketchy distill --out runs/a
//   sketchy train-selector --out runs/a
//   sketchy eval --mode all --out runs/a
//   sketchy sweep --mode lambda_f --grid 0,0.35,0.7 --out runs/a
//   sketchy profile --golden
//
// Settings resolve as: built-in defaults < --config file < SKETCHY_OUT (output
// root only) < --set key=value < --seed / --out.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sketchy/pipeline.hpp"

namespace {

using namespace sketchy;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> sets;
};

ExperimentConfig resolve(const Globals& g) {
  ExperimentConfig c;
  if (!g.config.empty()) c = load_config(g.config);
  if (const char* env = std::getenv("SKETCHY_OUT"); env && *env) c.out = env;
  for (const auto& kv : g.sets) {
    const auto eq = kv.find('=');
    require(eq != std::string::npos, "--set expects key=value, got '" + kv + "'");
    c.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (g.seed) c.seed = *g.seed;
  if (!g.out.empty()) c.out = g.out;
  c.validate();
  return c;
}

void print(const Table& t) {
  for (std::size_t i = 0; i < t.header.size(); ++i) std::cout << (i ? "," : "") << t.header[i];
  std::cout << "\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) std::cout << (i ? "," : "") << r[i];
    std::cout << "\n";
  }
}

std::vector<std::string> bundled_specs() {
  const std::filesystem::path dir = std::filesystem::path(SKETCHY_DATA_DIR) / "specs";
  std::vector<std::string> out;
  for (const char* n : {"vgg16", "resnet18", "mobilenetv2", "canvas-selector"})
    out.push_back((dir / (std::string(n) + ".json")).string());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"sketchy: sketch retrieval with distillation and canvas selection"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "experiment seed");
  app.add_option("--out", g.out, "run directory (default: $SKETCHY_OUT or runs/default)");
  app.add_option("--set", g.sets, "override a config key, key=value (repeatable)");

  auto* gen = app.add_subcommand("gen-data", "write the synthetic dataset");
  auto* teacher = app.add_subcommand("train-teacher", "train the teacher encoder");
  auto* distill = app.add_subcommand("distill", "train the student against the frozen teacher");
  auto* selector = app.add_subcommand("train-selector", "train the canvas selector");

  auto* eval = app.add_subcommand("eval", "evaluate fixed canvases and/or the selector");
  std::string eval_mode = "all";
  std::optional<int> eval_canvas;
  eval->add_option("--mode", eval_mode, "fixed | selector | all")->capture_default_str();
  eval->add_option("--canvas", eval_canvas, "only this fixed canvas");

  auto* sweep = app.add_subcommand("sweep", "resolution or lambda_f sweep with plots");
  std::string sweep_mode;
  std::vector<double> grid;
  sweep->add_option("--mode", sweep_mode, "resolution | lambda_f")->required();
  sweep->add_option("--grid", grid, "lambda_f values, comma separated")->delimiter(',');

  auto* profile = app.add_subcommand("profile", "FLOPs and parameter reports for layer specs");
  std::vector<std::string> specs;
  std::vector<int> resolutions = {256};
  std::optional<int> steps;
  bool golden = false;
  std::string golden_file = std::string(SKETCHY_DATA_DIR) + "/golden/reference_costs.json";
  profile->add_option("--spec", specs, "spec JSON (repeatable; default: bundled specs)")->check(CLI::ExistingFile);
  profile->add_option("--resolutions", resolutions, "input sides, comma separated")->delimiter(',');
  profile->add_option("--steps", steps, "sequence length for recurrent specs (default: t_max)");
  profile->add_flag("--golden", golden, "compare bundled specs against the golden file");
  profile->add_option("--golden-file", golden_file, "golden expected values")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    const ExperimentConfig cfg = resolve(g);
    auto& log = std::cerr;
    if (gen->parsed()) {
      cmd_gen_data(cfg, log);
    } else if (teacher->parsed()) {
      print(cmd_train_teacher(cfg, log));
    } else if (distill->parsed()) {
      print(cmd_distill(cfg, log));
    } else if (selector->parsed()) {
      print(cmd_train_selector(cfg, log));
    } else if (eval->parsed()) {
      print(cmd_eval(cfg, eval_mode_from_string(eval_mode), eval_canvas, log));
    } else if (sweep->parsed()) {
      const SweepKind kind = sweep_kind_from_string(sweep_mode);
      if (kind == SweepKind::kLambdaF && sweep->count("--grid") == 0) grid = default_lambda_f_grid();
      print(cmd_sweep(cfg, kind, grid, log));
    } else if (profile->parsed()) {
      if (specs.empty()) specs = bundled_specs();
      cmd_profile(cfg.out, specs, resolutions, steps.value_or(cfg.t_max), std::cout);
      if (golden) {
        bool ok = true;
        for (const auto& c : check_golden(golden_file)) {
          std::cout << (c.pass ? "PASS " : "FAIL ") << c.spec << ": " << format_si(c.flops) << " FLOPs (expected "
                    << format_si(c.expected_flops) << "), " << c.params << " params (expected "
                    << format_si(c.expected_params) << ")\n";
          ok = ok && c.pass;
        }
        if (!ok) return 3;
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
