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

// Commands behind the CLI. Each reads its prerequisites from the run
// directory, writes its artifacts next to them, and returns the rows it wrote.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sketchy/artifacts.hpp"
#include "sketchy/config.hpp"
#include "sketchy/dataset.hpp"
#include "sketchy/distill.hpp"
#include "sketchy/flops.hpp"
#include "sketchy/models.hpp"
#include "sketchy/plot.hpp"
#include "sketchy/policy.hpp"

namespace sketchy {

struct RunLayout {
  std::filesystem::path root;

  explicit RunLayout(std::filesystem::path r) : root(std::move(r)) {}
  std::string data() const { return (root / "data").string(); }
  std::string teacher() const { return (root / "teacher.ckpt").string(); }
  std::string student() const { return (root / "student.ckpt").string(); }
  std::string selector() const { return (root / "selector.ckpt").string(); }
  std::string train_gallery() const { return (root / "gallery_train.bin").string(); }
  std::string test_gallery() const { return (root / "gallery_test.bin").string(); }
  std::string flops_table() const { return (root / "flops_table.json").string(); }
  std::string file(const std::string& name) const { return (root / name).string(); }
};

// A CSV table with fixed formatting so reruns are byte-identical.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void write(const std::string& path) const {
    std::ofstream os(path, std::ios::trunc);
    require(static_cast<bool>(os), "cannot write '" + path + "'");
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
      os << '\n';
    }
  }
};

inline std::string cell(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}
inline std::string cell(long long v) { return std::to_string(v); }
inline std::string cell(int v) { return std::to_string(v); }

namespace detail {

inline void ensure_dir(const std::filesystem::path& p) {
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  require(!ec, "cannot create output directory '" + p.string() + "': " + ec.message());
}

inline void require_artifact(const std::string& path, const char* hint) {
  require(std::filesystem::exists(path), "missing artifact '" + path + "' (" + hint + ")");
}

inline void write_resolved_config(const RunLayout& run, const ExperimentConfig& cfg, const std::string& cmd) {
  std::ofstream os(run.file("config." + cmd + ".txt"), std::ios::trunc);
  require(static_cast<bool>(os), "cannot write resolved config in '" + run.root.string() + "'");
  os << config_text(cfg);
}

inline std::ostream& null_log() {
  static std::ofstream sink;
  return sink;
}

}  // namespace detail

// ------------------------------------------------------------------ commands

inline Dataset cmd_gen_data(const ExperimentConfig& cfg, std::ostream& log = detail::null_log()) {
  cfg.validate();
  const RunLayout run(cfg.out);
  detail::ensure_dir(run.root);
  const Dataset d = make_synthetic_dataset(cfg.synthetic());
  save_dataset(d, run.data(), {{"seed", cfg.seed}, {"classes", cfg.classes}, {"instances", cfg.instances}});
  detail::write_resolved_config(run, cfg, "gen-data");
  log << "gen-data: " << d.sketches.size() << " sketches, " << d.photos.size() << " photos -> " << run.data()
      << "\n";
  return d;
}

inline Table cmd_train_teacher(const ExperimentConfig& cfg, std::ostream& log = detail::null_log()) {
  cfg.validate();
  const RunLayout run(cfg.out);
  const Dataset d = load_dataset(run.data());
  Encoder<float> teacher(default_teacher(cfg.embed_dim));
  teacher.init(mix_seed(cfg.seed, 0x7EAC4E9ULL));
  Table t{{"epoch", "loss", "acc1", "acc10"}, {}};
  train_baseline(teacher, d, cfg.teacher_config(), [&](const EpochMetrics& m) {
    t.rows.push_back({cell(m.epoch), cell(m.loss), cell(m.acc1, 4), cell(m.acc10, 4)});
    log << "teacher epoch " << m.epoch << " loss " << cell(m.loss, 4) << " acc@1 " << cell(m.acc1, 2) << "\n";
  });
  save_encoder(run.teacher(), teacher, {{"seed", cfg.seed}, {"epochs", cfg.teacher_epochs}});
  t.write(run.file("teacher_metrics.csv"));
  detail::write_resolved_config(run, cfg, "train-teacher");
  return t;
}

inline Table cmd_distill(const ExperimentConfig& cfg, std::ostream& log = detail::null_log()) {
  cfg.validate();
  const RunLayout run(cfg.out);
  detail::require_artifact(run.teacher(), "run train-teacher first");
  const Dataset d = load_dataset(run.data());
  const Encoder<float> teacher = load_encoder(run.teacher());
  Encoder<float> student(default_student(cfg.embed_dim));
  student.init(mix_seed(cfg.seed, 0x57D0E7ULL));
  const CanvasSet canvases = cfg.canvas_set();
  Table t{{"epoch", "loss", "tri", "rkd"}, {}};
  for (int c : canvases.sizes()) t.header.push_back("loss_c" + std::to_string(c));
  t.header.insert(t.header.end(), {"acc1", "acc10"});
  train_student(teacher, student, d, cfg.student_config(), [&](const DistillEpoch& m) {
    std::vector<std::string> r = {cell(m.epoch), cell(m.loss), cell(m.tri), cell(m.rkd)};
    for (double v : m.canvas_loss) r.push_back(cell(v));
    r.insert(r.end(), {cell(m.acc1, 4), cell(m.acc10, 4)});
    t.rows.push_back(std::move(r));
    log << "student epoch " << m.epoch << " loss " << cell(m.loss, 4) << " acc@1 " << cell(m.acc1, 2) << "\n";
  });
  save_encoder(run.student(), student, {{"seed", cfg.seed}, {"lambda", cfg.lambda}, {"epochs", cfg.student_epochs}});
  save_gallery(run.train_gallery(), build_gallery(student, d, d.photo_indices(false)));
  save_gallery(run.test_gallery(), build_gallery(student, d, d.photo_indices(true)));
  save_flops_table(run.flops_table(), precompute_canvas_flops(student.spec(), canvases));
  t.write(run.file("student_metrics.csv"));
  detail::write_resolved_config(run, cfg, "distill");
  return t;
}

namespace detail {

struct SelectorInputs {
  Dataset data;
  Encoder<float> student;
  GalleryStore train_gallery;
  GalleryStore test_gallery;
  FlopsTable table;
};

inline SelectorInputs load_selector_inputs(const RunLayout& run, const ExperimentConfig& cfg) {
  for (const auto& p : {run.student(), run.train_gallery(), run.test_gallery(), run.flops_table()})
    require_artifact(p, "run distill first");
  SelectorInputs in{load_dataset(run.data()), load_encoder(run.student()), load_gallery(run.train_gallery()),
                    load_gallery(run.test_gallery()), load_flops_table(run.flops_table())};
  const std::uint64_t h = encoder_hash(in.student);
  require(in.train_gallery.encoder_hash == h && in.test_gallery.encoder_hash == h,
          "gallery was built by a different student than '" + run.student() + "'");
  require(in.table.canvases == cfg.canvases, "FLOPs table canvases differ from the config canvas set");
  return in;
}

inline PolicyParams<float> fresh_policy(const ExperimentConfig& cfg) {
  PolicyParams<float> p(cfg.hidden, static_cast<int>(cfg.canvases.size()));
  p.init(mix_seed(cfg.seed, 0x9011C7ULL));
  return p;
}

}  // namespace detail

inline Table cmd_train_selector(const ExperimentConfig& cfg, std::ostream& log = detail::null_log()) {
  cfg.validate();
  const RunLayout run(cfg.out);
  const auto in = detail::load_selector_inputs(run, cfg);
  PolicyParams<float> policy = detail::fresh_policy(cfg);
  Table t{{"epoch", "mean_reward", "mean_r_acc", "mean_r_comp", "mean_canvas", "expected_flops", "acc1"}, {}};
  train_selector(policy, in.student, in.train_gallery, in.test_gallery, in.table, in.data, cfg.canvas_set(),
                 cfg.selector_config(), [&](const SelectorEpoch& m) {
                   t.rows.push_back({cell(m.epoch), cell(m.mean_reward), cell(m.mean_r_acc), cell(m.mean_r_comp),
                                     cell(m.mean_canvas, 3), cell(m.expected_flops, 1), cell(m.acc1, 4)});
                   log << "selector epoch " << m.epoch << " reward " << cell(m.mean_reward, 4) << " canvas "
                       << cell(m.mean_canvas, 1) << " acc@1 " << cell(m.acc1, 2) << "\n";
                 });
  save_policy(run.selector(), policy, {{"seed", cfg.seed}, {"lambda_f", cfg.lambda_f}});
  t.write(run.file("selector_metrics.csv"));
  detail::write_resolved_config(run, cfg, "train-selector");
  return t;
}

enum class EvalMode { kFixed, kSelector, kAll };

inline EvalMode eval_mode_from_string(const std::string& s) {
  if (s == "fixed") return EvalMode::kFixed;
  if (s == "selector") return EvalMode::kSelector;
  if (s == "all") return EvalMode::kAll;
  throw Error("unknown eval mode '" + s + "' (expected fixed, selector or all)");
}

/// One row per fixed canvas (or only `canvas` when given) and one for the
/// selector. FLOPs are per query; params count every network that runs.
inline Table cmd_eval(const ExperimentConfig& cfg, EvalMode mode, std::optional<int> canvas = std::nullopt,
                      std::ostream& log = detail::null_log()) {
  cfg.validate();
  const RunLayout run(cfg.out);
  const CanvasSet canvases = cfg.canvas_set();
  if (canvas) require(canvases.contains(*canvas), "canvas " + std::to_string(*canvas) + " is not in the canvas set");
  const auto in = detail::load_selector_inputs(run, cfg);
  const auto queries = in.data.sketch_indices(true);
  const long long sp = count_params(in.student.spec());
  Table t{{"mode", "canvas", "acc1", "acc10", "mean_flops", "params"}, {}};
  if (mode != EvalMode::kSelector) {
    for (int c : canvases.sizes()) {
      if (canvas && c != *canvas) continue;
      const auto e = evaluate(in.student, in.data, in.test_gallery, queries, c);
      t.rows.push_back({"fixed", cell(c), cell(e.acc1, 4), cell(e.acc10, 4), cell(in.table.at_canvas(c), 1), cell(sp)});
      log << "fixed " << c << ": acc@1 " << cell(e.acc1, 2) << " flops " << format_si(in.table.at_canvas(c)) << "\n";
    }
  }
  if (mode != EvalMode::kFixed) {
    detail::require_artifact(run.selector(), "run train-selector first");
    const PolicyParams<float> policy = load_policy(run.selector());
    const auto ev = evaluate_selector(policy, in.student, in.data, in.test_gallery, queries, in.table, canvases,
                                      static_cast<std::size_t>(cfg.t_max));
    const long long params = sp + static_cast<long long>(policy.total());
    t.rows.push_back({"selector", cell(ev.mean_canvas, 3), cell(ev.acc1, 4), cell(ev.acc10, 4),
                      cell(ev.mean_flops, 1), cell(params)});
    log << "selector: acc@1 " << cell(ev.acc1, 2) << " flops " << format_si(ev.mean_flops) << " mean canvas "
        << cell(ev.mean_canvas, 1) << "\n";
  }
  t.write(run.file("eval.csv"));
  return t;
}

enum class SweepKind { kResolution, kLambdaF };

inline SweepKind sweep_kind_from_string(const std::string& s) {
  if (s == "resolution") return SweepKind::kResolution;
  if (s == "lambda_f") return SweepKind::kLambdaF;
  throw Error("unknown sweep '" + s + "' (expected resolution or lambda_f)");
}

inline std::vector<double> default_lambda_f_grid() { return {0.0, 0.2, 0.35, 0.5, 0.7, 0.9}; }

/// Resolution sweep: the canvas set (grid ignored). lambda_f sweep: retrains
/// the selector from the same initialization at every grid point.
inline Table cmd_sweep(const ExperimentConfig& cfg, SweepKind kind, const std::vector<double>& grid,
                       std::ostream& log = detail::null_log()) {
  cfg.validate();
  const RunLayout run(cfg.out);
  const auto in = detail::load_selector_inputs(run, cfg);
  const auto queries = in.data.sketch_indices(true);
  const CanvasSet canvases = cfg.canvas_set();
  Table t;
  PlotSpec acc, cost;
  if (kind == SweepKind::kResolution) {
    t.header = {"canvas", "acc1", "acc10", "flops"};
    Series a1{"Acc@1", {}, {}}, a10{"Acc@10", {}, {}}, fl{"student FLOPs", {}, {}};
    for (int c : canvases.sizes()) {
      const auto e = evaluate(in.student, in.data, in.test_gallery, queries, c);
      t.rows.push_back({cell(c), cell(e.acc1, 4), cell(e.acc10, 4), cell(in.table.at_canvas(c), 1)});
      a1.x.push_back(c);
      a1.y.push_back(e.acc1);
      a10.x.push_back(c);
      a10.y.push_back(e.acc10);
      fl.x.push_back(c);
      fl.y.push_back(in.table.at_canvas(c) / 1e6);
      log << "canvas " << c << ": acc@1 " << cell(e.acc1, 2) << "\n";
    }
    acc = {"Accuracy vs canvas size", "canvas size", "accuracy (%)", {a1, a10}};
    cost = {"Student cost vs canvas size", "canvas size", "MFLOPs", {fl}};
    t.write(run.file("sweep_resolution.csv"));
    write_plot(run.file("sweep_resolution_acc"), acc);
    write_plot(run.file("sweep_resolution_flops"), cost);
    return t;
  }
  require(!grid.empty(), "lambda_f sweep needs a non-empty grid");
  t.header = {"lambda_f", "acc1", "acc5", "mean_flops", "mean_canvas"};
  Series a1{"Acc@1", {}, {}}, a5{"Acc@5", {}, {}}, fl{"mean MFLOPs", {}, {}};
  EmbeddingMemo memo(in.student, in.data, canvases);
  for (double lf : grid) {
    ExperimentConfig c = cfg;
    c.lambda_f = lf;
    c.validate();
    PolicyParams<float> policy = detail::fresh_policy(c);
    SelectorConfig sc = c.selector_config();
    sc.evaluate_epochs = false;
    train_selector(policy, in.student, in.train_gallery, in.test_gallery, in.table, in.data, canvases, sc, {}, &memo);
    const auto ev = evaluate_selector(policy, in.student, in.data, in.test_gallery, queries, in.table, canvases,
                                      static_cast<std::size_t>(c.t_max), &memo);
    const double acc5 = acc_at_k(ev.ranks, 5);
    t.rows.push_back({cell(lf, 3), cell(ev.acc1, 4), cell(acc5, 4), cell(ev.mean_flops, 1), cell(ev.mean_canvas, 3)});
    a1.x.push_back(lf);
    a1.y.push_back(ev.acc1);
    a5.x.push_back(lf);
    a5.y.push_back(acc5);
    fl.x.push_back(lf);
    fl.y.push_back(ev.mean_flops / 1e6);
    log << "lambda_f " << cell(lf, 2) << ": acc@1 " << cell(ev.acc1, 2) << " flops " << format_si(ev.mean_flops)
        << "\n";
  }
  acc = {"Accuracy vs lambda_F", "lambda_F", "accuracy (%)", {a1, a5}};
  cost = {"Mean FLOPs vs lambda_F", "lambda_F", "MFLOPs per query", {fl}};
  t.write(run.file("sweep_lambda_f.csv"));
  write_plot(run.file("sweep_lambda_f_acc"), acc);
  write_plot(run.file("sweep_lambda_f_flops"), cost);
  return t;
}

struct GoldenCheck {
  std::string spec;
  double flops = 0, expected_flops = 0;
  long long params = 0;
  double expected_params = 0;
  bool pass = false;
};

/// Compares bundled reference specs with the golden file; specs resolve
/// relative to the golden file's ../specs directory.
inline std::vector<GoldenCheck> check_golden(const std::string& golden_path) {
  std::ifstream is(golden_path);
  require(static_cast<bool>(is), "missing golden file '" + golden_path + "'");
  nlohmann::json g;
  try {
    g = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed golden file '" + golden_path + "': " + e.what());
  }
  const auto dir = std::filesystem::path(golden_path).parent_path().parent_path() / "specs";
  const int side = g.at("input_side").get<int>();
  std::vector<GoldenCheck> out;
  for (const auto& m : g.at("models")) {
    GoldenCheck c;
    c.spec = m.at("spec").get<std::string>();
    const auto r = profile_model(load_model_spec((dir / (c.spec + ".json")).string()), side);
    c.flops = r.total_flops;
    c.params = r.total_params;
    c.expected_flops = m.at("flops").get<double>();
    c.expected_params = m.at("params").get<double>();
    c.pass = std::abs(c.flops - c.expected_flops) <= m.at("flops_rtol").get<double>() * c.expected_flops &&
             std::abs(static_cast<double>(c.params) - c.expected_params) <=
                 m.at("params_rtol").get<double>() * c.expected_params;
    out.push_back(c);
  }
  return out;
}

/// Writes <out>/profile/<name>_<side>.{csv,txt}. Sequence models use `steps`
/// instead of a resolution.
inline std::vector<ProfileReport> cmd_profile(const std::string& out_dir, const std::vector<std::string>& specs,
                                              const std::vector<int>& resolutions, int steps,
                                              std::ostream& log = detail::null_log()) {
  require(!specs.empty(), "profile needs at least one --spec");
  require(!resolutions.empty(), "profile needs at least one resolution");
  const auto dir = std::filesystem::path(out_dir) / "profile";
  detail::ensure_dir(dir);
  std::vector<ProfileReport> reps;
  for (const auto& path : specs) {
    const ModelSpec s = load_model_spec(path);
    const bool seq = s.role == "selector";
    for (int side : seq ? std::vector<int>{1} : resolutions) {
      const ProfileReport r = profile_model(s, side, seq ? steps : 0);
      const std::string stem = (dir / (s.name + "_" + (seq ? "T" + std::to_string(steps) : std::to_string(side)))).string();
      std::ofstream csv(stem + ".csv", std::ios::trunc), txt(stem + ".txt", std::ios::trunc);
      require(csv && txt, "cannot write profile report '" + stem + "'");
      write_report_csv(csv, r);
      write_report_text(txt, r);
      log << s.name << " @ " << (seq ? "T=" + std::to_string(steps) : std::to_string(side)) << ": "
          << format_si(r.total_flops) << " FLOPs, " << format_si(static_cast<double>(r.total_params)) << " params\n";
      reps.push_back(r);
    }
  }
  return reps;
}

}  // namespace sketchy
