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

// One PASS/FAIL line per acceptance check. Training checks write their
// runs under --work (default: a fresh temp dir) so they can be inspected.
//
//   acceptance                 all criteria
//   acceptance --only 1,2,3    a subset
//   acceptance --keep          leave the work dir behind

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include <CLI11.hpp>

#include "sketchy/pipeline.hpp"

namespace {

using namespace sketchy;
namespace fs = std::filesystem;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail, double secs, double budget) {
  const bool in_time = secs <= budget;
  const bool ok = pass && in_time;
  if (!ok) ++failures;
  std::printf("%s [%d] %s: %s (%.1fs, budget %.0fs%s)\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str(), secs,
              budget, in_time ? "" : ", over budget");
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool within(double v, double want, double rtol) { return std::abs(v - want) <= rtol * want; }

const fs::path kSpecs = fs::path(SKETCHY_DATA_DIR) / "specs";

// ------------------------------------------------------------------ 1-4

void reference_costs() {
  const auto t0 = Clock::now();
  struct Want {
    const char* name;
    double flops, params;
  };
  bool ok = true;
  std::string detail;
  for (const Want& w : {Want{"vgg16", 40.18e9, 14.71e6}, Want{"resnet18", 4.76e9, 11.18e6},
                        Want{"mobilenetv2", 0.83e9, 2.22e6}}) {
    const auto r = profile_model(load_model_spec((kSpecs / (std::string(w.name) + ".json")).string()), 256);
    const bool pass = within(r.total_flops, w.flops, 0.05) && within(static_cast<double>(r.total_params), w.params, 0.02);
    ok = ok && pass;
    detail += fmt("%s%s %.3fG/%.3fM", detail.empty() ? "" : ", ", w.name, r.total_flops / 1e9, r.total_params / 1e6);
  }
  report(1, "reference FLOPs/params at 256", ok, detail, seconds_since(t0), 1);
}

void selector_footprint() {
  const auto t0 = Clock::now();
  const ModelSpec sel = load_model_spec((kSpecs / "canvas-selector.json").string());
  const auto r = profile_model(sel, 1, 100);
  long long cell = 0;
  for (std::size_t i = 0; i < sel.layers.size(); ++i)
    if (sel.layers[i].kind == LayerKind::kRecurrentGated) cell += r.layers[i].params;
  const bool ok = cell == 51840 && r.total_flops >= 0.008e9 && r.total_flops <= 0.025e9;
  report(2, "selector footprint", ok, fmt("cell params %lld, FLOPs at T=100 %.4fG", cell, r.total_flops / 1e9),
         seconds_since(t0), 1);
}

void canvas_scaling() {
  const auto t0 = Clock::now();
  const FlopsTable t = precompute_canvas_flops(default_student(), ExperimentConfig{}.canvas_set());
  const double ratio = t.at_canvas(256) / t.at_canvas(32);
  report(3, "q(256)/q(32)", within(ratio, 63.6, 0.10), fmt("%.2f (target 63.6 +-10%%)", ratio), seconds_since(t0), 1);
}

void regularizer_values() {
  const auto t0 = Clock::now();
  const std::vector<double> q = {0.083, 0.338, 1.397, 5.280};
  const std::vector<double> small = {1, 0, 0, 0}, uniform = {0.25, 0.25, 0.25, 0.25}, large = {0, 0, 0, 1};
  const double a = flops_regularizer<double>(small, q), b = flops_regularizer<double>(uniform, q),
               c = flops_regularizer<double>(large, q);
  const bool ok = std::abs(a - 0.01597) <= 1e-4 && std::abs(b - 0.3415) <= 1e-4 && std::abs(c - 1.0160) <= 1e-4;
  report(4, "FLOPs regularizer", ok, fmt("%.5f / %.5f / %.5f", a, b, c), seconds_since(t0), 1);
}

// ------------------------------------------------------------------ 5-6

const std::vector<std::uint64_t> kSeeds = {0, 1, 2};

fs::path seed_dir(const fs::path& work, std::uint64_t seed, const char* variant) {
  return work / ("seed" + std::to_string(seed)) / variant;
}

ExperimentConfig seed_config(const fs::path& dir, std::uint64_t seed) {
  ExperimentConfig c;
  c.seed = seed;
  c.out = dir.string();
  return c;
}

double student_acc1(const fs::path& dir) {
  const RunLayout run(dir.string());
  const Dataset d = load_dataset(run.data());
  const ExperimentConfig c;
  return evaluate_test(load_encoder(run.student()), d, c.canvas_set().largest()).acc1;
}

void kd_trend(const fs::path& work) {
  const auto t0 = Clock::now();
  double teacher = 0, kd = 0, plain = 0;
  std::string per_seed;
  for (std::uint64_t seed : kSeeds) {
    const fs::path a = seed_dir(work, seed, "kd"), b = seed_dir(work, seed, "triplet");
    fs::remove_all(a.parent_path());
    ExperimentConfig ca = seed_config(a, seed);
    cmd_gen_data(ca);
    cmd_train_teacher(ca);
    cmd_distill(ca);
    fs::create_directories(b);
    fs::copy(a / "data", b / "data", fs::copy_options::recursive);
    fs::copy_file(a / "teacher.ckpt", b / "teacher.ckpt");
    ExperimentConfig cb = seed_config(b, seed);
    cb.lambda = 1.0;
    cmd_distill(cb);

    const RunLayout run(a.string());
    const Dataset d = load_dataset(run.data());
    const double t = evaluate_test(load_encoder(run.teacher()), d, ca.canvas_set().largest()).acc1;
    const double k = student_acc1(a), p = student_acc1(b);
    teacher += t;
    kd += k;
    plain += p;
    per_seed += fmt("%s%.1f/%.1f/%.1f", per_seed.empty() ? "" : " ", t, k, p);
    std::fprintf(stderr, "kd seed %llu: teacher %.2f kd %.2f no-kd %.2f (%.0fs)\n",
                 static_cast<unsigned long long>(seed), t, k, p, seconds_since(t0));
  }
  const double n = static_cast<double>(kSeeds.size());
  teacher /= n;
  kd /= n;
  plain /= n;
  const bool ok = kd >= plain && kd >= teacher - 5.0;
  report(5, "KD trend", ok,
         fmt("mean Acc@1 teacher %.2f, student+RKD %.2f, student lambda=1 %.2f; need KD >= no-KD (%s) and KD >= "
             "teacher-5 (%s); per seed T/KD/noKD %s",
             teacher, kd, plain, kd >= plain ? "yes" : "no", kd >= teacher - 5.0 ? "yes" : "no", per_seed.c_str()),
         seconds_since(t0), 30 * 60);
}

struct Variant {
  const char* name;
  double lambda_f;
  bool use_rank;
  bool use_tri;
};

const Variant kVariants[] = {
    {"full", 0.35, true, true}, {"lambda_f=0", 0.0, true, true}, {"w/o rank", 0.35, false, true}, {"w/o tri", 0.35, true, false}};
constexpr std::size_t kNumVariants = std::size(kVariants);

void selector_trend(const fs::path& work) {
  // Students come from the KD check ([5]); only selector training and evaluation
  // are timed here.
  for (std::uint64_t seed : kSeeds)
    if (!fs::exists(RunLayout(seed_dir(work, seed, "kd").string()).student())) {
      kd_trend(work);
      break;
    }
  const auto t0 = Clock::now();
  double acc[kNumVariants] = {}, flops[kNumVariants] = {};
  double base_acc = 0, base_flops = 0;
  for (std::uint64_t seed : kSeeds) {
    const ExperimentConfig base = seed_config(seed_dir(work, seed, "kd"), seed);
    const RunLayout run(base.out);
    const auto in = detail::load_selector_inputs(run, base);
    const CanvasSet canvases = base.canvas_set();
    const auto queries = in.data.sketch_indices(true);
    EmbeddingMemo memo(in.student, in.data, canvases);
    const double a256 = evaluate(in.student, in.data, in.test_gallery, queries, 256).acc1;
    base_acc += a256;
    base_flops += in.table.at_canvas(256);
    for (std::size_t v = 0; v < kNumVariants; ++v) {
      ExperimentConfig c = base;
      c.lambda_f = kVariants[v].lambda_f;
      c.use_rank = kVariants[v].use_rank;
      c.use_tri = kVariants[v].use_tri;
      SelectorConfig sc = c.selector_config();
      sc.evaluate_epochs = false;
      PolicyParams<float> policy = detail::fresh_policy(c);
      train_selector(policy, in.student, in.train_gallery, in.test_gallery, in.table, in.data, canvases, sc, {},
                     &memo);
      const auto ev = evaluate_selector(policy, in.student, in.data, in.test_gallery, queries, in.table, canvases,
                                        static_cast<std::size_t>(c.t_max), &memo);
      acc[v] += ev.acc1;
      flops[v] += ev.mean_flops;
      std::fprintf(stderr, "selector seed %llu %-10s acc@1 %.2f flops %.3fM canvas %.1f (always-256 %.2f) %.0fs\n",
                   static_cast<unsigned long long>(seed), kVariants[v].name, ev.acc1, ev.mean_flops / 1e6,
                   ev.mean_canvas, a256, seconds_since(t0));
    }
  }
  const double n = static_cast<double>(kSeeds.size());
  base_acc /= n;
  base_flops /= n;
  for (std::size_t v = 0; v < kNumVariants; ++v) {
    acc[v] /= n;
    flops[v] /= n;
  }
  const bool cheap = flops[0] <= 0.5 * base_flops;
  const bool accurate = base_acc - acc[0] <= 3.0;
  const bool lf = flops[1] > flops[0];
  const bool rank = acc[2] < acc[0];
  const bool tri = acc[3] < acc[0];
  std::string detail = fmt("always-256 %.2f @ %.2fM;", base_acc, base_flops / 1e6);
  for (std::size_t v = 0; v < kNumVariants; ++v)
    detail += fmt(" %s %.2f @ %.2fM;", kVariants[v].name, acc[v], flops[v] / 1e6);
  detail += fmt(" flops<=0.5x %s, drop<=3 %s, lambda_f=0 costlier %s, w/o rank worse %s, w/o tri worse %s",
                cheap ? "yes" : "no", accurate ? "yes" : "no", lf ? "yes" : "no", rank ? "yes" : "no",
                tri ? "yes" : "no");
  report(6, "selector trend", cheap && accurate && lf && rank && tri, detail, seconds_since(t0), 45 * 60);
}

// ------------------------------------------------------------------ 7-8

int sh(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

void property_suites() {
  const auto t0 = Clock::now();
  struct Suite {
    const char* binary;
    const char* filter;
  };
  const fs::path bin = fs::path(SKETCHY_CLI_PATH).parent_path();
  const Suite suites[] = {
      {"test_retrieval", "Triplet.NonNegativeAndZeroRegion:Ranking.MatchesFullSort"},
      {"test_distill", "Huber.ContinuousAtBeta:Huber.GradientBoundedByBeta:Rkd.*"},
      {"test_policy", "Softmax.*:Sampler.FrequenciesWithinThreeSigma:Reinforce.GradientMatchesFiniteDifference"},
      {"test_sketch", "DouglasPeucker.MatchesRecursiveOracle"},
      {"test_encoder", "Encoder.GradientCheck*"},
      {"test_raster", "Rasterize.BitDeterministic:Rasterize.GoldenDigest"},
  };
  std::string failed;
  for (const Suite& s : suites) {
    const std::string cmd = (bin / s.binary).string() + " --gtest_brief=1 --gtest_filter='" + s.filter + "' > " +
                            (fs::temp_directory_path() / "sketchy_props.log").string() + " 2>&1";
    if (sh(cmd) != 0) failed += std::string(failed.empty() ? "" : ", ") + s.binary;
  }
  report(7, "property suites", failed.empty(), failed.empty() ? "all pass" : "failing: " + failed, seconds_since(t0),
         5 * 60);
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void pipeline_determinism(const fs::path& work) {
  const auto t0 = Clock::now();
  // Default dataset and models; shortened schedules keep the two chains cheap.
  const std::string sets = " --seed 7 --set teacher_epochs=3 --set student_epochs=3 --set selector_epochs=5";
  bool ran = true;
  for (const char* sub : {"det_a", "det_b"}) fs::remove_all(work / sub);
  for (const char* sub : {"det_a", "det_b"})
    for (const char* cmd : {"gen-data", "train-teacher", "distill", "train-selector", "eval"})
      ran = ran && sh(std::string(SKETCHY_CLI_PATH) + " " + cmd + sets + " --out " + (work / sub).string() +
                      " > /dev/null 2> /dev/null") == 0;
  std::string diff;
  if (ran)
    for (const char* f : {"teacher_metrics.csv", "student_metrics.csv", "selector_metrics.csv", "eval.csv"})
      if (slurp(work / "det_a" / f) != slurp(work / "det_b" / f)) diff += std::string(diff.empty() ? "" : ", ") + f;
  const std::string last = ran ? slurp(work / "det_a" / "eval.csv") : "";
  const auto nl = last.rfind('\n', last.size() >= 2 ? last.size() - 2 : 0);
  report(8, "pipeline determinism", ran && diff.empty(),
         !ran ? "chain failed" : diff.empty() ? "identical metrics; selector row: " + last.substr(nl + 1, last.size() - nl - 2)
                                              : "differs: " + diff,
         seconds_since(t0), 45 * 60);
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  std::string work;
  bool keep = false;
  app.add_option("--only", only, "criteria to run, comma separated")->delimiter(',');
  app.add_option("--work", work, "work directory for training runs");
  app.add_flag("--keep", keep, "keep the work directory");
  CLI11_PARSE(app, argc, argv);
  const std::set<int> want(only.begin(), only.end());
  auto on = [&](int id) { return want.empty() || want.count(id); };

  const bool temp = work.empty();
  const fs::path dir = temp ? fs::temp_directory_path() / ("sketchy_acceptance_" + std::to_string(::getpid())) : fs::path(work);
  fs::create_directories(dir);
  try {
    if (on(1)) reference_costs();
    if (on(2)) selector_footprint();
    if (on(3)) canvas_scaling();
    if (on(4)) regularizer_values();
    if (on(5)) kd_trend(dir);
    if (on(6)) selector_trend(dir);
    if (on(7)) property_suites();
    if (on(8)) pipeline_determinism(dir);
  } catch (const Error& e) {
    std::printf("FAIL aborted: %s\n", e.what());
    ++failures;
  }
  if (temp && !keep) fs::remove_all(dir);
  return failures == 0 ? 0 : 1;
}
