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

#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace {

namespace fs = std::filesystem;

struct Result {
  int code = 0;
  std::string out;
};

Result run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + SKETCHY_CLI_PATH + " " + args + " 2>&1";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return {-1, ""};
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::size_t lines(const fs::path& p) {
  const std::string s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

// A run small enough for unit tests: 3 classes x 4 instances x 2 sketches,
// two canvases, one or two epochs per stage.
const char* kTiny =
    "--set classes=3 --set instances=4 --set sketches_per_instance=2 --set canvases=32,64 "
    "--set teacher_epochs=1 --set student_epochs=1 --set selector_epochs=2 --set lr=1e-3";

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() / ("sketchy_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
  }
  void TearDown() override { fs::remove_all(root_); }
  std::string out(const std::string& sub) const { return "--out " + (root_ / sub).string(); }
  fs::path root_;
};

TEST_F(CliTest, GenDataCountsAndDeterminism) {
  ASSERT_EQ(run(std::string("gen-data ") + kTiny + " " + out("a")).code, 0);
  ASSERT_EQ(run(std::string("gen-data ") + kTiny + " " + out("b")).code, 0);
  ASSERT_EQ(run(std::string("gen-data ") + kTiny + " --seed 5 " + out("c")).code, 0);
  const auto a = root_ / "a" / "data" / "sketches.ndjson";
  EXPECT_EQ(lines(a), 24u);
  EXPECT_EQ(slurp(a), slurp(root_ / "b" / "data" / "sketches.ndjson"));
  EXPECT_NE(slurp(a), slurp(root_ / "c" / "data" / "sketches.ndjson"));
  EXPECT_EQ(lines(root_ / "c" / "data" / "sketches.ndjson"), 24u);
  EXPECT_TRUE(fs::exists(root_ / "a" / "data" / "index.json"));
}

TEST_F(CliTest, MissingPrerequisitesAreNamed) {
  auto r = run(std::string("train-teacher ") + kTiny + " " + out("a"));
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.out.find("index.json"), std::string::npos) << r.out;
  ASSERT_EQ(run(std::string("gen-data ") + kTiny + " " + out("a")).code, 0);
  r = run(std::string("distill ") + kTiny + " " + out("a"));
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.out.find("teacher.ckpt"), std::string::npos) << r.out;
  r = run(std::string("train-selector ") + kTiny + " " + out("a"));
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.out.find("student.ckpt"), std::string::npos) << r.out;
}

TEST_F(CliTest, BadArguments) {
  EXPECT_NE(run("--set nope=1 gen-data " + out("a")).code, 0);
  EXPECT_NE(run("--set lambda=2 gen-data " + out("a")).code, 0);
  EXPECT_NE(run("sweep " + out("a")).code, 0);  // --mode is required
  EXPECT_NE(run("frobnicate").code, 0);
}

TEST_F(CliTest, OutputRootFromEnvironment) {
  const std::string env = "SKETCHY_OUT=" + (root_ / "env").string();
  ASSERT_EQ(run(std::string("gen-data ") + kTiny, env).code, 0);
  EXPECT_TRUE(fs::exists(root_ / "env" / "data" / "index.json"));
  ASSERT_EQ(run(std::string("gen-data ") + kTiny + " " + out("flag"), env).code, 0);
  EXPECT_TRUE(fs::exists(root_ / "flag" / "data" / "index.json"));
}

TEST_F(CliTest, ProfileGolden) {
  const auto r = run("profile --golden " + out("p"));
  EXPECT_EQ(r.code, 0) << r.out;
  std::size_t passes = 0;
  for (auto at = r.out.find("PASS "); at != std::string::npos; at = r.out.find("PASS ", at + 1)) ++passes;
  EXPECT_EQ(passes, 3u) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
  EXPECT_TRUE(fs::exists(root_ / "p" / "profile" / "vgg16_256.csv"));
  EXPECT_TRUE(fs::exists(root_ / "p" / "profile" / "canvas-selector_T100.txt"));
  EXPECT_NE(run("profile --resolutions 2 " + out("p")).code, 0);
}

TEST_F(CliTest, PipelineChainIsReproducible) {
  for (const char* sub : {"x", "y"}) {
    for (const char* cmd : {"gen-data", "train-teacher", "distill", "train-selector"}) {
      const auto r = run(std::string(cmd) + " " + kTiny + " " + out(sub));
      ASSERT_EQ(r.code, 0) << cmd << ": " << r.out;
    }
    const auto e = run(std::string("eval --mode all ") + kTiny + " " + out(sub));
    ASSERT_EQ(e.code, 0) << e.out;
  }
  for (const char* f : {"teacher_metrics.csv", "student_metrics.csv", "selector_metrics.csv", "eval.csv",
                        "teacher.ckpt", "student.ckpt", "selector.ckpt", "flops_table.json"})
    EXPECT_EQ(slurp(root_ / "x" / f), slurp(root_ / "y" / f)) << f;
  EXPECT_EQ(lines(root_ / "x" / "eval.csv"), 4u);  // header, two canvases, selector
  EXPECT_EQ(lines(root_ / "x" / "teacher_metrics.csv"), 2u);
  EXPECT_EQ(lines(root_ / "x" / "selector_metrics.csv"), 3u);

  const auto bad = run(std::string("eval --mode fixed --canvas 48 ") + kTiny + " " + out("x"));
  EXPECT_NE(bad.code, 0);
  EXPECT_NE(bad.out.find("48"), std::string::npos);
  const auto one = run(std::string("eval --mode fixed --canvas 64 ") + kTiny + " " + out("x"));
  EXPECT_EQ(one.code, 0);
  EXPECT_EQ(lines(root_ / "x" / "eval.csv"), 2u);

  ASSERT_EQ(run(std::string("sweep --mode resolution ") + kTiny + " " + out("x")).code, 0);
  EXPECT_EQ(lines(root_ / "x" / "sweep_resolution.csv"), 3u);
  const auto s = run(std::string("sweep --mode lambda_f --grid 0,0.5 ") + kTiny + " " + out("x"));
  ASSERT_EQ(s.code, 0) << s.out;
  EXPECT_EQ(lines(root_ / "x" / "sweep_lambda_f.csv"), 3u);
  for (const char* f : {"sweep_resolution_acc.svg", "sweep_resolution_acc.png", "sweep_lambda_f_acc.svg",
                        "sweep_lambda_f_flops.png"})
    EXPECT_GT(fs::file_size(root_ / "x" / f), 100u) << f;
}

}  // namespace
