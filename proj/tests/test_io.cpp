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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sketchy/checkpoint.hpp"
#include "sketchy/dataset.hpp"
#include "sketchy/png.hpp"
#include "sketchy/sketch_io.hpp"

namespace sketchy {
namespace {

namespace fs = std::filesystem;

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("sketchy_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }
  static std::string slurp(const std::string& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
  }
  fs::path dir_;
};

using Ndjson = TempDir;

TEST_F(Ndjson, EmptyFile) {
  write("e.ndjson", "");
  NdjsonStats st;
  EXPECT_TRUE(load_ndjson(path("e.ndjson"), &st).empty());
  EXPECT_EQ(st.records, 0u);
}

TEST_F(Ndjson, RoundTrip) {
  const auto p = generate_synthetic_pair(5, 1, 1, 2);
  save_ndjson(path("s.ndjson"), p.sketches);
  const auto back = load_ndjson(path("s.ndjson"));
  EXPECT_EQ(back, p.sketches);
}

TEST_F(Ndjson, SkipsInvalidPenStates) {
  write("b.ndjson",
        R"({"id":"a","pair_id":"p","points":[[0.1,0.1,1,0,0],[0.2,0.2,0,0,1]]})"
        "\n"
        R"({"id":"b","pair_id":"p","points":[[0.1,0.1,0,0,0],[0.2,0.2,0,0,1]]})"
        "\n");
  NdjsonStats st;
  const auto v = load_ndjson(path("b.ndjson"), &st);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].id, "a");
  EXPECT_EQ(st.skipped, 1u);
}

TEST_F(Ndjson, MalformedLineNamesLineNumber) {
  write("m.ndjson",
        R"({"id":"a","pair_id":"p","points":[[0.1,0.1,0,0,1]]})"
        "\n{not json\n");
  try {
    load_ndjson(path("m.ndjson"));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  write("f.ndjson", R"({"id":"a","points":[[0.1,0.1,0,0,1]]})" "\n");
  EXPECT_THROW(load_ndjson(path("f.ndjson")), Error);
  write("t.ndjson", R"({"id":"a","pair_id":"p","points":[[0.1,0.1,0,1]]})" "\n");
  EXPECT_THROW(load_ndjson(path("t.ndjson")), Error);
}

TEST_F(Ndjson, RescalesOutOfRangeKeepingAspect) {
  write("r.ndjson", R"({"id":"a","pair_id":"p","points":[[10,20,1,0,0],[30,25,1,0,0],[20,30,0,0,1]]})" "\n");
  NdjsonStats st;
  const auto v = load_ndjson(path("r.ndjson"), &st);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(st.rescaled, 1u);
  EXPECT_DOUBLE_EQ(v[0].points[0].x, 0.0);
  EXPECT_DOUBLE_EQ(v[0].points[1].x, 1.0);
  EXPECT_DOUBLE_EQ(v[0].points[0].y, 0.0);
  EXPECT_DOUBLE_EQ(v[0].points[2].y, 0.5);
}

TEST_F(Ndjson, MissingFileIsNamed) {
  try {
    load_ndjson(path("nope.ndjson"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("nope.ndjson"), std::string::npos);
  }
}

using Png = TempDir;

TEST_F(Png, RoundTripIsExactFor8Bit) {
  const auto p = generate_synthetic_pair(0, 3, 3, 1);
  write_png(path("p.png"), p.photo);
  EXPECT_EQ(read_png(path("p.png")), p.photo);
  EXPECT_THROW(read_png(path("missing.png")), Error);
}

using DatasetIo = TempDir;

TEST_F(DatasetIo, SmallDatasetRoundTripAndSplit) {
  SyntheticConfig cfg;
  cfg.classes = 3;
  cfg.instances = 4;
  cfg.sketches_per_instance = 2;
  const auto d = make_synthetic_dataset(cfg);
  ASSERT_EQ(d.photos.size(), 12u);
  ASSERT_EQ(d.sketches.size(), 24u);
  EXPECT_EQ(d.photo_indices(true).size(), 6u);  // ceil(0.3 * 4) = 2 per class
  for (std::size_t i = 0; i < d.sketches.size(); ++i)
    EXPECT_EQ(d.sketches[i].pair_id, d.photos[d.sketch_photo[i]].pair_id);
  save_dataset(d, path("ds"));
  const auto back = load_dataset(path("ds"));
  ASSERT_EQ(back.photos.size(), d.photos.size());
  EXPECT_EQ(back.sketches, d.sketches);
  EXPECT_EQ(back.sketch_photo, d.sketch_photo);
  for (std::size_t i = 0; i < d.photos.size(); ++i) {
    EXPECT_EQ(back.photos[i].image, d.photos[i].image);
    EXPECT_EQ(back.photos[i].test, d.photos[i].test);
  }
}

TEST_F(DatasetIo, DefaultCountsAndByteIdenticalRerun) {
  SyntheticConfig cfg;
  const auto d = make_synthetic_dataset(cfg);
  EXPECT_EQ(d.sketches.size(), 600u);
  EXPECT_EQ(d.photos.size(), 200u);
  EXPECT_EQ(d.sketch_indices(false).size(), 420u);
  save_ndjson(path("a.ndjson"), d.sketches);
  save_ndjson(path("b.ndjson"), make_synthetic_dataset(cfg).sketches);
  EXPECT_EQ(slurp(path("a.ndjson")), slurp(path("b.ndjson")));
  cfg.seed = 1;
  const auto e = make_synthetic_dataset(cfg);
  EXPECT_EQ(e.sketches.size(), 600u);
  save_ndjson(path("c.ndjson"), e.sketches);
  EXPECT_NE(slurp(path("a.ndjson")), slurp(path("c.ndjson")));
}

TEST_F(DatasetIo, MissingIndexIsNamed) {
  try {
    load_dataset(path("empty"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("index.json"), std::string::npos);
  }
}

using Container = TempDir;

TEST_F(Container, RoundTripAndCorruption) {
  const std::vector<float> v = {1.0f, -2.5f, 3.25f};
  write_container(path("c.bin"), {{"kind", "x"}, {"n", 3}}, v);
  const auto c = read_container(path("c.bin"));
  EXPECT_EQ(c.values, v);
  EXPECT_EQ(c.header.at("kind"), "x");

  std::string bytes = slurp(path("c.bin"));
  bytes[14] ^= 0x01;  // inside the header JSON
  std::ofstream(path("bad.bin"), std::ios::binary) << bytes;
  EXPECT_THROW(read_container(path("bad.bin")), Error);

  bytes = slurp(path("c.bin"));
  std::ofstream(path("short.bin"), std::ios::binary) << bytes.substr(0, bytes.size() - 2);
  EXPECT_THROW(read_container(path("short.bin")), Error);

  std::ofstream(path("junk.bin"), std::ios::binary) << "hello world";
  EXPECT_THROW(read_container(path("junk.bin")), Error);
}

}  // namespace
}  // namespace sketchy
