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
#include <cstdio>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "sketchy/common.hpp"

namespace sketchy {

// Binary container shared by encoder, policy and gallery artifacts:
//
//   "SKCK" | u32 version | u64 header_len | header JSON | u64 fnv1a(header)
//   | u64 count | count x f32
//
// All integers and floats little-endian.
inline constexpr std::uint32_t kContainerVersion = 1;

struct Container {
  nlohmann::json header;
  std::vector<float> values;
};

namespace detail {

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& is, const std::string& path) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  require(static_cast<bool>(is), "truncated container '" + path + "'");
  return v;
}

}  // namespace detail

inline void write_container(const std::string& path, const nlohmann::json& header,
                            std::span<const float> values) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(os), "cannot write '" + path + "'");
  const std::string h = header.dump();
  os.write("SKCK", 4);
  detail::put<std::uint32_t>(os, kContainerVersion);
  detail::put<std::uint64_t>(os, h.size());
  os.write(h.data(), static_cast<std::streamsize>(h.size()));
  detail::put<std::uint64_t>(os, fnv1a(h));
  detail::put<std::uint64_t>(os, values.size());
  os.write(reinterpret_cast<const char*>(values.data()),
           static_cast<std::streamsize>(values.size() * sizeof(float)));
  require(static_cast<bool>(os), "failed writing '" + path + "'");
}

inline Container read_container(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), "missing artifact '" + path + "'");
  char magic[4];
  is.read(magic, 4);
  require(is && std::memcmp(magic, "SKCK", 4) == 0, "'" + path + "' is not a checkpoint container");
  const auto version = detail::get<std::uint32_t>(is, path);
  require(version == kContainerVersion, "'" + path + "': unsupported container version " + std::to_string(version));
  const auto hlen = detail::get<std::uint64_t>(is, path);
  require(hlen < (1ULL << 30), "'" + path + "': corrupt header length");
  std::string h(hlen, '\0');
  is.read(h.data(), static_cast<std::streamsize>(hlen));
  require(static_cast<bool>(is), "truncated container '" + path + "'");
  const auto hash = detail::get<std::uint64_t>(is, path);
  require(hash == fnv1a(h), "'" + path + "': header hash mismatch");
  const auto n = detail::get<std::uint64_t>(is, path);
  Container c;
  c.header = nlohmann::json::parse(h);
  c.values.resize(n);
  is.read(reinterpret_cast<char*>(c.values.data()), static_cast<std::streamsize>(n * sizeof(float)));
  require(static_cast<bool>(is), "truncated container '" + path + "'");
  return c;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace sketchy
