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

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sketchy/common.hpp"
#include "sketchy/raster.hpp"

namespace sketchy {

// 8-bit RGB PNG I/O via libpng's simplified API.
inline void write_png(const std::string& path, const RasterImage& img) {
  const std::size_t n = img.pixels.size();
  std::vector<std::uint8_t> buf(n);
  for (std::size_t i = 0; i < n; ++i)
    buf[i] = static_cast<std::uint8_t>(std::lround(std::clamp(img.pixels[i], 0.0f, 1.0f) * 255.0f));
  png_image pi{};
  pi.version = PNG_IMAGE_VERSION;
  pi.width = static_cast<png_uint_32>(img.canvas);
  pi.height = static_cast<png_uint_32>(img.canvas);
  pi.format = PNG_FORMAT_RGB;
  const int ok = png_image_write_to_file(&pi, path.c_str(), 0, buf.data(), 0, nullptr);
  require(ok != 0, "cannot write PNG '" + path + "': " + pi.message);
}

// Square images only; any input format is converted to RGB.
inline RasterImage read_png(const std::string& path) {
  png_image pi{};
  pi.version = PNG_IMAGE_VERSION;
  require(png_image_begin_read_from_file(&pi, path.c_str()) != 0,
          "cannot read PNG '" + path + "': " + pi.message);
  pi.format = PNG_FORMAT_RGB;
  if (pi.width != pi.height) {
    png_image_free(&pi);
    throw Error("PNG '" + path + "' is not square");
  }
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(pi));
  if (png_image_finish_read(&pi, nullptr, buf.data(), 0, nullptr) == 0)
    throw Error("cannot decode PNG '" + path + "': " + pi.message);
  RasterImage img(static_cast<int>(pi.width));
  for (std::size_t i = 0; i < buf.size(); ++i) img.pixels[i] = static_cast<float>(buf[i]) / 255.0f;
  return img;
}

}  // namespace sketchy
