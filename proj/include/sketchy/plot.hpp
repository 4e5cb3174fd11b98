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
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "sketchy/common.hpp"
#include "sketchy/png.hpp"
#include "sketchy/raster.hpp"

namespace sketchy {

struct Series {
  std::string label;
  std::vector<double> x, y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

namespace detail {

struct Bounds {
  double x0, x1, y0, y1;
};

inline Bounds plot_bounds(const PlotSpec& p) {
  Bounds b{1e300, -1e300, 1e300, -1e300};
  for (const auto& s : p.series) {
    require(s.x.size() == s.y.size(), "plot series '" + s.label + "': x/y length mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      b.x0 = std::min(b.x0, s.x[i]);
      b.x1 = std::max(b.x1, s.x[i]);
      b.y0 = std::min(b.y0, s.y[i]);
      b.y1 = std::max(b.y1, s.y[i]);
    }
  }
  require(b.x0 <= b.x1, "plot has no points");
  if (b.x1 == b.x0) b.x1 = b.x0 + 1;
  if (b.y1 == b.y0) b.y1 = b.y0 + 1;
  const double pad = 0.05 * (b.y1 - b.y0);
  b.y0 -= pad;
  b.y1 += pad;
  return b;
}

inline const char* palette(std::size_t i) {
  static const char* c[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};
  return c[i % 6];
}

inline std::string xml_escape(const std::string& s) {
  std::string o;
  for (char ch : s) {
    if (ch == '&') o += "&amp;";
    else if (ch == '<') o += "&lt;";
    else if (ch == '>') o += "&gt;";
    else o += ch;
  }
  return o;
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace detail

inline void write_plot_svg(const std::string& path, const PlotSpec& p) {
  const auto b = detail::plot_bounds(p);
  const double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
  auto px = [&](double x) { return L + (x - b.x0) / (b.x1 - b.x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - b.y0) / (b.y1 - b.y0) * (H - T - B); };
  std::ofstream os(path, std::ios::trunc);
  require(static_cast<bool>(os), "cannot write '" + path + "'");
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << detail::xml_escape(p.title)
     << "</text>\n";
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = b.x0 + (b.x1 - b.x0) * i / 4, yv = b.y0 + (b.y1 - b.y0) * i / 4;
    os << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << detail::num(xv)
       << "</text>\n";
    os << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << detail::num(yv)
       << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
     << detail::xml_escape(p.x_label) << "</text>\n";
  os << "<text transform=\"translate(16," << (T + H - B) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << detail::xml_escape(p.y_label) << "</text>\n";
  for (std::size_t si = 0; si < p.series.size(); ++si) {
    const auto& s = p.series[si];
    os << "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" << detail::palette(si) << "\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) os << px(s.x[i]) << "," << py(s.y[i]) << " ";
    os << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      os << "<circle r=\"3\" fill=\"" << detail::palette(si) << "\" cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i])
         << "\"/>\n";
    os << "<text x=\"" << L + 10 << "\" y=\"" << T + 16 + 15 * si << "\" fill=\"" << detail::palette(si) << "\">"
       << detail::xml_escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
}

/// Unlabelled raster rendering of the same plot (axes box + curves).
inline void write_plot_png(const std::string& path, const PlotSpec& p, int size = 256) {
  const auto b = detail::plot_bounds(p);
  RasterImage img(size);
  const int m = size / 10;
  auto px = [&](double x) { return m + static_cast<int>(std::lround((x - b.x0) / (b.x1 - b.x0) * (size - 2 * m))); };
  auto py = [&](double y) {
    return size - 1 - m - static_cast<int>(std::lround((y - b.y0) / (b.y1 - b.y0) * (size - 2 * m)));
  };
  const int lo = m, hi = size - 1 - m;
  draw_line(img, lo, lo, lo, hi, 1, 0.0f);
  draw_line(img, hi, lo, hi, hi, 1, 0.0f);
  draw_line(img, lo, lo, hi, lo, 1, 0.0f);
  draw_line(img, lo, hi, hi, hi, 1, 0.0f);
  for (std::size_t si = 0; si < p.series.size(); ++si) {
    const auto& s = p.series[si];
    const float shade = static_cast<float>(0.15 + 0.5 * static_cast<double>(si % 3) / 2.0);
    for (std::size_t i = 0; i + 1 < s.x.size(); ++i)
      draw_line(img, py(s.y[i]), px(s.x[i]), py(s.y[i + 1]), px(s.x[i + 1]), 2, shade);
  }
  write_png(path, img);
}

inline void write_plot(const std::string& stem, const PlotSpec& p) {
  write_plot_svg(stem + ".svg", p);
  write_plot_png(stem + ".png", p);
}

}  // namespace sketchy
