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
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sketchy/common.hpp"
#include "sketchy/layers.hpp"
#include "sketchy/raster.hpp"

namespace sketchy {

// Heap storage aligned for the widest vector unit Eigen was built for.
// Reductions over unaligned maps peel a data-dependent number of leading
// elements, so malloc alignment would otherwise leak into the last bits.
template <typename T>
using Buffer = std::vector<T, Eigen::aligned_allocator<T>>;

// Channel-major feature map for one sample.
template <typename Scalar>
struct Tensor {
  int channels = 0;
  int height = 0;
  int width = 0;
  Buffer<Scalar> data;

  Tensor() = default;
  Tensor(int c, int h, int w) : channels(c), height(h), width(w), data(static_cast<std::size_t>(c) * h * w) {}
  std::size_t plane() const { return static_cast<std::size_t>(height) * width; }
};

/// Ink-positive CHW input: 1 - intensity, so background is 0.
template <typename Scalar>
Tensor<Scalar> to_input(const RasterImage& img, int channels = 3) {
  const int c = img.canvas;
  Tensor<Scalar> t(channels, c, c);
  const std::size_t plane = t.plane();
  for (std::size_t p = 0; p < plane; ++p)
    for (int ch = 0; ch < channels; ++ch)
      t.data[ch * plane + p] = Scalar(1) - static_cast<Scalar>(img.pixels[p * 3 + (ch % 3)]);
  return t;
}

template <typename Scalar>
std::vector<Scalar> l2_normalize(std::span<const Scalar> v) {
  Scalar ss = 0;
  for (Scalar x : v) ss += x * x;
  require(ss > Scalar(0) && std::isfinite(static_cast<double>(ss)),
          "l2_normalize: zero-norm vector (degenerate embedding)");
  const Scalar inv = Scalar(1) / std::sqrt(ss);
  std::vector<Scalar> out(v.begin(), v.end());
  for (Scalar& x : out) x *= inv;
  return out;
}

template <typename Scalar>
std::vector<Scalar> l2_normalize(const std::vector<Scalar>& v) {
  return l2_normalize(std::span<const Scalar>(v));
}

// Trainable fully-convolutional image encoder interpreting a ModelSpec made
// of conv, depthwise-conv, activation (ReLU) and global pooling layers. The
// pooled features are L2-normalized. Parameters live in one flat array.
template <typename Scalar>
class Encoder {
 public:
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using MapM = Eigen::Map<Mat>;
  using CMapM = Eigen::Map<const Mat>;

  static constexpr int kMinInput = 8;

  Encoder() = default;

  explicit Encoder(ModelSpec spec) : spec_(std::move(spec)) {
    require(!spec_.layers.empty(), "encoder spec has no layers");
    int ch = spec_.input_channels;
    std::size_t offset = 0;
    bool pooled = false;
    for (const LayerSpec& L : spec_.layers) {
      require(!L.fork && !L.branch, "trainable encoders are sequential (no branches)");
      Slot s;
      s.offset = offset;
      switch (L.kind) {
        case LayerKind::kConv:
          require(!pooled, "conv after global pooling");
          require(L.in_channels == 0 || L.in_channels == ch, "conv in_channels mismatch");
          require(L.stride <= L.kernel && L.stride > 0 && L.kernel > 0, "conv shape invalid");
          s.in_ch = ch;
          s.out_ch = L.out_channels;
          s.weights = static_cast<std::size_t>(L.kernel) * L.kernel * ch * L.out_channels;
          s.biases = L.bias ? static_cast<std::size_t>(L.out_channels) : 0;
          ch = L.out_channels;
          break;
        case LayerKind::kDepthwiseConv:
          require(!pooled, "depthwise-conv after global pooling");
          require(L.stride <= L.kernel && L.stride > 0 && L.kernel > 0, "depthwise shape invalid");
          s.in_ch = s.out_ch = ch;
          s.weights = static_cast<std::size_t>(L.kernel) * L.kernel * ch;
          s.biases = L.bias ? static_cast<std::size_t>(ch) : 0;
          break;
        case LayerKind::kActivation:
          s.in_ch = s.out_ch = ch;
          break;
        case LayerKind::kPooling:
          require(L.global, "trainable encoders support global average pooling only");
          pooled = true;
          s.in_ch = s.out_ch = ch;
          break;
        default:
          throw Error(std::string("layer kind '") + to_string(L.kind) +
                      "' is not supported by the trainable encoder");
      }
      offset += s.weights + s.biases;
      slots_.push_back(s);
    }
    require(pooled && spec_.layers.back().kind == LayerKind::kPooling,
            "encoder must end in global average pooling");
    require(spec_.embed_dim == 0 || spec_.embed_dim == ch,
            "embed_dim does not match the final channel count");
    spec_.embed_dim = ch;
    params_.assign(offset, Scalar(0));
  }

  const ModelSpec& spec() const { return spec_; }
  int embed_dim() const { return spec_.embed_dim; }
  std::size_t num_params() const { return params_.size(); }
  std::span<Scalar> params() { return params_; }
  std::span<const Scalar> params() const { return params_; }

  /// He-normal weights, zero biases.
  void init(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      const LayerSpec& L = spec_.layers[i];
      const Slot& s = slots_[i];
      if (s.weights == 0) continue;
      const double fan_in = L.kind == LayerKind::kConv ? double(L.kernel) * L.kernel * s.in_ch
                                                       : double(L.kernel) * L.kernel;
      std::normal_distribution<double> nd(0.0, std::sqrt(2.0 / fan_in));
      for (std::size_t k = 0; k < s.weights; ++k) params_[s.offset + k] = static_cast<Scalar>(nd(rng));
      for (std::size_t k = 0; k < s.biases; ++k) params_[s.offset + s.weights + k] = Scalar(0);
    }
  }

  template <typename Other>
  void copy_params_from(std::span<const Other> src) {
    require(src.size() == params_.size(), "parameter count mismatch");
    for (std::size_t i = 0; i < src.size(); ++i) params_[i] = static_cast<Scalar>(src[i]);
  }

  // Intermediate values kept for the backward pass.
  struct Tape {
    std::vector<Tensor<Scalar>> inputs;     // input of each layer
    std::vector<Buffer<Scalar>> cols;  // im2col buffers for conv layers
    std::vector<Scalar> pooled;
    Scalar norm = 0;
    std::vector<Scalar> embedding;
  };

  /// Unit-norm embedding of one image tensor.
  std::vector<Scalar> forward(const Tensor<Scalar>& x, Tape* tape = nullptr) const {
    require(x.height >= kMinInput && x.width >= kMinInput,
            "encoder input " + std::to_string(x.height) + "x" + std::to_string(x.width) +
                " is below the minimum size " + std::to_string(kMinInput));
    require(x.channels == spec_.input_channels, "encoder input channel mismatch");
    Tape local;
    Tape& t = tape ? *tape : local;
    t.inputs.clear();
    t.cols.assign(slots_.size(), {});
    t.inputs.reserve(slots_.size() + 1);
    t.inputs.push_back(x);
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      const LayerSpec& L = spec_.layers[i];
      const Tensor<Scalar>& in = t.inputs.back();
      Tensor<Scalar> next;
      switch (L.kind) {
        case LayerKind::kConv:
          next = conv_forward(i, in, &t.cols[i]);
          break;
        case LayerKind::kDepthwiseConv:
          next = depthwise_forward(i, in);
          break;
        case LayerKind::kActivation:
          next = in;
          for (Scalar& v : next.data) v = v > Scalar(0) ? v : Scalar(0);
          break;
        case LayerKind::kPooling: {
          next = Tensor<Scalar>(in.channels, 1, 1);
          const std::size_t plane = in.plane();
          for (int c = 0; c < in.channels; ++c) {
            Scalar s = 0;
            const Scalar* p = in.data.data() + c * plane;
            for (std::size_t k = 0; k < plane; ++k) s += p[k];
            next.data[c] = s / static_cast<Scalar>(plane);
          }
          break;
        }
        default:
          break;
      }
      if (!tape) {
        // Inference keeps only the current activation.
        t.inputs.clear();
        t.cols[i].clear();
      }
      t.inputs.push_back(std::move(next));
    }
    Tensor<Scalar> cur = std::move(t.inputs.back());
    t.inputs.pop_back();
    Scalar ss = 0;
    for (Scalar v : cur.data) ss += v * v;
    // A dead network (all-zero pooled features) has no direction; map it to
    // a fixed unit vector so embeddings stay defined.
    const bool dead = !(ss > Scalar(1e-30));
    std::vector<Scalar> emb(cur.data.size(), Scalar(0));
    Scalar norm = std::sqrt(ss);
    if (dead) {
      emb[0] = Scalar(1);
      norm = Scalar(0);
    } else {
      for (std::size_t k = 0; k < emb.size(); ++k) emb[k] = cur.data[k] / norm;
    }
    if (tape) {
      tape->pooled.assign(cur.data.begin(), cur.data.end());
      tape->norm = norm;
      tape->embedding = emb;
    }
    return emb;
  }

  std::vector<Scalar> embed(const RasterImage& img) const {
    return forward(to_input<Scalar>(img, spec_.input_channels));
  }

  /// Accumulates d(loss)/d(params) into grad given d(loss)/d(embedding).
  void backward(const Tape& tape, std::span<const Scalar> d_emb, std::span<Scalar> grad) const {
    require(grad.size() == params_.size(), "gradient buffer size mismatch");
    require(d_emb.size() == tape.embedding.size(), "embedding gradient size mismatch");
    if (tape.norm == Scalar(0)) return;
    // d pooled = (d_emb - e (e . d_emb)) / norm
    Scalar dot = 0;
    for (std::size_t k = 0; k < d_emb.size(); ++k) dot += d_emb[k] * tape.embedding[k];
    Tensor<Scalar> g(static_cast<int>(d_emb.size()), 1, 1);
    for (std::size_t k = 0; k < d_emb.size(); ++k)
      g.data[k] = (d_emb[k] - tape.embedding[k] * dot) / tape.norm;

    for (std::size_t ii = slots_.size(); ii-- > 0;) {
      const LayerSpec& L = spec_.layers[ii];
      const Tensor<Scalar>& in = tape.inputs[ii];
      Tensor<Scalar> gin;
      switch (L.kind) {
        case LayerKind::kPooling: {
          gin = Tensor<Scalar>(in.channels, in.height, in.width);
          const std::size_t plane = in.plane();
          const Scalar inv = Scalar(1) / static_cast<Scalar>(plane);
          for (int c = 0; c < in.channels; ++c)
            std::fill_n(gin.data.begin() + c * plane, plane, g.data[c] * inv);
          break;
        }
        case LayerKind::kActivation:
          gin = std::move(g);
          for (std::size_t k = 0; k < gin.data.size(); ++k)
            if (!(in.data[k] > Scalar(0))) gin.data[k] = Scalar(0);
          break;
        case LayerKind::kConv:
          gin = conv_backward(ii, in, tape.cols[ii], g, grad, ii > 0);
          break;
        case LayerKind::kDepthwiseConv:
          gin = depthwise_backward(ii, in, g, grad, ii > 0);
          break;
        default:
          break;
      }
      g = std::move(gin);
    }
  }

 private:
  struct Slot {
    std::size_t offset = 0;
    std::size_t weights = 0;
    std::size_t biases = 0;
    int in_ch = 0;
    int out_ch = 0;
  };

  static int out_size(int in, const LayerSpec& L) { return detail::conv_out(in, L.kernel, L.stride, L.padding); }

  static bool replicated(const Tensor<Scalar>& x) {
    if (x.channels < 2) return false;
    const Scalar* p = x.data.data();
    for (int c = 1; c < x.channels; ++c)
      if (!std::equal(p, p + x.plane(), p + c * x.plane())) return false;
    return true;
  }

  static bool is_pointwise(const LayerSpec& L) { return L.kernel == 1 && L.stride == 1 && L.padding == 0; }

  // cols[(ci*k + ky)*k + kx][oy*wo + ox]
  static void im2col(const Tensor<Scalar>& x, const LayerSpec& L, int ho, int wo, Buffer<Scalar>& cols) {
    im2col_planes(x, L, ho, wo, x.channels, cols);
  }

  static void im2col_planes(const Tensor<Scalar>& x, const LayerSpec& L, int ho, int wo, int planes,
                            Buffer<Scalar>& cols) {
    const int k = L.kernel;
    const std::size_t n = static_cast<std::size_t>(ho) * wo;
    cols.assign(static_cast<std::size_t>(planes) * k * k * n, Scalar(0));
    for (int ci = 0; ci < planes; ++ci) {
      const Scalar* src = x.data.data() + ci * x.plane();
      for (int ky = 0; ky < k; ++ky)
        for (int kx = 0; kx < k; ++kx) {
          Scalar* dst = cols.data() + ((static_cast<std::size_t>(ci) * k + ky) * k + kx) * n;
          for (int oy = 0; oy < ho; ++oy) {
            const int iy = oy * L.stride - L.padding + ky;
            if (iy < 0 || iy >= x.height) continue;
            Scalar* drow = dst + static_cast<std::size_t>(oy) * wo;
            const Scalar* srow = src + static_cast<std::size_t>(iy) * x.width;
            for (int ox = 0; ox < wo; ++ox) {
              const int ix = ox * L.stride - L.padding + kx;
              if (ix >= 0 && ix < x.width) drow[ox] = srow[ix];
            }
          }
        }
    }
  }

  static void col2im(const Buffer<Scalar>& dcols, const LayerSpec& L, int ho, int wo, Tensor<Scalar>& dx) {
    const int k = L.kernel;
    const std::size_t n = static_cast<std::size_t>(ho) * wo;
    for (int ci = 0; ci < dx.channels; ++ci) {
      Scalar* dst = dx.data.data() + ci * dx.plane();
      for (int ky = 0; ky < k; ++ky)
        for (int kx = 0; kx < k; ++kx) {
          const Scalar* src = dcols.data() + ((static_cast<std::size_t>(ci) * k + ky) * k + kx) * n;
          for (int oy = 0; oy < ho; ++oy) {
            const int iy = oy * L.stride - L.padding + ky;
            if (iy < 0 || iy >= dx.height) continue;
            const Scalar* srow = src + static_cast<std::size_t>(oy) * wo;
            Scalar* drow = dst + static_cast<std::size_t>(iy) * dx.width;
            for (int ox = 0; ox < wo; ++ox) {
              const int ix = ox * L.stride - L.padding + kx;
              if (ix >= 0 && ix < dx.width) drow[ix] += srow[ox];
            }
          }
        }
    }
  }

  Tensor<Scalar> conv_forward(std::size_t i, const Tensor<Scalar>& x, Buffer<Scalar>* cols) const {
    const LayerSpec& L = spec_.layers[i];
    const Slot& s = slots_[i];
    const int ho = out_size(x.height, L), wo = out_size(x.width, L);
    require(ho >= 1 && wo >= 1, "conv input too small");
    const int kk = s.in_ch * L.kernel * L.kernel;
    const int n = ho * wo;
    Tensor<Scalar> y(s.out_ch, ho, wo);
    CMapM W(params_.data() + s.offset, s.out_ch, kk);
    MapM Y(y.data.data(), s.out_ch, n);
    if (is_pointwise(L)) {
      Y.noalias() = W * CMapM(x.data.data(), kk, n);
    } else if (replicated(x)) {
      // identical input planes: one plane against channel-summed taps
      const int kq = L.kernel * L.kernel;
      im2col_planes(x, L, ho, wo, 1, *cols);
      Mat Ws = W.leftCols(kq);
      for (int c = 1; c < s.in_ch; ++c) Ws += W.middleCols(c * kq, kq);
      Y.noalias() = Ws * CMapM(cols->data(), kq, n);
    } else {
      im2col(x, L, ho, wo, *cols);
      Y.noalias() = W * CMapM(cols->data(), kk, n);
    }
    if (s.biases)
      for (int o = 0; o < s.out_ch; ++o) Y.row(o).array() += params_[s.offset + s.weights + o];
    return y;
  }

  Tensor<Scalar> conv_backward(std::size_t i, const Tensor<Scalar>& x, const Buffer<Scalar>& cols,
                               const Tensor<Scalar>& gy, std::span<Scalar> grad, bool need_input) const {
    const LayerSpec& L = spec_.layers[i];
    const Slot& s = slots_[i];
    const int ho = gy.height, wo = gy.width;
    const int kk = s.in_ch * L.kernel * L.kernel;
    const int n = ho * wo;
    CMapM GY(gy.data.data(), s.out_ch, n);
    const Scalar* colp = is_pointwise(L) ? x.data.data() : cols.data();
    MapM GW(grad.data() + s.offset, s.out_ch, kk);
    const int kq = L.kernel * L.kernel;
    if (!is_pointwise(L) && s.in_ch > 1 && cols.size() == static_cast<std::size_t>(kq) * n) {
      // forward took the replicated-plane path
      const Mat G1 = GY * CMapM(colp, kq, n).transpose();
      for (int c = 0; c < s.in_ch; ++c) GW.middleCols(c * kq, kq) += G1;
    } else {
      GW.noalias() += GY * CMapM(colp, kk, n).transpose();
    }
    if (s.biases)
      for (int o = 0; o < s.out_ch; ++o) grad[s.offset + s.weights + o] += GY.row(o).sum();
    Tensor<Scalar> gx(x.channels, x.height, x.width);
    if (!need_input) return gx;
    CMapM W(params_.data() + s.offset, s.out_ch, kk);
    if (is_pointwise(L)) {
      MapM(gx.data.data(), kk, n).noalias() = W.transpose() * GY;
    } else {
      Buffer<Scalar> dcols(static_cast<std::size_t>(kk) * n);
      MapM(dcols.data(), kk, n).noalias() = W.transpose() * GY;
      col2im(dcols, L, ho, wo, gx);
    }
    return gx;
  }

  // Zero-padded copy of one channel plane.
  static void pad_plane(const Scalar* src, int h, int w, int p, std::vector<Scalar>& dst) {
    const int pw = w + 2 * p;
    dst.assign(static_cast<std::size_t>(h + 2 * p) * pw, Scalar(0));
    for (int y = 0; y < h; ++y)
      std::copy_n(src + static_cast<std::size_t>(y) * w, w, dst.data() + static_cast<std::size_t>(y + p) * pw + p);
  }

  // Row (ky, kx) of the per-channel im2col matrix: the padded plane sampled
  // at every output position.
  static void gather_tap(const std::vector<Scalar>& padded, int pw, int ho, int wo, int st, int ky, int kx,
                         Scalar* out) {
    for (int oy = 0; oy < ho; ++oy) {
      const Scalar* src = padded.data() + static_cast<std::size_t>(oy * st + ky) * pw + kx;
      Scalar* dst = out + static_cast<std::size_t>(oy) * wo;
      if (st == 1)
        std::copy_n(src, wo, dst);
      else
        for (int ox = 0; ox < wo; ++ox) dst[ox] = src[ox * st];
    }
  }

  Tensor<Scalar> depthwise_forward(std::size_t i, const Tensor<Scalar>& x) const {
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const LayerSpec& L = spec_.layers[i];
    const Slot& s = slots_[i];
    const int ho = out_size(x.height, L), wo = out_size(x.width, L);
    require(ho >= 1 && wo >= 1, "depthwise input too small");
    const int k = L.kernel, st = L.stride;
    const int pw = x.width + 2 * L.padding;
    const Eigen::Index n = static_cast<Eigen::Index>(ho) * wo;
    Tensor<Scalar> y(x.channels, ho, wo);
    std::vector<Scalar> padded;
    Vec tap(n);
    for (int c = 0; c < x.channels; ++c) {
      const Scalar* w = params_.data() + s.offset + static_cast<std::size_t>(c) * k * k;
      const Scalar b = s.biases ? params_[s.offset + s.weights + c] : Scalar(0);
      pad_plane(x.data.data() + c * x.plane(), x.height, x.width, L.padding, padded);
      Eigen::Map<Vec> dst(y.data.data() + c * y.plane(), n);
      dst.setConstant(b);
      for (int ky = 0; ky < k; ++ky)
        for (int kx = 0; kx < k; ++kx) {
          gather_tap(padded, pw, ho, wo, st, ky, kx, tap.data());
          dst += w[ky * k + kx] * tap;
        }
    }
    return y;
  }

  Tensor<Scalar> depthwise_backward(std::size_t i, const Tensor<Scalar>& x, const Tensor<Scalar>& gy,
                                    std::span<Scalar> grad, bool need_input) const {
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const LayerSpec& L = spec_.layers[i];
    const Slot& s = slots_[i];
    const int k = L.kernel, st = L.stride, p = L.padding;
    const int ho = gy.height, wo = gy.width;
    const int pw = x.width + 2 * p;
    const Eigen::Index n = static_cast<Eigen::Index>(ho) * wo;
    Tensor<Scalar> gx(x.channels, x.height, x.width);
    std::vector<Scalar> padded, gpad;
    Vec tap(n);
    for (int c = 0; c < x.channels; ++c) {
      const Scalar* w = params_.data() + s.offset + static_cast<std::size_t>(c) * k * k;
      Scalar* gw = grad.data() + s.offset + static_cast<std::size_t>(c) * k * k;
      Eigen::Map<const Vec> g(gy.data.data() + c * gy.plane(), n);
      pad_plane(x.data.data() + c * x.plane(), x.height, x.width, p, padded);
      if (need_input) gpad.assign(padded.size(), Scalar(0));
      for (int ky = 0; ky < k; ++ky)
        for (int kx = 0; kx < k; ++kx) {
          gather_tap(padded, pw, ho, wo, st, ky, kx, tap.data());
          gw[ky * k + kx] += g.dot(tap);
          if (need_input) {
            const Scalar wv = w[ky * k + kx];
            for (int oy = 0; oy < ho; ++oy) {
              Scalar* gdst = gpad.data() + static_cast<std::size_t>(oy * st + ky) * pw + kx;
              const Scalar* grow = g.data() + static_cast<std::size_t>(oy) * wo;
              for (int ox = 0; ox < wo; ++ox) gdst[ox * st] += grow[ox] * wv;
            }
          }
        }
      if (s.biases) grad[s.offset + s.weights + c] += g.sum();
      if (need_input) {
        Scalar* dst = gx.data.data() + c * gx.plane();
        for (int yy = 0; yy < x.height; ++yy)
          std::copy_n(gpad.data() + static_cast<std::size_t>(yy + p) * pw + p, x.width,
                      dst + static_cast<std::size_t>(yy) * x.width);
      }
    }
    return gx;
  }

  ModelSpec spec_;
  std::vector<Slot> slots_;
  Buffer<Scalar> params_;
};

}  // namespace sketchy
