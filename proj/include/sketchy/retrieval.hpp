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
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sketchy/common.hpp"
#include "sketchy/dataset.hpp"
#include "sketchy/encoder.hpp"
#include "sketchy/optim.hpp"
#include "sketchy/raster.hpp"

namespace sketchy {

template <typename Scalar>
Scalar sq_dist(std::span<const Scalar> a, std::span<const Scalar> b) {
  require(a.size() == b.size(), "sq_dist: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()) + ")");
  Scalar s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Scalar d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

template <typename Scalar>
Scalar sq_dist(const std::vector<Scalar>& a, const std::vector<Scalar>& b) {
  return sq_dist(std::span<const Scalar>(a), std::span<const Scalar>(b));
}

// max(0, m + d(s,p) - d(s,n)) from precomputed squared distances.
inline double triplet_from_distances(double d_sp, double d_sn, double margin) {
  return std::max(0.0, margin + d_sp - d_sn);
}

template <typename Scalar>
struct TripletGrad {
  Scalar loss = 0;
  std::vector<Scalar> ds, dp, dn;
};

template <typename Scalar>
Scalar triplet_loss(std::span<const Scalar> fs, std::span<const Scalar> fp, std::span<const Scalar> fn,
                    double margin) {
  require(margin > 0, "triplet margin must be positive");
  return static_cast<Scalar>(
      triplet_from_distances(sq_dist(fs, fp), sq_dist(fs, fn), margin));
}

/// Loss and gradients w.r.t. all three embeddings; zero gradients when the
/// hinge is inactive.
template <typename Scalar>
TripletGrad<Scalar> triplet_loss_grad(std::span<const Scalar> fs, std::span<const Scalar> fp,
                                      std::span<const Scalar> fn, double margin) {
  TripletGrad<Scalar> g;
  const std::size_t n = fs.size();
  g.ds.assign(n, Scalar(0));
  g.dp.assign(n, Scalar(0));
  g.dn.assign(n, Scalar(0));
  g.loss = triplet_loss(fs, fp, fn, margin);
  if (!(g.loss > Scalar(0))) return g;
  for (std::size_t i = 0; i < n; ++i) {
    g.ds[i] = Scalar(2) * (fn[i] - fp[i]);
    g.dp[i] = Scalar(-2) * (fs[i] - fp[i]);
    g.dn[i] = Scalar(2) * (fs[i] - fn[i]);
  }
  return g;
}

// Indices into a Dataset.
struct Triplet {
  std::size_t sketch = 0;
  std::size_t positive = 0;
  std::size_t negative = 0;
};

struct TripletBatch {
  std::vector<Triplet> items;
  std::size_t size() const { return items.size(); }
};

/// Uniform non-matching negative from `photo_pool`.
inline std::size_t sample_negative(std::span<const std::size_t> photo_pool, std::size_t positive,
                                   std::mt19937_64& rng) {
  std::size_t eligible = 0;
  for (std::size_t p : photo_pool) eligible += p != positive;
  require(eligible >= 1, "need at least two photos to sample a negative");
  std::size_t k = std::uniform_int_distribution<std::size_t>(0, eligible - 1)(rng);
  for (std::size_t p : photo_pool) {
    if (p == positive) continue;
    if (k-- == 0) return p;
  }
  return photo_pool.front();  // unreachable
}

inline TripletBatch make_triplets(const Dataset& d, std::span<const std::size_t> anchors,
                                  std::span<const std::size_t> photo_pool, std::mt19937_64& rng) {
  TripletBatch b;
  for (std::size_t a : anchors) {
    const std::size_t pos = d.sketch_photo.at(a);
    b.items.push_back({a, pos, sample_negative(photo_pool, pos, rng)});
  }
  return b;
}

/// B anchors drawn uniformly from the training sketches, each with a uniform
/// non-matching training photo.
inline TripletBatch sample_triplets(const Dataset& d, std::size_t batch, std::mt19937_64& rng) {
  const auto photos = d.photo_indices(false);
  const auto sketches = d.sketch_indices(false);
  require(photos.size() >= 2, "sample_triplets: dataset has a single photo");
  require(!sketches.empty(), "sample_triplets: no training sketches");
  std::uniform_int_distribution<std::size_t> pick(0, sketches.size() - 1);
  std::vector<std::size_t> anchors(batch);
  for (auto& a : anchors) a = sketches[pick(rng)];
  return make_triplets(d, anchors, photos, rng);
}

// ---------------------------------------------------------------- galleries

struct GalleryStore {
  std::vector<std::string> ids;
  int dim = 0;
  std::vector<float> values;  // ids.size() x dim
  std::uint64_t encoder_hash = 0;

  std::size_t size() const { return ids.size(); }
  std::span<const float> at(std::size_t i) const {
    return {values.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  std::optional<std::size_t> find(const std::string& id) const {
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (ids[i] == id) return i;
    return std::nullopt;
  }
  void add(const std::string& id, std::span<const float> e) {
    require(dim == 0 || static_cast<int>(e.size()) == dim, "gallery embedding dimension mismatch");
    require(!find(id), "duplicate gallery id '" + id + "'");
    dim = static_cast<int>(e.size());
    ids.push_back(id);
    values.insert(values.end(), e.begin(), e.end());
  }
  bool operator==(const GalleryStore&) const = default;
};

inline std::uint64_t encoder_hash(const Encoder<float>& enc) {
  std::uint64_t h = spec_hash(enc.spec());
  const auto p = enc.params();
  return fnv1a(std::string_view(reinterpret_cast<const char*>(p.data()), p.size() * sizeof(float)), h);
}

inline GalleryStore build_gallery(const Encoder<float>& enc, const Dataset& d,
                                  std::span<const std::size_t> photos) {
  require(!photos.empty(), "build_gallery: empty photo set");
  GalleryStore g;
  g.encoder_hash = encoder_hash(enc);
  for (std::size_t i : photos) g.add(d.photos.at(i).pair_id, enc.embed(d.photos[i].image));
  return g;
}

struct RankResult {
  int rank = 0;
  std::vector<double> distances;
};

/// 1 + strictly closer entries + equally close entries whose id sorts first.
inline RankResult rank_query(std::span<const float> fs, const GalleryStore& g, const std::string& true_id) {
  const auto ti = g.find(true_id);
  require(ti.has_value(), "rank_query: id '" + true_id + "' not in gallery");
  RankResult r;
  r.distances.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) r.distances[i] = sq_dist(fs, g.at(i));
  const double dt = r.distances[*ti];
  int rank = 1;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i == *ti) continue;
    if (r.distances[i] < dt || (r.distances[i] == dt && g.ids[i] < true_id)) ++rank;
  }
  r.rank = rank;
  return r;
}

inline double acc_at_k(std::span<const int> ranks, int k) {
  require(k >= 1, "acc_at_k: k must be >= 1");
  require(!ranks.empty(), "acc_at_k: empty rank list");
  std::size_t hit = 0;
  for (int r : ranks) hit += r <= k;
  return 100.0 * static_cast<double>(hit) / static_cast<double>(ranks.size());
}

struct EvalResult {
  std::vector<int> ranks;
  double acc1 = 0;
  double acc10 = 0;
};

inline EvalResult summarize(std::vector<int> ranks) {
  EvalResult e;
  e.acc1 = acc_at_k(ranks, 1);
  e.acc10 = acc_at_k(ranks, 10);
  e.ranks = std::move(ranks);
  return e;
}

/// Ranks of the given sketches rasterized at `canvas` against `gallery`.
inline EvalResult evaluate(const Encoder<float>& enc, const Dataset& d, const GalleryStore& gallery,
                           std::span<const std::size_t> sketches, int canvas) {
  std::vector<int> ranks;
  for (std::size_t s : sketches) {
    const auto e = enc.embed(rasterize(d.sketches[s], canvas));
    ranks.push_back(rank_query(e, gallery, d.photos[d.sketch_photo[s]].pair_id).rank);
  }
  return summarize(std::move(ranks));
}

inline EvalResult evaluate_test(const Encoder<float>& enc, const Dataset& d, int canvas) {
  const auto g = build_gallery(enc, d, d.photo_indices(true));
  return evaluate(enc, d, g, d.sketch_indices(true), canvas);
}

// ---------------------------------------------------------------- training

struct EpochMetrics {
  int epoch = 0;
  double loss = 0;
  double acc1 = 0;
  double acc10 = 0;
};

struct BaselineConfig {
  int epochs = 20;
  int batch = 16;
  double lr = 1e-4;
  double margin = 0.2;
  int canvas = 256;
  std::uint64_t seed = 0;
  bool evaluate_epochs = true;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

inline void check_finite(double v, const std::string& what, int epoch) {
  if (!std::isfinite(v))
    throw Error("training diverged: " + what + " is " + std::to_string(v) + " in epoch " + std::to_string(epoch) +
                " (try a lower learning rate)");
}

// Input tensors of every photo, computed once.
inline std::vector<Tensor<float>> photo_tensors(const Dataset& d, int channels) {
  std::vector<Tensor<float>> out;
  out.reserve(d.photos.size());
  for (const auto& p : d.photos) out.push_back(to_input<float>(p.image, channels));
  return out;
}

/// Triplet training of a single encoder shared by sketches and photos.
/// One epoch is one shuffled pass over the training sketches.
inline std::vector<EpochMetrics> train_baseline(Encoder<float>& enc, const Dataset& d, const BaselineConfig& cfg,
                                                const EpochCallback& on_epoch = {}) {
  require(cfg.epochs >= 1, "epochs must be >= 1");
  require(cfg.batch >= 1, "batch size must be >= 1");
  require(cfg.lr > 0, "learning rate must be positive");
  const auto photos = d.photo_indices(false);
  auto anchors = d.sketch_indices(false);
  require(photos.size() >= 2, "training split needs at least two photos");
  require(!anchors.empty(), "training split has no sketches");
  const auto ptens = photo_tensors(d, enc.spec().input_channels);
  const int ch = enc.spec().input_channels;

  std::mt19937_64 rng(mix_seed(cfg.seed, 0x7E11ULL));
  Adam<float> opt(enc.num_params(), {cfg.lr});
  Buffer<float> grad(enc.num_params());
  std::vector<EpochMetrics> rows;
  typename Encoder<float>::Tape ts, tp, tn;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(anchors.begin(), anchors.end(), rng);
    double total = 0;
    for (std::size_t b0 = 0; b0 < anchors.size(); b0 += cfg.batch) {
      const std::size_t b1 = std::min(anchors.size(), b0 + cfg.batch);
      const auto batch = make_triplets(d, std::span(anchors).subspan(b0, b1 - b0), photos, rng);
      std::fill(grad.begin(), grad.end(), 0.0f);
      const float inv = 1.0f / static_cast<float>(batch.size());
      for (const auto& t : batch.items) {
        const auto fs = enc.forward(to_input<float>(rasterize(d.sketches[t.sketch], cfg.canvas), ch), &ts);
        const auto fp = enc.forward(ptens[t.positive], &tp);
        const auto fn = enc.forward(ptens[t.negative], &tn);
        auto g = triplet_loss_grad<float>(fs, fp, fn, cfg.margin);
        check_finite(g.loss, "triplet loss", epoch);
        total += g.loss;
        if (!(g.loss > 0)) continue;
        for (auto* v : {&g.ds, &g.dp, &g.dn})
          for (float& x : *v) x *= inv;
        enc.backward(ts, g.ds, grad);
        enc.backward(tp, g.dp, grad);
        enc.backward(tn, g.dn, grad);
      }
      opt.step(enc.params(), grad);
    }
    EpochMetrics m;
    m.epoch = epoch;
    m.loss = total / static_cast<double>(anchors.size());
    if (cfg.evaluate_epochs || epoch == cfg.epochs) {
      const auto e = evaluate_test(enc, d, cfg.canvas);
      m.acc1 = e.acc1;
      m.acc10 = e.acc10;
    }
    rows.push_back(m);
    if (on_epoch) on_epoch(m);
  }
  return rows;
}

}  // namespace sketchy
