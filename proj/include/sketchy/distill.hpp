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
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sketchy/common.hpp"
#include "sketchy/dataset.hpp"
#include "sketchy/encoder.hpp"
#include "sketchy/optim.hpp"
#include "sketchy/retrieval.hpp"
#include "sketchy/sketch.hpp"

namespace sketchy {

inline double huber(double a, double b, double beta) {
  require(beta > 0, "huber: beta must be positive");
  const double d = std::abs(a - b);
  return d < beta ? 0.5 * d * d : beta * (d - 0.5 * beta);
}

// d huber / d a.
inline double huber_grad(double a, double b, double beta) {
  const double d = a - b;
  if (std::abs(d) < beta) return d;
  return d > 0 ? beta : -beta;
}

struct DistanceTriple {
  double d_sp = 0;
  double d_sn = 0;
  double d_pn = 0;
};

template <typename Scalar>
DistanceTriple distances(std::span<const Scalar> fs, std::span<const Scalar> fp, std::span<const Scalar> fn) {
  return {static_cast<double>(sq_dist(fs, fp)), static_cast<double>(sq_dist(fs, fn)),
          static_cast<double>(sq_dist(fp, fn))};
}

inline double rkd_loss(const DistanceTriple& t, const DistanceTriple& s, double beta = 1.0) {
  return huber(s.d_sp, t.d_sp, beta) + huber(s.d_sn, t.d_sn, beta) + huber(s.d_pn, t.d_pn, beta);
}

inline double combined_loss(double l_tri, double l_rkd, double lambda) {
  require(lambda >= 0.0 && lambda <= 1.0, "combined_loss: lambda must be in [0, 1]");
  return lambda * l_tri + (1.0 - lambda) * l_rkd;
}

// Frozen-teacher embeddings of every sketch (at the largest canvas) and every
// photo. Photos are full resolution for both networks.
struct TeacherCache {
  std::vector<std::vector<double>> sketch;
  std::vector<std::vector<double>> photo;
};

inline TeacherCache cache_teacher(const Encoder<float>& teacher, const Dataset& d, int full_canvas) {
  TeacherCache c;
  auto widen = [](const std::vector<float>& v) { return std::vector<double>(v.begin(), v.end()); };
  for (const auto& s : d.sketches) c.sketch.push_back(widen(teacher.embed(rasterize(s, full_canvas))));
  for (const auto& p : d.photos) c.photo.push_back(widen(teacher.embed(p.image)));
  return c;
}

struct DistillWeights {
  double lambda = 0.5;
  double margin = 0.2;
  double beta = 1.0;
};

struct StepLoss {
  double loss = 0;                  // mean over canvases and triplets
  std::vector<double> canvas_loss;  // per canvas, mean over triplets
  double tri = 0;                   // raw terms, mean over canvases and triplets
  double rkd = 0;
};

/// Mean over canvases of lambda * L_tri + (1 - lambda) * L_rkd for one batch,
/// averaged over the batch. Accumulates student gradients into `grad`.
/// `photos` holds the student's input tensors of every dataset photo.
template <typename Scalar>
StepLoss multi_canvas_step(const TeacherCache& teacher, const Encoder<Scalar>& student, const Dataset& d,
                           const std::vector<Tensor<Scalar>>& photos, const TripletBatch& batch,
                           const CanvasSet& canvases, const DistillWeights& w, std::span<Scalar> grad) {
  require(w.lambda >= 0.0 && w.lambda <= 1.0, "lambda must be in [0, 1]");
  require(batch.size() > 0, "empty batch");
  const std::size_t K = canvases.size();
  const int ch = student.spec().input_channels;
  StepLoss out;
  out.canvas_loss.assign(K, 0.0);
  const double scale = 1.0 / (static_cast<double>(K) * static_cast<double>(batch.size()));
  typename Encoder<Scalar>::Tape tp, tn, ts;
  for (const auto& t : batch.items) {
    const auto fp = student.forward(photos[t.positive], &tp);
    const auto fn = student.forward(photos[t.negative], &tn);
    const DistanceTriple T = distances<double>(teacher.sketch[t.sketch], teacher.photo[t.positive],
                                               teacher.photo[t.negative]);
    const std::size_t n = fp.size();
    std::vector<Scalar> gp(n, Scalar(0)), gn(n, Scalar(0)), gs(n);
    for (std::size_t k = 0; k < K; ++k) {
      const auto fs = student.forward(to_input<Scalar>(rasterize(d.sketches[t.sketch], canvases[k]), ch), &ts);
      const DistanceTriple S = distances<Scalar>(fs, fp, fn);
      const double tri = triplet_from_distances(S.d_sp, S.d_sn, w.margin);
      const double rkd = rkd_loss(T, S, w.beta);
      const double l = combined_loss(tri, rkd, w.lambda);
      out.canvas_loss[k] += l / static_cast<double>(batch.size());
      out.loss += l * scale;
      out.tri += tri * scale;
      out.rkd += rkd * scale;

      // Coefficients on d(d_sp), d(d_sn), d(d_pn).
      double a_sp = (1.0 - w.lambda) * huber_grad(S.d_sp, T.d_sp, w.beta);
      double a_sn = (1.0 - w.lambda) * huber_grad(S.d_sn, T.d_sn, w.beta);
      const double a_pn = (1.0 - w.lambda) * huber_grad(S.d_pn, T.d_pn, w.beta);
      if (tri > 0) {
        a_sp += w.lambda;
        a_sn -= w.lambda;
      }
      for (std::size_t i = 0; i < n; ++i) {
        const double sp = 2.0 * (fs[i] - fp[i]), sn = 2.0 * (fs[i] - fn[i]), pn = 2.0 * (fp[i] - fn[i]);
        gs[i] = static_cast<Scalar>(scale * (a_sp * sp + a_sn * sn));
        gp[i] += static_cast<Scalar>(scale * (-a_sp * sp + a_pn * pn));
        gn[i] += static_cast<Scalar>(scale * (-a_sn * sn - a_pn * pn));
      }
      student.backward(ts, gs, grad);
    }
    student.backward(tp, gp, grad);
    student.backward(tn, gn, grad);
  }
  return out;
}

struct DistillConfig {
  int epochs = 20;
  int batch = 16;
  double lr = 1e-4;
  DistillWeights weights;
  CanvasSet canvases;
  std::uint64_t seed = 0;
  bool evaluate_epochs = true;
};

struct DistillEpoch {
  int epoch = 0;
  std::vector<double> canvas_loss;
  double loss = 0;
  double tri = 0;
  double rkd = 0;
  double acc1 = 0;
  double acc10 = 0;
};

using DistillCallback = std::function<void(const DistillEpoch&)>;

/// Trains `student` against a frozen teacher. One epoch is one shuffled pass
/// over the training sketches; accuracy is measured at the largest canvas.
inline std::vector<DistillEpoch> train_student(const Encoder<float>& teacher, Encoder<float>& student, const Dataset& d,
                                               const DistillConfig& cfg, const DistillCallback& on_epoch = {}) {
  require(cfg.epochs >= 1, "epochs must be >= 1");
  require(cfg.batch >= 1, "batch size must be >= 1");
  require(cfg.lr > 0, "learning rate must be positive");
  const auto photo_pool = d.photo_indices(false);
  auto anchors = d.sketch_indices(false);
  require(photo_pool.size() >= 2, "training split needs at least two photos");
  require(!anchors.empty(), "training split has no sketches");

  const TeacherCache tc = cache_teacher(teacher, d, cfg.canvases.largest());
  const auto ptens = photo_tensors(d, student.spec().input_channels);
  std::mt19937_64 rng(mix_seed(cfg.seed, 0xD157ULL));
  Adam<float> opt(student.num_params(), {cfg.lr});
  Buffer<float> grad(student.num_params());
  std::vector<DistillEpoch> rows;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(anchors.begin(), anchors.end(), rng);
    DistillEpoch m;
    m.epoch = epoch;
    m.canvas_loss.assign(cfg.canvases.size(), 0.0);
    for (std::size_t b0 = 0; b0 < anchors.size(); b0 += cfg.batch) {
      const std::size_t b1 = std::min(anchors.size(), b0 + cfg.batch);
      const auto batch = make_triplets(d, std::span(anchors).subspan(b0, b1 - b0), photo_pool, rng);
      std::fill(grad.begin(), grad.end(), 0.0f);
      const StepLoss s = multi_canvas_step<float>(tc, student, d, ptens, batch, cfg.canvases, cfg.weights, grad);
      check_finite(s.loss, "distillation loss", epoch);
      const double wgt = static_cast<double>(batch.size()) / static_cast<double>(anchors.size());
      for (std::size_t k = 0; k < s.canvas_loss.size(); ++k) m.canvas_loss[k] += s.canvas_loss[k] * wgt;
      m.loss += s.loss * wgt;
      m.tri += s.tri * wgt;
      m.rkd += s.rkd * wgt;
      opt.step(student.params(), grad);
    }
    if (cfg.evaluate_epochs || epoch == cfg.epochs) {
      const auto e = evaluate_test(student, d, cfg.canvases.largest());
      m.acc1 = e.acc1;
      m.acc10 = e.acc10;
    }
    rows.push_back(m);
    if (on_epoch) on_epoch(m);
  }
  return rows;
}

}  // namespace sketchy
