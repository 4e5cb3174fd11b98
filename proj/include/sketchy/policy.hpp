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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sketchy/common.hpp"
#include "sketchy/dataset.hpp"
#include "sketchy/encoder.hpp"
#include "sketchy/flops.hpp"
#include "sketchy/optim.hpp"
#include "sketchy/retrieval.hpp"
#include "sketchy/sketch.hpp"

namespace sketchy {

inline constexpr int kPolicyInput = 5;

// Gated recurrent cell (gate order r, z, n; separate input and hidden biases)
// plus a linear head over K canvases, in one flat array:
//   W_ih [3H x 5] | W_hh [3H x H] | b_ih [3H] | b_hh [3H] | W_out [K x H] | b_out [K]
template <typename Scalar>
class PolicyParams {
 public:
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using CMapM = Eigen::Map<const Mat>;
  using CMapV = Eigen::Map<const Vec>;
  using MapM = Eigen::Map<Mat>;
  using MapV = Eigen::Map<Vec>;

  PolicyParams() = default;
  PolicyParams(int hidden, int canvases) : hidden_(hidden), canvases_(canvases) {
    require(hidden >= 1, "policy hidden width must be >= 1");
    require(canvases >= 2, "policy needs at least two canvases");
    values_.assign(total(), Scalar(0));
  }

  static std::size_t cell_count(int h) {
    return 3 * ((static_cast<std::size_t>(kPolicyInput) + h) * h + 2 * static_cast<std::size_t>(h));
  }
  std::size_t cell_params() const { return cell_count(hidden_); }
  std::size_t head_params() const { return static_cast<std::size_t>(canvases_) * hidden_ + canvases_; }
  std::size_t total() const { return cell_params() + head_params(); }
  int hidden() const { return hidden_; }
  int canvases() const { return canvases_; }

  std::span<Scalar> values() { return values_; }
  std::span<const Scalar> values() const { return values_; }

  /// Uniform(-1/sqrt(H), 1/sqrt(H)) for every entry.
  void init(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const double a = 1.0 / std::sqrt(static_cast<double>(hidden_));
    std::uniform_real_distribution<double> u(-a, a);
    for (Scalar& v : values_) v = static_cast<Scalar>(u(rng));
  }

  std::size_t off_wih() const { return 0; }
  std::size_t off_whh() const { return off_wih() + 3 * static_cast<std::size_t>(hidden_) * kPolicyInput; }
  std::size_t off_bih() const { return off_whh() + 3 * static_cast<std::size_t>(hidden_) * hidden_; }
  std::size_t off_bhh() const { return off_bih() + 3 * static_cast<std::size_t>(hidden_); }
  std::size_t off_wout() const { return off_bhh() + 3 * static_cast<std::size_t>(hidden_); }
  std::size_t off_bout() const { return off_wout() + static_cast<std::size_t>(canvases_) * hidden_; }

  CMapM w_ih() const { return CMapM(values_.data() + off_wih(), 3 * hidden_, kPolicyInput); }
  CMapM w_hh() const { return CMapM(values_.data() + off_whh(), 3 * hidden_, hidden_); }
  CMapV b_ih() const { return CMapV(values_.data() + off_bih(), 3 * hidden_); }
  CMapV b_hh() const { return CMapV(values_.data() + off_bhh(), 3 * hidden_); }
  CMapM w_out() const { return CMapM(values_.data() + off_wout(), canvases_, hidden_); }
  CMapV b_out() const { return CMapV(values_.data() + off_bout(), canvases_); }

 private:
  int hidden_ = 0;
  int canvases_ = 0;
  Buffer<Scalar> values_;
};

template <typename Scalar>
struct SequenceTape {
  std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> x, h, r, z, n, ghn;  // h[0] is the initial state
};

/// Final hidden state after feeding every point of `s`.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> encode_sequence(const PolicyParams<Scalar>& p, const SketchVector& s,
                                                         SequenceTape<Scalar>* tape = nullptr) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  require(!s.points.empty(), "encode_sequence: empty sketch");
  const int H = p.hidden();
  const auto wih = p.w_ih();
  const auto whh = p.w_hh();
  const auto bih = p.b_ih();
  const auto bhh = p.b_hh();
  Vec h = Vec::Zero(H);
  if (tape) {
    *tape = {};
    tape->h.push_back(h);
  }
  Vec x(kPolicyInput), gi(3 * H), gh(3 * H), r(H), z(H), n(H);
  for (const auto& pt : s.points) {
    x << Scalar(pt.x), Scalar(pt.y), Scalar(pt.q1), Scalar(pt.q2), Scalar(pt.q3);
    gi.noalias() = wih * x + bih;
    gh.noalias() = whh * h + bhh;
    r = (-(gi.segment(0, H) + gh.segment(0, H))).array().exp().unaryExpr([](Scalar e) { return Scalar(1) / (Scalar(1) + e); });
    z = (-(gi.segment(H, H) + gh.segment(H, H))).array().exp().unaryExpr([](Scalar e) { return Scalar(1) / (Scalar(1) + e); });
    n = (gi.segment(2 * H, H).array() + r.array() * gh.segment(2 * H, H).array()).tanh();
    Vec hn = ((Scalar(1) - z.array()) * n.array() + z.array() * h.array()).matrix();
    if (tape) {
      tape->x.push_back(x);
      tape->r.push_back(r);
      tape->z.push_back(z);
      tape->n.push_back(n);
      tape->ghn.push_back(gh.segment(2 * H, H));
      tape->h.push_back(hn);
    }
    h = std::move(hn);
  }
  return h;
}

template <typename Scalar>
std::vector<Scalar> softmax(std::span<const Scalar> logits) {
  require(!logits.empty(), "softmax: empty input");
  const Scalar mx = *std::max_element(logits.begin(), logits.end());
  std::vector<Scalar> p(logits.size());
  Scalar sum = 0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += p[i] = std::exp(logits[i] - mx);
  for (Scalar& v : p) v /= sum;
  return p;
}

template <typename Scalar>
struct PolicyOutput {
  std::vector<Scalar> logits;
  std::vector<Scalar> probs;
};

template <typename Scalar>
PolicyOutput<Scalar> policy_head(const PolicyParams<Scalar>& p, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& h) {
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> l = p.w_out() * h + p.b_out();
  PolicyOutput<Scalar> out;
  out.logits.assign(l.data(), l.data() + l.size());
  out.probs = softmax<Scalar>(out.logits);
  for (Scalar v : out.probs) require(std::isfinite(static_cast<double>(v)), "policy output is not finite");
  return out;
}

template <typename Scalar>
PolicyOutput<Scalar> policy_forward(const PolicyParams<Scalar>& p, const SketchVector& s,
                                    SequenceTape<Scalar>* tape = nullptr) {
  return policy_head(p, encode_sequence(p, s, tape));
}

struct CanvasDraw {
  std::size_t index = 0;
  double log_prob = 0;
};

/// Inverse-CDF draw from a categorical distribution.
template <typename Scalar>
CanvasDraw sample_canvas(std::span<const Scalar> probs, std::mt19937_64& rng) {
  require(!probs.empty(), "sample_canvas: empty distribution");
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0;
  std::size_t idx = probs.size() - 1;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += static_cast<double>(probs[i]);
    if (u < acc) {
      idx = i;
      break;
    }
  }
  while (!(probs[idx] > Scalar(0)) && idx > 0) --idx;  // guard against round-off past a zero tail
  return {idx, std::log(static_cast<double>(probs[idx]))};
}

template <typename Scalar>
std::size_t argmax(std::span<const Scalar> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

/// sum_j q_j p_j / (q_max - q_min)
template <typename Scalar>
double flops_regularizer(std::span<const Scalar> probs, std::span<const double> q) {
  require(probs.size() == q.size() && q.size() >= 2, "flops_regularizer: size mismatch");
  const auto [lo, hi] = std::minmax_element(q.begin(), q.end());
  require(*hi > *lo, "flops_regularizer: degenerate FLOPs table (q_max == q_min)");
  double s = 0;
  for (std::size_t j = 0; j < q.size(); ++j) s += q[j] * static_cast<double>(probs[j]);
  return s / (*hi - *lo);
}

template <typename Scalar>
double flops_regularizer(std::span<const Scalar> probs, const FlopsTable& t) {
  return flops_regularizer(probs, std::span<const double>(t.q));
}

enum class FlopsReward {
  kSampled,   // -q_a / (q_max - q_min) of the drawn canvas
  kExpected,  // -L_F(probs); identical for every action, so carries no policy gradient
};

struct RewardConfig {
  double lambda_r = 0.4;
  double lambda_tri = 0.48;
  double lambda_f = 0.35;
  bool use_rank = true;
  bool use_tri = true;
  bool use_flops = true;
  FlopsReward flops_reward = FlopsReward::kSampled;
};

inline void validate_reward(const RewardConfig& c) {
  require(c.lambda_r >= 0 && c.lambda_tri >= 0, "reward weights must be >= 0");
  require(c.lambda_f >= 0 && c.lambda_f <= 1, "lambda_f must be in [0, 1]");
}

inline double accuracy_reward(int rank, double l_tri, const RewardConfig& c) {
  require(rank >= 1, "accuracy_reward: rank must be >= 1");
  double r = 0;
  if (c.use_rank) r += c.lambda_r / static_cast<double>(rank);
  if (c.use_tri) r -= c.lambda_tri * l_tri;
  return r;
}

inline double total_reward(double r_acc, double r_comp, double lambda_f) {
  require(lambda_f >= 0.0 && lambda_f <= 1.0, "total_reward: lambda_f must be in [0, 1]");
  return lambda_f * r_comp + (1.0 - lambda_f) * r_acc;
}

struct PolicySample {
  double log_prob = 0;
  double reward = 0;
};

/// -(1/B) sum_i log p_i R_i
inline double reinforce_loss(std::span<const PolicySample> batch) {
  require(!batch.empty(), "reinforce_loss: empty batch");
  double s = 0;
  for (const auto& b : batch) s += b.log_prob * b.reward;
  return -s / static_cast<double>(batch.size());
}

/// Accumulates d/dθ of -(weight) * log p(action) for one sequence into grad.
template <typename Scalar>
void log_prob_backward(const PolicyParams<Scalar>& p, const SequenceTape<Scalar>& tape,
                       const PolicyOutput<Scalar>& out, std::size_t action, double weight, std::span<Scalar> grad) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using MapM = typename PolicyParams<Scalar>::MapM;
  using MapV = typename PolicyParams<Scalar>::MapV;
  require(grad.size() == p.total(), "policy gradient buffer size mismatch");
  const int H = p.hidden(), K = p.canvases();
  // d(-w log p_a)/d logits = -w (onehot(a) - p)
  Vec dl(K);
  for (int k = 0; k < K; ++k)
    dl[k] = static_cast<Scalar>(-weight * ((static_cast<std::size_t>(k) == action ? 1.0 : 0.0) - out.probs[k]));
  const Vec& hT = tape.h.back();
  MapM(grad.data() + p.off_wout(), K, H).noalias() += dl * hT.transpose();
  MapV(grad.data() + p.off_bout(), K) += dl;
  Vec dh = p.w_out().transpose() * dl;

  MapM gwih(grad.data() + p.off_wih(), 3 * H, kPolicyInput);
  MapM gwhh(grad.data() + p.off_whh(), 3 * H, H);
  MapV gbih(grad.data() + p.off_bih(), 3 * H);
  MapV gbhh(grad.data() + p.off_bhh(), 3 * H);
  const auto whh = p.w_hh();
  Vec dgi(3 * H), dgh(3 * H);
  for (std::size_t t = tape.x.size(); t-- > 0;) {
    const Vec& r = tape.r[t];
    const Vec& z = tape.z[t];
    const Vec& n = tape.n[t];
    const Vec& hp = tape.h[t];
    const Vec dn = dh.cwiseProduct((Scalar(1) - z.array()).matrix());
    const Vec dz = dh.cwiseProduct(hp - n);
    const Vec dan = dn.cwiseProduct((Scalar(1) - n.array().square()).matrix());
    const Vec dr = dan.cwiseProduct(tape.ghn[t]);
    const Vec daz = dz.cwiseProduct((z.array() * (Scalar(1) - z.array())).matrix());
    const Vec dar = dr.cwiseProduct((r.array() * (Scalar(1) - r.array())).matrix());
    dgi << dar, daz, dan;
    dgh << dar, daz, dan.cwiseProduct(r);
    gwih.noalias() += dgi * tape.x[t].transpose();
    gbih += dgi;
    gwhh.noalias() += dgh * hp.transpose();
    gbhh += dgh;
    dh = dh.cwiseProduct(z) + whh.transpose() * dgh;
  }
}

/// Gradient of the REINFORCE objective; rewards are constants.
template <typename Scalar>
double reinforce_backward(const PolicyParams<Scalar>& p, const std::vector<SequenceTape<Scalar>>& tapes,
                          const std::vector<PolicyOutput<Scalar>>& outs, std::span<const std::size_t> actions,
                          std::span<const double> rewards, std::span<Scalar> grad) {
  const std::size_t B = tapes.size();
  require(B >= 1 && outs.size() == B && actions.size() == B && rewards.size() == B, "reinforce batch mismatch");
  std::vector<PolicySample> samples(B);
  for (std::size_t i = 0; i < B; ++i) {
    samples[i] = {std::log(static_cast<double>(outs[i].probs[actions[i]])), rewards[i]};
    if (rewards[i] != 0.0)
      log_prob_backward(p, tapes[i], outs[i], actions[i], rewards[i] / static_cast<double>(B), grad);
  }
  return reinforce_loss(samples);
}

/// Greedy canvas index for deployment.
template <typename Scalar>
std::size_t select_canvas_index(const PolicyParams<Scalar>& p, const SketchVector& s) {
  const auto out = policy_forward(p, s);
  return argmax<Scalar>(out.probs);
}

template <typename Scalar>
int select_canvas(const PolicyParams<Scalar>& p, const SketchVector& s, const CanvasSet& canvases) {
  require(static_cast<std::size_t>(p.canvases()) == canvases.size(), "policy and canvas set disagree on K");
  return canvases[select_canvas_index(p, s)];
}

// ---------------------------------------------------------------- training

// Frozen-student embeddings keyed by (sketch, completion level, canvas).
// Pure function of its inputs, so caching does not change results.
class EmbeddingMemo {
 public:
  EmbeddingMemo(const Encoder<float>& student, const Dataset& d, const CanvasSet& canvases)
      : student_(student), d_(d), canvases_(canvases) {}

  const std::vector<float>& get(std::size_t sketch, std::size_t level, std::size_t canvas,
                                const SketchVector& partial) {
    const std::uint64_t key = (static_cast<std::uint64_t>(sketch) << 24) | (level << 8) | canvas;
    auto it = memo_.find(key);
    if (it == memo_.end())
      it = memo_.emplace(key, student_.embed(rasterize(partial, canvases_[canvas]))).first;
    return it->second;
  }

 private:
  const Encoder<float>& student_;
  const Dataset& d_;
  CanvasSet canvases_;
  std::unordered_map<std::uint64_t, std::vector<float>> memo_;
};

struct SelectorConfig {
  int epochs = 50;
  int batch = 32;
  double lr = 1e-4;
  int hidden = 128;
  std::size_t t_max = 100;
  double margin = 0.2;
  RewardConfig reward;
  bool baseline = false;  // moving-average reward baseline
  double baseline_momentum = 0.9;
  std::uint64_t seed = 0;
  bool evaluate_epochs = true;
};

struct SelectorEpoch {
  int epoch = 0;
  double mean_reward = 0;
  double mean_r_acc = 0;
  double mean_r_comp = 0;
  double mean_canvas = 0;
  double expected_flops = 0;  // student FLOPs under the policy's distribution
  double acc1 = 0;
};

struct SelectorEval {
  std::vector<int> ranks;
  std::vector<std::size_t> canvas_index;
  std::vector<QueryCost> costs;
  double acc1 = 0;
  double acc10 = 0;
  double mean_flops = 0;  // selector + student per query
  double mean_canvas = 0;
};

// Query preprocessing for the selector: full sketch capped at t_max points.
inline SketchVector selector_input(const SketchVector& s, std::size_t t_max) { return simplify_dp(s, t_max); }

inline SelectorEval evaluate_selector(const PolicyParams<float>& policy, const Encoder<float>& student,
                                      const Dataset& d, const GalleryStore& gallery,
                                      std::span<const std::size_t> sketches, const FlopsTable& table,
                                      const CanvasSet& canvases, std::size_t t_max,
                                      EmbeddingMemo* memo = nullptr) {
  require(!sketches.empty(), "evaluate_selector: no query sketches");
  const ModelSpec sel = selector_spec(policy.hidden(), policy.canvases(), static_cast<int>(t_max));
  SelectorEval ev;
  const std::size_t full = completion_grid().size() - 1;
  for (std::size_t s : sketches) {
    const SketchVector q = selector_input(d.sketches[s], t_max);
    const std::size_t k = select_canvas_index(policy, q);
    const std::vector<float> e = memo ? memo->get(s, full, k, d.sketches[s])
                                      : student.embed(rasterize(d.sketches[s], canvases[k]));
    ev.ranks.push_back(rank_query(e, gallery, d.photos[d.sketch_photo[s]].pair_id).rank);
    ev.canvas_index.push_back(k);
    ev.costs.push_back({q.size(), k});
    ev.mean_canvas += canvases[k];
  }
  ev.acc1 = acc_at_k(ev.ranks, 1);
  ev.acc10 = acc_at_k(ev.ranks, 10);
  ev.mean_flops = average_flops_metric(sel, table, ev.costs);
  ev.mean_canvas /= static_cast<double>(sketches.size());
  return ev;
}

using SelectorCallback = std::function<void(const SelectorEpoch&)>;

/// REINFORCE training of the canvas policy against a frozen student and a
/// prebuilt training gallery. `test_gallery` is only used for the per-epoch
/// accuracy column.
inline std::vector<SelectorEpoch> train_selector(PolicyParams<float>& policy, const Encoder<float>& student,
                                                 const GalleryStore& train_gallery,
                                                 const GalleryStore& test_gallery, const FlopsTable& table,
                                                 const Dataset& d, const CanvasSet& canvases,
                                                 const SelectorConfig& cfg, const SelectorCallback& on_epoch = {},
                                                 EmbeddingMemo* shared_memo = nullptr) {
  require(cfg.epochs >= 1, "epochs must be >= 1");
  require(cfg.batch >= 1, "batch size must be >= 1");
  require(cfg.lr > 0, "learning rate must be positive");
  require(cfg.t_max >= 2, "t_max must be >= 2");
  validate_reward(cfg.reward);
  validate_table(table);
  require(table.size() == canvases.size(), "FLOPs table and canvas set disagree on K");
  require(static_cast<std::size_t>(policy.canvases()) == canvases.size(), "policy and canvas set disagree on K");
  require(train_gallery.size() >= 2, "training gallery needs at least two photos");

  auto anchors = d.sketch_indices(false);
  require(!anchors.empty(), "training split has no sketches");
  const auto grid = completion_grid();
  const double span_q = table.q_max() - table.q_min();
  const double lambda_f = cfg.reward.use_flops ? cfg.reward.lambda_f : 0.0;
  std::vector<std::size_t> pos_row(d.photos.size(), 0);
  for (std::size_t i = 0; i < d.photos.size(); ++i) {
    const auto r = train_gallery.find(d.photos[i].pair_id);
    if (r) pos_row[i] = *r;
  }
  std::vector<std::size_t> rows(train_gallery.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});

  // Runs against the same frozen student may share one memo.
  EmbeddingMemo own_memo(student, d, canvases);
  EmbeddingMemo& memo = shared_memo ? *shared_memo : own_memo;
  const auto test_sketches = d.sketch_indices(true);
  std::mt19937_64 rng(mix_seed(cfg.seed, 0x5E1EC7ULL));
  Adam<float> opt(policy.total(), {cfg.lr});
  Buffer<float> grad(policy.total());
  double baseline = 0;
  bool have_baseline = false;
  std::vector<SelectorEpoch> out;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(anchors.begin(), anchors.end(), rng);
    SelectorEpoch m;
    m.epoch = epoch;
    for (std::size_t b0 = 0; b0 < anchors.size(); b0 += cfg.batch) {
      const std::size_t b1 = std::min(anchors.size(), b0 + cfg.batch);
      const std::size_t B = b1 - b0;
      std::vector<SequenceTape<float>> tapes(B);
      std::vector<PolicyOutput<float>> outs(B);
      std::vector<std::size_t> actions(B);
      std::vector<double> rewards(B);
      for (std::size_t i = 0; i < B; ++i) {
        const std::size_t s = anchors[b0 + i];
        const std::size_t level = std::uniform_int_distribution<std::size_t>(0, grid.size() - 1)(rng);
        const SketchVector partial = render_partial(d.sketches[s], grid[level]);
        const SketchVector capped = simplify_dp(partial, cfg.t_max);
        outs[i] = policy_forward(policy, capped, &tapes[i]);
        const CanvasDraw draw = sample_canvas<float>(outs[i].probs, rng);
        actions[i] = draw.index;

        const auto& fs = memo.get(s, level, draw.index, partial);
        const std::size_t pos = pos_row[d.sketch_photo[s]];
        const std::size_t neg = sample_negative(rows, pos, rng);
        const int rank = rank_query(fs, train_gallery, train_gallery.ids[pos]).rank;
        const double l_tri = triplet_from_distances(sq_dist<float>(fs, train_gallery.at(pos)),
                                                    sq_dist<float>(fs, train_gallery.at(neg)), cfg.margin);
        const double r_acc = accuracy_reward(rank, l_tri, cfg.reward);
        const double r_comp = cfg.reward.flops_reward == FlopsReward::kSampled
                                  ? -table.q[draw.index] / span_q
                                  : -flops_regularizer<float>(outs[i].probs, table);
        rewards[i] = total_reward(r_acc, r_comp, lambda_f);

        m.mean_reward += rewards[i];
        m.mean_r_acc += r_acc;
        m.mean_r_comp += r_comp;
        m.mean_canvas += canvases[draw.index];
        for (std::size_t k = 0; k < table.size(); ++k) m.expected_flops += table.q[k] * outs[i].probs[k];
      }
      std::vector<double> adv = rewards;
      if (cfg.baseline) {
        double mean = 0;
        for (double r : rewards) mean += r;
        mean /= static_cast<double>(B);
        if (have_baseline)
          for (double& a : adv) a -= baseline;
        baseline = have_baseline ? cfg.baseline_momentum * baseline + (1.0 - cfg.baseline_momentum) * mean : mean;
        have_baseline = true;
      }
      std::fill(grad.begin(), grad.end(), 0.0f);
      const double loss = reinforce_backward<float>(policy, tapes, outs, actions, adv, grad);
      check_finite(loss, "policy loss", epoch);
      opt.step(policy.values(), grad);
    }
    const double n = static_cast<double>(anchors.size());
    m.mean_reward /= n;
    m.mean_r_acc /= n;
    m.mean_r_comp /= n;
    m.mean_canvas /= n;
    m.expected_flops /= n;
    if (cfg.evaluate_epochs || epoch == cfg.epochs)
      m.acc1 = evaluate_selector(policy, student, d, test_gallery, test_sketches, table, canvases, cfg.t_max,
                                 &memo)
                   .acc1;
    out.push_back(m);
    if (on_epoch) on_epoch(m);
  }
  return out;
}

}  // namespace sketchy
