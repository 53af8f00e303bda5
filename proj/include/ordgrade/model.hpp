// Copyright 2026 The ordgrade Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ORDGRADE_MODEL_HPP_
#define ORDGRADE_MODEL_HPP_

// Desk-scale classifier: a three-stage tanh backbone producing f1 -> f3 -> f5,
// bilinear fusion of the three levels, and the learned metric-loss centers.
// Also the momentum SGD optimizer and the per-epoch training loop.

#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ordgrade/dataset.hpp"
#include "ordgrade/hbp.hpp"
#include "ordgrade/losses.hpp"
#include "ordgrade/metrics.hpp"
#include "ordgrade/numerics.hpp"
#include "ordgrade/ordinal.hpp"
#include "ordgrade/rng.hpp"

namespace ordgrade {

struct ModelDims {
  std::size_t d_in = 16;
  std::size_t d1 = 16;
  std::size_t d3 = 16;
  std::size_t d5 = 16;
  std::size_t m = 64;
  std::size_t num_classes = 5;

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

/// Each stage is tanh(W x + b); W is (out x in), b is (out x 1).
struct BackboneParams {
  Mat W1, b1, W3, b3, W5, b5;

  static BackboneParams init(const ModelDims& d, Rng& rng) {
    BackboneParams p;
    p.W1 = glorot_uniform(d.d1, d.d_in, rng);
    p.W3 = glorot_uniform(d.d3, d.d1, rng);
    p.W5 = glorot_uniform(d.d5, d.d3, rng);
    p.b1 = Mat(d.d1, 1);
    p.b3 = Mat(d.d3, 1);
    p.b5 = Mat(d.d5, 1);
    return p;
  }
};

namespace detail {
inline Vec tanh_stage(const Mat& w, const Mat& b, std::span<const double> x) {
  Vec z = matvec(w, x);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = std::tanh(z[i] + b(i, 0));
  return z;
}
}  // namespace detail

inline FeatureTriple backbone_forward(const BackboneParams& p, std::span<const double> x) {
  FeatureTriple f;
  f.f1 = detail::tanh_stage(p.W1, p.b1, x);
  f.f3 = detail::tanh_stage(p.W3, p.b3, f.f1);
  f.f5 = detail::tanh_stage(p.W5, p.b5, f.f3);
  return f;
}

/// Backward through the chain; grad.f3 and grad.f5 receive contributions both
/// from fusion and from the later stages.
inline BackboneParams backbone_backward(const BackboneParams& p, std::span<const double> x,
                                        const FeatureTriple& f, const FeatureTriple& grad) {
  BackboneParams g;
  auto stage = [](const Vec& h, const Vec& gh) {
    Vec gz(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) gz[i] = gh[i] * (1.0 - h[i] * h[i]);
    return gz;
  };
  const Vec gz5 = stage(f.f5, grad.f5);
  g.W5 = outer(gz5, f.f3);
  g.b5 = Mat::column(gz5);
  Vec g3 = grad.f3;
  axpy(g3, matvec_t(p.W5, gz5));

  const Vec gz3 = stage(f.f3, g3);
  g.W3 = outer(gz3, f.f1);
  g.b3 = Mat::column(gz3);
  Vec g1 = grad.f1;
  axpy(g1, matvec_t(p.W3, gz3));

  const Vec gz1 = stage(f.f1, g1);
  g.W1 = outer(gz1, x);
  g.b1 = Mat::column(gz1);
  return g;
}

inline constexpr double kNormFloor = 1e-12;

struct Model {
  ModelDims dims;
  BackboneParams backbone;
  BilinearParams fusion;
  CenterBank bank;

  static Model init(const ModelDims& dims, const MetricParams& metric, Rng rng) {
    Model mdl;
    mdl.dims = dims;
    Rng wr = rng.split("backbone");
    mdl.backbone = BackboneParams::init(dims, wr);
    Rng fr = rng.split("fusion");
    mdl.fusion = BilinearParams::init(dims.d1, dims.d3, dims.d5, dims.m, dims.num_classes, fr);
    Rng cr = rng.split("centers");
    mdl.bank = CenterBank::random(dims.num_classes, 3 * dims.m, metric, cr);
    return mdl;
  }

  struct Param {
    std::string name;
    Mat* value;
  };
  struct ConstParam {
    std::string name;
    const Mat* value;
  };

  /// Fixed order used by the optimizer, checkpoints and gradient checks.
  std::vector<Param> params() {
    return {{"backbone.W1", &backbone.W1}, {"backbone.b1", &backbone.b1},
            {"backbone.W3", &backbone.W3}, {"backbone.b3", &backbone.b3},
            {"backbone.W5", &backbone.W5}, {"backbone.b5", &backbone.b5},
            {"fusion.U", &fusion.U},       {"fusion.V", &fusion.V},
            {"fusion.S", &fusion.S},       {"fusion.P", &fusion.P},
            {"metric.centers", &bank.centers()}};
  }
  std::vector<ConstParam> params() const {
    std::vector<ConstParam> out;
    for (auto& p : const_cast<Model*>(this)->params()) out.push_back({p.name, p.value});
    return out;
  }
};

struct ModelForward {
  FeatureTriple features;
  FusionOutput fusion;
  Vec embedding;  // L2-normalized fusion.bilinear
  double bilinear_norm = 0.0;

  const Vec& logits() const noexcept { return fusion.logits; }
};

inline ModelForward forward(const Model& model, std::span<const double> input) {
  if (input.size() != model.dims.d_in) {
    throw ShapeError("forward: input length " + std::to_string(input.size()) + " vs d_in " +
                     std::to_string(model.dims.d_in));
  }
  ModelForward out;
  out.features = backbone_forward(model.backbone, input);
  out.fusion = fuse(model.fusion, out.features);
  out.bilinear_norm = l2_norm(out.fusion.bilinear);
  const double scale = 1.0 / std::max(out.bilinear_norm, kNormFloor);
  out.embedding = out.fusion.bilinear;
  for (double& v : out.embedding) v *= scale;
  return out;
}

inline std::size_t predict(const Model& model, std::span<const double> input) {
  return argmax(forward(model, input).logits());
}

struct LossConfig {
  FocalParams focal;
  CombinedParams weights;
  LabelMode label_mode = LabelMode::kOrdinal;
  Penalty penalty = Penalty::kSquaredError;
  Vec ranks;  // empty: 0..C-1

  RankScale scale(std::size_t num_classes) const {
    if (ranks.empty()) return RankScale::uniform(num_classes);
    RankScale s(ranks);
    if (s.num_classes() != num_classes)
      throw ShapeError("LossConfig: " + std::to_string(s.num_classes()) + " ranks for " +
                       std::to_string(num_classes) + " classes");
    return s;
  }

  std::vector<SoftLabel> targets(std::size_t num_classes) const {
    const RankScale s = scale(num_classes);
    std::vector<SoftLabel> out;
    for (std::size_t t = 0; t < num_classes; ++t) out.push_back(make_target(label_mode, s, t, penalty));
    return out;
  }
};

/// Gradients aligned with Model::params().
using ModelGrads = std::vector<Mat>;

inline ModelGrads zero_grads(const Model& model) {
  ModelGrads g;
  for (const auto& p : model.params()) g.emplace_back(p.value->rows(), p.value->cols());
  return g;
}

struct SampleResult {
  double loss = 0.0;
  double focal = 0.0;
  double metric = 0.0;
  bool clamped = false;
};

inline SampleResult sample_loss(const Model& model, std::span<const double> input,
                                const SoftLabel& target, const LossConfig& cfg) {
  const ModelForward fw = forward(model, input);
  const CombinedResult r =
      combined_loss(fw.logits(), fw.embedding, target, model.bank, cfg.focal, cfg.weights);
  return {r.loss, r.focal, r.metric, r.clamped};
}

/// Loss for one sample; its parameter gradients are added into `grads`.
inline SampleResult accumulate_sample_grad(const Model& model, std::span<const double> input,
                                           const SoftLabel& target, const LossConfig& cfg,
                                           ModelGrads& grads, double scale = 1.0) {
  const ModelForward fw = forward(model, input);
  const CombinedResult r =
      combined_loss(fw.logits(), fw.embedding, target, model.bank, cfg.focal, cfg.weights);

  // Back through the L2 normalization: (g - e (e.g)) / |h|.
  Vec g_bilinear = r.grad_embedding;
  if (fw.bilinear_norm > kNormFloor) {
    const double eg = dot(fw.embedding, r.grad_embedding);
    for (std::size_t i = 0; i < g_bilinear.size(); ++i)
      g_bilinear[i] = (r.grad_embedding[i] - fw.embedding[i] * eg) / fw.bilinear_norm;
  } else {
    for (double& v : g_bilinear) v /= kNormFloor;
  }
  const FusionGrads fg =
      fuse_backward(model.fusion, fw.features, fw.fusion, r.grad_logits, g_bilinear);
  const BackboneParams bg =
      backbone_backward(model.backbone, input, fw.features, FeatureTriple{fg.f1, fg.f3, fg.f5});

  const Mat* parts[] = {&bg.W1, &bg.b1, &bg.W3, &bg.b3, &bg.W5, &bg.b5,
                        &fg.U,  &fg.V,  &fg.S,  &fg.P,  &r.grad_centers};
  for (std::size_t i = 0; i < grads.size(); ++i) axpy(grads[i].values(), parts[i]->values(), scale);
  return {r.loss, r.focal, r.metric, r.clamped};
}

/// Momentum SGD with a step schedule: lr(e) = lr0 / divisor^floor(e / step_every).
struct SgdConfig {
  double lr0 = 0.01;
  double momentum = 0.9;
  std::size_t step_every = 50;
  double step_divisor = 10.0;

  friend bool operator==(const SgdConfig&, const SgdConfig&) = default;
};

class SgdState {
 public:
  explicit SgdState(SgdConfig cfg = {}) : cfg_(cfg) {}

  const SgdConfig& config() const noexcept { return cfg_; }
  std::size_t epoch() const noexcept { return epoch_; }
  void set_epoch(std::size_t e) noexcept { epoch_ = e; }
  void next_epoch() noexcept { ++epoch_; }

  static double learning_rate_at(const SgdConfig& cfg, std::size_t epoch) {
    const std::size_t n = cfg.step_every == 0 ? 0 : epoch / cfg.step_every;
    return cfg.lr0 / std::pow(cfg.step_divisor, static_cast<double>(n));
  }
  double learning_rate() const { return learning_rate_at(cfg_, epoch_); }

  const std::vector<Mat>& velocity() const noexcept { return velocity_; }

  /// v <- mu v - lr g;  w <- w + v.
  void step(std::span<Mat* const> params, std::span<const Mat> grads) {
    if (params.size() != grads.size())
      throw ShapeError("SgdState::step: parameter and gradient counts differ");
    if (velocity_.empty()) {
      for (const Mat* p : params) velocity_.emplace_back(p->rows(), p->cols());
    }
    if (velocity_.size() != params.size())
      throw ShapeError("SgdState::step: parameter list changed between steps");
    const double lr = learning_rate();
    const double mu = cfg_.momentum;
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (!params[i]->same_shape(grads[i]) || !params[i]->same_shape(velocity_[i]))
        throw ShapeError("SgdState::step: shape mismatch at parameter " + std::to_string(i));
      auto w = params[i]->values();
      auto v = velocity_[i].values();
      auto g = grads[i].values();
      for (std::size_t j = 0; j < w.size(); ++j) {
        v[j] = mu * v[j] - lr * g[j];
        w[j] += v[j];
      }
    }
  }

 private:
  SgdConfig cfg_;
  std::size_t epoch_ = 0;
  std::vector<Mat> velocity_;
};

struct EvalResult {
  std::vector<int> predictions;
  ConfusionMatrix confusion;
  KappaReport kappa;
  std::vector<std::int64_t> adjacency;
};

inline EvalResult evaluate(const Model& model, const Dataset& ds) {
  if (ds.size() == 0) throw std::invalid_argument("evaluate: empty dataset");
  if (ds.dim() != model.dims.d_in) {
    throw ShapeError("evaluate: dataset has " + std::to_string(ds.dim()) +
                     " feature columns, model expects d_in " + std::to_string(model.dims.d_in));
  }
  EvalResult r;
  r.predictions.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i)
    r.predictions.push_back(static_cast<int>(predict(model, ds.sample(i))));
  r.confusion = confusion(ds.labels, r.predictions, model.dims.num_classes);
  r.kappa = quadratic_weighted_kappa(r.confusion);
  r.adjacency = adjacency_profile(r.confusion);
  return r;
}

struct TrainOptions {
  std::size_t batch_size = 32;
  double noise_sigma = 0.05;
};

struct EpochSummary {
  std::size_t epoch = 0;
  double learning_rate = 0.0;
  double mean_loss = 0.0;
  std::optional<double> train_qwk;
  std::size_t steps = 0;
};

/// One pass over a seeded shuffle of `ds`. Each batch adds Gaussian feature
/// noise, averages the per-sample gradients in sample order, takes one SGD
/// step, then re-normalizes the centers when the bank asks for it.
inline EpochSummary train_epoch(Model& model, const Dataset& ds, const LossConfig& cfg,
                                SgdState& sgd, Rng& rng, const TrainOptions& opt = {}) {
  if (ds.size() == 0) throw std::invalid_argument("train_epoch: empty dataset");
  if (opt.batch_size == 0 || opt.batch_size > ds.size())
    throw std::invalid_argument("train_epoch: batch size " + std::to_string(opt.batch_size) +
                                " must be in [1, " + std::to_string(ds.size()) + "]");
  if (ds.dim() != model.dims.d_in)
    throw ShapeError("train_epoch: dataset dim " + std::to_string(ds.dim()) + " vs d_in " +
                     std::to_string(model.dims.d_in));

  const auto targets = cfg.targets(model.dims.num_classes);
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));

  EpochSummary summary;
  summary.epoch = sgd.epoch();
  summary.learning_rate = sgd.learning_rate();
  std::vector<Mat*> params;
  for (auto& p : model.params()) params.push_back(p.value);

  double loss_sum = 0.0;
  Vec noisy(ds.dim());
  for (std::size_t start = 0, batch = 0; start < order.size(); start += opt.batch_size, ++batch) {
    const std::size_t end = std::min(order.size(), start + opt.batch_size);
    const double inv = 1.0 / static_cast<double>(end - start);
    ModelGrads grads = zero_grads(model);
    for (std::size_t i = start; i < end; ++i) {
      const std::size_t idx = order[i];
      const auto x = ds.sample(idx);
      for (std::size_t j = 0; j < x.size(); ++j)
        noisy[j] = opt.noise_sigma > 0.0 ? x[j] + rng.normal(0.0, opt.noise_sigma) : x[j];
      const int label = ds.labels[idx];
      if (label < 0 || static_cast<std::size_t>(label) >= targets.size())
        throw std::out_of_range("train_epoch: label " + std::to_string(label) + " at sample " +
                                std::to_string(idx) + " out of range");
      SampleResult r;
      try {
        r = accumulate_sample_grad(model, noisy, targets[label], cfg, grads, inv);
      } catch (const NumericalError& e) {
        throw NumericalError("train_epoch: epoch " + std::to_string(sgd.epoch()) + ", batch " +
                             std::to_string(batch) + ", sample " + std::to_string(idx) + ": " + e.what());
      }
      if (!std::isfinite(r.loss)) {
        std::ostringstream msg;
        msg << "train_epoch: non-finite loss in epoch " << sgd.epoch() << ", batch " << batch
            << " (sample " << idx << ", focal " << r.focal << ", metric " << r.metric << ")";
        throw NumericalError(msg.str());
      }
      loss_sum += r.loss;
    }
    for (std::size_t g = 0; g < grads.size(); ++g) {
      if (!grads[g].all_finite()) {
        throw NumericalError("train_epoch: non-finite gradient for " + model.params()[g].name +
                             " in epoch " + std::to_string(sgd.epoch()) + ", batch " +
                             std::to_string(batch));
      }
    }
    sgd.step(params, grads);
    if (model.bank.params().normalize_centers) model.bank.normalize();
    ++summary.steps;
  }
  summary.mean_loss = loss_sum / static_cast<double>(ds.size());
  summary.train_qwk = evaluate(model, ds).kappa.qwk;
  sgd.next_epoch();
  return summary;
}

}  // namespace ordgrade

#endif  // ORDGRADE_MODEL_HPP_
