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

#ifndef ORDGRADE_GRADCHECK_HPP_
#define ORDGRADE_GRADCHECK_HPP_

// Central finite-difference checks of every hand-derived gradient, on random
// small instances. The numerical side only ever calls forward functions.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "ordgrade/hbp.hpp"
#include "ordgrade/losses.hpp"
#include "ordgrade/model.hpp"
#include "ordgrade/numerics.hpp"
#include "ordgrade/ordinal.hpp"
#include "ordgrade/rng.hpp"

namespace ordgrade {

inline constexpr double kFiniteDiffStep = 1e-6;

/// d f / d values, one central difference per entry; values are restored.
template <typename F>
Vec numeric_gradient(std::span<double> values, F&& f, double h = kFiniteDiffStep) {
  Vec g(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double orig = values[i];
    values[i] = orig + h;
    const double up = f();
    values[i] = orig - h;
    const double down = f();
    values[i] = orig;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

inline constexpr double kGradNormFloor = 1e-3;

/// ||a - n|| / max(||a|| + ||n||, floor). The floor keeps gradients that are
/// zero up to round-off from scoring as a relative error of 1.
inline double relative_error(std::span<const double> analytic, std::span<const double> numeric,
                             double floor = kGradNormFloor) {
  if (analytic.size() != numeric.size()) throw ShapeError("relative_error: length mismatch");
  double diff = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double d = analytic[i] - numeric[i];
    diff += d * d;
  }
  const double denom = l2_norm(analytic) + l2_norm(numeric);
  return std::sqrt(diff) / std::max(denom, floor);
}

struct GradcheckOptions {
  std::size_t trials = 100;
  std::size_t max_dim = 8;
  std::size_t max_classes = 5;
  std::size_t max_centers = 3;
  std::uint64_t seed = 0;
  /// Group whose analytic gradient is deliberately corrupted (fault injection).
  std::string perturb;
};

struct GroupResult {
  std::string group;
  double max_rel_error = 0.0;
  std::size_t trials = 0;
  double tolerance = 0.0;

  bool passed() const noexcept { return max_rel_error < tolerance; }
};

namespace detail {

inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  if (hi < lo) hi = lo;
  return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

inline Vec random_vec(Rng& rng, std::size_t n, double sigma = 1.0) {
  Vec v(n);
  for (double& x : v) x = rng.normal(0.0, sigma);
  return v;
}

inline void corrupt(Vec& g) {
  if (!g.empty()) g[0] += 0.1 * (std::abs(g[0]) + 1.0);
}

inline MetricParams random_metric(Rng& rng, std::size_t k) {
  MetricParams p;
  p.centers_per_class = k;
  p.lambda = rng.uniform(1.0, 20.0);
  p.delta = rng.uniform(0.0, 0.1);
  p.gamma_entropy = rng.uniform(0.1, 1.0);
  return p;
}

inline SoftLabel random_target(Rng& rng, std::size_t c) {
  const std::size_t t = static_cast<std::size_t>(rng.below(c));
  const RankScale s = RankScale::uniform(c);
  return rng.uniform() < 0.5 ? one_hot(s, t) : encode_soft_label(s, t);
}

struct Tracker {
  GroupResult r;
  void add(double e) {
    r.max_rel_error = std::max(r.max_rel_error, std::isfinite(e) ? e : 1e300);
    ++r.trials;
  }
};

}  // namespace detail

/// Groups: focal, metric, combined, fusion (all components tolerance 1e-5) and
/// backbone (end-to-end over every model parameter, tolerance 1e-4). A
/// max_dim or max_classes of zero leaves nothing to check, giving no groups.
inline std::vector<GroupResult> run_gradcheck(const GradcheckOptions& opt) {
  std::vector<GroupResult> out;
  if (opt.trials == 0 || opt.max_dim == 0 || opt.max_classes == 0 || opt.max_centers == 0) return out;
  const std::size_t max_c = std::max<std::size_t>(opt.max_classes, 2);
  const std::size_t max_d = opt.max_dim;
  const std::size_t max_k = opt.max_centers;
  auto perturbed = [&](const char* g) { return opt.perturb == g; };

  detail::Tracker focal{{"focal", 0, 0, 1e-5}}, metric{{"metric", 0, 0, 1e-5}},
      combined{{"combined", 0, 0, 1e-5}}, fusion{{"fusion", 0, 0, 1e-5}},
      backbone{{"backbone", 0, 0, 1e-4}};
  Rng rng = Rng(opt.seed).split("gradcheck");

  for (std::size_t trial = 0; trial < opt.trials; ++trial) {
    const std::size_t c = detail::pick(rng, 2, max_c);
    const std::size_t d = detail::pick(rng, 1, max_d);
    const std::size_t k = detail::pick(rng, 1, max_k);

    {  // focal, gradient w.r.t. logits
      Vec logits = detail::random_vec(rng, c, 1.5);
      const SoftLabel y = detail::random_target(rng, c);
      const FocalParams fp{rng.uniform(0.0, 3.0)};
      Vec an = focal_loss(stable_softmax(logits), y, fp).grad_logits;
      if (perturbed("focal")) detail::corrupt(an);
      const Vec nu = numeric_gradient(logits, [&] { return focal_loss(stable_softmax(logits), y, fp).loss; });
      focal.add(relative_error(an, nu));
    }
    {  // metric, gradients w.r.t. embedding and centers
      Vec x = detail::random_vec(rng, d, 0.7);
      CenterBank bank = CenterBank::random(c, d, detail::random_metric(rng, k), rng);
      const std::size_t y = static_cast<std::size_t>(rng.below(c));
      MetricResult mr = metric_loss(x, bank, y);
      if (perturbed("metric")) detail::corrupt(mr.grad_x);
      auto f = [&] { return metric_loss(x, bank, y).loss; };
      const Vec nx = numeric_gradient(x, f);
      const Vec nw = numeric_gradient(bank.centers().values(), f);
      metric.add(std::max(relative_error(mr.grad_x, nx), relative_error(mr.grad_centers.values(), nw)));
    }
    {  // combined
      Vec logits = detail::random_vec(rng, c, 1.5);
      Vec x = detail::random_vec(rng, d, 0.7);
      CenterBank bank = CenterBank::random(c, d, detail::random_metric(rng, k), rng);
      const SoftLabel y = detail::random_target(rng, c);
      const FocalParams fp{rng.uniform(0.0, 3.0)};
      const CombinedParams w{rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0)};
      CombinedResult cr = combined_loss(logits, x, y, bank, fp, w);
      if (perturbed("combined")) detail::corrupt(cr.grad_logits);
      auto f = [&] { return combined_loss(logits, x, y, bank, fp, w).loss; };
      const Vec nz = numeric_gradient(logits, f);
      const Vec nx = numeric_gradient(x, f);
      const Vec nw = numeric_gradient(bank.centers().values(), f);
      combined.add(std::max({relative_error(cr.grad_logits, nz), relative_error(cr.grad_embedding, nx),
                             relative_error(cr.grad_centers.values(), nw)}));
    }
    {  // fusion, contracted with random upstream gradients on Z and h
      const std::size_t d1 = detail::pick(rng, 1, max_d), d3 = detail::pick(rng, 1, max_d),
                        d5 = detail::pick(rng, 1, max_d), m = detail::pick(rng, 1, max_d);
      BilinearParams p = BilinearParams::init(d1, d3, d5, m, c, rng);
      FeatureTriple f{detail::random_vec(rng, d1), detail::random_vec(rng, d3), detail::random_vec(rng, d5)};
      const Vec gz = detail::random_vec(rng, c);
      const Vec gh = detail::random_vec(rng, 3 * m);
      auto scalar = [&] {
        const FusionOutput o = fuse(p, f);
        return dot(o.logits, gz) + dot(o.bilinear, gh);
      };
      FusionGrads g = fuse_backward(p, f, fuse(p, f), gz, gh);
      if (perturbed("fusion")) detail::corrupt(g.f1);
      double e = 0.0;
      e = std::max(e, relative_error(g.U.values(), numeric_gradient(p.U.values(), scalar)));
      e = std::max(e, relative_error(g.V.values(), numeric_gradient(p.V.values(), scalar)));
      e = std::max(e, relative_error(g.S.values(), numeric_gradient(p.S.values(), scalar)));
      e = std::max(e, relative_error(g.P.values(), numeric_gradient(p.P.values(), scalar)));
      e = std::max(e, relative_error(g.f1, numeric_gradient(f.f1, scalar)));
      e = std::max(e, relative_error(g.f3, numeric_gradient(f.f3, scalar)));
      e = std::max(e, relative_error(g.f5, numeric_gradient(f.f5, scalar)));
      fusion.add(e);
    }
    {  // end to end through backbone, fusion, normalization and both losses
      ModelDims dims;
      dims.d_in = detail::pick(rng, 1, std::min<std::size_t>(max_d, 4));
      dims.d1 = detail::pick(rng, 1, std::min<std::size_t>(max_d, 6));
      dims.d3 = detail::pick(rng, 1, std::min<std::size_t>(max_d, 6));
      dims.d5 = detail::pick(rng, 1, std::min<std::size_t>(max_d, 6));
      dims.m = detail::pick(rng, 1, std::min<std::size_t>(max_d, 4));
      dims.num_classes = c;
      Model model = Model::init(dims, detail::random_metric(rng, k), rng.split(std::to_string(trial)));
      // Nonzero biases so every tanh stage is exercised off the origin.
      for (Mat* b : {&model.backbone.b1, &model.backbone.b3, &model.backbone.b5})
        for (double& v : b->values()) v = rng.normal(0.0, 0.3);
      LossConfig cfg;
      cfg.focal.gamma_focus = rng.uniform(0.0, 3.0);
      cfg.weights = {rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0)};
      const Vec x = detail::random_vec(rng, dims.d_in);
      const SoftLabel y = detail::random_target(rng, c);
      ModelGrads grads = zero_grads(model);
      accumulate_sample_grad(model, x, y, cfg, grads);
      if (perturbed("backbone")) {
        Vec v(grads[0].values().begin(), grads[0].values().end());
        detail::corrupt(v);
        grads[0] = Mat(grads[0].rows(), grads[0].cols(), v);
      }
      auto f = [&] { return sample_loss(model, x, y, cfg).loss; };
      double e = 0.0;
      auto params = model.params();
      for (std::size_t i = 0; i < params.size(); ++i)
        e = std::max(e, relative_error(grads[i].values(), numeric_gradient(params[i].value->values(), f)));
      backbone.add(e);
    }
  }
  return {focal.r, metric.r, combined.r, fusion.r, backbone.r};
}

}  // namespace ordgrade

#endif  // ORDGRADE_GRADCHECK_HPP_
