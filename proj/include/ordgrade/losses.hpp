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

#ifndef ORDGRADE_LOSSES_HPP_
#define ORDGRADE_LOSSES_HPP_

// Focal loss over soft targets, the multi-center metric loss built on relaxed
// similarities, and their weighted sum. Each loss returns its value together
// with hand-derived gradients.

#include <cmath>
#include <algorithm>
#include <cstddef>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ordgrade/numerics.hpp"
#include "ordgrade/ordinal.hpp"
#include "ordgrade/rng.hpp"

namespace ordgrade {

inline constexpr double kProbFloor = 1e-12;

struct FocalParams {
  double gamma_focus = 2.0;

  void validate() const {
    if (!std::isfinite(gamma_focus) || gamma_focus < 0.0)
      throw std::invalid_argument("focal gamma must be finite and >= 0");
  }
};

struct FocalResult {
  double loss = 0.0;
  Vec grad_logits;
  /// Some p_j with y_j > 0 fell below kProbFloor and was clamped before log.
  bool clamped = false;
};

/// loss = -sum_j y_j (1 - p_j)^gamma log p_j, with the gradient taken through
/// the softmax that produced `probs`.
///
/// With a = p_j dL/dp_j = y_j [gamma (1-p_j)^(gamma-1) p_j log p_j - (1-p_j)^gamma]
/// the logit gradient is a_k - p_k sum_j a_j.
inline FocalResult focal_loss(std::span<const double> probs, const SoftLabel& target,
                              const FocalParams& params) {
  if (probs.size() != target.num_classes()) {
    throw ShapeError("focal_loss: " + std::to_string(probs.size()) +
                     " probabilities vs " + std::to_string(target.num_classes()) +
                     "-class target");
  }
  params.validate();
  const double g = params.gamma_focus;
  FocalResult out;
  out.grad_logits.assign(probs.size(), 0.0);
  Vec a(probs.size(), 0.0);
  double a_sum = 0.0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    const double y = target.probs[j];
    if (y == 0.0) continue;
    double p = probs[j];
    if (p < kProbFloor) {
      p = kProbFloor;
      out.clamped = true;
    }
    const double q = 1.0 - p;
    const double logp = std::log(p);
    const double mod = g == 0.0 ? 1.0 : std::pow(q, g);
    out.loss -= y * mod * logp;
    // (1-p)^(gamma-1) is unbounded as p -> 1 for gamma < 1, but times log p it vanishes.
    const double focus_term = (g == 0.0 || q <= 0.0) ? 0.0 : g * std::pow(q, g - 1.0) * p * logp;
    a[j] = y * (focus_term - mod);
    a_sum += a[j];
  }
  for (std::size_t k = 0; k < probs.size(); ++k)
    out.grad_logits[k] = a[k] - probs[k] * a_sum;
  return out;
}

/// Hyperparameters of the metric loss. None of these have published values;
/// the defaults are the documented desk-scale choices.
struct MetricParams {
  std::size_t centers_per_class = 2;
  double lambda = 20.0;
  double delta = 0.01;
  double gamma_entropy = 0.1;
  bool normalize_centers = true;

  void validate() const {
    if (centers_per_class < 1) throw std::invalid_argument("metric K must be >= 1");
    if (!std::isfinite(lambda) || lambda <= 0.0)
      throw std::invalid_argument("metric lambda must be > 0");
    if (!std::isfinite(delta) || delta < 0.0)
      throw std::invalid_argument("metric delta must be >= 0");
    if (!std::isfinite(gamma_entropy) || gamma_entropy <= 0.0)
      throw std::invalid_argument("metric gamma_entropy must be > 0");
  }
};

/// C x K learned centers of dimension d. Center (c, k) is row c*K + k.
class CenterBank {
 public:
  CenterBank() = default;
  CenterBank(std::size_t num_classes, std::size_t dim, MetricParams params)
      : num_classes_(num_classes), params_(params),
        centers_(num_classes * params.centers_per_class, dim) {
    params_.validate();
  }
  CenterBank(std::size_t num_classes, MetricParams params, Mat centers)
      : num_classes_(num_classes), params_(params), centers_(std::move(centers)) {
    params_.validate();
    if (centers_.rows() != num_classes_ * params_.centers_per_class) {
      throw ShapeError("CenterBank: " + std::to_string(centers_.rows()) +
                       " center rows for C*K = " +
                       std::to_string(num_classes_ * params_.centers_per_class));
    }
  }

  /// Gaussian centers, unit-normalized when normalization is enabled.
  static CenterBank random(std::size_t num_classes, std::size_t dim, MetricParams params,
                           Rng& rng) {
    CenterBank bank(num_classes, dim, params);
    for (double& v : bank.centers_.values()) v = rng.normal();
    if (params.normalize_centers) bank.normalize();
    return bank;
  }

  std::size_t num_classes() const noexcept { return num_classes_; }
  std::size_t centers_per_class() const noexcept { return params_.centers_per_class; }
  std::size_t dim() const noexcept { return centers_.cols(); }
  const MetricParams& params() const noexcept { return params_; }

  std::span<const double> center(std::size_t c, std::size_t k) const {
    return centers_.row(c * params_.centers_per_class + k);
  }
  const Mat& centers() const noexcept { return centers_; }
  Mat& centers() noexcept { return centers_; }

  /// Rescales every center to unit L2 norm; zero centers are left as is.
  void normalize() {
    for (std::size_t r = 0; r < centers_.rows(); ++r) {
      auto row = centers_.row(r);
      const double n = l2_norm(row);
      if (n > 0.0)
        for (double& v : row) v /= n;
    }
  }

 private:
  std::size_t num_classes_ = 0;
  MetricParams params_;
  Mat centers_;
};

namespace detail {

struct ClassSimilarity {
  double relaxed = 0.0;
  Vec raw;      // x^T w_c^k
  Vec weights;  // softmax_k(raw / gamma_entropy)
};

inline ClassSimilarity class_similarity(std::span<const double> x, const CenterBank& bank,
                                        std::size_t c) {
  const std::size_t k_count = bank.centers_per_class();
  ClassSimilarity s;
  s.raw.resize(k_count);
  Vec scaled(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    s.raw[k] = dot(x, bank.center(c, k));
    scaled[k] = s.raw[k] / bank.params().gamma_entropy;
  }
  s.weights = stable_softmax(scaled);
  for (std::size_t k = 0; k < k_count; ++k) s.relaxed += s.weights[k] * s.raw[k];
  return s;
}

inline void check_embedding(std::span<const double> x, const CenterBank& bank,
                            const char* who) {
  if (x.size() != bank.dim()) {
    throw ShapeError(std::string(who) + ": embedding length " + std::to_string(x.size()) +
                     " vs center dim " + std::to_string(bank.dim()));
  }
}

inline void check_class(std::size_t c, const CenterBank& bank, const char* who) {
  if (c >= bank.num_classes()) {
    throw std::out_of_range(std::string(who) + ": class " + std::to_string(c) +
                            " outside [0, " + std::to_string(bank.num_classes()) + ")");
  }
}

}  // namespace detail

/// S'_c = sum_k softmax_k(x.w_c^k / gamma) * x.w_c^k.
inline double relaxed_similarity(std::span<const double> x, const CenterBank& bank,
                                 std::size_t class_index) {
  detail::check_embedding(x, bank, "relaxed_similarity");
  detail::check_class(class_index, bank, "relaxed_similarity");
  return detail::class_similarity(x, bank, class_index).relaxed;
}

struct MetricResult {
  double loss = 0.0;
  Vec grad_x;
  Mat grad_centers;
};

/// Margin softmax over relaxed similarities:
///   loss = logsumexp(a) - a_y,  a_y = lambda (S'_y - delta),  a_j = lambda S'_j.
///
/// Backward through the per-class center softmax uses
///   dS'_c / d(x.w_c^k) = q_k (1 + (x.w_c^k - S'_c) / gamma).
inline MetricResult metric_loss(std::span<const double> x, const CenterBank& bank,
                                std::size_t true_class) {
  detail::check_embedding(x, bank, "metric_loss");
  detail::check_class(true_class, bank, "metric_loss");
  const auto& p = bank.params();
  const std::size_t c_count = bank.num_classes();
  const std::size_t k_count = bank.centers_per_class();

  std::vector<detail::ClassSimilarity> sims;
  sims.reserve(c_count);
  Vec act(c_count);
  for (std::size_t c = 0; c < c_count; ++c) {
    sims.push_back(detail::class_similarity(x, bank, c));
    act[c] = p.lambda * (sims[c].relaxed - (c == true_class ? p.delta : 0.0));
  }
  // loss = log sum_j exp(a_j - a_y). When the margin holds for every class the
  // sum is 1 + (small terms) and log1p keeps tiny losses at full precision.
  Vec rel(c_count);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < c_count; ++c) {
    rel[c] = act[c] - act[true_class];
    if (c != true_class) worst = std::max(worst, rel[c]);
  }
  MetricResult out;
  Vec soft(c_count, 0.0);
  if (c_count == 1) {
    out.loss = 0.0;
    soft[0] = 1.0;
  } else if (worst <= 0.0) {
    double tail = 0.0;
    for (std::size_t c = 0; c < c_count; ++c)
      if (c != true_class) tail += std::exp(rel[c]);
    out.loss = std::log1p(tail);
    for (std::size_t c = 0; c < c_count; ++c)
      soft[c] = (c == true_class ? 1.0 : std::exp(rel[c])) / (1.0 + tail);
  } else {
    double sum = 0.0;
    for (std::size_t c = 0; c < c_count; ++c) sum += std::exp(rel[c] - worst);
    out.loss = worst + std::log(sum);
    for (std::size_t c = 0; c < c_count; ++c) soft[c] = std::exp(rel[c] - worst) / sum;
  }
  if (!std::isfinite(out.loss)) {
    std::ostringstream msg;
    msg << "metric_loss: non-finite loss (class=" << true_class << ", a_y=" << act[true_class]
        << ", worst gap=" << worst << ")";
    throw NumericalError(msg.str());
  }
  // d loss / d a_y = soft_y - 1, summed from the other classes to avoid cancellation.
  double others = 0.0;
  for (std::size_t c = 0; c < c_count; ++c)
    if (c != true_class) others += soft[c];

  out.grad_x.assign(x.size(), 0.0);
  out.grad_centers = Mat(bank.centers().rows(), bank.dim());
  const double gamma = p.gamma_entropy;
  for (std::size_t c = 0; c < c_count; ++c) {
    const double d_act = c == true_class ? -others : soft[c];
    const double d_rel = p.lambda * d_act;
    if (d_rel == 0.0) continue;
    const auto& s = sims[c];
    for (std::size_t k = 0; k < k_count; ++k) {
      const double d_raw = d_rel * s.weights[k] * (1.0 + (s.raw[k] - s.relaxed) / gamma);
      axpy(out.grad_x, bank.center(c, k), d_raw);
      axpy(out.grad_centers.row(c * k_count + k), x, d_raw);
    }
  }
  return out;
}

struct CombinedParams {
  double alpha = 0.5;
  double beta = 0.5;

  void validate() const {
    if (!std::isfinite(alpha) || alpha < 0.0) throw std::invalid_argument("alpha must be >= 0");
    if (!std::isfinite(beta) || beta < 0.0) throw std::invalid_argument("beta must be >= 0");
    if (alpha == 0.0 && beta == 0.0)
      throw std::invalid_argument("alpha and beta cannot both be zero");
  }
};

struct CombinedResult {
  double loss = 0.0;
  double focal = 0.0;
  double metric = 0.0;
  Vec grad_logits;
  Vec grad_embedding;
  Mat grad_centers;
  bool clamped = false;
};

/// alpha * metric(embedding, target.true_index) + beta * focal(softmax(logits), target).
inline CombinedResult combined_loss(std::span<const double> logits,
                                    std::span<const double> embedding,
                                    const SoftLabel& target, const CenterBank& bank,
                                    const FocalParams& focal, const CombinedParams& weights) {
  weights.validate();
  if (!all_finite(logits)) throw NumericalError("combined_loss: non-finite logits");
  const Vec probs = stable_softmax(logits);
  FocalResult fr = focal_loss(probs, target, focal);
  MetricResult mr = metric_loss(embedding, bank, target.true_index);

  CombinedResult out;
  out.focal = fr.loss;
  out.metric = mr.loss;
  out.clamped = fr.clamped;
  out.loss = weights.alpha * mr.loss + weights.beta * fr.loss;
  out.grad_logits = std::move(fr.grad_logits);
  for (double& v : out.grad_logits) v *= weights.beta;
  out.grad_embedding = std::move(mr.grad_x);
  for (double& v : out.grad_embedding) v *= weights.alpha;
  out.grad_centers = std::move(mr.grad_centers);
  for (double& v : out.grad_centers.values()) v *= weights.alpha;
  return out;
}

}  // namespace ordgrade

#endif  // ORDGRADE_LOSSES_HPP_
