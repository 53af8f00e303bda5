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

#ifndef ORDGRADE_METRICS_HPP_
#define ORDGRADE_METRICS_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ordgrade {

/// C x C tally; rows are true classes, columns predictions.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t num_classes = 0)
      : c_(num_classes), counts_(num_classes * num_classes, 0) {}

  std::size_t num_classes() const noexcept { return c_; }
  std::int64_t at(std::size_t truth, std::size_t pred) const { return counts_.at(truth * c_ + pred); }
  std::int64_t& at(std::size_t truth, std::size_t pred) { return counts_.at(truth * c_ + pred); }

  std::int64_t total() const noexcept {
    std::int64_t t = 0;
    for (auto v : counts_) t += v;
    return t;
  }
  std::int64_t row_total(std::size_t truth) const {
    std::int64_t t = 0;
    for (std::size_t j = 0; j < c_; ++j) t += at(truth, j);
    return t;
  }

  /// Diagonal over row support; nullopt for classes with no true samples.
  std::vector<std::optional<double>> per_class_accuracy() const {
    std::vector<std::optional<double>> acc(c_);
    for (std::size_t i = 0; i < c_; ++i) {
      const auto n = row_total(i);
      if (n > 0) acc[i] = static_cast<double>(at(i, i)) / static_cast<double>(n);
    }
    return acc;
  }

  std::optional<double> accuracy() const {
    const auto n = total();
    if (n == 0) return std::nullopt;
    std::int64_t d = 0;
    for (std::size_t i = 0; i < c_; ++i) d += at(i, i);
    return static_cast<double>(d) / static_cast<double>(n);
  }

  ConfusionMatrix transposed() const {
    ConfusionMatrix t(c_);
    for (std::size_t i = 0; i < c_; ++i)
      for (std::size_t j = 0; j < c_; ++j) t.at(j, i) = at(i, j);
    return t;
  }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t c_;
  std::vector<std::int64_t> counts_;
};

inline ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> pred,
                                 std::size_t num_classes) {
  if (truth.size() != pred.size()) {
    throw std::invalid_argument("confusion: " + std::to_string(truth.size()) + " labels vs " +
                                std::to_string(pred.size()) + " predictions");
  }
  ConfusionMatrix cm(num_classes);
  const auto in_range = [&](int v) { return v >= 0 && static_cast<std::size_t>(v) < num_classes; };
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!in_range(truth[i]) || !in_range(pred[i])) {
      throw std::out_of_range("confusion: label out of range at index " + std::to_string(i) +
                              " (true " + std::to_string(truth[i]) + ", predicted " +
                              std::to_string(pred[i]) + ")");
    }
    ++cm.at(static_cast<std::size_t>(truth[i]), static_cast<std::size_t>(pred[i]));
  }
  return cm;
}

struct KappaReport {
  /// Empty when the expected disagreement is zero (both raters put all mass
  /// in one class), where kappa is undefined.
  std::optional<double> qwk;
  double observed_disagreement = 0.0;
  double expected_disagreement = 0.0;

  bool degenerate() const noexcept { return !qwk.has_value(); }
};

/// Quadratic weighted Cohen's kappa with weights (i-j)^2 / (C-1)^2:
///   kappa = 1 - sum w O / sum w E,
/// O the normalized counts and E the outer product of O's marginals.
inline KappaReport quadratic_weighted_kappa(const ConfusionMatrix& cm) {
  const std::size_t c = cm.num_classes();
  if (c < 2) throw std::invalid_argument("quadratic_weighted_kappa: need at least 2 classes");
  const auto n = cm.total();
  if (n <= 0) throw std::invalid_argument("quadratic_weighted_kappa: empty confusion matrix");
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<double> row(c, 0.0), col(c, 0.0);
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const double o = static_cast<double>(cm.at(i, j)) * inv_n;
      row[i] += o;
      col[j] += o;
    }
  }
  const double denom = static_cast<double>((c - 1) * (c - 1));
  KappaReport r;
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const double d = static_cast<double>(i) - static_cast<double>(j);
      const double w = d * d / denom;
      r.observed_disagreement += w * static_cast<double>(cm.at(i, j)) * inv_n;
      r.expected_disagreement += w * row[i] * col[j];
    }
  }
  if (r.expected_disagreement > 0.0)
    r.qwk = 1.0 - r.observed_disagreement / r.expected_disagreement;
  return r;
}

/// Count of samples at each ordinal distance |true - pred|, index 0..C-1.
inline std::vector<std::int64_t> adjacency_profile(const ConfusionMatrix& cm) {
  const std::size_t c = cm.num_classes();
  std::vector<std::int64_t> hist(c, 0);
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = 0; j < c; ++j) hist[i > j ? i - j : j - i] += cm.at(i, j);
  return hist;
}

/// Share of errors (distance > 0) that sit at distance 1; nullopt without errors.
inline std::optional<double> adjacent_error_fraction(std::span<const std::int64_t> profile) {
  std::int64_t errors = 0;
  for (std::size_t d = 1; d < profile.size(); ++d) errors += profile[d];
  if (errors == 0) return std::nullopt;
  return static_cast<double>(profile[1]) / static_cast<double>(errors);
}

}  // namespace ordgrade

#endif  // ORDGRADE_METRICS_HPP_
