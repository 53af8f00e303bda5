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

#ifndef ORDGRADE_ORDINAL_HPP_
#define ORDGRADE_ORDINAL_HPP_

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ordgrade/numerics.hpp"

namespace ordgrade {

/// Ordered grades and the metric value attached to each one.
class RankScale {
 public:
  explicit RankScale(Vec ranks) : ranks_(std::move(ranks)) {
    if (ranks_.empty()) throw std::invalid_argument("RankScale: no ranks");
    for (std::size_t i = 0; i < ranks_.size(); ++i) {
      if (!std::isfinite(ranks_[i]))
        throw std::invalid_argument("RankScale: non-finite rank at " + std::to_string(i));
      if (i > 0 && !(ranks_[i] > ranks_[i - 1]))
        throw std::invalid_argument("RankScale: ranks must be strictly increasing (index " +
                                    std::to_string(i) + ")");
    }
  }

  /// Ranks 0, 1, ..., C-1.
  static RankScale uniform(std::size_t num_classes) {
    Vec r(num_classes);
    for (std::size_t i = 0; i < num_classes; ++i) r[i] = static_cast<double>(i);
    return RankScale(std::move(r));
  }

  std::size_t num_classes() const noexcept { return ranks_.size(); }
  double rank(std::size_t i) const { return ranks_.at(i); }
  const Vec& ranks() const noexcept { return ranks_; }

 private:
  Vec ranks_;
};

enum class Penalty { kSquaredError, kAbsoluteError };

inline double penalty_value(Penalty p, double a, double b) noexcept {
  const double d = a - b;
  switch (p) {
    case Penalty::kAbsoluteError:
      return std::abs(d);
    case Penalty::kSquaredError:
    default:
      return d * d;
  }
}

inline std::string_view penalty_name(Penalty p) noexcept {
  return p == Penalty::kAbsoluteError ? "absolute_error" : "squared_error";
}

inline Penalty parse_penalty(std::string_view name) {
  if (name == "squared_error" || name == "squared") return Penalty::kSquaredError;
  if (name == "absolute_error" || name == "absolute") return Penalty::kAbsoluteError;
  throw std::invalid_argument("unknown penalty '" + std::string(name) + "'");
}

/// Training target over C grades. `degenerate` marks one-hot targets, which
/// have exact zeros off the true index.
struct SoftLabel {
  Vec probs;
  std::size_t true_index = 0;
  bool degenerate = false;

  std::size_t num_classes() const noexcept { return probs.size(); }
};

namespace detail {
inline void check_index(const RankScale& scale, std::size_t t, const char* who) {
  if (t >= scale.num_classes()) {
    throw std::out_of_range(std::string(who) + ": true index " + std::to_string(t) +
                            " outside [0, " + std::to_string(scale.num_classes()) + ")");
  }
}
}  // namespace detail

/// probs[j] = exp(-phi(r_t, r_j)) / sum_c exp(-phi(r_t, r_c)).
inline SoftLabel encode_soft_label(const RankScale& scale, std::size_t true_index,
                                   Penalty penalty = Penalty::kSquaredError) {
  detail::check_index(scale, true_index, "encode_soft_label");
  const std::size_t c = scale.num_classes();
  Vec neg(c);
  for (std::size_t j = 0; j < c; ++j)
    neg[j] = -penalty_value(penalty, scale.rank(true_index), scale.rank(j));
  return SoftLabel{stable_softmax(neg), true_index, false};
}

inline SoftLabel one_hot(const RankScale& scale, std::size_t true_index) {
  detail::check_index(scale, true_index, "one_hot");
  Vec p(scale.num_classes(), 0.0);
  p[true_index] = 1.0;
  return SoftLabel{std::move(p), true_index, true};
}

inline double expected_rank(const SoftLabel& label, const RankScale& scale) {
  if (label.num_classes() != scale.num_classes()) {
    throw ShapeError("expected_rank: label has " + std::to_string(label.num_classes()) +
                     " classes, scale has " + std::to_string(scale.num_classes()));
  }
  return dot(label.probs, scale.ranks());
}

enum class LabelMode { kOneHot, kOrdinal };

inline std::string_view label_mode_name(LabelMode m) noexcept {
  return m == LabelMode::kOneHot ? "one_hot" : "ordinal";
}

inline LabelMode parse_label_mode(std::string_view name) {
  if (name == "one_hot") return LabelMode::kOneHot;
  if (name == "ordinal") return LabelMode::kOrdinal;
  throw std::invalid_argument("unknown label mode '" + std::string(name) + "'");
}

inline SoftLabel make_target(LabelMode mode, const RankScale& scale, std::size_t t,
                             Penalty penalty = Penalty::kSquaredError) {
  return mode == LabelMode::kOneHot ? one_hot(scale, t)
                                    : encode_soft_label(scale, t, penalty);
}

}  // namespace ordgrade

#endif  // ORDGRADE_ORDINAL_HPP_
