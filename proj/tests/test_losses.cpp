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

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "ordgrade/gradcheck.hpp"
#include "ordgrade/losses.hpp"

namespace ordgrade {
namespace {

constexpr double kFocalHalf = 0.17328679513998633;   // 0.25 ln 2
constexpr double kMetricToy = 0.31326168751822283;   // ln(1 + e^-1)
constexpr double kSigmoid1 = 0.73105857863000488;    // e / (e + 1)

CenterBank toy_bank(double lambda = 1.0, double delta = 0.0) {
  MetricParams p;
  p.centers_per_class = 1;
  p.lambda = lambda;
  p.delta = delta;
  p.gamma_entropy = 1.0;
  return CenterBank(2, p, Mat{{1, 0}, {0, 1}});
}

TEST(FocalLoss, PerfectPredictionIsZero) {
  const SoftLabel y = one_hot(RankScale::uniform(3), 1);
  EXPECT_EQ(focal_loss(Vec{0, 1, 0}, y, {2.0}).loss, 0.0);
}

TEST(FocalLoss, GammaZeroIsCrossEntropy) {
  const SoftLabel y = one_hot(RankScale::uniform(3), 2);
  const Vec p = stable_softmax(Vec{0.2, -1.0, 0.7});
  EXPECT_NEAR(focal_loss(p, y, {0.0}).loss, -std::log(p[2]), 1e-12);
}

TEST(FocalLoss, HalfProbabilityWithGammaTwo) {
  const SoftLabel y = one_hot(RankScale::uniform(2), 0);
  EXPECT_NEAR(focal_loss(Vec{0.5, 0.5}, y, {2.0}).loss, kFocalHalf, 1e-15);
}

TEST(FocalLoss, SoftTargetSumsPerClassTerms) {
  const SoftLabel y = encode_soft_label(RankScale::uniform(3), 1);
  const Vec p{0.2, 0.5, 0.3};
  double expect = 0;
  for (int j = 0; j < 3; ++j) expect -= y.probs[j] * std::pow(1 - p[j], 2) * std::log(p[j]);
  EXPECT_NEAR(focal_loss(p, y, {2.0}).loss, expect, 1e-15);
}

TEST(FocalLoss, ClampsZeroProbability) {
  const SoftLabel y = one_hot(RankScale::uniform(2), 0);
  const FocalResult r = focal_loss(Vec{0.0, 1.0}, y, {2.0});
  EXPECT_TRUE(r.clamped);
  EXPECT_TRUE(std::isfinite(r.loss));
  EXPECT_NEAR(r.loss, -std::log(1e-12) * std::pow(1 - 1e-12, 2), 1e-9);
}

TEST(FocalLoss, LengthMismatch) {
  EXPECT_THROW(focal_loss(Vec{0.5, 0.5}, one_hot(RankScale::uniform(3), 0), {}), ShapeError);
}

TEST(FocalLoss, TranslationInvariantInLogits) {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t c = 2 + rng.below(4);
    Vec z(c);
    for (double& v : z) v = rng.normal(0, 2);
    Vec shifted = z;
    const double s = rng.uniform(-50, 50);
    for (double& v : shifted) v += s;
    const SoftLabel y = encode_soft_label(RankScale::uniform(c), rng.below(c));
    EXPECT_LT(std::abs(focal_loss(stable_softmax(z), y, {2.0}).loss -
                       focal_loss(stable_softmax(shifted), y, {2.0}).loss),
              1e-10);
  }
}

TEST(FocalLoss, GradientMatchesFiniteDifferencesIncludingSmallGamma) {
  Rng rng(8);
  for (double gamma : {0.0, 0.3, 1.0, 2.0, 4.0}) {
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t c = 2 + rng.below(4);
      Vec z(c);
      for (double& v : z) v = rng.normal(0, 1.5);
      const SoftLabel y = encode_soft_label(RankScale::uniform(c), rng.below(c));
      const Vec an = focal_loss(stable_softmax(z), y, {gamma}).grad_logits;
      const Vec nu = numeric_gradient(z, [&] { return focal_loss(stable_softmax(z), y, {gamma}).loss; });
      EXPECT_LT(relative_error(an, nu), 1e-7) << "gamma " << gamma;
    }
  }
}

TEST(RelaxedSimilarity, SingleCenterIsInnerProduct) {
  MetricParams p;
  p.centers_per_class = 1;
  const CenterBank bank(2, p, Mat{{0.3, -0.4}, {1.0, 2.0}});
  EXPECT_EQ(relaxed_similarity(Vec{2.0, 1.0}, bank, 0), 0.3 * 2.0 - 0.4 * 1.0);
}

TEST(RelaxedSimilarity, OrthogonalEmbeddingIsZero) {
  MetricParams p;
  p.centers_per_class = 2;
  const CenterBank bank(1, p, Mat{{1, 0, 0}, {0, 1, 0}});
  EXPECT_EQ(relaxed_similarity(Vec{0, 0, 5}, bank, 0), 0.0);
}

TEST(RelaxedSimilarity, TwoCenterSoftMax) {
  MetricParams p;
  p.centers_per_class = 2;
  p.gamma_entropy = 1.0;
  const CenterBank bank(1, p, Mat{{1, 0}, {0, 1}});
  EXPECT_NEAR(relaxed_similarity(Vec{1, 0}, bank, 0), kSigmoid1, 1e-15);
}

TEST(RelaxedSimilarity, ClassOutOfRange) {
  EXPECT_THROW(relaxed_similarity(Vec{1, 0}, toy_bank(), 2), std::out_of_range);
  EXPECT_THROW(relaxed_similarity(Vec{1, 0, 0}, toy_bank(), 0), ShapeError);
}

TEST(MetricLoss, TwoClassToy) {
  EXPECT_NEAR(metric_loss(Vec{1, 0}, toy_bank(), 0).loss, kMetricToy, 1e-15);
}

TEST(MetricLoss, EqualSimilaritiesGiveLogC) {
  MetricParams p;
  p.centers_per_class = 2;
  p.delta = 0.0;
  p.lambda = 7.0;
  const CenterBank bank(4, p, Mat(8, 3, 0.25));
  EXPECT_NEAR(metric_loss(Vec{1, -2, 0.5}, bank, 1).loss, std::log(4.0), 1e-12);
}

TEST(MetricLoss, LargeScaleWithSatisfiedMarginVanishes) {
  EXPECT_LT(metric_loss(Vec{1, 0}, toy_bank(100.0, 0.0), 0).loss, 1e-6);
}

TEST(MetricLoss, SingleCenterEqualsMarginSoftmax) {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t c = 2 + rng.below(4), d = 1 + rng.below(8);
    MetricParams p;
    p.centers_per_class = 1;
    p.lambda = rng.uniform(1, 20);
    p.delta = rng.uniform(0, 0.2);
    p.gamma_entropy = rng.uniform(0.05, 1);
    const CenterBank bank = CenterBank::random(c, d, p, rng);
    Vec x(d);
    for (double& v : x) v = rng.normal(0, 0.5);
    std::vector<std::vector<double>> w(c);
    for (std::size_t k = 0; k < c; ++k) w[k].assign(bank.center(k, 0).begin(), bank.center(k, 0).end());
    const std::size_t y = rng.below(c);
    EXPECT_NEAR(metric_loss(x, bank, y).loss, oracle::margin_softmax_k1(x, w, y, p.lambda, p.delta), 1e-12);
  }
}

TEST(MetricLoss, NonNegative) {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    MetricParams p;
    p.centers_per_class = 1 + rng.below(3);
    p.lambda = rng.uniform(0.5, 40);
    p.delta = rng.uniform(0, 0.5);
    const CenterBank bank = CenterBank::random(2 + rng.below(4), 4, p, rng);
    Vec x(4);
    for (double& v : x) v = rng.normal();
    EXPECT_GE(metric_loss(x, bank, rng.below(bank.num_classes())).loss, 0.0);
  }
}

TEST(MetricLoss, GradientsMatchFiniteDifferences) {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t c = 2 + rng.below(4), d = 1 + rng.below(8);
    MetricParams p;
    p.centers_per_class = 1 + rng.below(3);
    p.gamma_entropy = rng.uniform(0.1, 1.0);
    CenterBank bank = CenterBank::random(c, d, p, rng);
    Vec x(d);
    for (double& v : x) v = rng.normal(0, 0.5);
    const std::size_t y = rng.below(c);
    const MetricResult r = metric_loss(x, bank, y);
    auto f = [&] { return metric_loss(x, bank, y).loss; };
    EXPECT_LT(relative_error(r.grad_x, numeric_gradient(x, f)), 1e-6);
    EXPECT_LT(relative_error(r.grad_centers.values(), numeric_gradient(bank.centers().values(), f)), 1e-6);
  }
}

TEST(CenterBank, NormalizeGivesUnitRows) {
  Rng rng(2);
  MetricParams p;
  p.centers_per_class = 3;
  const CenterBank bank = CenterBank::random(4, 6, p, rng);
  for (std::size_t r = 0; r < bank.centers().rows(); ++r)
    EXPECT_NEAR(l2_norm(bank.centers().row(r)), 1.0, 1e-9);
  EXPECT_THROW(CenterBank(2, p, Mat(5, 3)), ShapeError);
}

TEST(CombinedLoss, WeightsSelectSingleTerms) {
  const SoftLabel y = one_hot(RankScale::uniform(2), 0);
  const Vec z{0.0, 0.0}, x{1.0, 0.0};
  const CenterBank bank = toy_bank();
  const FocalParams fp{2.0};
  const CombinedResult only_focal = combined_loss(z, x, y, bank, fp, {0.0, 0.7});
  EXPECT_EQ(only_focal.loss, 0.7 * only_focal.focal);
  for (double g : only_focal.grad_embedding) EXPECT_EQ(g, 0.0);
  const CombinedResult only_metric = combined_loss(z, x, y, bank, fp, {1.3, 0.0});
  EXPECT_EQ(only_metric.loss, 1.3 * only_metric.metric);
  for (double g : only_metric.grad_logits) EXPECT_EQ(g, 0.0);
}

TEST(CombinedLoss, HalfAndHalfOnToyExamples) {
  const CombinedResult r = combined_loss(Vec{0.0, 0.0}, Vec{1.0, 0.0}, one_hot(RankScale::uniform(2), 0),
                                         toy_bank(), {2.0}, {0.5, 0.5});
  EXPECT_NEAR(r.focal, kFocalHalf, 1e-15);
  EXPECT_NEAR(r.metric, kMetricToy, 1e-15);
  EXPECT_NEAR(r.loss, 0.24327424132910458, 1e-15);
}

TEST(CombinedLoss, RejectsZeroWeightsAndBadLogits) {
  const SoftLabel y = one_hot(RankScale::uniform(2), 0);
  EXPECT_THROW(combined_loss(Vec{0, 0}, Vec{1, 0}, y, toy_bank(), {}, {0.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(combined_loss(Vec{NAN, 0}, Vec{1, 0}, y, toy_bank(), {}, {}), NumericalError);
}

}  // namespace
}  // namespace ordgrade
