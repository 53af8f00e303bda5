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

#include "oracles.hpp"
#include "ordgrade/metrics.hpp"
#include "ordgrade/rng.hpp"

namespace ordgrade {
namespace {

ConfusionMatrix from_rows(const std::vector<std::vector<std::int64_t>>& rows) {
  ConfusionMatrix cm(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.size(); ++j) cm.at(i, j) = rows[i][j];
  return cm;
}

TEST(Confusion, PerfectPredictionsAreDiagonal) {
  const std::vector<int> y{0, 1, 2, 2, 1};
  const ConfusionMatrix cm = confusion(y, y, 3);
  EXPECT_EQ(cm, from_rows({{1, 0, 0}, {0, 2, 0}, {0, 0, 2}}));
}

TEST(Confusion, EmptyInputs) {
  const ConfusionMatrix cm = confusion(std::vector<int>{}, std::vector<int>{}, 3);
  EXPECT_EQ(cm.total(), 0);
  for (const auto& a : cm.per_class_accuracy()) EXPECT_FALSE(a.has_value());
  EXPECT_FALSE(cm.accuracy().has_value());
}

TEST(Confusion, HandTally) {
  const ConfusionMatrix cm = confusion(std::vector<int>{0, 0, 1, 2}, std::vector<int>{0, 1, 1, 2}, 3);
  EXPECT_EQ(cm, from_rows({{1, 1, 0}, {0, 1, 0}, {0, 0, 1}}));
  const auto acc = cm.per_class_accuracy();
  EXPECT_EQ(*acc[0], 0.5);
  EXPECT_EQ(*acc[1], 1.0);
  EXPECT_EQ(*acc[2], 1.0);
}

TEST(Confusion, ZeroSupportClassIsUndefined) {
  const ConfusionMatrix cm = confusion(std::vector<int>{0, 0}, std::vector<int>{0, 1}, 3);
  const auto acc = cm.per_class_accuracy();
  EXPECT_TRUE(acc[0].has_value());
  EXPECT_FALSE(acc[1].has_value());
  EXPECT_FALSE(acc[2].has_value());
}

TEST(Confusion, RejectsOutOfRange) {
  try {
    confusion(std::vector<int>{0, 3}, std::vector<int>{0, 0}, 3);
    FAIL();
  } catch (const std::out_of_range& e) {
    EXPECT_NE(std::string(e.what()).find("index 1"), std::string::npos);
  }
  EXPECT_THROW(confusion(std::vector<int>{0}, std::vector<int>{0, 1}, 3), std::invalid_argument);
  EXPECT_THROW(confusion(std::vector<int>{-1}, std::vector<int>{0}, 3), std::out_of_range);
}

TEST(Kappa, PerfectAgreementIsOne) {
  const KappaReport r = quadratic_weighted_kappa(from_rows({{5, 0, 0}, {0, 2, 0}, {0, 0, 7}}));
  ASSERT_TRUE(r.qwk);
  EXPECT_EQ(*r.qwk, 1.0);
  EXPECT_EQ(r.observed_disagreement, 0.0);
}

TEST(Kappa, ChanceAgreementIsZero) {
  // Outer product of marginals (2, 3, 5) and (4, 1, 5) over n = 10.
  const std::vector<double> rowm{2, 3, 5}, colm{4, 1, 5};
  std::vector<std::vector<std::int64_t>> rows(3, std::vector<std::int64_t>(3));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) rows[i][j] = static_cast<std::int64_t>(rowm[i] * colm[j]);
  const KappaReport r = quadratic_weighted_kappa(from_rows(rows));
  ASSERT_TRUE(r.qwk);
  EXPECT_NEAR(*r.qwk, 0.0, 1e-12);
}

TEST(Kappa, MatchesBruteForceOnRandomMatrices) {
  Rng rng(101);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::vector<std::int64_t>> rows(5, std::vector<std::int64_t>(5));
    for (auto& r : rows)
      for (auto& v : r) v = static_cast<std::int64_t>(rng.below(50));
    rows[0][1] += 1;  // keep the expected disagreement positive
    const KappaReport k = quadratic_weighted_kappa(from_rows(rows));
    ASSERT_TRUE(k.qwk);
    EXPECT_NEAR(*k.qwk, oracle::brute_force_qwk(rows), 1e-12);
  }
}

TEST(Kappa, DegenerateSingleClassMass) {
  const KappaReport r = quadratic_weighted_kappa(from_rows({{0, 0}, {0, 9}}));
  EXPECT_TRUE(r.degenerate());
  EXPECT_EQ(r.expected_disagreement, 0.0);
}

TEST(Kappa, RejectsEmptyOrSingleClass) {
  EXPECT_THROW(quadratic_weighted_kappa(ConfusionMatrix(3)), std::invalid_argument);
  EXPECT_THROW(quadratic_weighted_kappa(from_rows({{4}})), std::invalid_argument);
}

TEST(Kappa, ScaleAndTransposeInvariant) {
  Rng rng(55);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::vector<std::int64_t>> rows(4, std::vector<std::int64_t>(4));
    for (auto& r : rows)
      for (auto& v : r) v = static_cast<std::int64_t>(rng.below(20));
    rows[3][0] += 1;
    const ConfusionMatrix cm = from_rows(rows);
    const std::int64_t s = 1 + static_cast<std::int64_t>(rng.below(7));
    ConfusionMatrix scaled = cm;
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) scaled.at(i, j) *= s;
    const double k = *quadratic_weighted_kappa(cm).qwk;
    EXPECT_NEAR(*quadratic_weighted_kappa(scaled).qwk, k, 1e-12);
    EXPECT_NEAR(*quadratic_weighted_kappa(cm.transposed()).qwk, k, 1e-12);
  }
}

TEST(Kappa, MovingACountOffDiagonalLowersKappa) {
  const ConfusionMatrix diag = from_rows({{4, 0, 0}, {0, 4, 0}, {0, 0, 4}});
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      if (i == j) continue;
      ConfusionMatrix worse = diag;
      --worse.at(i, i);
      ++worse.at(i, j);
      EXPECT_LT(*quadratic_weighted_kappa(worse).qwk, *quadratic_weighted_kappa(diag).qwk);
    }
}

TEST(Adjacency, Profiles) {
  const auto diag = adjacency_profile(from_rows({{3, 0, 0}, {0, 2, 0}, {0, 0, 1}}));
  EXPECT_EQ(diag, (std::vector<std::int64_t>{6, 0, 0}));
  const auto tally = adjacency_profile(confusion(std::vector<int>{0, 0, 1, 2}, std::vector<int>{0, 1, 1, 2}, 3));
  EXPECT_EQ(tally, (std::vector<std::int64_t>{3, 1, 0}));
  const auto anti = adjacency_profile(from_rows({{0, 3}, {5, 0}}));
  EXPECT_EQ(anti, (std::vector<std::int64_t>{0, 8}));
  EXPECT_EQ(*adjacent_error_fraction(tally), 1.0);
  EXPECT_FALSE(adjacent_error_fraction(diag).has_value());
}

}  // namespace
}  // namespace ordgrade
