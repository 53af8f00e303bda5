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

#include "ordgrade/numerics.hpp"
#include "ordgrade/rng.hpp"

namespace ordgrade {
namespace {

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
  const Mat a{{1.5, -2.0}, {3.0, 4.25}};
  EXPECT_EQ(matmul(Mat::identity(2), a), a);
}

TEST(Matmul, ZeroAnnihilates) {
  Mat b(3, 4);
  for (std::size_t i = 0; i < b.size(); ++i) b.values()[i] = static_cast<double>(i) + 1.0;
  EXPECT_EQ(matmul(Mat::zeros(2, 3), b), Mat::zeros(2, 4));
}

TEST(Matmul, HandMultiplication) {
  const Mat a{{1, 2}, {3, 4}};
  const Mat v{{1}, {1}};
  EXPECT_EQ(matmul(a, v), (Mat{{3}, {7}}));
}

TEST(Matmul, RejectsNonConformingShapes) {
  EXPECT_THROW(matmul(Mat(2, 3), Mat(2, 3)), ShapeError);
}

TEST(Matmul, AssociativeOnRandomTriples) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.below(5), k = 1 + rng.below(5), l = 1 + rng.below(5),
                      q = 1 + rng.below(5);
    Mat a(n, k), b(k, l), c(l, q);
    for (Mat* m : {&a, &b, &c})
      for (double& v : m->values()) v = rng.normal();
    const Mat left = matmul(matmul(a, b), c);
    const Mat right = matmul(a, matmul(b, c));
    for (std::size_t i = 0; i < left.size(); ++i) {
      const double scale = std::max(1.0, std::abs(left.values()[i]));
      EXPECT_NEAR(left.values()[i], right.values()[i], 1e-9 * scale);
    }
  }
}

TEST(Hadamard, IdentityAndZero) {
  const Mat a{{1, -2, 3}, {4, 5, -6}};
  EXPECT_EQ(hadamard(a, Mat::ones(2, 3)), a);
  EXPECT_EQ(hadamard(a, Mat::zeros(2, 3)), Mat::zeros(2, 3));
}

TEST(Hadamard, HandProduct) {
  EXPECT_EQ(hadamard(Vec{2, 3}, Vec{4, 5}), (Vec{8, 15}));
}

TEST(Hadamard, ShapeMismatch) {
  EXPECT_THROW(hadamard(Mat(2, 2), Mat(2, 3)), ShapeError);
  EXPECT_THROW(hadamard(Vec{1, 2}, Vec{1}), ShapeError);
}

TEST(StableSoftmax, SymmetricInputIsUniform) {
  for (double v : stable_softmax(Vec{7.5, 7.5, 7.5})) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(StableSoftmax, SingleElement) {
  EXPECT_EQ(stable_softmax(Vec{-123.0}), Vec{1.0});
}

TEST(StableSoftmax, TwoElementReference) {
  const Vec p = stable_softmax(Vec{0.0, 1.0});
  EXPECT_NEAR(p[0], 0.26894142136999512, 1e-15);
  EXPECT_NEAR(p[1], 0.73105857863000488, 1e-15);
}

TEST(StableSoftmax, LargeMagnitudesDoNotOverflow) {
  const Vec p = stable_softmax(Vec{1e4, -1e4, 9999.0});
  ASSERT_TRUE(all_finite(p));
  EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-12);
  EXPECT_GT(p[0], p[2]);
}

TEST(StableSoftmax, EmptyRejected) {
  EXPECT_THROW(stable_softmax(Vec{}), std::invalid_argument);
}

TEST(StableSoftmax, ShiftInvariance) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    Vec v(1 + rng.below(8));
    for (double& x : v) x = rng.normal(0.0, 10.0);
    const double shift = rng.uniform(-500.0, 500.0);
    Vec w = v;
    for (double& x : w) x += shift;
    const Vec a = stable_softmax(v), b = stable_softmax(w);
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_NEAR(a[i], b[i], 1e-12);
      sum += a[i];
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(LogSumExp, MatchesDirectEvaluation) {
  const Vec v{0.3, -1.2, 2.0};
  EXPECT_NEAR(log_sum_exp(v), std::log(std::exp(0.3) + std::exp(-1.2) + std::exp(2.0)), 1e-14);
}

TEST(Rng, EqualSeedsGiveEqualStreams) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 10000; ++i) {
    const auto x = a.next_u64();
    ASSERT_EQ(x, b.next_u64());
    differs = differs || x != c.next_u64();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, MatchesReferenceXoshiro256StarStar) {
  // Reference values from an independent splitmix64 + xoshiro256** script.
  Rng r(0);
  EXPECT_EQ(r.next_u64(), 0x99ec5f36cb75f2b4ULL);
  EXPECT_EQ(r.next_u64(), 0xbf6e1f784956452aULL);
  EXPECT_EQ(r.next_u64(), 0x1a5f849d4933e6e0ULL);
}

TEST(Rng, SplitStreamsAreStableAndDistinct) {
  EXPECT_EQ(Rng(0).split("weights").next_u64(), Rng(0).split("weights").next_u64());
  EXPECT_NE(Rng(0).split("weights").next_u64(), Rng(0).split("data").next_u64());
  EXPECT_NE(Rng(0).split("weights").next_u64(), Rng(1).split("weights").next_u64());
}

TEST(Rng, UniformAndNormalMoments) {
  Rng r(9);
  double su = 0, sn = 0, sn2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = r.normal();
    sn += z;
    sn2 += z * z;
  }
  EXPECT_NEAR(su / n, 0.5, 0.005);
  EXPECT_NEAR(sn / n, 0.0, 0.01);
  EXPECT_NEAR(sn2 / n, 1.0, 0.01);
}

TEST(Rng, ShuffleIsAPermutation) {
  Rng r(3);
  std::vector<int> v(100);
  for (int i = 0; i < 100; ++i) v[i] = i;
  r.shuffle(std::span<int>(v));
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sorted[i], i);
  EXPECT_NE(v, sorted);
}

}  // namespace
}  // namespace ordgrade
