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

#ifndef ORDGRADE_HBP_HPP_
#define ORDGRADE_HBP_HPP_

// Cross-layer bilinear fusion of three feature vectors:
//   h = concat(U^T f1 . V^T f3, U^T f1 . S^T f5, V^T f3 . S^T f5),  Z = P^T h
// where "." is the element-wise product.

#include <cmath>
#include <cstddef>
#include <string>

#include "ordgrade/numerics.hpp"
#include "ordgrade/rng.hpp"

namespace ordgrade {

/// Uniform in +-sqrt(6 / (fan_in + fan_out)).
inline Mat glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  Mat m(fan_in, fan_out);
  const double fan = static_cast<double>(fan_in + fan_out);
  const double bound = fan > 0.0 ? std::sqrt(6.0 / fan) : 0.0;
  for (double& v : m.values()) v = rng.uniform(-bound, bound);
  return m;
}

struct BilinearParams {
  Mat U;  // d1 x m
  Mat V;  // d3 x m
  Mat S;  // d5 x m
  Mat P;  // 3m x C

  std::size_t bilinear_dim() const noexcept { return U.cols(); }
  std::size_t num_classes() const noexcept { return P.cols(); }

  static BilinearParams init(std::size_t d1, std::size_t d3, std::size_t d5, std::size_t m,
                             std::size_t num_classes, Rng& rng) {
    BilinearParams p;
    p.U = glorot_uniform(d1, m, rng);
    p.V = glorot_uniform(d3, m, rng);
    p.S = glorot_uniform(d5, m, rng);
    p.P = glorot_uniform(3 * m, num_classes, rng);
    return p;
  }

  void validate() const {
    const std::size_t m = U.cols();
    if (V.cols() != m || S.cols() != m) {
      throw ShapeError("BilinearParams: projection widths U " + std::to_string(U.cols()) +
                       ", V " + std::to_string(V.cols()) + ", S " + std::to_string(S.cols()) +
                       " differ");
    }
    if (P.rows() != 3 * m) {
      throw ShapeError("BilinearParams: P has " + std::to_string(P.rows()) +
                       " rows, expected 3m = " + std::to_string(3 * m));
    }
  }
};

struct FeatureTriple {
  Vec f1;
  Vec f3;
  Vec f5;
};

struct FusionOutput {
  Vec logits;
  Vec bilinear;  // length 3m, the pre-classifier vector
  // Projections kept for the backward pass.
  Vec proj1;
  Vec proj3;
  Vec proj5;
};

namespace detail {
inline void check_fusion_shapes(const BilinearParams& p, const FeatureTriple& f) {
  p.validate();
  auto check = [](const Mat& w, const Vec& v, const char* name) {
    if (w.rows() != v.size()) {
      throw ShapeError(std::string("fuse: ") + name + " has length " + std::to_string(v.size()) +
                       " but its projection expects " + std::to_string(w.rows()));
    }
  };
  check(p.U, f.f1, "f1");
  check(p.V, f.f3, "f3");
  check(p.S, f.f5, "f5");
}
}  // namespace detail

inline FusionOutput fuse(const BilinearParams& params, const FeatureTriple& feats) {
  detail::check_fusion_shapes(params, feats);
  const std::size_t m = params.bilinear_dim();
  FusionOutput out;
  out.proj1 = matvec_t(params.U, feats.f1);
  out.proj3 = matvec_t(params.V, feats.f3);
  out.proj5 = matvec_t(params.S, feats.f5);
  out.bilinear.resize(3 * m);
  for (std::size_t i = 0; i < m; ++i) {
    out.bilinear[i] = out.proj1[i] * out.proj3[i];
    out.bilinear[m + i] = out.proj1[i] * out.proj5[i];
    out.bilinear[2 * m + i] = out.proj3[i] * out.proj5[i];
  }
  out.logits = matvec_t(params.P, out.bilinear);
  return out;
}

struct FusionGrads {
  Mat U, V, S, P;
  Vec f1, f3, f5;
};

/// Gradients of <grad_logits, Z> + <grad_bilinear, h>. `grad_bilinear` may be
/// empty when only the logits receive gradient. `forward` must come from
/// fuse(params, feats).
inline FusionGrads fuse_backward(const BilinearParams& params, const FeatureTriple& feats,
                                 const FusionOutput& forward, std::span<const double> grad_logits,
                                 std::span<const double> grad_bilinear = {}) {
  detail::check_fusion_shapes(params, feats);
  const std::size_t m = params.bilinear_dim();
  if (grad_logits.size() != params.num_classes()) {
    throw ShapeError("fuse_backward: logit gradient length " + std::to_string(grad_logits.size()) +
                     " vs " + std::to_string(params.num_classes()) + " classes");
  }
  if (!grad_bilinear.empty() && grad_bilinear.size() != 3 * m) {
    throw ShapeError("fuse_backward: bilinear gradient length " +
                     std::to_string(grad_bilinear.size()) + " vs 3m = " + std::to_string(3 * m));
  }
  FusionGrads g;
  g.P = outer(forward.bilinear, grad_logits);
  Vec gh = matvec(params.P, grad_logits);
  if (!grad_bilinear.empty()) axpy(gh, grad_bilinear);

  Vec ga(m), gb(m), gc(m);
  const Vec& a = forward.proj1;
  const Vec& b = forward.proj3;
  const Vec& c = forward.proj5;
  for (std::size_t i = 0; i < m; ++i) {
    const double g_ab = gh[i], g_ac = gh[m + i], g_bc = gh[2 * m + i];
    ga[i] = g_ab * b[i] + g_ac * c[i];
    gb[i] = g_ab * a[i] + g_bc * c[i];
    gc[i] = g_ac * a[i] + g_bc * b[i];
  }
  g.U = outer(feats.f1, ga);
  g.V = outer(feats.f3, gb);
  g.S = outer(feats.f5, gc);
  g.f1 = matvec(params.U, ga);
  g.f3 = matvec(params.V, gb);
  g.f5 = matvec(params.S, gc);
  return g;
}

inline FusionGrads fuse_backward(const BilinearParams& params, const FeatureTriple& feats,
                                 std::span<const double> grad_logits) {
  return fuse_backward(params, feats, fuse(params, feats), grad_logits);
}

}  // namespace ordgrade

#endif  // ORDGRADE_HBP_HPP_
