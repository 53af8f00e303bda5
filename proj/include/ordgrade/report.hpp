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

#ifndef ORDGRADE_REPORT_HPP_
#define ORDGRADE_REPORT_HPP_

#include <cstdio>
#include <optional>
#include <sstream>
#include <string>

#include "json.hpp"
#include "ordgrade/model.hpp"

namespace ordgrade {

inline constexpr const char* kReportSchema = "ordgrade.report/1";

inline nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline nlohmann::json eval_to_json(const EvalResult& r) {
  using nlohmann::json;
  const auto& cm = r.confusion;
  json rows = json::array();
  for (std::size_t i = 0; i < cm.num_classes(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < cm.num_classes(); ++j) row.push_back(cm.at(i, j));
    rows.push_back(row);
  }
  json acc = json::array();
  for (const auto& a : cm.per_class_accuracy()) acc.push_back(optional_json(a));
  return {{"samples", cm.total()},
          {"qwk", optional_json(r.kappa.qwk)},
          {"qwk_degenerate", r.kappa.degenerate()},
          {"observed_disagreement", r.kappa.observed_disagreement},
          {"expected_disagreement", r.kappa.expected_disagreement},
          {"accuracy", optional_json(cm.accuracy())},
          {"per_class_accuracy", acc},
          {"confusion", rows},
          {"adjacency_profile", r.adjacency},
          {"adjacent_error_fraction", optional_json(adjacent_error_fraction(r.adjacency))}};
}

inline std::string fmt_opt(const std::optional<double>& v, const char* f = "%.4f") {
  if (!v) return "undefined";
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, *v);
  return buf;
}

/// Aligned plain-text rendering of one evaluation.
inline std::string eval_to_text(const EvalResult& r, const std::string& title) {
  std::ostringstream o;
  const auto& cm = r.confusion;
  const std::size_t c = cm.num_classes();
  o << "== " << title << " (" << cm.total() << " samples) ==\n";
  o << "quadratic weighted kappa: " << fmt_opt(r.kappa.qwk, "%.6f") << '\n';
  o << "accuracy:                 " << fmt_opt(cm.accuracy()) << '\n';
  o << "confusion (rows = true, cols = predicted)\n";
  char buf[64];
  o << "        ";
  for (std::size_t j = 0; j < c; ++j) {
    std::snprintf(buf, sizeof(buf), "%8zu", j);
    o << buf;
  }
  o << "    acc\n";
  const auto acc = cm.per_class_accuracy();
  for (std::size_t i = 0; i < c; ++i) {
    std::snprintf(buf, sizeof(buf), "%8zu", i);
    o << buf;
    for (std::size_t j = 0; j < c; ++j) {
      std::snprintf(buf, sizeof(buf), "%8lld", static_cast<long long>(cm.at(i, j)));
      o << buf;
    }
    o << "  " << fmt_opt(acc[i]) << '\n';
  }
  o << "errors by ordinal distance:";
  for (std::size_t d = 0; d < r.adjacency.size(); ++d)
    o << ' ' << d << ':' << r.adjacency[d];
  o << '\n';
  return o.str();
}

}  // namespace ordgrade

#endif  // ORDGRADE_REPORT_HPP_
