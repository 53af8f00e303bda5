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

#ifndef ORDGRADE_DATASET_HPP_
#define ORDGRADE_DATASET_HPP_

// Feature-vector datasets: CSV reading/writing and the ordinal synthetic
// generator used in place of real fundus-image embeddings.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "ordgrade/numerics.hpp"
#include "ordgrade/rng.hpp"

namespace ordgrade {

class IoError : public Error {
 public:
  using Error::Error;
};

struct Dataset {
  Mat features;  // n x d_in
  std::vector<int> labels;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim() const noexcept { return features.cols(); }
  std::span<const double> sample(std::size_t i) const { return features.row(i); }
};

/// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string& context) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw IoError(context + ": cannot parse number '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

/// Header `x0,...,x{d-1},label`, then one row per sample.
inline void write_dataset_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  for (std::size_t j = 0; j < ds.dim(); ++j) out << 'x' << j << ',';
  out << "label\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.sample(i)) out << format_double(v) << ',';
    out << ds.labels[i] << '\n';
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw IoError("dataset '" + path.string() + "' has no header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  if (header.empty() || header.back() != "label")
    throw IoError("dataset '" + path.string() + "': last header column must be 'label'");
  const std::size_t d = header.size() - 1;
  Vec values;
  std::vector<int> labels;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    const std::string ctx = path.string() + ":" + std::to_string(lineno);
    if (cells.size() != d + 1)
      throw IoError(ctx + ": expected " + std::to_string(d + 1) + " columns, got " +
                    std::to_string(cells.size()));
    for (std::size_t j = 0; j < d; ++j) values.push_back(parse_double(cells[j], ctx));
    const double lab = parse_double(cells[d], ctx);
    if (lab != std::floor(lab) || lab < 0)
      throw IoError(ctx + ": label must be a non-negative integer");
    labels.push_back(static_cast<int>(lab));
  }
  return Dataset{Mat(labels.size(), d, std::move(values)), std::move(labels)};
}

/// Synthetic ordinal data. Each sample draws a latent severity
///   u ~ N(spacing * class, latent_sigma^2)
/// and is observed through a fixed random smooth map of u plus isotropic
/// feature noise, so that class means are ordered along a curve in feature
/// space rather than separable by one linear direction.
struct SyntheticSpec {
  std::vector<std::size_t> samples_per_class{400, 200, 120, 60, 30};
  std::size_t d_in = 16;
  double spacing = 1.0;
  double latent_sigma = 0.35;
  double noise_sigma = 0.3;

  std::size_t num_classes() const noexcept { return samples_per_class.size(); }
  std::size_t total() const noexcept {
    std::size_t n = 0;
    for (auto v : samples_per_class) n += v;
    return n;
  }
};

/// Long-tailed five-grade preset; frequencies roughly halve at each grade.
inline SyntheticSpec long_tailed_preset() { return SyntheticSpec{}; }

struct SyntheticData {
  Dataset data;
  Vec latent;
};

namespace detail {
// Random map from severity to features, shared by every split of one seed.
struct SeverityMap {
  Vec freq, phase, amp, lin;

  static SeverityMap make(std::size_t d, Rng rng) {
    SeverityMap m;
    for (std::size_t j = 0; j < d; ++j) {
      m.freq.push_back(rng.uniform(0.4, 1.2));
      m.phase.push_back(rng.uniform(0.0, 6.283185307179586));
      m.amp.push_back(rng.uniform(0.5, 1.0));
      m.lin.push_back(rng.normal(0.0, 0.3));
    }
    return m;
  }

  double at(std::size_t j, double u) const {
    return amp[j] * std::sin(freq[j] * u + phase[j]) + lin[j] * u;
  }
};
}  // namespace detail

/// `map_seed` fixes the severity-to-feature map; `sample_seed` the draws. Use
/// one map seed with different sample seeds for train/validation splits.
inline SyntheticData generate_synthetic(const SyntheticSpec& spec, std::uint64_t map_seed,
                                        std::uint64_t sample_seed) {
  const auto map = detail::SeverityMap::make(spec.d_in, Rng(map_seed).split("severity-map"));
  Rng rng = Rng(sample_seed).split("samples");
  const std::size_t n = spec.total();
  SyntheticData out;
  out.data.features = Mat(n, spec.d_in);
  out.data.labels.reserve(n);
  out.latent.reserve(n);
  std::size_t row = 0;
  for (std::size_t c = 0; c < spec.num_classes(); ++c) {
    for (std::size_t i = 0; i < spec.samples_per_class[c]; ++i, ++row) {
      const double u = rng.normal(spec.spacing * static_cast<double>(c), spec.latent_sigma);
      auto x = out.data.features.row(row);
      for (std::size_t j = 0; j < spec.d_in; ++j) x[j] = map.at(j, u) + rng.normal(0.0, spec.noise_sigma);
      out.data.labels.push_back(static_cast<int>(c));
      out.latent.push_back(u);
    }
  }
  return out;
}

/// Sidecar with `index,label,latent` per sample.
inline void write_latent_csv(const SyntheticData& s, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "index,label,latent\n";
  for (std::size_t i = 0; i < s.latent.size(); ++i)
    out << i << ',' << s.data.labels[i] << ',' << format_double(s.latent[i]) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace ordgrade

#endif  // ORDGRADE_DATASET_HPP_
