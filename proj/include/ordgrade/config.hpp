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

#ifndef ORDGRADE_CONFIG_HPP_
#define ORDGRADE_CONFIG_HPP_

// Run configuration: a JSON document whose keys are all optional. Missing keys
// take the defaults below (batch 32, momentum 0.9, lr 0.01 divided by 10 every
// 50 epochs, alpha = beta = 0.5, focal gamma 2).

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ordgrade/dataset.hpp"
#include "ordgrade/losses.hpp"
#include "ordgrade/model.hpp"
#include "ordgrade/ordinal.hpp"

namespace ordgrade {

/// Every violation found while validating a config, reported together.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> problems)
      : Error(join(problems)), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& p) {
    std::string s = "invalid configuration:";
    for (const auto& e : p) s += "\n  - " + e;
    return s;
  }
  std::vector<std::string> problems_;
};

struct DataConfig {
  /// Empty paths select the synthetic generator.
  std::string train_path;
  std::string val_path;
  SyntheticSpec synthetic = long_tailed_preset();
  SyntheticSpec synthetic_val = long_tailed_preset();
};

struct RunConfig {
  DataConfig data;
  ModelDims model;
  LossConfig loss;
  MetricParams metric;
  SgdConfig sgd;
  TrainOptions train;
  std::size_t epochs = 150;
  std::uint64_t seed = 0;
  std::string out_dir = "run";

  bool uses_synthetic() const noexcept { return data.train_path.empty(); }
};

inline std::vector<std::string> validation_problems(const RunConfig& c) {
  std::vector<std::string> p;
  auto need = [&](bool ok, const std::string& what) {
    if (!ok) p.push_back(what);
  };
  const auto& m = c.model;
  need(m.d_in >= 1, "model.d_in must be >= 1");
  need(m.d1 >= 1 && m.d3 >= 1 && m.d5 >= 1, "model.d1/d3/d5 must be >= 1");
  need(m.m >= 1, "model.m must be >= 1");
  need(m.num_classes >= 2, "model.num_classes must be >= 2");

  const auto& l = c.loss;
  need(std::isfinite(l.weights.alpha) && l.weights.alpha >= 0, "loss.alpha must be >= 0");
  need(std::isfinite(l.weights.beta) && l.weights.beta >= 0, "loss.beta must be >= 0");
  need(!(l.weights.alpha == 0 && l.weights.beta == 0), "loss.alpha and loss.beta cannot both be 0");
  need(std::isfinite(l.focal.gamma_focus) && l.focal.gamma_focus >= 0, "loss.gamma_focus must be >= 0");
  if (!l.ranks.empty()) {
    need(l.ranks.size() == m.num_classes, "loss.ranks must have model.num_classes entries");
    bool inc = true;
    for (std::size_t i = 1; i < l.ranks.size(); ++i) inc = inc && l.ranks[i] > l.ranks[i - 1];
    need(inc, "loss.ranks must be strictly increasing");
  }
  const auto& mp = c.metric;
  need(mp.centers_per_class >= 1, "loss.centers_per_class must be >= 1");
  need(std::isfinite(mp.lambda) && mp.lambda > 0, "loss.lambda must be > 0");
  need(std::isfinite(mp.delta) && mp.delta >= 0, "loss.delta must be >= 0");
  need(std::isfinite(mp.gamma_entropy) && mp.gamma_entropy > 0, "loss.gamma_entropy must be > 0");

  need(std::isfinite(c.sgd.lr0) && c.sgd.lr0 > 0, "optim.lr must be > 0");
  need(std::isfinite(c.sgd.momentum) && c.sgd.momentum >= 0 && c.sgd.momentum < 1,
       "optim.momentum must be in [0, 1)");
  need(c.sgd.step_every >= 1, "optim.step_every must be >= 1");
  need(std::isfinite(c.sgd.step_divisor) && c.sgd.step_divisor > 0, "optim.step_divisor must be > 0");
  need(c.train.batch_size >= 1, "optim.batch_size must be >= 1");
  need(std::isfinite(c.train.noise_sigma) && c.train.noise_sigma >= 0, "optim.noise_sigma must be >= 0");

  if (c.uses_synthetic()) {
    for (const auto* s : {&c.data.synthetic, &c.data.synthetic_val}) {
      const char* which = s == &c.data.synthetic ? "data.synthetic" : "data.synthetic_val";
      need(s->num_classes() == m.num_classes,
           std::string(which) + ".samples_per_class must have model.num_classes entries");
      need(s->d_in == m.d_in, std::string(which) + ".d_in must equal model.d_in");
      need(std::isfinite(s->spacing) && s->spacing > 0, std::string(which) + ".spacing must be > 0");
      need(std::isfinite(s->latent_sigma) && s->latent_sigma >= 0,
           std::string(which) + ".latent_sigma must be >= 0");
      need(std::isfinite(s->noise_sigma) && s->noise_sigma >= 0,
           std::string(which) + ".noise_sigma must be >= 0");
    }
    need(c.data.synthetic.total() >= 1, "data.synthetic must request at least one sample");
    need(c.train.batch_size <= c.data.synthetic.total(),
         "optim.batch_size must not exceed the training set size");
  }
  return p;
}

inline void validate(const RunConfig& c) {
  auto p = validation_problems(c);
  if (!p.empty()) throw ConfigError(std::move(p));
}

inline nlohmann::json spec_to_json(const SyntheticSpec& s) {
  return {{"samples_per_class", s.samples_per_class},
          {"d_in", s.d_in},
          {"spacing", s.spacing},
          {"latent_sigma", s.latent_sigma},
          {"noise_sigma", s.noise_sigma}};
}

inline nlohmann::json to_json(const RunConfig& c) {
  using nlohmann::json;
  json j;
  j["schema"] = "ordgrade.config/1";
  j["seed"] = c.seed;
  j["epochs"] = c.epochs;
  j["out_dir"] = c.out_dir;
  j["data"] = {{"train_path", c.data.train_path},
               {"val_path", c.data.val_path},
               {"synthetic", spec_to_json(c.data.synthetic)},
               {"synthetic_val", spec_to_json(c.data.synthetic_val)}};
  j["model"] = {{"d_in", c.model.d_in}, {"d1", c.model.d1}, {"d3", c.model.d3},
                {"d5", c.model.d5},     {"m", c.model.m},   {"num_classes", c.model.num_classes}};
  j["loss"] = {{"alpha", c.loss.weights.alpha},
               {"beta", c.loss.weights.beta},
               {"gamma_focus", c.loss.focal.gamma_focus},
               {"label_mode", label_mode_name(c.loss.label_mode)},
               {"penalty", penalty_name(c.loss.penalty)},
               {"ranks", c.loss.ranks},
               {"centers_per_class", c.metric.centers_per_class},
               {"lambda", c.metric.lambda},
               {"delta", c.metric.delta},
               {"gamma_entropy", c.metric.gamma_entropy},
               {"normalize_centers", c.metric.normalize_centers}};
  j["optim"] = {{"lr", c.sgd.lr0},
                {"momentum", c.sgd.momentum},
                {"step_every", c.sgd.step_every},
                {"step_divisor", c.sgd.step_divisor},
                {"batch_size", c.train.batch_size},
                {"noise_sigma", c.train.noise_sigma}};
  return j;
}

namespace detail {

class JsonReader {
 public:
  explicit JsonReader(std::vector<std::string>& problems) : problems_(problems) {}

  template <typename T>
  void get(const nlohmann::json& obj, const char* key, T& out, const std::string& path) {
    if (!obj.is_object() || !obj.contains(key)) return;
    try {
      out = obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      problems_.push_back(path + key + ": wrong type (" + obj.at(key).dump() + ")");
    }
  }

  /// Unsigned fields reject negative numbers instead of wrapping.
  void get_count(const nlohmann::json& obj, const char* key, std::size_t& out,
                 const std::string& path) {
    if (!obj.is_object() || !obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
      problems_.push_back(path + key + ": expected a non-negative integer (" + v.dump() + ")");
      return;
    }
    out = v.get<std::size_t>();
  }

  void warn_unknown(const nlohmann::json& obj, std::initializer_list<const char*> known,
                    const std::string& path) {
    if (!obj.is_object()) {
      problems_.push_back(path + ": expected an object");
      return;
    }
    for (const auto& [k, v] : obj.items()) {
      bool found = k == "schema";
      for (const char* n : known) found = found || k == n;
      if (!found) problems_.push_back(path + k + ": unknown key");
    }
  }

  std::vector<std::string>& problems_;
};

inline void read_spec(JsonReader& r, const nlohmann::json& j, SyntheticSpec& s,
                      const std::string& path) {
  r.warn_unknown(j, {"samples_per_class", "d_in", "spacing", "latent_sigma", "noise_sigma"}, path);
  if (j.is_object() && j.contains("samples_per_class")) {
    const auto& a = j.at("samples_per_class");
    bool ok = a.is_array();
    std::vector<std::size_t> v;
    if (ok) {
      for (const auto& e : a) {
        if (!e.is_number_integer() || e.get<std::int64_t>() < 0) ok = false;
        else v.push_back(e.get<std::size_t>());
      }
    }
    if (ok) s.samples_per_class = std::move(v);
    else r.problems_.push_back(path + "samples_per_class: expected an array of non-negative integers");
  }
  r.get_count(j, "d_in", s.d_in, path);
  r.get(j, "spacing", s.spacing, path);
  r.get(j, "latent_sigma", s.latent_sigma, path);
  r.get(j, "noise_sigma", s.noise_sigma, path);
}

}  // namespace detail

/// Parses a config document and validates it; all problems raise one ConfigError.
inline RunConfig config_from_json(const nlohmann::json& j) {
  std::vector<std::string> problems;
  detail::JsonReader r(problems);
  RunConfig c;
  if (!j.is_object()) throw ConfigError({"config root must be a JSON object"});
  r.warn_unknown(j, {"seed", "epochs", "out_dir", "data", "model", "loss", "optim"}, "");
  if (j.contains("seed")) {
    const auto& s = j.at("seed");
    if (s.is_number_unsigned() || (s.is_number_integer() && s.get<std::int64_t>() >= 0))
      c.seed = s.get<std::uint64_t>();
    else
      problems.push_back("seed: expected a non-negative integer");
  }
  r.get_count(j, "epochs", c.epochs, "");
  r.get(j, "out_dir", c.out_dir, "");

  bool model_d_in_given = false;
  if (j.contains("model")) {
    const auto& m = j.at("model");
    r.warn_unknown(m, {"d_in", "d1", "d3", "d5", "m", "num_classes"}, "model.");
    model_d_in_given = m.is_object() && m.contains("d_in");
    r.get_count(m, "d_in", c.model.d_in, "model.");
    r.get_count(m, "d1", c.model.d1, "model.");
    r.get_count(m, "d3", c.model.d3, "model.");
    r.get_count(m, "d5", c.model.d5, "model.");
    r.get_count(m, "m", c.model.m, "model.");
    r.get_count(m, "num_classes", c.model.num_classes, "model.");
  }
  if (j.contains("data")) {
    const auto& d = j.at("data");
    r.warn_unknown(d, {"train_path", "val_path", "synthetic", "synthetic_val"}, "data.");
    r.get(d, "train_path", c.data.train_path, "data.");
    r.get(d, "val_path", c.data.val_path, "data.");
    if (d.is_object() && d.contains("synthetic")) {
      detail::read_spec(r, d.at("synthetic"), c.data.synthetic, "data.synthetic.");
      // The validation split mirrors the training spec unless given separately.
      c.data.synthetic_val = c.data.synthetic;
    }
    if (d.is_object() && d.contains("synthetic_val"))
      detail::read_spec(r, d.at("synthetic_val"), c.data.synthetic_val, "data.synthetic_val.");
  }
  // A lone model.d_in carries over to the generator.
  if (model_d_in_given) {
    const bool spec_dim = j.contains("data") && j["data"].is_object() &&
                          j["data"].contains("synthetic") && j["data"]["synthetic"].is_object() &&
                          j["data"]["synthetic"].contains("d_in");
    if (!spec_dim) c.data.synthetic.d_in = c.data.synthetic_val.d_in = c.model.d_in;
  }
  if (j.contains("loss")) {
    const auto& l = j.at("loss");
    r.warn_unknown(l, {"alpha", "beta", "gamma_focus", "label_mode", "penalty", "ranks",
                       "centers_per_class", "lambda", "delta", "gamma_entropy", "normalize_centers"},
                   "loss.");
    r.get(l, "alpha", c.loss.weights.alpha, "loss.");
    r.get(l, "beta", c.loss.weights.beta, "loss.");
    r.get(l, "gamma_focus", c.loss.focal.gamma_focus, "loss.");
    r.get(l, "ranks", c.loss.ranks, "loss.");
    std::string mode, pen;
    r.get(l, "label_mode", mode, "loss.");
    r.get(l, "penalty", pen, "loss.");
    try {
      if (!mode.empty()) c.loss.label_mode = parse_label_mode(mode);
    } catch (const std::exception& e) {
      problems.push_back(std::string("loss.label_mode: ") + e.what());
    }
    try {
      if (!pen.empty()) c.loss.penalty = parse_penalty(pen);
    } catch (const std::exception& e) {
      problems.push_back(std::string("loss.penalty: ") + e.what());
    }
    r.get_count(l, "centers_per_class", c.metric.centers_per_class, "loss.");
    r.get(l, "lambda", c.metric.lambda, "loss.");
    r.get(l, "delta", c.metric.delta, "loss.");
    r.get(l, "gamma_entropy", c.metric.gamma_entropy, "loss.");
    r.get(l, "normalize_centers", c.metric.normalize_centers, "loss.");
  }
  if (j.contains("optim")) {
    const auto& o = j.at("optim");
    r.warn_unknown(o, {"lr", "momentum", "step_every", "step_divisor", "batch_size", "noise_sigma"},
                   "optim.");
    r.get(o, "lr", c.sgd.lr0, "optim.");
    r.get(o, "momentum", c.sgd.momentum, "optim.");
    r.get_count(o, "step_every", c.sgd.step_every, "optim.");
    r.get(o, "step_divisor", c.sgd.step_divisor, "optim.");
    r.get_count(o, "batch_size", c.train.batch_size, "optim.");
    r.get(o, "noise_sigma", c.train.noise_sigma, "optim.");
  }
  for (auto& v : validation_problems(c)) problems.push_back(std::move(v));
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError({"config '" + path.string() + "' is not valid JSON: " + e.what()});
  }
  return config_from_json(j);
}

inline void save_config(const RunConfig& c, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << to_json(c).dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline bool operator==(const SyntheticSpec& a, const SyntheticSpec& b) {
  return a.samples_per_class == b.samples_per_class && a.d_in == b.d_in && a.spacing == b.spacing &&
         a.latent_sigma == b.latent_sigma && a.noise_sigma == b.noise_sigma;
}

inline bool operator==(const RunConfig& a, const RunConfig& b) {
  return to_json(a) == to_json(b);
}

}  // namespace ordgrade

#endif  // ORDGRADE_CONFIG_HPP_
