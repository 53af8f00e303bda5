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

#ifndef ORDGRADE_TRAIN_HPP_
#define ORDGRADE_TRAIN_HPP_

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ordgrade/checkpoint.hpp"
#include "ordgrade/config.hpp"
#include "ordgrade/dataset.hpp"
#include "ordgrade/model.hpp"
#include "ordgrade/report.hpp"

namespace ordgrade {

struct Splits {
  Dataset train;
  std::optional<Dataset> val;
};

/// Synthetic splits share one severity map (seed stream "data-map") and draw
/// samples from separate streams.
inline Splits load_splits(const RunConfig& cfg) {
  Splits s;
  if (cfg.uses_synthetic()) {
    const Rng root(cfg.seed);
    const auto map_seed = root.split("data-map").next_u64();
    s.train = generate_synthetic(cfg.data.synthetic, map_seed, root.split("data-train").next_u64()).data;
    if (cfg.data.synthetic_val.total() > 0)
      s.val = generate_synthetic(cfg.data.synthetic_val, map_seed, root.split("data-val").next_u64()).data;
    return s;
  }
  s.train = read_dataset_csv(cfg.data.train_path);
  if (!cfg.data.val_path.empty()) s.val = read_dataset_csv(cfg.data.val_path);
  return s;
}

struct EpochRecord {
  std::size_t epoch = 0;
  double learning_rate = 0.0;
  double mean_loss = 0.0;
  std::optional<double> train_qwk;
  std::optional<double> val_qwk;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

inline nlohmann::json record_to_json(const EpochRecord& r) {
  return {{"epoch", r.epoch},
          {"lr", r.learning_rate},
          {"mean_loss", r.mean_loss},
          {"train_qwk", optional_json(r.train_qwk)},
          {"val_qwk", optional_json(r.val_qwk)}};
}

struct FitResult {
  Model model;
  std::vector<EpochRecord> history;
};

namespace detail {
inline void check_dataset(const Dataset& ds, const ModelDims& dims, const char* which) {
  std::vector<std::string> p;
  if (ds.dim() != dims.d_in && ds.size() > 0)
    p.push_back(std::string(which) + " dataset has " + std::to_string(ds.dim()) +
                " feature columns, model.d_in is " + std::to_string(dims.d_in));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.labels[i] < 0 || static_cast<std::size_t>(ds.labels[i]) >= dims.num_classes) {
      p.push_back(std::string(which) + " dataset label " + std::to_string(ds.labels[i]) +
                  " at row " + std::to_string(i) + " outside [0, " +
                  std::to_string(dims.num_classes) + ")");
      break;
    }
  }
  if (!p.empty()) throw ConfigError(std::move(p));
}
}  // namespace detail

/// Trains for cfg.epochs epochs. With a non-empty `out_dir`, the latest
/// checkpoint (checkpoint.txt) is rewritten after every epoch and one JSON line
/// per epoch is appended to history.jsonl.
inline FitResult fit(const RunConfig& cfg, const Splits& data,
                     const std::filesystem::path& out_dir = {}) {
  validate(cfg);
  detail::check_dataset(data.train, cfg.model, "training");
  if (data.val) detail::check_dataset(*data.val, cfg.model, "validation");
  if (cfg.epochs > 0 && (data.train.size() == 0 || cfg.train.batch_size > data.train.size()))
    throw ConfigError({"optim.batch_size " + std::to_string(cfg.train.batch_size) +
                       " needs a training set of at least that size (have " +
                       std::to_string(data.train.size()) + ")"});

  const Rng root(cfg.seed);
  FitResult out;
  out.model = Model::init(cfg.model, cfg.metric, root.split("weights"));
  SgdState sgd(cfg.sgd);
  Rng train_rng = root.split("shuffle");

  std::ofstream history;
  if (!out_dir.empty()) {
    history.open(out_dir / "history.jsonl", std::ios::binary | std::ios::trunc);
    if (!history) throw IoError("cannot write '" + (out_dir / "history.jsonl").string() + "'");
  }
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    const EpochSummary s = train_epoch(out.model, data.train, cfg.loss, sgd, train_rng, cfg.train);
    EpochRecord rec{s.epoch, s.learning_rate, s.mean_loss, s.train_qwk, std::nullopt};
    if (data.val && data.val->size() > 0) rec.val_qwk = evaluate(out.model, *data.val).kappa.qwk;
    out.history.push_back(rec);
    if (!out_dir.empty()) {
      history << record_to_json(rec).dump() << '\n' << std::flush;
      save_checkpoint(out_dir / "checkpoint.txt", cfg, out.model, e + 1);
    }
  }
  if (!out_dir.empty() && cfg.epochs == 0) save_checkpoint(out_dir / "checkpoint.txt", cfg, out.model, 0);
  return out;
}

inline void write_history_csv(const std::vector<EpochRecord>& h, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "epoch,lr,mean_loss,train_qwk,val_qwk\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const auto& r : h)
    out << r.epoch << ',' << format_double(r.learning_rate) << ',' << format_double(r.mean_loss)
        << ',' << opt(r.train_qwk) << ',' << opt(r.val_qwk) << '\n';
}

}  // namespace ordgrade

#endif  // ORDGRADE_TRAIN_HPP_
