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

#ifndef ORDGRADE_COMMANDS_HPP_
#define ORDGRADE_COMMANDS_HPP_

// Bodies of the CLI subcommands. Each returns a process exit code and writes
// only to the streams it is given, so tests drive them without a subprocess.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "json.hpp"
#include "ordgrade/checkpoint.hpp"
#include "ordgrade/config.hpp"
#include "ordgrade/dataset.hpp"
#include "ordgrade/gradcheck.hpp"
#include "ordgrade/model.hpp"
#include "ordgrade/ordinal.hpp"
#include "ordgrade/report.hpp"
#include "ordgrade/train.hpp"

namespace ordgrade {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitUsage = 2,
  kExitValidation = 3,
  kExitNumerical = 4,
  kExitIo = 5,
};

enum class Format { kText, kJson };

inline Format parse_format(std::string_view s) {
  if (s == "json") return Format::kJson;
  if (s == "text") return Format::kText;
  throw std::invalid_argument("unknown format '" + std::string(s) + "'");
}

/// Usage problem on the command line (bad flag value, out-of-range index).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Maps library exceptions onto exit codes, printing the message to `err`.
template <typename F>
int run_guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << e.what() << '\n';
    return kExitValidation;
  } catch (const ShapeError& e) {
    err << "shape error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::out_of_range& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitValidation;
  }
}

inline void ensure_dir(const std::filesystem::path& p) {
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec || !std::filesystem::is_directory(p))
    throw IoError("cannot create directory '" + p.string() + "'" + (ec ? ": " + ec.message() : ""));
}

// ---------------------------------------------------------------- encode

struct EncodeArgs {
  std::size_t num_classes = 5;
  long long true_index = 0;
  Penalty penalty = Penalty::kSquaredError;
  Vec ranks;
  bool one_hot = false;
  Format format = Format::kText;
};

inline int cmd_encode(const EncodeArgs& a, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&] {
    if (a.num_classes < 1) throw UsageError("number of classes must be >= 1");
    if (a.true_index < 0 || static_cast<std::size_t>(a.true_index) >= a.num_classes)
      throw UsageError("rank index " + std::to_string(a.true_index) + " outside [0, " +
                       std::to_string(a.num_classes) + ")");
    if (!a.ranks.empty() && a.ranks.size() != a.num_classes)
      throw UsageError("--ranks needs exactly " + std::to_string(a.num_classes) + " values");
    const RankScale scale = a.ranks.empty() ? RankScale::uniform(a.num_classes) : RankScale(a.ranks);
    const auto t = static_cast<std::size_t>(a.true_index);
    const SoftLabel y = a.one_hot ? one_hot(scale, t) : encode_soft_label(scale, t, a.penalty);
    if (a.format == Format::kJson) {
      nlohmann::json j{{"schema", kReportSchema},    {"command", "encode"},
                       {"num_classes", a.num_classes}, {"true_index", t},
                       {"penalty", penalty_name(a.penalty)}, {"one_hot", a.one_hot},
                       {"probs", y.probs},           {"expected_rank", expected_rank(y, scale)}};
      out << j.dump() << '\n';
    } else {
      out << '[';
      char buf[32];
      for (std::size_t j = 0; j < y.probs.size(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.6f", y.probs[j]);
        out << (j ? ", " : "") << buf;
      }
      out << "]\n";
    }
    return static_cast<int>(kExitOk);
  });
}

// -------------------------------------------------------------- generate

struct GenerateArgs {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "data";
  std::optional<std::vector<std::size_t>> samples_per_class;
  std::optional<std::size_t> d_in;
  std::optional<double> spacing;
  std::optional<double> latent_sigma;
  std::optional<double> noise_sigma;
};

/// Writes train.csv / train_latent.csv (and val.* when the validation spec is
/// nonempty). With the same config and seed these are exactly the splits
/// `train` would generate in memory.
inline int cmd_generate(const GenerateArgs& a, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&] {
    RunConfig cfg = a.config_path ? load_config(*a.config_path) : RunConfig{};
    if (a.seed) cfg.seed = *a.seed;
    for (SyntheticSpec* s : {&cfg.data.synthetic, &cfg.data.synthetic_val}) {
      if (a.samples_per_class) s->samples_per_class = *a.samples_per_class;
      if (a.d_in) s->d_in = *a.d_in;
      if (a.spacing) s->spacing = *a.spacing;
      if (a.latent_sigma) s->latent_sigma = *a.latent_sigma;
      if (a.noise_sigma) s->noise_sigma = *a.noise_sigma;
    }
    std::vector<std::string> problems;
    for (const SyntheticSpec* s : {&cfg.data.synthetic, &cfg.data.synthetic_val}) {
      if (s->num_classes() < 1) problems.push_back("samples_per_class must list at least one class");
      if (s->d_in < 1) problems.push_back("d_in must be >= 1");
      if (!(s->spacing > 0)) problems.push_back("spacing must be > 0");
      if (!(s->latent_sigma >= 0) || !(s->noise_sigma >= 0)) problems.push_back("sigmas must be >= 0");
      if (!problems.empty()) break;
    }
    if (!problems.empty()) throw ConfigError(std::move(problems));

    const std::filesystem::path dir(a.out_dir);
    ensure_dir(dir);
    const Rng root(cfg.seed);
    const auto map_seed = root.split("data-map").next_u64();
    const auto train = generate_synthetic(cfg.data.synthetic, map_seed, root.split("data-train").next_u64());
    write_dataset_csv(train.data, dir / "train.csv");
    write_latent_csv(train, dir / "train_latent.csv");
    out << "wrote " << train.data.size() << " samples to " << (dir / "train.csv").string() << '\n';
    if (cfg.data.synthetic_val.total() > 0) {
      const auto val = generate_synthetic(cfg.data.synthetic_val, map_seed, root.split("data-val").next_u64());
      write_dataset_csv(val.data, dir / "val.csv");
      write_latent_csv(val, dir / "val_latent.csv");
      out << "wrote " << val.data.size() << " samples to " << (dir / "val.csv").string() << '\n';
    }
    return static_cast<int>(kExitOk);
  });
}

// ----------------------------------------------------------------- train

struct TrainArgs {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  Format format = Format::kText;
  bool quiet = false;
};

inline constexpr const char* kIncompleteMarker = "INCOMPLETE";

/// Run directory contents: config.json, checkpoint.txt, history.jsonl,
/// history.csv, report.json and report.txt. INCOMPLETE exists while the run
/// is in progress and stays behind if it fails.
inline int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  std::optional<std::filesystem::path> run_dir;
  const int code = run_guarded(err, [&] {
    RunConfig cfg = a.config_path ? load_config(*a.config_path) : RunConfig{};
    if (a.seed) cfg.seed = *a.seed;
    if (a.out_dir) cfg.out_dir = *a.out_dir;
    validate(cfg);
    const Splits data = load_splits(cfg);

    run_dir = cfg.out_dir;
    ensure_dir(*run_dir);
    { std::ofstream(*run_dir / kIncompleteMarker) << "run started\n"; }
    save_config(cfg, *run_dir / "config.json");

    const FitResult res = fit(cfg, data, *run_dir);
    write_history_csv(res.history, *run_dir / "history.csv");
    if (!a.quiet && a.format == Format::kText) {
      for (const auto& r : res.history) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "epoch %4zu  lr %.2e  loss %.6f  train_qwk %s  val_qwk %s\n",
                      r.epoch, r.learning_rate, r.mean_loss, fmt_opt(r.train_qwk).c_str(),
                      fmt_opt(r.val_qwk).c_str());
        out << buf;
      }
    }
    const EvalResult tr = evaluate(res.model, data.train);
    std::optional<EvalResult> va;
    if (data.val && data.val->size() > 0) va = evaluate(res.model, *data.val);

    nlohmann::json rep{{"schema", kReportSchema}, {"command", "train"}, {"seed", cfg.seed},
                       {"epochs", cfg.epochs},    {"train", eval_to_json(tr)}};
    if (va) rep["val"] = eval_to_json(*va);
    {
      std::ofstream f(*run_dir / "report.json", std::ios::binary);
      f << rep.dump(2) << '\n';
      if (!f) throw IoError("cannot write report.json");
    }
    std::string text = eval_to_text(tr, "train");
    if (va) text += eval_to_text(*va, "val");
    {
      std::ofstream f(*run_dir / "report.txt", std::ios::binary);
      f << text;
      if (!f) throw IoError("cannot write report.txt");
    }
    if (a.format == Format::kJson) out << rep.dump() << '\n';
    else out << text;
    std::filesystem::remove(*run_dir / kIncompleteMarker);
    return static_cast<int>(kExitOk);
  });
  if (code != kExitOk && run_dir && std::filesystem::is_directory(*run_dir)) {
    std::ofstream(*run_dir / kIncompleteMarker, std::ios::app) << "run failed with exit code " << code << '\n';
  }
  return code;
}

// ------------------------------------------------------------------ eval

struct EvalArgs {
  std::string checkpoint_path;
  std::string dataset_path;
  Format format = Format::kText;
};

inline int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&] {
    const Checkpoint ck = load_checkpoint(a.checkpoint_path);
    const Dataset ds = read_dataset_csv(a.dataset_path);
    if (ds.size() == 0) throw ConfigError({"dataset '" + a.dataset_path + "' has no samples"});
    const auto& dims = ck.model.dims;
    if (ds.dim() != dims.d_in) {
      throw ShapeError("checkpoint expects inputs of shape (n x " + std::to_string(dims.d_in) +
                       ") but dataset '" + a.dataset_path + "' has shape " +
                       shape_str(ds.size(), ds.dim()));
    }
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (ds.labels[i] < 0 || static_cast<std::size_t>(ds.labels[i]) >= dims.num_classes)
        throw ShapeError("dataset label " + std::to_string(ds.labels[i]) + " at row " +
                         std::to_string(i) + " is outside the checkpoint's " +
                         std::to_string(dims.num_classes) + " classes");
    }
    const EvalResult r = evaluate(ck.model, ds);
    if (a.format == Format::kJson) {
      nlohmann::json j{{"schema", kReportSchema}, {"command", "eval"},
                       {"checkpoint_epoch", ck.epoch}, {"eval", eval_to_json(r)}};
      out << j.dump() << '\n';
    } else {
      out << eval_to_text(r, a.dataset_path);
    }
    return static_cast<int>(kExitOk);
  });
}

// ------------------------------------------------------------- gradcheck

inline int cmd_gradcheck(const GradcheckOptions& opt, Format format, std::ostream& out,
                         std::ostream& err) {
  return run_guarded(err, [&] {
    if (opt.max_dim > 8) throw UsageError("gradcheck dimensions must be <= 8");
    const auto groups = run_gradcheck(opt);
    bool ok = true;
    for (const auto& g : groups) ok = ok && g.max_rel_error < 1e-4;
    if (format == Format::kJson) {
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& g : groups)
        rows.push_back({{"group", g.group}, {"max_rel_error", g.max_rel_error},
                        {"trials", g.trials}, {"tolerance", g.tolerance}, {"passed", g.passed()}});
      out << nlohmann::json{{"schema", kReportSchema}, {"command", "gradcheck"},
                            {"seed", opt.seed}, {"groups", rows}, {"passed", ok}}.dump()
          << '\n';
    } else {
      out << "group       trials  max_rel_error  tolerance  status\n";
      for (const auto& g : groups) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%-10s  %6zu  %13.3e  %9.0e  %s\n", g.group.c_str(), g.trials,
                      g.max_rel_error, g.tolerance, g.passed() ? "ok" : "FAIL");
        out << buf;
      }
    }
    return static_cast<int>(ok ? kExitOk : kExitCheckFailed);
  });
}

}  // namespace ordgrade

#endif  // ORDGRADE_COMMANDS_HPP_
