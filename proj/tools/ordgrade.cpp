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

// ordgrade command-line tool: generate | train | eval | gradcheck | encode.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ordgrade/commands.hpp"

namespace {

template <typename T>
void copy_if_set(CLI::Option* opt, const T& value, std::optional<T>& dst) {
  if (opt->count() > 0) dst = value;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace ordgrade;
  CLI::App app{"Ordinal fine-grained grading: soft labels, bilinear fusion, focal + metric loss"};
  app.require_subcommand(1);

  std::string format_name = "text";
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;

  auto add_common = [&](CLI::App* sub, bool with_config) {
    sub->add_option("--format", format_name, "Output format")->check(CLI::IsMember({"text", "json"}));
    if (with_config) sub->add_option("--config", config_path, "Run config (JSON)");
  };

  // generate
  auto* gen = app.add_subcommand("generate", "Write a synthetic ordinal dataset");
  add_common(gen, true);
  auto* gen_seed = gen->add_option("--seed", seed, "Random seed");
  auto* gen_out = gen->add_option("--out", out_dir, "Output directory");
  std::vector<std::size_t> samples;
  std::size_t d_in = 0;
  double spacing = 0, latent_sigma = 0, noise_sigma = 0;
  auto* gen_samples = gen->add_option("--samples", samples, "Samples per class, e.g. 400,200,120,60,30")
                          ->delimiter(',');
  auto* gen_din = gen->add_option("--d-in", d_in, "Feature dimension");
  auto* gen_spacing = gen->add_option("--spacing", spacing, "Latent spacing between classes");
  auto* gen_lat = gen->add_option("--latent-sigma", latent_sigma, "Latent severity spread");
  auto* gen_noise = gen->add_option("--noise-sigma", noise_sigma, "Feature noise");

  // train
  auto* train = app.add_subcommand("train", "Train a model and write a run directory");
  add_common(train, true);
  auto* tr_seed = train->add_option("--seed", seed, "Random seed (overrides config)");
  auto* tr_out = train->add_option("--out", out_dir, "Run directory (overrides config)");
  bool quiet = false;
  train->add_flag("--quiet", quiet, "Suppress per-epoch lines");

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset CSV");
  add_common(ev, false);
  EvalArgs eval_args;
  ev->add_option("--checkpoint", eval_args.checkpoint_path, "checkpoint.txt from a run")->required();
  ev->add_option("--data", eval_args.dataset_path, "Dataset CSV")->required();

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
  add_common(gc, false);
  GradcheckOptions gopt;
  gc->add_option("--seed", gopt.seed, "Random seed");
  gc->add_option("--trials", gopt.trials, "Random instances per group");
  gc->add_option("--max-dim", gopt.max_dim, "Largest dimension (<= 8)");
  gc->add_option("--max-classes", gopt.max_classes, "Largest number of classes");
  gc->add_option("--max-centers", gopt.max_centers, "Largest centers per class");
  gc->add_option("--perturb", gopt.perturb, "Corrupt one group's analytic gradient (testing)")
      ->check(CLI::IsMember({"focal", "metric", "combined", "fusion", "backbone"}));

  // encode
  auto* enc = app.add_subcommand("encode", "Print the ordinal soft label for a rank");
  add_common(enc, false);
  EncodeArgs enc_args;
  std::string penalty = "squared_error";
  enc->add_option("-C,--classes", enc_args.num_classes, "Number of classes")->required();
  enc->add_option("-t,--rank", enc_args.true_index, "True rank index")->required();
  enc->add_option("--penalty", penalty, "Distance penalty")
      ->check(CLI::IsMember({"squared_error", "absolute_error"}));
  enc->add_option("--ranks", enc_args.ranks, "Metric value per class (default 0..C-1)")->delimiter(',');
  enc->add_flag("--one-hot", enc_args.one_hot, "Emit the one-hot target instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }
  const Format format = parse_format(format_name);

  if (*gen) {
    GenerateArgs a;
    if (!config_path.empty()) a.config_path = config_path;
    copy_if_set(gen_seed, seed, a.seed);
    if (gen_out->count() > 0) a.out_dir = out_dir;
    copy_if_set(gen_samples, samples, a.samples_per_class);
    copy_if_set(gen_din, d_in, a.d_in);
    copy_if_set(gen_spacing, spacing, a.spacing);
    copy_if_set(gen_lat, latent_sigma, a.latent_sigma);
    copy_if_set(gen_noise, noise_sigma, a.noise_sigma);
    return cmd_generate(a, std::cout, std::cerr);
  }
  if (*train) {
    TrainArgs a;
    if (!config_path.empty()) a.config_path = config_path;
    copy_if_set(tr_seed, seed, a.seed);
    if (tr_out->count() > 0) a.out_dir = out_dir;
    a.format = format;
    a.quiet = quiet;
    return cmd_train(a, std::cout, std::cerr);
  }
  if (*ev) {
    eval_args.format = format;
    return cmd_eval(eval_args, std::cout, std::cerr);
  }
  if (*gc) return cmd_gradcheck(gopt, format, std::cout, std::cerr);
  if (*enc) {
    enc_args.penalty = parse_penalty(penalty);
    enc_args.format = format;
    return cmd_encode(enc_args, std::cout, std::cerr);
  }
  return kExitUsage;
}
