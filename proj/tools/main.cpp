// Copyright 2026 The advdenoise Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "advdenoise/errors.hpp"
#include "commands.hpp"

namespace {

using namespace advdenoise;
using namespace advdenoise::cli;

// Flags shared by commands that take a Perlin configuration.
void add_perlin_flags(CLI::App* app, PerlinConfig& p) {
  app->add_option("--max-norm", p.max_norm, "L-inf budget in 0..255 units");
  app->add_option("--period", p.period, "noise period in pixels");
  app->add_option("--freq-sine", p.freq_sine, "sine colormap frequency");
  app->add_option("--octaves", p.octaves, "number of fractal octaves");
}

void load_config(const std::string& path, PipelineConfig& cfg) {
  if (!path.empty()) apply_config_file(cfg, path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perlin-noise adversarial attack and autoencoder defense toolkit"};
  app.require_subcommand(1);

  // Config files are applied before flags: parse once to find --config, then
  // parse again so explicit flags win.
  std::string config_path;
  PipelineConfig cfg = desk_scale_config();

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate labelled synthetic scenes");
  synth_cmd->add_option("-o,--output", synth.output_dir, "output directory")->required();
  synth_cmd->add_option("--count", synth.scenes.count, "number of scenes");
  synth_cmd->add_option("--size", synth.scenes.size, "scene width and height");
  synth_cmd->add_option("--min-objects", synth.scenes.min_objects);
  synth_cmd->add_option("--max-objects", synth.scenes.max_objects);
  synth_cmd->add_option("--seed", synth.seed);

  AttackOptionsCli attack;
  auto* attack_cmd = app.add_subcommand("attack", "perturb a directory tree of images");
  attack_cmd->add_option("-i,--input", attack.input_dir)->required();
  attack_cmd->add_option("-o,--output", attack.output_dir)->required();
  attack_cmd->add_option("--seed", attack.perlin.seed, "global noise seed");
  attack_cmd->add_flag("--per-channel", attack.attack.per_channel,
                       "independent field per color channel");
  attack_cmd->add_flag("--fixed-field", attack.attack.fixed_field,
                       "same field for every image");
  attack_cmd->add_option("--threads", attack.threads);
  add_perlin_flags(attack_cmd, attack.perlin);

  TrainOptions train_opts;
  auto* train_cmd = app.add_subcommand("train", "train the denoising autoencoder");
  train_cmd->add_option("--config", config_path, "JSON config file");
  train_cmd->add_option("--train", train_opts.train_dir, "clean training images")->required();
  train_cmd->add_option("--val-clean", train_opts.val_clean_dir);
  train_cmd->add_option("--val-adv", train_opts.val_adv_dir);
  train_cmd->add_option("-o,--output", train_opts.output_dir)->required();
  train_cmd->add_option("--resume", train_opts.resume, "checkpoint to continue from");
  train_cmd->add_flag("--save-every-epoch", train_opts.save_every_epoch);
  train_cmd->add_option("--model-seed", train_opts.model_seed);
  std::optional<std::size_t> epochs, batch;
  std::optional<double> lr;
  std::optional<std::uint64_t> train_seed;
  std::optional<std::size_t> input_size, threads;
  train_cmd->add_option("--epochs", epochs);
  train_cmd->add_option("--batch-size", batch);
  train_cmd->add_option("--lr", lr);
  train_cmd->add_option("--seed", train_seed);
  train_cmd->add_option("--input-size", input_size, "square training input size");
  train_cmd->add_option("--threads", threads);

  DenoiseOptions denoise;
  auto* denoise_cmd = app.add_subcommand("denoise", "run a trained autoencoder over images");
  denoise_cmd->add_option("--checkpoint", denoise.checkpoint)->required();
  denoise_cmd->add_option("-i,--input", denoise.input_dir)->required();
  denoise_cmd->add_option("-o,--output", denoise.output_dir)->required();
  denoise_cmd->add_option("--threads", denoise.threads);

  DetectOptions detect;
  auto* detect_cmd = app.add_subcommand("detect-toy", "run the toy detector");
  detect_cmd->add_option("-i,--input", detect.input_dir)->required();
  detect_cmd->add_option("--annotations", detect.annotations, "COCO file giving image ids")
      ->required();
  detect_cmd->add_option("-o,--output", detect.output, "detections JSON")->required();
  detect_cmd->add_option("--threads", detect.threads);

  EvalOptionsCli eval;
  auto* eval_cmd = app.add_subcommand("eval", "COCO bbox mAP for one or more conditions");
  eval_cmd->add_option("--gt", eval.gt, "ground-truth annotations")->required();
  eval_cmd->add_option("--detections", eval.detections)->required();
  eval_cmd->add_option("--names", eval.names);
  eval_cmd->add_option("-o,--output", eval.output_dir);

  auto* pipe_cmd = app.add_subcommand("pipeline", "end-to-end desk-scale experiment");
  pipe_cmd->add_option("--config", config_path, "JSON config file");
  std::optional<std::string> out_dir, ckpt;
  std::optional<std::uint64_t> seed;
  bool skip_train = false;
  pipe_cmd->add_option("-o,--output", out_dir);
  pipe_cmd->add_option("--checkpoint", ckpt, "checkpoint used with --skip-train");
  pipe_cmd->add_option("--seed", seed);
  pipe_cmd->add_option("--epochs", epochs);
  pipe_cmd->add_option("--threads", threads);
  pipe_cmd->add_flag("--skip-train", skip_train);

  std::string report_path;
  auto* report_cmd = app.add_subcommand("report", "print the table from an eval report");
  report_cmd->add_option("report", report_path, "eval_report.json")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth_cmd) return cmd_synth(synth);
    if (*attack_cmd) return cmd_attack(attack);
    if (*denoise_cmd) return cmd_denoise(denoise);
    if (*detect_cmd) return cmd_detect(detect);
    if (*eval_cmd) return cmd_eval(eval);
    if (*report_cmd) return cmd_report(report_path);

    load_config(config_path, cfg);
    if (epochs) cfg.train.epochs = *epochs;
    if (threads) cfg.threads = *threads;
    if (*train_cmd) {
      if (batch) cfg.train.batch_size = *batch;
      if (lr) cfg.train.learning_rate = *lr;
      if (train_seed) cfg.train.seed = *train_seed;
      if (input_size) cfg.train.input_width = cfg.train.input_height = *input_size;
      train_opts.config = cfg;
      return cmd_train(train_opts);
    }
    if (out_dir) cfg.output_dir = *out_dir;
    if (ckpt) cfg.checkpoint = *ckpt;
    if (seed) cfg.seed = *seed;
    if (skip_train) cfg.skip_train = true;
    return cmd_pipeline(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
