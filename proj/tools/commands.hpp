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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "advdenoise/attack.hpp"
#include "advdenoise/autoencoder.hpp"
#include "advdenoise/perlin.hpp"
#include "advdenoise/toy_detector.hpp"

namespace advdenoise::cli {

// Size and split of the synthetic desk-scale experiment.
struct SceneSetConfig {
  std::size_t count = 200;
  std::size_t size = 64;
  std::size_t min_objects = 1;
  std::size_t max_objects = 5;
  double train_fraction = 0.8;
};

// Everything a run needs. Loaded from one JSON file; command-line flags are
// applied on top and the resolved result is written next to every output.
struct PipelineConfig {
  std::string dataset_root;
  std::string output_dir = "out";
  std::string checkpoint;
  PerlinConfig perlin;
  TrainConfig train;
  SceneSetConfig scenes;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool skip_train = false;
};

// Defaults used by `pipeline`: 64x64 inputs and 20 epochs; everything else
// keeps the TrainConfig defaults.
PipelineConfig desk_scale_config();

// Overlays the keys present in a JSON document onto `config`. Unknown keys
// are rejected with ConfigError.
void apply_config_json(PipelineConfig& config, const std::string& json_text,
                       const std::string& source);
void apply_config_file(PipelineConfig& config, const std::string& path);
std::string config_to_json(const PipelineConfig& config);

// Writes `<dir>/resolved_config.json`.
void write_resolved_config(const PipelineConfig& config, const std::string& dir);

// Stable 64-bit FNV-1a hash of a relative path, used as the image id when
// no annotation file supplies one.
std::uint64_t path_id(const std::string& relative_path);

// Image files (.png/.ppm) under `root`, as sorted relative paths.
std::vector<std::string> list_images(const std::string& root);

struct SynthOptions {
  std::string output_dir;
  SceneSetConfig scenes;
  std::uint64_t seed = 0;
  SceneConfig scene;
};

struct AttackOptionsCli {
  std::string input_dir;
  std::string output_dir;
  PerlinConfig perlin;
  AttackOptions attack;
  std::size_t threads = 1;
};

struct TrainOptions {
  std::string train_dir;
  std::string val_clean_dir;
  std::string val_adv_dir;
  std::string output_dir;
  std::string resume;  // checkpoint to continue from
  bool save_every_epoch = false;
  std::uint64_t model_seed = 0;
  PipelineConfig config;
};

struct DenoiseOptions {
  std::string checkpoint;
  std::string input_dir;
  std::string output_dir;
  std::size_t threads = 1;
};

struct DetectOptions {
  std::string input_dir;
  std::string annotations;  // maps file names to image ids
  std::string output;
  DetectorConfig detector;
  std::size_t threads = 1;
};

struct EvalOptionsCli {
  std::string gt;
  std::vector<std::string> detections;
  std::vector<std::string> names;
  std::string output_dir;
};

// Each command returns the process exit code. Errors that abort a command
// are thrown; per-item failures are logged and turn the exit code nonzero.
int cmd_synth(const SynthOptions& options);
int cmd_attack(const AttackOptionsCli& options);
int cmd_train(const TrainOptions& options);
int cmd_denoise(const DenoiseOptions& options);
int cmd_detect(const DetectOptions& options);
int cmd_eval(const EvalOptionsCli& options);
int cmd_report(const std::string& eval_report_path);

// Directional outcome of a pipeline run.
struct PipelineOutcome {
  double map50_clean = 0.0;
  double map50_attacked = 0.0;
  double map50_denoised = 0.0;
  double mse_attacked = 0.0;
  double mse_denoised = 0.0;
  bool attack_degrades = false;
  bool defense_recovers = false;
  bool mse_improves = false;

  bool passed() const { return attack_degrades && defense_recovers && mse_improves; }
};

// synth -> split -> attack -> train -> denoise -> detect (x3) -> eval ->
// report, all under config.output_dir. Exit code 0 iff outcome.passed().
int cmd_pipeline(const PipelineConfig& config, PipelineOutcome* outcome = nullptr);

}  // namespace advdenoise::cli
