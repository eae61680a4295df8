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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "advdenoise/dataset_io.hpp"
#include "advdenoise/errors.hpp"
#include "commands.hpp"

namespace advdenoise::cli {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("advdenoise_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  std::string path(const std::string& rel) const { return (root_ / rel).string(); }

  std::string synth(std::size_t count, std::size_t size = 32) {
    SynthOptions o;
    o.output_dir = path("scenes");
    o.scenes.count = count;
    o.scenes.size = size;
    o.scenes.max_objects = 2;
    o.seed = 4;
    EXPECT_EQ(cmd_synth(o), 0);
    return o.output_dir;
  }

  fs::path root_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

TEST_F(CliTest, SynthWritesScenesAndAnnotations) {
  const std::string dir = synth(5);
  EXPECT_EQ(list_images(dir).size(), 5u);
  const AnnotationSet ann = load_annotations(dir + "/annotations.json");
  EXPECT_EQ(ann.images.size(), 5u);
  EXPECT_FALSE(ann.boxes.empty());
  EXPECT_TRUE(fs::exists(dir + "/resolved_config.json"));
  EXPECT_EQ(load_manifest(dir + "/manifest.jsonl").entries.size(), 5u);
}

TEST_F(CliTest, AttackBoundAndDeterminism) {
  const std::string scenes = synth(4);
  AttackOptionsCli o;
  o.input_dir = scenes;
  o.output_dir = path("adv1");
  o.perlin.seed = 8;
  ASSERT_EQ(cmd_attack(o), 0);
  o.output_dir = path("adv2");
  o.threads = 3;
  ASSERT_EQ(cmd_attack(o), 0);
  const auto rels = list_images(scenes);
  ASSERT_EQ(list_images(path("adv1")), rels);
  for (const auto& rel : rels) {
    const ImageTensor src = load_image(scenes + "/" + rel);
    const ImageTensor adv = load_image(path("adv1/" + rel));
    EXPECT_LE(image_linf(src, adv), 31.0 / 255.0 + 1e-6) << rel;
    EXPECT_EQ(slurp(path("adv1/" + rel)), slurp(path("adv2/" + rel)));
  }
  const auto manifest = nlohmann::json::parse(slurp(path("adv1/attack_manifest.json")));
  EXPECT_EQ(manifest.at("images").size(), rels.size());
  EXPECT_TRUE(fs::exists(path("adv1/resolved_config.json")));
}

TEST_F(CliTest, AttackEmptyDirectory) {
  fs::create_directories(path("empty"));
  AttackOptionsCli o;
  o.input_dir = path("empty");
  o.output_dir = path("out");
  EXPECT_EQ(cmd_attack(o), 0);
  EXPECT_TRUE(list_images(path("out")).empty());
}

TEST_F(CliTest, AttackReportsBadImages) {
  const std::string scenes = synth(2);
  std::ofstream(scenes + "/images/zz_bad.png") << "garbage";
  AttackOptionsCli o;
  o.input_dir = scenes;
  o.output_dir = path("adv");
  EXPECT_NE(cmd_attack(o), 0);
  EXPECT_EQ(list_images(path("adv")).size(), 2u);
}

TrainOptions train_options(const std::string& train_dir, const std::string& out) {
  TrainOptions o;
  o.train_dir = train_dir;
  o.output_dir = out;
  o.config.train.input_width = o.config.train.input_height = 32;
  o.config.train.epochs = 5;
  o.config.train.batch_size = 4;
  return o;
}

std::size_t csv_rows(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  return n - 1;
}

TEST_F(CliTest, TrainWritesCheckpointAndLog) {
  const std::string scenes = synth(10);
  const TrainOptions o = train_options(scenes + "/images", path("model"));
  ASSERT_EQ(cmd_train(o), 0);
  EXPECT_TRUE(fs::exists(path("model/final.adnz")));
  EXPECT_EQ(csv_rows(path("model/train_log.csv")), 5u);
  EXPECT_EQ(load_checkpoint(path("model/final.adnz")).epoch, 5u);
}

TEST_F(CliTest, TrainResizesAndResumes) {
  const std::string scenes = synth(6, 40);
  TrainOptions o = train_options(scenes + "/images", path("model"));
  o.config.train.epochs = 2;
  ASSERT_EQ(cmd_train(o), 0);
  o.resume = path("model/final.adnz");
  o.config.train.epochs = 4;
  ASSERT_EQ(cmd_train(o), 0);
  EXPECT_EQ(load_checkpoint(path("model/final.adnz")).epoch, 4u);
  EXPECT_EQ(csv_rows(path("model/train_log.csv")), 4u);

  TrainOptions straight = train_options(scenes + "/images", path("straight"));
  straight.config.train.epochs = 4;
  ASSERT_EQ(cmd_train(straight), 0);
  EXPECT_EQ(load_checkpoint(path("straight/final.adnz")).net,
            load_checkpoint(path("model/final.adnz")).net);
}

TEST_F(CliTest, TrainWithZeroLearningRateKeepsWeights) {
  const std::string scenes = synth(4);
  TrainOptions o = train_options(scenes + "/images", path("model"));
  o.config.train.learning_rate = 0.0;
  o.config.train.epochs = 3;
  o.save_every_epoch = true;
  ASSERT_EQ(cmd_train(o), 0);
  const auto first = load_checkpoint(path("model/epoch_001.adnz")).net;
  EXPECT_EQ(load_checkpoint(path("model/epoch_002.adnz")).net, first);
  EXPECT_EQ(load_checkpoint(path("model/epoch_003.adnz")).net, first);
}

TEST_F(CliTest, TrainErrorsAbortBeforeFirstEpoch) {
  fs::create_directories(path("none"));
  EXPECT_THROW(cmd_train(train_options(path("none"), path("model"))), ConfigError);
  EXPECT_FALSE(fs::exists(path("model/train_log.csv")));
}

TEST_F(CliTest, DenoiseNeedsCheckpoint) {
  DenoiseOptions o;
  o.checkpoint = path("missing.adnz");
  o.input_dir = path(".");
  o.output_dir = path("out");
  EXPECT_THROW(cmd_denoise(o), ConfigError);
}

TEST_F(CliTest, DetectAndEvaluateThreeConditions) {
  const std::string scenes = synth(6);
  AttackOptionsCli a;
  a.input_dir = scenes;
  a.output_dir = path("adv");
  ASSERT_EQ(cmd_attack(a), 0);

  TrainOptions t = train_options(scenes + "/images", path("model"));
  t.config.train.epochs = 1;
  ASSERT_EQ(cmd_train(t), 0);
  DenoiseOptions d;
  d.checkpoint = path("model/final.adnz");
  d.input_dir = path("adv");
  d.output_dir = path("den");
  ASSERT_EQ(cmd_denoise(d), 0);
  for (const auto& rel : list_images(path("adv"))) {
    const ImageTensor in = load_image(path("adv/" + rel));
    const ImageTensor out = load_image(path("den/" + rel));
    EXPECT_EQ(in.width, out.width);
    EXPECT_EQ(in.height, out.height);
  }

  const std::vector<std::pair<std::string, std::string>> dirs = {
      {scenes, "clean.json"}, {path("adv"), "adv.json"}, {path("den"), "den.json"}};
  EvalOptionsCli e;
  e.gt = scenes + "/annotations.json";
  for (const auto& [dir, file] : dirs) {
    DetectOptions o;
    o.input_dir = dir;
    o.annotations = e.gt;
    o.output = path(file);
    ASSERT_EQ(cmd_detect(o), 0);
    e.detections.push_back(o.output);
  }
  e.output_dir = path("eval");
  ASSERT_EQ(cmd_eval(e), 0);
  const std::string table = slurp(path("eval/table.txt"));
  EXPECT_LT(table.find("Normal"), table.find("Adversarial"));
  EXPECT_LT(table.find("Adversarial"), table.find("Autoencoder"));
  EXPECT_NE(table.find("Normal            1.0000       1.0000"), std::string::npos) << table;

  testing::internal::CaptureStdout();
  ASSERT_EQ(cmd_report(path("eval/eval_report.json")), 0);
  EXPECT_EQ(testing::internal::GetCapturedStdout(), table);
}

TEST_F(CliTest, EvalNameCountMismatch) {
  const std::string scenes = synth(2);
  std::ofstream(path("d.json")) << "[]";
  EvalOptionsCli e;
  e.gt = scenes + "/annotations.json";
  e.detections = {path("d.json")};
  e.names = {"a", "b"};
  EXPECT_THROW(cmd_eval(e), ConfigError);
}

TEST(Config, OverlayAndStrictKeys) {
  PipelineConfig c = desk_scale_config();
  EXPECT_EQ(c.train.epochs, 20u);
  EXPECT_EQ(c.train.input_width, 64u);
  apply_config_json(c, R"({"seed": 9, "train": {"epochs": 3, "loss_scale": "batch_mean"},
                            "perlin": {"max_norm": 12}})",
                    "test");
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.train.epochs, 3u);
  EXPECT_EQ(c.train.loss_scale, LossScale::kBatchMean);
  EXPECT_EQ(c.perlin.max_norm, 12.0);
  EXPECT_EQ(c.perlin.period, 30.0);
  EXPECT_THROW(apply_config_json(c, R"({"sede": 1})", "test"), ConfigError);
  EXPECT_THROW(apply_config_json(c, R"({"train": {"epochs": "many"}})", "test"), ConfigError);
  EXPECT_THROW(apply_config_json(c, "{", "test"), ConfigError);

  PipelineConfig round = desk_scale_config();
  apply_config_json(round, config_to_json(c), "round");
  EXPECT_EQ(config_to_json(round), config_to_json(c));
}

TEST(PathId, StableHash) {
  EXPECT_EQ(path_id(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(path_id("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_NE(path_id("images/a.png"), path_id("images/b.png"));
}

PipelineConfig tiny_pipeline(const fs::path& out) {
  PipelineConfig c = desk_scale_config();
  c.output_dir = out.string();
  c.scenes.count = 12;
  c.scenes.size = 32;
  c.scenes.max_objects = 2;
  c.train.input_width = c.train.input_height = 32;
  c.train.epochs = 2;
  c.seed = 3;
  return c;
}

TEST_F(CliTest, PipelineIsReproducibleAndCachesTraining) {
  PipelineConfig c = tiny_pipeline(root_ / "run1");
  PipelineOutcome first;
  cmd_pipeline(c, &first);
  const std::string report = slurp(root_ / "run1/eval_report.json");
  const std::string summary = slurp(root_ / "run1/pipeline_report.json");
  EXPECT_FALSE(report.empty());
  EXPECT_TRUE(fs::exists(root_ / "run1/report.txt"));
  EXPECT_TRUE(fs::exists(root_ / "run1/resolved_config.json"));

  c.output_dir = (root_ / "run2").string();
  cmd_pipeline(c);
  EXPECT_EQ(slurp(root_ / "run2/eval_report.json"), report);
  EXPECT_EQ(slurp(root_ / "run2/pipeline_report.json"), summary);

  c.skip_train = true;
  PipelineOutcome cached;
  cmd_pipeline(c, &cached);
  EXPECT_EQ(slurp(root_ / "run2/eval_report.json"), report);
  EXPECT_EQ(cached.map50_denoised, first.map50_denoised);

  c.output_dir = (root_ / "run3").string();
  EXPECT_THROW(cmd_pipeline(c), std::runtime_error);
}

}  // namespace
}  // namespace advdenoise::cli
