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

#include <random>

#include <gtest/gtest.h>
#include <json.hpp>

#include "advdenoise/detection_eval.hpp"
#include "advdenoise/errors.hpp"
#include "oracles.hpp"

namespace advdenoise {
namespace {

using M = Match;

TEST(Iou, HandCases) {
  EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {0, 0, 10, 10}), 1.0);
  EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {20, 20, 5, 5}), 0.0);
  EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {10, 0, 10, 10}), 0.0);
  EXPECT_NEAR(iou({0, 0, 10, 10}, {5, 5, 10, 10}), 1.0 / 7.0, 1e-15);
}

TEST(Iou, NonPositiveSizeRejected) {
  EXPECT_THROW(iou({0, 0, 0, 10}, {0, 0, 1, 1}), ParameterError);
  EXPECT_THROW(iou({0, 0, 1, 1}, {0, 0, 1, -2}), ParameterError);
}

TEST(MatchDetections, SingleMatch) {
  const std::vector<GroundTruthBox> gt = {{1, 1, {0, 0, 10, 10}}};
  // IoU of (0,0,10,10) with (0,0,10,6) is 0.6.
  const std::vector<DetectionBox> det = {{1, 1, {0, 0, 10, 6}, 0.9}};
  EXPECT_EQ(match_detections(det, gt, 0.5), std::vector<M>{M::kTruePositive});
}

TEST(MatchDetections, BelowThresholdIsFalsePositive) {
  const std::vector<GroundTruthBox> gt = {{1, 1, {0, 0, 10, 10}}};
  const std::vector<DetectionBox> det = {{1, 1, {0, 0, 10, 4.5}, 0.9}};
  EXPECT_EQ(match_detections(det, gt, 0.5), std::vector<M>{M::kFalsePositive});
}

TEST(MatchDetections, HigherScoreWinsSharedGt) {
  const std::vector<GroundTruthBox> gt = {{1, 1, {0, 0, 10, 10}}};
  const std::vector<DetectionBox> det = {{1, 1, {0, 0, 10, 9}, 0.4},
                                         {1, 1, {0, 0, 10, 8}, 0.8}};
  EXPECT_EQ(match_detections(det, gt, 0.5),
            (std::vector<M>{M::kFalsePositive, M::kTruePositive}));
}

TEST(MatchDetections, NoCrossCategoryOrCrossImageMatches) {
  const std::vector<GroundTruthBox> gt = {{1, 1, {0, 0, 10, 10}}};
  const std::vector<DetectionBox> det = {{1, 2, {0, 0, 10, 10}, 0.9},
                                         {2, 1, {0, 0, 10, 10}, 0.9}};
  EXPECT_EQ(match_detections(det, gt, 0.5),
            (std::vector<M>{M::kFalsePositive, M::kFalsePositive}));
}

TEST(AveragePrecision, HandCases) {
  const std::vector<M> tp = {M::kTruePositive};
  EXPECT_DOUBLE_EQ(*average_precision(tp, 1), 1.0);
  EXPECT_DOUBLE_EQ(*average_precision({}, 3), 0.0);
  const std::vector<M> fp_tp = {M::kFalsePositive, M::kTruePositive};
  EXPECT_DOUBLE_EQ(*average_precision(fp_tp, 1), 0.5);
  EXPECT_FALSE(average_precision({}, 0).has_value());
  // Half the GT found at precision 1: recall levels 0..0.5 score 1.
  EXPECT_NEAR(*average_precision(tp, 2), 51.0 / 101.0, 1e-15);
}

TEST(IouThresholds, CocoGrid) {
  const auto t = iou_thresholds();
  EXPECT_DOUBLE_EQ(t.front(), 0.5);
  EXPECT_DOUBLE_EQ(t[5], 0.75);
  EXPECT_DOUBLE_EQ(t.back(), 0.95);
}

TEST(CocoMap, PerfectDetections) {
  const std::vector<GroundTruthBox> gt = {{1, 1, {0, 0, 10, 10}}, {1, 2, {20, 20, 5, 8}},
                                          {2, 1, {3, 3, 4, 4}}};
  std::vector<DetectionBox> det;
  for (const auto& g : gt) det.push_back({g.image_id, g.category_id, g.bbox, 1.0});
  const EvalReport r = coco_map(det, gt);
  EXPECT_DOUBLE_EQ(r.map, 1.0);
  EXPECT_DOUBLE_EQ(r.map50, 1.0);
  EXPECT_DOUBLE_EQ(r.map75, 1.0);
  EXPECT_EQ(r.num_gt, 3u);
  EXPECT_EQ(r.per_category.size(), 2u);
}

TEST(CocoMap, NoDetections) {
  const std::vector<GroundTruthBox> gt = {{1, 1, {0, 0, 10, 10}}};
  const EvalReport r = coco_map({}, gt);
  EXPECT_EQ(r.map, 0.0);
  EXPECT_EQ(r.map50, 0.0);
  EXPECT_EQ(r.map75, 0.0);
}

TEST(CocoMap, UnknownImageCountsAsFalsePositive) {
  const std::vector<GroundTruthBox> gt = {{1, 1, {0, 0, 10, 10}}};
  const std::vector<DetectionBox> det = {{99, 1, {0, 0, 10, 10}, 0.9},
                                         {1, 1, {0, 0, 10, 10}, 0.5}};
  EvalOptions opts;
  opts.image_ids = {1};
  const EvalReport r = coco_map(det, gt, opts);
  EXPECT_FALSE(r.warnings.empty());
  // The stray detection outranks the true one: [FP, TP] gives 0.5.
  EXPECT_DOUBLE_EQ(r.map50, 0.5);
}

TEST(CocoMap, CategoryWithoutGtIsExcluded) {
  const std::vector<GroundTruthBox> gt = {{1, 1, {0, 0, 10, 10}}};
  const std::vector<DetectionBox> det = {{1, 1, {0, 0, 10, 10}, 0.9},
                                         {1, 7, {0, 0, 10, 10}, 0.9}};
  const EvalReport r = coco_map(det, gt);
  EXPECT_DOUBLE_EQ(r.map50, 1.0);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(CocoMap, MaxDetsPerImage) {
  const std::vector<GroundTruthBox> gt = {{1, 1, {0, 0, 10, 10}}};
  std::vector<DetectionBox> det = {{1, 1, {50, 50, 5, 5}, 0.9}, {1, 1, {0, 0, 10, 10}, 0.1}};
  EvalOptions opts;
  opts.max_dets_per_image = 1;
  EXPECT_EQ(coco_map(det, gt, opts).map50, 0.0);
  opts.max_dets_per_image = 2;
  EXPECT_DOUBLE_EQ(coco_map(det, gt, opts).map50, 0.5);
}

TEST(CocoMap, MatchesBruteForceOracle) {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = oracle::random_instance(rng);
    EvalOptions opts;
    opts.image_ids = inst.image_ids;
    const EvalReport got = coco_map(inst.dets, inst.gts, opts);
    const auto want = oracle::brute_force_map(inst.dets, inst.gts);
    ASSERT_NEAR(got.map, want.map, 1e-9) << "trial " << trial;
    ASSERT_NEAR(got.map50, want.map50, 1e-9) << "trial " << trial;
    ASSERT_NEAR(got.map75, want.map75, 1e-9) << "trial " << trial;
  }
}

TEST(CocoMap, StricterThresholdsNeverScoreHigher) {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = oracle::random_instance(rng);
    const EvalReport r = coco_map(inst.dets, inst.gts);
    for (std::size_t t = 1; t < kNumIouThresholds; ++t) {
      ASSERT_LE(r.map_per_threshold[t], r.map_per_threshold[t - 1] + 1e-12);
    }
    ASSERT_LE(r.map, r.map50 + 1e-12);
    ASSERT_GE(r.map, 0.0);
    ASSERT_LE(r.map50, 1.0);
  }
}

TEST(CocoMap, InputOrderOfEqualScoresIsStable) {
  const std::vector<GroundTruthBox> gt = {{1, 1, {0, 0, 10, 10}}};
  const std::vector<DetectionBox> a = {{1, 1, {40, 40, 5, 5}, 0.5}, {1, 1, {0, 0, 10, 10}, 0.5}};
  const std::vector<DetectionBox> b = {a[1], a[0]};
  EXPECT_DOUBLE_EQ(coco_map(a, gt).map50, 0.5);
  EXPECT_DOUBLE_EQ(coco_map(b, gt).map50, 1.0);
}

TEST(Report, JsonAndTable) {
  const std::vector<GroundTruthBox> gt = {{1, 1, {0, 0, 10, 10}}};
  const std::vector<DetectionBox> det = {{1, 1, {0, 0, 10, 10}, 1.0}};
  const EvalReport r = coco_map(det, gt);
  const auto j = nlohmann::json::parse(report_to_json(r));
  EXPECT_DOUBLE_EQ(j.at("map").get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(j.at("map50").get<double>(), 1.0);

  const std::vector<std::pair<std::string, EvalReport>> rows = {
      {"Normal", r}, {"Adversarial", coco_map({}, gt)}, {"Autoencoder", r}};
  const std::string table = format_condition_table(rows);
  EXPECT_NE(table.find("bbox mAP@50"), std::string::npos);
  EXPECT_NE(table.find("bbox mAP@75"), std::string::npos);
  const auto normal = table.find("Normal"), adv = table.find("Adversarial"),
             ae = table.find("Autoencoder");
  EXPECT_LT(normal, adv);
  EXPECT_LT(adv, ae);
  EXPECT_NE(table.find("1.0000       1.0000       1.0000"), std::string::npos) << table;
}

}  // namespace
}  // namespace advdenoise
