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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace advdenoise {

// Axis-aligned box in COCO xywh convention, top-left origin, pixels.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  friend bool operator==(const BBox&, const BBox&) = default;
};

struct GroundTruthBox {
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  BBox bbox;

  friend bool operator==(const GroundTruthBox&, const GroundTruthBox&) = default;
};

struct DetectionBox {
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  BBox bbox;
  double score = 0.0;

  friend bool operator==(const DetectionBox&, const DetectionBox&) = default;
};

// Intersection over union; throws ParameterError on non-positive sizes.
double iou(const BBox& a, const BBox& b);

enum class Match : std::uint8_t { kFalsePositive, kTruePositive };

// Greedy COCO matching at one IoU threshold. Detections are visited in
// descending score order (input order breaks ties); each claims the unmatched
// ground truth box of the same (image, category) with the highest IoU >=
// threshold. Returns one flag per detection, in input order.
std::vector<Match> match_detections(std::span<const DetectionBox> dets,
                                   std::span<const GroundTruthBox> gts,
                                   double iou_threshold);

// 101-point interpolated average precision. `flags` are in descending score
// order. Undefined (nullopt) when there is neither ground truth nor any
// detection; 0 when there are detections but no ground truth.
std::optional<double> average_precision(std::span<const Match> flags,
                                        std::size_t num_gt);

inline constexpr std::size_t kNumIouThresholds = 10;
// 0.50, 0.55, ..., 0.95
std::array<double, kNumIouThresholds> iou_thresholds();

struct CategoryAp {
  std::int64_t category_id = 0;
  std::size_t num_gt = 0;
  std::array<double, kNumIouThresholds> ap{};
};

struct EvalReport {
  double map = 0.0;    // mean over the ten thresholds
  double map50 = 0.0;
  double map75 = 0.0;
  std::array<double, kNumIouThresholds> map_per_threshold{};
  std::vector<CategoryAp> per_category;  // categories with >= 1 GT box
  std::size_t num_images = 0;
  std::size_t num_gt = 0;
  std::size_t num_detections = 0;
  std::vector<std::string> warnings;
};

struct EvalOptions {
  std::size_t max_dets_per_image = 100;
  // Known image ids; inferred from the ground truth when empty.
  std::set<std::int64_t> image_ids;
};

// COCO-style bbox mAP, mAP@50 and mAP@75. Detections are ranked by score with
// ties kept in input order; at most `max_dets_per_image` per image are used.
// Detections on categories without ground truth are warned about and left out
// of the category mean; detections on unknown images count as false
// positives.
EvalReport coco_map(std::span<const DetectionBox> dets,
                    std::span<const GroundTruthBox> gts,
                    const EvalOptions& options = {});

// JSON object with map, map50, map75, per-threshold and per-category AP,
// counts and warnings.
std::string report_to_json(const EvalReport& report);

// Aligned text table: Condition | bbox mAP | bbox mAP@50 | bbox mAP@75.
std::string format_condition_table(
    std::span<const std::pair<std::string, EvalReport>> rows);

}  // namespace advdenoise
