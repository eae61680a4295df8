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

#include "advdenoise/detection_eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "advdenoise/errors.hpp"

namespace advdenoise {
namespace {

using GroupKey = std::pair<std::int64_t, std::int64_t>;  // (image, category)

void check_box(const BBox& b) {
  if (!(b.w > 0.0) || !(b.h > 0.0)) {
    throw ParameterError("box must have positive width and height, got w=" +
                         std::to_string(b.w) + " h=" + std::to_string(b.h));
  }
}

// Indices of `dets` in descending score order, stable for ties.
std::vector<std::size_t> score_order(std::span<const DetectionBox> dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].score > dets[b].score;
  });
  return order;
}

}  // namespace

double iou(const BBox& a, const BBox& b) {
  check_box(a);
  check_box(b);
  const double iw = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  const double ih = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.w * a.h + b.w * b.h - inter);
}

std::array<double, kNumIouThresholds> iou_thresholds() {
  std::array<double, kNumIouThresholds> t{};
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(50 + 5 * i) / 100.0;
  return t;
}

std::vector<Match> match_detections(std::span<const DetectionBox> dets,
                                   std::span<const GroundTruthBox> gts,
                                   double iou_threshold) {
  std::map<GroupKey, std::vector<std::size_t>> gt_groups;
  for (std::size_t g = 0; g < gts.size(); ++g) {
    gt_groups[{gts[g].image_id, gts[g].category_id}].push_back(g);
  }
  std::vector<bool> used(gts.size(), false);
  std::vector<Match> tp(dets.size(), Match::kFalsePositive);
  for (std::size_t d : score_order(dets)) {
    auto it = gt_groups.find({dets[d].image_id, dets[d].category_id});
    if (it == gt_groups.end()) continue;
    double best = iou_threshold;
    std::optional<std::size_t> match;
    for (std::size_t g : it->second) {
      if (used[g]) continue;
      const double v = iou(dets[d].bbox, gts[g].bbox);
      if (v >= best) {
        // Strictly better IoU wins; the first candidate at the threshold
        // itself is accepted.
        if (!match || v > best) {
          best = v;
          match = g;
        }
      }
    }
    if (match) {
      used[*match] = true;
      tp[d] = Match::kTruePositive;
    }
  }
  return tp;
}

std::optional<double> average_precision(std::span<const Match> flags,
                                        std::size_t num_gt) {
  if (num_gt == 0) {
    if (flags.empty()) return std::nullopt;
    return 0.0;
  }
  const std::size_t n = flags.size();
  std::vector<double> recall(n), precision(n);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (flags[i] == Match::kTruePositive) ++tp;
    recall[i] = static_cast<double>(tp) / static_cast<double>(num_gt);
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }
  // Precision envelope: running max from the right.
  for (std::size_t i = n; i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double sum = 0.0;
  for (int r = 0; r <= 100; ++r) {
    const double level = static_cast<double>(r) / 100.0;
    const auto it = std::lower_bound(recall.begin(), recall.end(), level);
    if (it != recall.end()) sum += precision[static_cast<std::size_t>(it - recall.begin())];
  }
  return sum / 101.0;
}

EvalReport coco_map(std::span<const DetectionBox> dets,
                    std::span<const GroundTruthBox> gts,
                    const EvalOptions& options) {
  EvalReport report;
  for (const auto& g : gts) check_box(g.bbox);
  for (const auto& d : dets) check_box(d.bbox);

  std::set<std::int64_t> images = options.image_ids;
  if (images.empty()) {
    for (const auto& g : gts) images.insert(g.image_id);
  }
  std::map<std::int64_t, std::size_t> gt_per_category;
  for (const auto& g : gts) {
    if (!options.image_ids.empty() && !images.count(g.image_id)) {
      throw ParameterError("ground truth references unknown image id " +
                           std::to_string(g.image_id));
    }
    ++gt_per_category[g.category_id];
  }

  // Per-image cap on the number of ranked detections.
  std::vector<std::size_t> order = score_order(dets);
  std::map<std::int64_t, std::size_t> per_image;
  std::vector<std::size_t> kept;
  kept.reserve(order.size());
  std::set<std::int64_t> unknown_images, unknown_categories;
  for (std::size_t i : order) {
    const DetectionBox& d = dets[i];
    if (!images.count(d.image_id)) unknown_images.insert(d.image_id);
    if (!gt_per_category.count(d.category_id)) unknown_categories.insert(d.category_id);
    if (++per_image[d.image_id] <= options.max_dets_per_image) kept.push_back(i);
  }
  for (std::int64_t id : unknown_images) {
    report.warnings.push_back("detections reference unknown image id " +
                              std::to_string(id) + "; counted as false positives");
  }
  for (std::int64_t id : unknown_categories) {
    report.warnings.push_back("detections reference category " + std::to_string(id) +
                              " with no ground truth; excluded from the mean");
  }

  // Ranked detections per category.
  std::map<std::int64_t, std::vector<DetectionBox>> ranked;
  for (std::size_t i : kept) ranked[dets[i].category_id].push_back(dets[i]);
  std::map<std::int64_t, std::vector<GroundTruthBox>> gt_by_cat;
  for (const auto& g : gts) gt_by_cat[g.category_id].push_back(g);

  const auto thresholds = iou_thresholds();
  for (const auto& [category, num_gt] : gt_per_category) {
    CategoryAp cat{category, num_gt, {}};
    const auto& cd = ranked[category];
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      const auto flags = match_detections(cd, gt_by_cat[category], thresholds[t]);
      cat.ap[t] = *average_precision(flags, num_gt);
    }
    report.per_category.push_back(cat);
  }

  if (!report.per_category.empty()) {
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      double s = 0.0;
      for (const auto& c : report.per_category) s += c.ap[t];
      report.map_per_threshold[t] = s / static_cast<double>(report.per_category.size());
    }
  }
  report.map = std::accumulate(report.map_per_threshold.begin(),
                               report.map_per_threshold.end(), 0.0) /
               static_cast<double>(kNumIouThresholds);
  report.map50 = report.map_per_threshold[0];
  report.map75 = report.map_per_threshold[5];
  for (const auto& d : dets) images.insert(d.image_id);
  report.num_images = images.size();
  report.num_gt = gts.size();
  report.num_detections = dets.size();
  return report;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["map"] = report.map;
  j["map50"] = report.map50;
  j["map75"] = report.map75;
  const auto thresholds = iou_thresholds();
  nlohmann::ordered_json per_t = nlohmann::ordered_json::array();
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    per_t.push_back({{"iou", thresholds[t]}, {"map", report.map_per_threshold[t]}});
  }
  j["per_threshold"] = per_t;
  nlohmann::ordered_json cats = nlohmann::ordered_json::array();
  for (const auto& c : report.per_category) {
    cats.push_back({{"category_id", c.category_id},
                    {"num_gt", c.num_gt},
                    {"ap", std::vector<double>(c.ap.begin(), c.ap.end())}});
  }
  j["per_category"] = cats;
  j["counts"] = {{"images", report.num_images},
                 {"gt_boxes", report.num_gt},
                 {"detections", report.num_detections}};
  j["warnings"] = report.warnings;
  return j.dump(2);
}

std::string format_condition_table(
    std::span<const std::pair<std::string, EvalReport>> rows) {
  std::size_t name_width = std::string("Condition").size();
  for (const auto& r : rows) name_width = std::max(name_width, r.first.size());
  std::ostringstream os;
  const char* cols[3] = {"bbox mAP", "bbox mAP@50", "bbox mAP@75"};
  os << std::left << std::setw(static_cast<int>(name_width)) << "Condition";
  for (const char* c : cols) os << "  " << std::right << std::setw(11) << c;
  os << "\n";
  for (const auto& [name, rep] : rows) {
    os << std::left << std::setw(static_cast<int>(name_width)) << name << std::right
       << std::fixed << std::setprecision(4);
    for (double v : {rep.map, rep.map50, rep.map75}) os << "  " << std::setw(11) << v;
    os << "\n";
  }
  return os.str();
}

}  // namespace advdenoise
