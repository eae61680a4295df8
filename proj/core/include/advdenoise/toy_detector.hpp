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
#include <span>
#include <vector>

#include "advdenoise/detection_eval.hpp"
#include "advdenoise/image.hpp"

namespace advdenoise {

inline constexpr std::int64_t kBoxCategory = 1;
inline constexpr std::int64_t kDiskCategory = 2;

// Appearance and placement parameters for synthetic scenes. Luminance levels
// are on the [0, 1] scale.
struct SceneConfig {
  double background_level = 0.35;
  double background_amplitude = 0.05;  // peak deviation of the texture
  std::size_t background_cell = 8;     // texture lattice spacing, pixels
  double object_level_min = 0.60;
  double object_level_max = 0.70;
  double color_tint = 0.02;            // per-channel jitter around the level
  std::size_t min_object_size = 8;
  std::size_t max_object_size = 20;
  double iou_cap = 0.1;
  std::size_t min_gap = 2;             // pixels between object extents
  std::size_t max_attempts = 1000;
};

struct SyntheticScene {
  ImageTensor image;
  std::vector<GroundTruthBox> gts;
  std::uint64_t seed = 0;
};

// Textured low-contrast background with `n_objects` filled rectangles
// (category 1) and disks (category 2). Ground truth boxes are the exact pixel
// extents of each shape. Throws PlacementError when the overlap constraints
// cannot be met within `max_attempts` tries for an object.
SyntheticScene generate_scene(std::size_t width, std::size_t height,
                              std::size_t n_objects, std::uint64_t seed,
                              std::int64_t image_id = 0,
                              const SceneConfig& config = {});

struct DetectorConfig {
  std::size_t min_area = 6;        // smaller components are ignored
  double box_fill_ratio = 0.9;     // fill >= ratio -> box, else disk
  double min_dynamic_range = 0.02; // flatter images yield no detections
};

// Rec. 601 luma per pixel.
std::vector<double> luminance(const ImageTensor& image);

// Otsu threshold over a 256-bin histogram of `values` in [0, 1]; returns the
// upper edge of the last background bin.
double otsu_threshold(std::span<const double> values);

// Otsu foreground -> 4-connected components -> bounding boxes. Score is the
// component's mean luminance minus the background mean, clamped to [0, 1].
std::vector<DetectionBox> detect_blobs(const ImageTensor& image,
                                       std::int64_t image_id = 0,
                                       const DetectorConfig& config = {});

}  // namespace advdenoise
