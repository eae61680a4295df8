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
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "advdenoise/detection_eval.hpp"
#include "advdenoise/image.hpp"

namespace advdenoise {

// ----------------------------------------------------------------------------
// Images

// Decodes 8-bit PNG (gray, gray+alpha, RGB, RGBA, palette; alpha dropped,
// gray replicated) or binary PPM (P6). Values are byte / 255.
ImageTensor load_image(const std::string& path);

// Quantizes with round-half-up of v * 255 and writes PNG or PPM according to
// the file extension.
void save_image(const ImageTensor& image, const std::string& path);

std::uint8_t quantize(float v);

// Bilinear resampling with half-pixel centers and edge clamping.
ImageTensor resize_bilinear(const ImageTensor& image, std::size_t out_width,
                            std::size_t out_height);

// ----------------------------------------------------------------------------
// Manifests

enum class Split { kAll, kTrain, kVal, kTest };

const char* split_name(Split split);

struct ManifestEntry {
  std::int64_t id = 0;
  std::string path;
  std::size_t width = 0;
  std::size_t height = 0;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  Split split = Split::kAll;
};

// JSON lines, one {"id", "path", "width", "height"} object per line. Ids must
// be unique; with `check_files` every path must exist (relative paths are
// resolved against the manifest's directory).
DatasetManifest load_manifest(const std::string& path, bool check_files = true);
void save_manifest(const DatasetManifest& manifest, const std::string& path);

// Seeded shuffle then prefix split; |train| = round(fraction * size).
std::pair<DatasetManifest, DatasetManifest> split_dataset(
    const DatasetManifest& manifest, double fraction, std::uint64_t seed);

// ----------------------------------------------------------------------------
// COCO-style annotations and detection results

struct Category {
  std::int64_t id = 0;
  std::string name;
};

struct ImageInfo {
  std::int64_t id = 0;
  std::string file_name;
  std::size_t width = 0;  // 0 when absent
  std::size_t height = 0;
};

struct AnnotationSet {
  std::vector<ImageInfo> images;
  std::vector<GroundTruthBox> boxes;
  std::vector<Category> categories;
  std::size_t skipped_crowd = 0;
  std::vector<std::string> warnings;

  std::vector<GroundTruthBox> boxes_for(std::int64_t image_id) const;
};

// COCO supercategory "vehicle": bicycle, car, motorcycle, airplane, bus,
// train, truck, boat.
inline constexpr std::array<std::int64_t, 8> kCocoVehicleCategoryIds = {
    2, 3, 4, 5, 6, 7, 8, 9};

AnnotationSet parse_annotations(const std::string& json_text,
                                const std::string& source = "<memory>");
AnnotationSet load_annotations(const std::string& path);
void save_annotations(const AnnotationSet& set, const std::string& path);

std::vector<DetectionBox> parse_detections(const std::string& json_text,
                                           const std::string& source = "<memory>");
std::vector<DetectionBox> load_detections(const std::string& path);
void save_detections(std::span<const DetectionBox> dets, const std::string& path);

// Keeps images with at least one annotation in `category_ids`, together with
// all of their annotations.
AnnotationSet filter_images_by_category(
    const AnnotationSet& set,
    std::span<const std::int64_t> category_ids = kCocoVehicleCategoryIds);

}  // namespace advdenoise
