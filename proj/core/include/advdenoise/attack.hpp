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
#include <span>
#include <string>
#include <vector>

#include "advdenoise/image.hpp"
#include "advdenoise/perlin.hpp"

namespace advdenoise {

// -1, 0 or +1.
inline double sign_of(double v) { return (v > 0.0) - (v < 0.0); }

// out = clip(image + (max_norm / 255) * sign(field), 0, 1) with the single
// field broadcast to all three channels. The stored float result is nudged
// so that |out - image| <= max_norm / 255 holds exactly when measured in
// double precision.
ImageTensor apply_perturbation(const ImageTensor& image, const NoiseField& field,
                               double max_norm);

// Per-channel variant: one independent field per RGB channel.
ImageTensor apply_perturbation(const ImageTensor& image,
                               std::span<const NoiseField, 3> fields,
                               double max_norm);

struct AttackOptions {
  bool per_channel = false;
  // Reuse one field (seeded by the global seed) for every image.
  bool fixed_field = false;
};

struct AttackResult {
  std::uint64_t id = 0;
  std::uint64_t noise_seed = 0;
  std::optional<ImageTensor> image;  // empty when `error` is set
  std::string error;
};

// Seed used for image `id`: derive_seed(global_seed, id), or the global seed
// itself in fixed-field mode.
std::uint64_t image_noise_seed(std::uint64_t global_seed, std::uint64_t id,
                               const AttackOptions& options = {});

// Attacks every image with its own noise field. Failures are reported per
// item and do not stop the batch. `config.seed` is the global seed.
std::vector<AttackResult> attack_batch(std::span<const ImageTensor> images,
                                       std::span<const std::uint64_t> ids,
                                       const PerlinConfig& config,
                                       const AttackOptions& options = {});

}  // namespace advdenoise
