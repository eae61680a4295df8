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

#include "advdenoise/attack.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "advdenoise/errors.hpp"
#include "advdenoise/random.hpp"

namespace advdenoise {
namespace {

void check_max_norm(double max_norm) {
  if (!(max_norm >= 0.0 && max_norm <= 255.0)) {
    throw ParameterError("max_norm must be in [0, 255], got " +
                         std::to_string(max_norm));
  }
}

void check_field(const ImageTensor& image, const NoiseField& field) {
  if (field.width != image.width || field.height != image.height) {
    throw ShapeError("noise field " + std::to_string(field.width) + "x" +
                     std::to_string(field.height) + " does not match image " +
                     std::to_string(image.width) + "x" +
                     std::to_string(image.height));
  }
}

// Clipped, bound-exact perturbation of a single value.
float perturb(float original, double step, double epsilon) {
  if (step == 0.0) return original;
  const double o = static_cast<double>(original);
  float out = static_cast<float>(std::clamp(o + step, 0.0, 1.0));
  // float rounding may overshoot the bound by half an ulp.
  while (std::abs(static_cast<double>(out) - o) > epsilon) {
    out = std::nextafter(out, original);
  }
  return out;
}

}  // namespace

ImageTensor apply_perturbation(const ImageTensor& image, const NoiseField& field,
                               double max_norm) {
  check_max_norm(max_norm);
  check_field(image, field);
  const double epsilon = max_norm / 255.0;
  ImageTensor out = image;
  for (std::size_t p = 0; p < image.pixel_count(); ++p) {
    const double step = epsilon * sign_of(field.values[p]);
    for (std::size_t c = 0; c < ImageTensor::kChannels; ++c) {
      float& v = out.data[p * ImageTensor::kChannels + c];
      v = perturb(v, step, epsilon);
    }
  }
  return out;
}

ImageTensor apply_perturbation(const ImageTensor& image,
                               std::span<const NoiseField, 3> fields,
                               double max_norm) {
  check_max_norm(max_norm);
  for (const NoiseField& f : fields) check_field(image, f);
  const double epsilon = max_norm / 255.0;
  ImageTensor out = image;
  for (std::size_t p = 0; p < image.pixel_count(); ++p) {
    for (std::size_t c = 0; c < ImageTensor::kChannels; ++c) {
      const double step = epsilon * sign_of(fields[c].values[p]);
      float& v = out.data[p * ImageTensor::kChannels + c];
      v = perturb(v, step, epsilon);
    }
  }
  return out;
}

std::uint64_t image_noise_seed(std::uint64_t global_seed, std::uint64_t id,
                               const AttackOptions& options) {
  return options.fixed_field ? global_seed : derive_seed(global_seed, id);
}

std::vector<AttackResult> attack_batch(std::span<const ImageTensor> images,
                                       std::span<const std::uint64_t> ids,
                                       const PerlinConfig& config,
                                       const AttackOptions& options) {
  config.validate();
  if (images.size() != ids.size()) {
    throw ParameterError("attack_batch: " + std::to_string(images.size()) +
                         " images but " + std::to_string(ids.size()) + " ids");
  }
  std::vector<AttackResult> results(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    AttackResult& r = results[i];
    r.id = ids[i];
    r.noise_seed = image_noise_seed(config.seed, ids[i], options);
    try {
      const ImageTensor& img = images[i];
      PerlinConfig item = config;
      item.seed = r.noise_seed;
      if (options.per_channel) {
        std::array<NoiseField, 3> fields;
        for (std::size_t c = 0; c < 3; ++c) {
          PerlinConfig channel = item;
          channel.seed = derive_seed(item.seed, c + 1);
          fields[c] = generate_noise_field(img.width, img.height, channel);
        }
        r.image = apply_perturbation(img, std::span<const NoiseField, 3>(fields),
                                     config.max_norm);
      } else {
        r.image = apply_perturbation(
            img, generate_noise_field(img.width, img.height, item),
            config.max_norm);
      }
    } catch (const std::exception& e) {
      r.error = "image " + std::to_string(ids[i]) + ": " + e.what();
    }
  }
  return results;
}

}  // namespace advdenoise
