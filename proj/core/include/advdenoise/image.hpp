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

#include <cstddef>
#include <span>
#include <vector>

#include "advdenoise/tensor.hpp"

namespace advdenoise {

// Interleaved RGB image (row-major, HWC) with channel values in [0, 1].
struct ImageTensor {
  static constexpr std::size_t kChannels = 3;

  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<float> data;

  ImageTensor() = default;
  ImageTensor(std::size_t w, std::size_t h, float fill = 0.0f)
      : width(w), height(h), data(w * h * kChannels, fill) {}

  std::size_t pixel_count() const { return width * height; }
  bool empty() const { return data.empty(); }

  float& at(std::size_t x, std::size_t y, std::size_t c) {
    return data[(y * width + x) * kChannels + c];
  }
  float at(std::size_t x, std::size_t y, std::size_t c) const {
    return data[(y * width + x) * kChannels + c];
  }

  friend bool operator==(const ImageTensor&, const ImageTensor&) = default;
};

// Mean squared error over all channel values; dimensions must match.
double image_mse(const ImageTensor& a, const ImageTensor& b);

// Largest absolute per-value difference, computed in double.
double image_linf(const ImageTensor& a, const ImageTensor& b);

// Packs equally sized images into an (N, 3, H, W) batch.
Tensor4<float> images_to_batch(std::span<const ImageTensor> images);
Tensor4<float> image_to_batch(const ImageTensor& image);

// Extracts batch item `n` as an image.
ImageTensor batch_to_image(const Tensor4<float>& batch, std::size_t n);

}  // namespace advdenoise
