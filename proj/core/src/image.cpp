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

#include "advdenoise/image.hpp"

#include <algorithm>
#include <cmath>

namespace advdenoise {
namespace {

void require_same_dims(const ImageTensor& a, const ImageTensor& b,
                       const char* what) {
  if (a.width != b.width || a.height != b.height) {
    throw ShapeError(std::string(what) + ": image " + std::to_string(a.width) +
                     "x" + std::to_string(a.height) + " vs " +
                     std::to_string(b.width) + "x" + std::to_string(b.height));
  }
}

}  // namespace

double image_mse(const ImageTensor& a, const ImageTensor& b) {
  require_same_dims(a, b, "image_mse");
  if (a.data.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - b.data[i];
    sum += d * d;
  }
  return sum / static_cast<double>(a.data.size());
}

double image_linf(const ImageTensor& a, const ImageTensor& b) {
  require_same_dims(a, b, "image_linf");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    m = std::max(m, std::abs(static_cast<double>(a.data[i]) - b.data[i]));
  }
  return m;
}

Tensor4<float> images_to_batch(std::span<const ImageTensor> images) {
  if (images.empty()) return {};
  const std::size_t w = images[0].width, h = images[0].height;
  Tensor4<float> t(Shape4{images.size(), ImageTensor::kChannels, h, w});
  for (std::size_t n = 0; n < images.size(); ++n) {
    const ImageTensor& img = images[n];
    if (img.width != w || img.height != h) {
      throw ShapeError("images_to_batch: image " + std::to_string(n) + " is " +
                       std::to_string(img.width) + "x" +
                       std::to_string(img.height) + ", expected " +
                       std::to_string(w) + "x" + std::to_string(h));
    }
    for (std::size_t c = 0; c < ImageTensor::kChannels; ++c) {
      float* dst = t.plane(n, c);
      for (std::size_t p = 0; p < w * h; ++p) {
        dst[p] = img.data[p * ImageTensor::kChannels + c];
      }
    }
  }
  return t;
}

Tensor4<float> image_to_batch(const ImageTensor& image) {
  return images_to_batch(std::span<const ImageTensor>(&image, 1));
}

ImageTensor batch_to_image(const Tensor4<float>& batch, std::size_t n) {
  const Shape4 s = batch.shape();
  if (s.c != ImageTensor::kChannels || n >= s.n) {
    throw ShapeError("batch_to_image: cannot take item " + std::to_string(n) +
                     " of batch " + s.str());
  }
  ImageTensor img(s.w, s.h);
  for (std::size_t c = 0; c < ImageTensor::kChannels; ++c) {
    const float* src = batch.plane(n, c);
    for (std::size_t p = 0; p < s.w * s.h; ++p) {
      img.data[p * ImageTensor::kChannels + c] = src[p];
    }
  }
  return img;
}

}  // namespace advdenoise
