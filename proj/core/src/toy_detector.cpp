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

#include "advdenoise/toy_detector.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "advdenoise/errors.hpp"
#include "advdenoise/random.hpp"

namespace advdenoise {
namespace {

// Smooth value noise in [-1, 1]: random lattice values, bilinear in between.
std::vector<double> smooth_texture(std::size_t w, std::size_t h, std::size_t cell,
                                   SplitMix64& rng) {
  const std::size_t gw = w / cell + 2, gh = h / cell + 2;
  std::vector<double> lattice(gw * gh);
  for (double& v : lattice) v = rng.uniform(-1.0, 1.0);
  std::vector<double> out(w * h);
  for (std::size_t y = 0; y < h; ++y) {
    const double fy = static_cast<double>(y) / static_cast<double>(cell);
    const std::size_t iy = static_cast<std::size_t>(fy);
    const double ty = fy - static_cast<double>(iy);
    for (std::size_t x = 0; x < w; ++x) {
      const double fx = static_cast<double>(x) / static_cast<double>(cell);
      const std::size_t ix = static_cast<std::size_t>(fx);
      const double tx = fx - static_cast<double>(ix);
      const double a = lattice[iy * gw + ix], b = lattice[iy * gw + ix + 1];
      const double c = lattice[(iy + 1) * gw + ix], d = lattice[(iy + 1) * gw + ix + 1];
      out[y * w + x] = (a * (1 - tx) + b * tx) * (1 - ty) + (c * (1 - tx) + d * tx) * ty;
    }
  }
  return out;
}

struct Shape {
  std::int64_t category;
  BBox extent;  // pixel extents
  double cx, cy, radius;
};

bool gap_violated(const BBox& a, const BBox& b, double gap) {
  return a.x < b.x + b.w + gap && b.x < a.x + a.w + gap &&
         a.y < b.y + b.h + gap && b.y < a.y + a.h + gap;
}

}  // namespace

SyntheticScene generate_scene(std::size_t width, std::size_t height,
                              std::size_t n_objects, std::uint64_t seed,
                              std::int64_t image_id, const SceneConfig& config) {
  if (width < 16 || height < 16) {
    throw ParameterError("scene dimensions must be >= 16, got " +
                         std::to_string(width) + "x" + std::to_string(height));
  }
  if (config.min_object_size < 2 || config.max_object_size < config.min_object_size ||
      config.max_object_size > std::min(width, height)) {
    throw ParameterError("invalid object size range for scene");
  }
  SplitMix64 rng(seed);
  SyntheticScene scene;
  scene.seed = seed;
  scene.image = ImageTensor(width, height);

  const std::vector<double> texture =
      smooth_texture(width, height, std::max<std::size_t>(config.background_cell, 1), rng);
  std::array<double, 3> bg_tint;
  for (double& t : bg_tint) t = rng.uniform(-config.color_tint, config.color_tint);
  for (std::size_t p = 0; p < width * height; ++p) {
    const double level = config.background_level + config.background_amplitude * texture[p];
    for (std::size_t c = 0; c < 3; ++c) {
      scene.image.data[p * 3 + c] =
          static_cast<float>(std::clamp(level + bg_tint[c], 0.0, 1.0));
    }
  }

  std::vector<Shape> shapes;
  const std::size_t size_span = config.max_object_size - config.min_object_size + 1;
  for (std::size_t k = 0; k < n_objects; ++k) {
    bool placed = false;
    for (std::size_t attempt = 0; attempt < config.max_attempts && !placed; ++attempt) {
      Shape s;
      s.category = rng.below(2) == 0 ? kBoxCategory : kDiskCategory;
      if (s.category == kBoxCategory) {
        const std::size_t w = config.min_object_size + rng.below(size_span);
        const std::size_t h = config.min_object_size + rng.below(size_span);
        const std::size_t x = rng.below(width - w + 1);
        const std::size_t y = rng.below(height - h + 1);
        s.extent = BBox{double(x), double(y), double(w), double(h)};
        s.cx = s.cy = s.radius = 0.0;
      } else {
        const std::size_t d = config.min_object_size + rng.below(size_span);
        const std::size_t x = rng.below(width - d + 1);
        const std::size_t y = rng.below(height - d + 1);
        s.radius = static_cast<double>(d) / 2.0;
        s.cx = static_cast<double>(x) + s.radius;
        s.cy = static_cast<double>(y) + s.radius;
        // Extent of the rasterized disk: pixel centres within the radius.
        double x0 = 1e9, y0 = 1e9, x1 = -1, y1 = -1;
        for (std::size_t py = y; py < y + d; ++py) {
          for (std::size_t px = x; px < x + d; ++px) {
            const double dx = static_cast<double>(px) + 0.5 - s.cx;
            const double dy = static_cast<double>(py) + 0.5 - s.cy;
            if (dx * dx + dy * dy <= s.radius * s.radius) {
              x0 = std::min(x0, double(px));
              y0 = std::min(y0, double(py));
              x1 = std::max(x1, double(px));
              y1 = std::max(y1, double(py));
            }
          }
        }
        s.extent = BBox{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
      }
      bool ok = true;
      for (const Shape& o : shapes) {
        if (iou(s.extent, o.extent) > config.iou_cap ||
            gap_violated(s.extent, o.extent, static_cast<double>(config.min_gap))) {
          ok = false;
          break;
        }
      }
      if (ok) {
        shapes.push_back(s);
        placed = true;
      }
    }
    if (!placed) {
      throw PlacementError("could not place object " + std::to_string(k + 1) + " of " +
                           std::to_string(n_objects) + " within " +
                           std::to_string(config.max_attempts) + " attempts");
    }
  }

  for (const Shape& s : shapes) {
    const double level = rng.uniform(config.object_level_min, config.object_level_max);
    std::array<double, 3> rgb;
    for (double& v : rgb) {
      v = std::clamp(level + rng.uniform(-config.color_tint, config.color_tint), 0.0, 1.0);
    }
    const auto x0 = static_cast<std::size_t>(s.extent.x);
    const auto y0 = static_cast<std::size_t>(s.extent.y);
    for (std::size_t y = y0; y < y0 + static_cast<std::size_t>(s.extent.h); ++y) {
      for (std::size_t x = x0; x < x0 + static_cast<std::size_t>(s.extent.w); ++x) {
        if (s.category == kDiskCategory) {
          const double dx = static_cast<double>(x) + 0.5 - s.cx;
          const double dy = static_cast<double>(y) + 0.5 - s.cy;
          if (dx * dx + dy * dy > s.radius * s.radius) continue;
        }
        for (std::size_t c = 0; c < 3; ++c) scene.image.at(x, y, c) = static_cast<float>(rgb[c]);
      }
    }
    scene.gts.push_back(GroundTruthBox{image_id, s.category, s.extent});
  }
  return scene;
}

std::vector<double> luminance(const ImageTensor& image) {
  std::vector<double> lum(image.pixel_count());
  for (std::size_t p = 0; p < lum.size(); ++p) {
    lum[p] = 0.299 * image.data[p * 3] + 0.587 * image.data[p * 3 + 1] +
             0.114 * image.data[p * 3 + 2];
  }
  return lum;
}

double otsu_threshold(std::span<const double> values) {
  std::array<double, 256> hist{};
  for (double v : values) {
    const auto bin = static_cast<std::size_t>(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5);
    hist[bin] += 1.0;
  }
  const double total = static_cast<double>(values.size());
  double sum_all = 0.0;
  for (std::size_t i = 0; i < 256; ++i) sum_all += static_cast<double>(i) * hist[i];
  double w0 = 0.0, sum0 = 0.0, best = -1.0;
  std::size_t best_bin = 0;
  for (std::size_t i = 0; i < 255; ++i) {
    w0 += hist[i];
    sum0 += static_cast<double>(i) * hist[i];
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double m0 = sum0 / w0, m1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      best_bin = i;
    }
  }
  return (static_cast<double>(best_bin) + 0.5) / 255.0;
}

std::vector<DetectionBox> detect_blobs(const ImageTensor& image, std::int64_t image_id,
                                       const DetectorConfig& config) {
  std::vector<DetectionBox> dets;
  if (image.empty()) return dets;
  const std::vector<double> lum = luminance(image);
  const auto [lo, hi] = std::minmax_element(lum.begin(), lum.end());
  if (*hi - *lo < config.min_dynamic_range) return dets;

  const double threshold = otsu_threshold(lum);
  const std::size_t W = image.width, H = image.height;
  std::vector<char> fg(lum.size());
  double bg_sum = 0.0;
  std::size_t bg_count = 0;
  for (std::size_t p = 0; p < lum.size(); ++p) {
    fg[p] = lum[p] > threshold;
    if (!fg[p]) {
      bg_sum += lum[p];
      ++bg_count;
    }
  }
  const double bg_mean = bg_count ? bg_sum / static_cast<double>(bg_count) : 0.0;

  std::vector<std::int32_t> label(lum.size(), -1);
  std::vector<std::size_t> stack;
  std::int32_t next = 0;
  for (std::size_t start = 0; start < lum.size(); ++start) {
    if (!fg[start] || label[start] >= 0) continue;
    std::size_t area = 0, x0 = W, y0 = H, x1 = 0, y1 = 0;
    double lum_sum = 0.0;
    stack.assign(1, start);
    label[start] = next;
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      const std::size_t x = p % W, y = p / W;
      ++area;
      lum_sum += lum[p];
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
      auto visit = [&](std::size_t q) {
        if (fg[q] && label[q] < 0) {
          label[q] = next;
          stack.push_back(q);
        }
      };
      if (x > 0) visit(p - 1);
      if (x + 1 < W) visit(p + 1);
      if (y > 0) visit(p - W);
      if (y + 1 < H) visit(p + W);
    }
    ++next;
    if (area < config.min_area) continue;
    DetectionBox d;
    d.image_id = image_id;
    d.bbox = BBox{double(x0), double(y0), double(x1 - x0 + 1), double(y1 - y0 + 1)};
    const double fill = static_cast<double>(area) / (d.bbox.w * d.bbox.h);
    d.category_id = fill >= config.box_fill_ratio ? kBoxCategory : kDiskCategory;
    d.score = std::clamp(lum_sum / static_cast<double>(area) - bg_mean, 0.0, 1.0);
    dets.push_back(d);
  }
  return dets;
}

}  // namespace advdenoise
