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

#include "advdenoise/perlin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "advdenoise/errors.hpp"
#include "advdenoise/random.hpp"

namespace advdenoise {
namespace {

inline double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

inline double lerp(double t, double a, double b) { return a + t * (b - a); }

// Eight gradient directions: the four diagonals (1, 1) and the four axes.
// Diagonals of length sqrt(2) keep the 2-D output inside [-1, 1].
inline double grad(int hash, double x, double y) {
  switch (hash & 7) {
    case 0: return x + y;
    case 1: return -x + y;
    case 2: return x - y;
    case 3: return -x - y;
    case 4: return x;
    case 5: return -x;
    case 6: return y;
    default: return -y;
  }
}

}  // namespace

void PerlinConfig::validate() const {
  if (!(max_norm >= 0.0 && max_norm <= 255.0)) {
    throw ParameterError("perlin max_norm must be in [0, 255], got " +
                         std::to_string(max_norm));
  }
  if (!(period > 0.0) || !std::isfinite(period)) {
    throw ParameterError("perlin period must be > 0, got " +
                         std::to_string(period));
  }
  if (!(freq_sine >= 0.0) || !std::isfinite(freq_sine)) {
    throw ParameterError("perlin freq_sine must be >= 0, got " +
                         std::to_string(freq_sine));
  }
  if (octaves < 1) {
    throw ParameterError("perlin octaves must be >= 1, got " +
                         std::to_string(octaves));
  }
}

PermutationTable::PermutationTable(std::uint64_t seed) {
  std::vector<std::uint8_t> p(256);
  std::iota(p.begin(), p.end(), std::uint8_t{0});
  SplitMix64 rng(seed);
  rng.shuffle(p);
  std::copy(p.begin(), p.end(), perm_.begin());
  std::copy(p.begin(), p.end(), perm_.begin() + 256);
}

double perlin2(double x, double y, double period, const PermutationTable& perm) {
  const double u = x / period;
  const double v = y / period;
  const double fu = std::floor(u);
  const double fv = std::floor(v);
  const int X = static_cast<int>(static_cast<long long>(fu) & 255);
  const int Y = static_cast<int>(static_cast<long long>(fv) & 255);
  const double xf = u - fu;
  const double yf = v - fv;
  const double su = fade(xf);
  const double sv = fade(yf);

  const int a = perm[X] + Y;
  const int b = perm[X + 1] + Y;
  const double n00 = grad(perm[a], xf, yf);
  const double n10 = grad(perm[b], xf - 1.0, yf);
  const double n01 = grad(perm[a + 1], xf, yf - 1.0);
  const double n11 = grad(perm[b + 1], xf - 1.0, yf - 1.0);
  const double value = lerp(sv, lerp(su, n00, n10), lerp(su, n01, n11));
  return std::clamp(value, -1.0, 1.0);
}

double perlin2(double x, double y, double period, std::uint64_t seed) {
  return perlin2(x, y, period, PermutationTable(seed));
}

FractalPerlin::FractalPerlin(const PerlinConfig& config) : period_(config.period) {
  config.validate();
  tables_.reserve(static_cast<std::size_t>(config.octaves));
  for (int o = 0; o < config.octaves; ++o) {
    tables_.emplace_back(config.seed ^ static_cast<std::uint64_t>(o));
  }
}

double FractalPerlin::operator()(double x, double y) const {
  double sum = 0.0;
  double norm = 0.0;
  double amplitude = 1.0;
  double scale = 1.0;
  for (const PermutationTable& table : tables_) {
    sum += amplitude * perlin2(x * scale, y * scale, period_, table);
    norm += amplitude;
    amplitude *= kPersistence;
    scale *= kLacunarity;
  }
  return sum / norm;
}

double fractal_perlin2(double x, double y, const PerlinConfig& config) {
  return FractalPerlin(config)(x, y);
}

double sine_colormap(double v, double freq_sine) {
  return std::sin(2.0 * std::numbers::pi * freq_sine * v);
}

NoiseField generate_noise_field(std::size_t width, std::size_t height,
                                const PerlinConfig& config) {
  if (width == 0 || height == 0) {
    throw ParameterError("noise field dimensions must be >= 1, got " +
                         std::to_string(width) + "x" + std::to_string(height));
  }
  const FractalPerlin noise(config);
  NoiseField field{width, height, std::vector<double>(width * height)};
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const double v = noise(static_cast<double>(x), static_cast<double>(y));
      field.values[y * width + x] = sine_colormap(v, config.freq_sine);
    }
  }
  return field;
}

ImageTensor noise_field_to_image(const NoiseField& field) {
  ImageTensor img(field.width, field.height);
  for (std::size_t p = 0; p < field.values.size(); ++p) {
    const float g = static_cast<float>((field.values[p] + 1.0) * 0.5);
    for (std::size_t c = 0; c < ImageTensor::kChannels; ++c) {
      img.data[p * ImageTensor::kChannels + c] = g;
    }
  }
  return img;
}

}  // namespace advdenoise
