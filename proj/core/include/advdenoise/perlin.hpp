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
#include <vector>

#include "advdenoise/image.hpp"

namespace advdenoise {

// Fractal octave parameters. Not exposed in PerlinConfig: two-per-octave
// frequency growth with halving amplitude.
inline constexpr double kLacunarity = 2.0;
inline constexpr double kPersistence = 0.5;

// Four-parameter adversarial noise specification plus the generator seed.
//   max_norm   L-infinity bound on the 0..255 intensity scale.
//   period     lattice cell size in pixels.
//   freq_sine  cycles of the sine color map per unit noise value.
//   octaves    number of fractal octaves (>= 1).
struct PerlinConfig {
  double max_norm = 30.0;
  double period = 30.0;
  double freq_sine = 30.0;
  int octaves = 2;
  std::uint64_t seed = 0;

  // Throws ParameterError when a field is out of range.
  void validate() const;

  friend bool operator==(const PerlinConfig&, const PerlinConfig&) = default;
};

// Seeded 256-entry permutation, doubled to 512 for index wraparound.
class PermutationTable {
 public:
  explicit PermutationTable(std::uint64_t seed);

  int operator[](std::size_t i) const { return perm_[i]; }
  const std::array<std::uint8_t, 512>& values() const { return perm_; }

 private:
  std::array<std::uint8_t, 512> perm_{};
};

// 2-D gradient noise with quintic fade over square cells of `period` pixels.
// Returns a value in [-1, 1] that is exactly 0 on lattice points.
double perlin2(double x, double y, double period, const PermutationTable& perm);
double perlin2(double x, double y, double period, std::uint64_t seed);

// Octave sum normalized by the total amplitude; octave o samples at
// lacunarity^o times the base frequency with seed (seed ^ o).
class FractalPerlin {
 public:
  explicit FractalPerlin(const PerlinConfig& config);
  double operator()(double x, double y) const;

 private:
  double period_;
  std::vector<PermutationTable> tables_;
};

double fractal_perlin2(double x, double y, const PerlinConfig& config);

// sin(2*pi*freq_sine*v).
double sine_colormap(double v, double freq_sine);

struct NoiseField {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;  // row-major

  double at(std::size_t x, std::size_t y) const { return values[y * width + x]; }
  friend bool operator==(const NoiseField&, const NoiseField&) = default;
};

// value(x, y) = sine_colormap(fractal_perlin2(x, y), freq_sine) at integer
// pixel coordinates.
NoiseField generate_noise_field(std::size_t width, std::size_t height,
                                const PerlinConfig& config);

// Grayscale rendering for inspection: [-1, 1] maps linearly onto [0, 1].
ImageTensor noise_field_to_image(const NoiseField& field);

}  // namespace advdenoise
