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

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "advdenoise/errors.hpp"
#include "advdenoise/perlin.hpp"
#include "oracles.hpp"

namespace advdenoise {
namespace {

TEST(PermutationTable, IsDoubledPermutation) {
  const PermutationTable t(123);
  std::vector<int> seen(256, 0);
  for (std::size_t i = 0; i < 256; ++i) {
    ++seen[t[i]];
    EXPECT_EQ(t[i], t[i + 256]);
  }
  for (int c : seen) EXPECT_EQ(c, 1);
  EXPECT_NE(PermutationTable(1).values(), PermutationTable(2).values());
}

TEST(Perlin2, VanishesOnLattice) {
  for (int k = -3; k <= 3; ++k)
    for (int m = -3; m <= 3; ++m) {
      EXPECT_EQ(perlin2(k * 30.0, m * 30.0, 30.0, std::uint64_t{9}), 0.0);
    }
  EXPECT_EQ(perlin2(0.0, 0.0, 7.5, std::uint64_t{0}), 0.0);
}

TEST(Perlin2, Deterministic) {
  EXPECT_EQ(perlin2(12.3, 45.6, 30.0, std::uint64_t{5}),
            perlin2(12.3, 45.6, 30.0, std::uint64_t{5}));
}

TEST(Perlin2, MatchesReferenceImplementation) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> coord(-500.0, 500.0);
  const PermutationTable table(77);
  for (int i = 0; i < 50; ++i) {
    const double x = coord(rng), y = coord(rng);
    EXPECT_NEAR(perlin2(x, y, 30.0, table), oracle::reference_perlin(x, y, 30.0, table), 1e-12)
        << x << "," << y;
  }
}

TEST(Perlin2, StaysInUnitRange) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> coord(0.0, 1000.0);
  const PermutationTable table(3);
  for (int i = 0; i < 20000; ++i) {
    const double v = perlin2(coord(rng), coord(rng), 17.0, table);
    ASSERT_GE(v, -1.0);
    ASSERT_LE(v, 1.0);
  }
}

TEST(FractalPerlin, SingleOctaveIsPerlin2) {
  PerlinConfig cfg;
  cfg.octaves = 1;
  cfg.seed = 11;
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> coord(0.0, 400.0);
  for (int i = 0; i < 100; ++i) {
    const double x = coord(rng), y = coord(rng);
    EXPECT_EQ(fractal_perlin2(x, y, cfg), perlin2(x, y, cfg.period, cfg.seed));
  }
}

TEST(FractalPerlin, OriginVanishes) {
  PerlinConfig cfg;
  cfg.octaves = 4;
  EXPECT_EQ(fractal_perlin2(0.0, 0.0, cfg), 0.0);
}

TEST(FractalPerlin, TwoOctavesExpandByHand) {
  // Amplitudes 1 and 1/2 normalized by 3/2; octave o reads its own table
  // (seed ^ o) at coordinates scaled by 2^o.
  PerlinConfig cfg;
  cfg.seed = 1234;
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> coord(0.0, 400.0);
  for (int i = 0; i < 100; ++i) {
    const double x = coord(rng), y = coord(rng);
    const double p0 = perlin2(x, y, cfg.period, cfg.seed);
    const double p1 = perlin2(2 * x, 2 * y, cfg.period, cfg.seed ^ 1u);
    EXPECT_NEAR(fractal_perlin2(x, y, cfg), 2.0 / 3.0 * p0 + 1.0 / 3.0 * p1, 1e-15);
  }
}

TEST(SineColormap, KnownValues) {
  EXPECT_EQ(sine_colormap(0.0, 30.0), 0.0);
  EXPECT_NEAR(sine_colormap(1.0 / 120.0, 30.0), 1.0, 1e-15);
  EXPECT_NEAR(sine_colormap(0.01, 30.0), 0.951057, 1e-6);
  EXPECT_NEAR(sine_colormap(0.01, 30.0), std::sin(0.6 * std::numbers::pi), 1e-15);
}

TEST(NoiseField, OriginPixelIsZero) {
  const NoiseField f = generate_noise_field(1, 1, PerlinConfig{});
  ASSERT_EQ(f.values.size(), 1u);
  EXPECT_EQ(f.values[0], 0.0);
}

TEST(NoiseField, Deterministic) {
  PerlinConfig cfg;
  cfg.seed = 99;
  EXPECT_EQ(generate_noise_field(40, 30, cfg), generate_noise_field(40, 30, cfg));
  PerlinConfig other = cfg;
  other.seed = 100;
  EXPECT_NE(generate_noise_field(40, 30, cfg), generate_noise_field(40, 30, other));
}

TEST(NoiseField, ZeroDimensionsRejected) {
  EXPECT_THROW(generate_noise_field(0, 5, PerlinConfig{}), ParameterError);
  EXPECT_THROW(generate_noise_field(5, 0, PerlinConfig{}), ParameterError);
}

TEST(NoiseField, InvalidConfigRejected) {
  PerlinConfig cfg;
  cfg.octaves = 0;
  EXPECT_THROW(generate_noise_field(4, 4, cfg), ParameterError);
  cfg = PerlinConfig{};
  cfg.period = 0.0;
  EXPECT_THROW(generate_noise_field(4, 4, cfg), ParameterError);
  cfg = PerlinConfig{};
  cfg.max_norm = -1.0;
  EXPECT_THROW(cfg.validate(), ParameterError);
}

TEST(NoiseField, HistogramRoughlySymmetric) {
  PerlinConfig cfg;
  cfg.seed = 2024;
  const NoiseField f = generate_noise_field(64, 64, cfg);
  double pos = 0, neg = 0;
  for (double v : f.values) {
    ASSERT_GE(v, -1.0);
    ASSERT_LE(v, 1.0);
    if (v > 0) pos += 1;
    if (v < 0) neg += 1;
  }
  const double total = static_cast<double>(f.values.size());
  EXPECT_LE(std::abs(pos - neg) / total, 0.02) << pos << " vs " << neg;
}

TEST(NoiseField, GrayscaleDumpMapsRange) {
  NoiseField f{3, 1, {-1.0, 0.0, 1.0}};
  const ImageTensor img = noise_field_to_image(f);
  EXPECT_FLOAT_EQ(img.at(0, 0, 0), 0.0f);
  EXPECT_FLOAT_EQ(img.at(1, 0, 1), 0.5f);
  EXPECT_FLOAT_EQ(img.at(2, 0, 2), 1.0f);
}

}  // namespace
}  // namespace advdenoise
