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

#include <random>

#include <benchmark/benchmark.h>

#include "advdenoise/autoencoder.hpp"
#include "advdenoise/detection_eval.hpp"
#include "advdenoise/layers.hpp"
#include "advdenoise/perlin.hpp"
#include "advdenoise/toy_detector.hpp"

namespace {

using namespace advdenoise;

Tensor4<float> random_tensor(Shape4 s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  Tensor4<float> t(s);
  for (auto& v : t.values()) v = u(rng);
  return t;
}

void BM_Conv2dForward(benchmark::State& state) {
  const auto size = static_cast<std::size_t>(state.range(0));
  const auto in = random_tensor(Shape4{1, 32, size, size}, 1);
  ConvParams<float> p = ConvParams<float>::zeros(32, 32);
  p.weight = random_tensor(p.weight.shape(), 2);
  for (auto _ : state) benchmark::DoNotOptimize(conv2d_same(in, p));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(size * size));
}
BENCHMARK(BM_Conv2dForward)->Arg(32)->Arg(64)->Arg(128);

void BM_Conv2dBackward(benchmark::State& state) {
  const auto size = static_cast<std::size_t>(state.range(0));
  const auto in = random_tensor(Shape4{1, 32, size, size}, 3);
  const auto up = random_tensor(Shape4{1, 32, size, size}, 4);
  ConvParams<float> p = ConvParams<float>::zeros(32, 32);
  p.weight = random_tensor(p.weight.shape(), 5);
  for (auto _ : state) benchmark::DoNotOptimize(conv2d_grad(in, p, up));
}
BENCHMARK(BM_Conv2dBackward)->Arg(32)->Arg(64);

void BM_AutoencoderStep(benchmark::State& state) {
  const auto net = build_model(1).net;
  const auto x = random_tensor(Shape4{1, 3, 64, 64}, 6);
  AutoencoderNet<float> grads;
  for (auto _ : state) {
    benchmark::DoNotOptimize(loss_and_gradients(net, x, x, LossScale::kElementMean, &grads));
  }
}
BENCHMARK(BM_AutoencoderStep);

void BM_NoiseField(benchmark::State& state) {
  const auto size = static_cast<std::size_t>(state.range(0));
  PerlinConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(generate_noise_field(size, size, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(size * size));
}
BENCHMARK(BM_NoiseField)->Arg(64)->Arg(400);

void BM_CocoMap(benchmark::State& state) {
  std::vector<GroundTruthBox> gts;
  std::vector<DetectionBox> dets;
  for (std::int64_t id = 1; id <= 200; ++id) {
    const SyntheticScene s = generate_scene(64, 64, 3, static_cast<std::uint64_t>(id), id);
    gts.insert(gts.end(), s.gts.begin(), s.gts.end());
    const auto d = detect_blobs(s.image, id);
    dets.insert(dets.end(), d.begin(), d.end());
  }
  for (auto _ : state) benchmark::DoNotOptimize(coco_map(dets, gts));
}
BENCHMARK(BM_CocoMap);

}  // namespace
BENCHMARK_MAIN();
