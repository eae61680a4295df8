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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "advdenoise/adam.hpp"
#include "advdenoise/image.hpp"
#include "advdenoise/layers.hpp"
#include "advdenoise/perlin.hpp"

namespace advdenoise {

inline constexpr std::size_t kImageChannels = 3;
inline constexpr std::size_t kHiddenChannels = 32;

// conv3x3(3->32) + ReLU -> maxpool2 -> conv3x3(32->32) + ReLU -> upsample2
// -> conv3x3(32->3) + sigmoid.
template <typename T>
struct AutoencoderNet {
  ConvParams<T> enc_conv;
  ConvParams<T> dec_conv;
  ConvParams<T> out_conv;

  static AutoencoderNet zeros();

  std::size_t parameter_count() const {
    return enc_conv.parameter_count() + dec_conv.parameter_count() +
           out_conv.parameter_count();
  }

  // Parameter tensors in checkpoint order, paired with their names.
  std::array<std::span<T>, 6> tensors();
  std::array<std::span<const T>, 6> tensors() const;

  template <typename U>
  AutoencoderNet<U> cast() const {
    auto conv = [](const ConvParams<T>& p) {
      return ConvParams<U>{p.weight.template cast<U>(),
                           std::vector<U>(p.bias.begin(), p.bias.end())};
    };
    return AutoencoderNet<U>{conv(enc_conv), conv(dec_conv), conv(out_conv)};
  }

  friend bool operator==(const AutoencoderNet&, const AutoencoderNet&) = default;
};

inline constexpr std::array<const char*, 6> kTensorNames = {
    "enc_conv.weight", "enc_conv.bias", "dec_conv.weight",
    "dec_conv.bias",   "out_conv.weight", "out_conv.bias"};

// Reconstruction of an even-sized (N, 3, H, W) batch. Throws ShapeError on odd
// spatial dims; use denoise_image for arbitrary images.
template <typename T>
Tensor4<T> forward(const AutoencoderNet<T>& net, const Tensor4<T>& batch);

// MSE(forward(input), target) and, when `grads` is non-null, its gradient with
// respect to every parameter.
template <typename T>
double loss_and_gradients(const AutoencoderNet<T>& net, const Tensor4<T>& input,
                          const Tensor4<T>& target, LossScale scale,
                          AutoencoderNet<T>* grads);

// Trainable network plus optimizer state and the count of completed epochs.
struct AutoencoderModel {
  AutoencoderNet<float> net;
  std::array<AdamState<float>, 6> adam;
  std::uint32_t epoch = 0;

  friend bool operator==(const AutoencoderModel&, const AutoencoderModel&) = default;
};

// Glorot-uniform weights drawn from `seed`, zero biases, fresh Adam state.
AutoencoderModel build_model(std::uint64_t seed);

enum class TrainingPairs {
  kCleanToClean,     // plain autoencoder on clean images (default)
  kAttackedToClean,  // denoising pairs built with TrainConfig::attack
};

struct TrainConfig {
  std::size_t input_width = 400;
  std::size_t input_height = 400;
  double learning_rate = 0.0004;
  std::size_t batch_size = 8;
  std::size_t epochs = 100;
  std::uint64_t seed = 0;
  LossScale loss_scale = LossScale::kElementMean;
  TrainingPairs pairs = TrainingPairs::kCleanToClean;
  PerlinConfig attack;
  AdamConfig adam;

  void validate() const;
};

struct EpochRecord {
  std::uint32_t epoch = 0;  // 1-based index of the completed epoch
  double train_loss = 0.0;
  double val_loss = 0.0;  // NaN without validation pairs
  double seconds = 0.0;
};

struct TrainHistory {
  double initial_train_loss = 0.0;  // before the first update
  std::vector<EpochRecord> epochs;
};

struct ImagePair {
  ImageTensor adversarial;
  ImageTensor clean;
};

// Invoked after every epoch; `improved` is true when the validation loss is
// the best seen so far in this call.
using EpochCallback = std::function<void(const EpochRecord& record,
                                         const AutoencoderModel& model,
                                         bool improved)>;

// Runs epochs model.epoch .. config.epochs - 1. Each epoch shuffles with a
// seed derived from (config.seed, epoch), so a resumed run follows the same
// trajectory as an uninterrupted one. The last partial batch is kept.
TrainHistory train(AutoencoderModel& model,
                   std::span<const ImageTensor> train_images,
                   std::span<const ImagePair> val_pairs,
                   const TrainConfig& config, const EpochCallback& on_epoch = {});

// Mean over images of the element-MSE between forward(input) and target.
double evaluate_loss(const AutoencoderNet<float>& net,
                     std::span<const ImageTensor> inputs,
                     std::span<const ImageTensor> targets);

// Pads to even dims by edge replication, reconstructs, crops back.
ImageTensor denoise_image(const AutoencoderNet<float>& net,
                          const ImageTensor& image);

// Binary checkpoint: "ADNZ", u16 version, u32 epoch, u64 Adam step, u32
// tensor count, then per tensor u32 name length, name, u32 rank, u32 dims,
// little-endian float32 data. Parameters are followed by Adam moments named
// "<param>.adam_m" / "<param>.adam_v".
void save_checkpoint(const AutoencoderModel& model, const std::string& path);
AutoencoderModel load_checkpoint(const std::string& path);

inline constexpr std::uint16_t kCheckpointVersion = 1;

}  // namespace advdenoise
