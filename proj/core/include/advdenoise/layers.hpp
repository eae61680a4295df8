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
#include <vector>

#include "advdenoise/tensor.hpp"

namespace advdenoise {

// Weights of a 3x3 convolution, laid out (C_out, C_in, 3, 3), plus bias.
template <typename T>
struct ConvParams {
  Tensor4<T> weight;
  std::vector<T> bias;

  static ConvParams zeros(std::size_t out_channels, std::size_t in_channels);

  std::size_t out_channels() const { return weight.shape().n; }
  std::size_t in_channels() const { return weight.shape().c; }
  std::size_t parameter_count() const { return weight.size() + bias.size(); }

  friend bool operator==(const ConvParams&, const ConvParams&) = default;
};

template <typename T>
struct ConvGrads {
  Tensor4<T> d_input;  // empty when not requested
  ConvParams<T> d_params;
};

// Zero-padded "same" 3x3 cross-correlation (no kernel flip).
template <typename T>
Tensor4<T> conv2d_same(const Tensor4<T>& input, const ConvParams<T>& params);

// Gradients of sum(upstream * conv2d_same(input, params)). The input gradient
// is skipped when `want_input_grad` is false (first layer of a network).
template <typename T>
ConvGrads<T> conv2d_grad(const Tensor4<T>& input, const ConvParams<T>& params,
                         const Tensor4<T>& upstream,
                         bool want_input_grad = true);

template <typename T>
Tensor4<T> relu(const Tensor4<T>& input);

// Routes `upstream` through the ReLU mask computed from the pre-activation.
template <typename T>
Tensor4<T> relu_grad(const Tensor4<T>& pre_activation,
                     const Tensor4<T>& upstream);

template <typename T>
struct MaxPoolResult {
  Tensor4<T> output;
  // Flat input index of the winner for every output element. Ties go to the
  // first element of the 2x2 block in row-major order.
  std::vector<std::size_t> argmax;
};

template <typename T>
MaxPoolResult<T> maxpool2(const Tensor4<T>& input);

template <typename T>
Tensor4<T> maxpool2_grad(const Shape4& input_shape,
                         const std::vector<std::size_t>& argmax,
                         const Tensor4<T>& upstream);

template <typename T>
Tensor4<T> upsample2_nearest(const Tensor4<T>& input);

// Each source pixel receives the sum of its four replicas' gradients.
template <typename T>
Tensor4<T> upsample2_grad(const Tensor4<T>& upstream);

// Numerically stable logistic function.
template <typename T>
Tensor4<T> sigmoid(const Tensor4<T>& input);

// Gradient expressed in terms of the sigmoid output y: upstream * y * (1 - y).
template <typename T>
Tensor4<T> sigmoid_grad(const Tensor4<T>& output, const Tensor4<T>& upstream);

// kElementMean divides the squared error by N*C*H*W (standard MSE).
// kBatchMean divides only by the batch size N; it rescales the gradient by
// C*H*W and leaves the minimizer unchanged.
enum class LossScale { kElementMean, kBatchMean };

template <typename T>
struct LossResult {
  double loss = 0.0;
  Tensor4<T> d_pred;
};

template <typename T>
LossResult<T> mse_loss(const Tensor4<T>& pred, const Tensor4<T>& target,
                       LossScale scale = LossScale::kElementMean);

}  // namespace advdenoise
