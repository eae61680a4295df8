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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace advdenoise {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First/second moment estimates for one parameter tensor.
template <typename T>
struct AdamState {
  std::string name;
  std::vector<T> m;
  std::vector<T> v;
  std::uint64_t t = 0;

  AdamState() = default;
  AdamState(std::string tensor_name, std::size_t size)
      : name(std::move(tensor_name)), m(size, T(0)), v(size, T(0)) {}

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

// One bias-corrected Adam update of `param` in place. Throws NumericError
// naming the tensor if `grad` holds a non-finite value; in that case neither
// `param` nor `state` is modified.
template <typename T>
void adam_step(std::span<T> param, std::span<const T> grad,
               AdamState<T>& state, double learning_rate,
               const AdamConfig& config = {});

}  // namespace advdenoise
