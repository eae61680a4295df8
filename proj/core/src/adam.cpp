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

#include "advdenoise/adam.hpp"

#include <cmath>

#include "advdenoise/errors.hpp"

namespace advdenoise {

template <typename T>
void adam_step(std::span<T> param, std::span<const T> grad,
               AdamState<T>& state, double learning_rate,
               const AdamConfig& config) {
  if (param.size() != grad.size() || state.m.size() != param.size() ||
      state.v.size() != param.size()) {
    throw ShapeError("adam_step: parameter '" + state.name + "' has " +
                     std::to_string(param.size()) + " elements, gradient " +
                     std::to_string(grad.size()) + ", moments " +
                     std::to_string(state.m.size()));
  }
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad[i])) {
      throw NumericError("adam_step: non-finite gradient in parameter '" +
                         state.name + "' at element " + std::to_string(i));
    }
  }

  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  const T b1 = static_cast<T>(config.beta1);
  const T b2 = static_cast<T>(config.beta2);
  const T one_m_b1 = static_cast<T>(1.0 - config.beta1);
  const T one_m_b2 = static_cast<T>(1.0 - config.beta2);
  const T inv_c1 = static_cast<T>(1.0 / c1);
  const T inv_c2 = static_cast<T>(1.0 / c2);
  const T lr = static_cast<T>(learning_rate);
  const T eps = static_cast<T>(config.epsilon);

  for (std::size_t i = 0; i < param.size(); ++i) {
    const T g = grad[i];
    state.m[i] = b1 * state.m[i] + one_m_b1 * g;
    state.v[i] = b2 * state.v[i] + one_m_b2 * g * g;
    const T m_hat = state.m[i] * inv_c1;
    const T v_hat = state.v[i] * inv_c2;
    param[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

template void adam_step<float>(std::span<float>, std::span<const float>,
                               AdamState<float>&, double, const AdamConfig&);
template void adam_step<double>(std::span<double>, std::span<const double>,
                                AdamState<double>&, double, const AdamConfig&);

}  // namespace advdenoise
