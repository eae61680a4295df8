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

#include "advdenoise/layers.hpp"

#include <algorithm>
#include <cmath>

namespace advdenoise {
namespace {

constexpr std::size_t kKernel = 3;

// Valid destination range [lo, hi) for a tap offset `d` in {-1, 0, 1} over an
// axis of length `len`: positions p with 0 <= p + d < len.
inline std::size_t tap_lo(long d) { return d < 0 ? static_cast<std::size_t>(-d) : 0; }
inline std::size_t tap_hi(long d, std::size_t len) {
  return d > 0 ? len - static_cast<std::size_t>(d) : len;
}

void check_conv_params(const Shape4& ws, std::size_t bias_size) {
  if (ws.h != kKernel || ws.w != kKernel) {
    throw ShapeError("convolution kernel must be 3x3, got weight shape " +
                     ws.str());
  }
  if (bias_size != ws.n) {
    throw ShapeError("bias length " + std::to_string(bias_size) +
                     " does not match " + std::to_string(ws.n) +
                     " output channels");
  }
}

template <typename T>
void check_conv_input(const Tensor4<T>& input, const ConvParams<T>& params) {
  check_conv_params(params.weight.shape(), params.bias.size());
  if (input.shape().c != params.in_channels()) {
    throw ShapeError("conv2d input shape " + input.shape().str() +
                     " has " + std::to_string(input.shape().c) +
                     " channels but weight shape " +
                     params.weight.shape().str() + " expects " +
                     std::to_string(params.in_channels()));
  }
}

}  // namespace

template <typename T>
ConvParams<T> ConvParams<T>::zeros(std::size_t out_channels,
                                   std::size_t in_channels) {
  ConvParams p;
  p.weight = Tensor4<T>(Shape4{out_channels, in_channels, kKernel, kKernel});
  p.bias.assign(out_channels, T(0));
  return p;
}

template <typename T>
Tensor4<T> conv2d_same(const Tensor4<T>& input, const ConvParams<T>& params) {
  check_conv_input(input, params);
  const Shape4 in = input.shape();
  const std::size_t out_c = params.out_channels();
  const std::size_t H = in.h, W = in.w;
  Tensor4<T> out(Shape4{in.n, out_c, H, W});

  // Sums are carried in double and rounded once, so 32-bit outputs stay
  // within one rounding of the exact result however many channels feed in.
  std::vector<double> acc(H * W);
  for (std::size_t n = 0; n < in.n; ++n) {
    for (std::size_t co = 0; co < out_c; ++co) {
      std::fill(acc.begin(), acc.end(), static_cast<double>(params.bias[co]));
      for (std::size_t ci = 0; ci < in.c; ++ci) {
        const T* src = input.plane(n, ci);
        for (std::size_t ky = 0; ky < kKernel; ++ky) {
          const long dy = static_cast<long>(ky) - 1;
          for (std::size_t kx = 0; kx < kKernel; ++kx) {
            const long dx = static_cast<long>(kx) - 1;
            const double w = params.weight.at(co, ci, ky, kx);
            const std::size_t x0 = tap_lo(dx), x1 = tap_hi(dx, W);
            for (std::size_t y = tap_lo(dy); y < tap_hi(dy, H); ++y) {
              double* orow = acc.data() + y * W;
              const T* irow = src + (y + dy) * W;
              for (std::size_t x = x0; x < x1; ++x) {
                orow[x] += w * static_cast<double>(irow[x + dx]);
              }
            }
          }
        }
      }
      T* dst = out.plane(n, co);
      for (std::size_t i = 0; i < H * W; ++i) dst[i] = static_cast<T>(acc[i]);
    }
  }
  return out;
}

template <typename T>
ConvGrads<T> conv2d_grad(const Tensor4<T>& input, const ConvParams<T>& params,
                         const Tensor4<T>& upstream, bool want_input_grad) {
  check_conv_input(input, params);
  const Shape4 in = input.shape();
  const std::size_t out_c = params.out_channels();
  require_same_shape(upstream.shape(), Shape4{in.n, out_c, in.h, in.w},
                     "conv2d_grad upstream");
  const std::size_t H = in.h, W = in.w;

  ConvGrads<T> g;
  g.d_params = ConvParams<T>::zeros(out_c, in.c);
  if (want_input_grad) g.d_input = Tensor4<T>(in);

  // Bias: per-channel sum of upstream.
  for (std::size_t co = 0; co < out_c; ++co) {
    T acc = T(0);
    for (std::size_t n = 0; n < in.n; ++n) {
      const T* up = upstream.plane(n, co);
      for (std::size_t i = 0; i < H * W; ++i) acc += up[i];
    }
    g.d_params.bias[co] = acc;
  }

  // Weights: row-wise accumulator keeps the inner loop vectorizable while the
  // reduction order stays fixed.
  std::vector<T> row_acc(W);
  for (std::size_t co = 0; co < out_c; ++co) {
    for (std::size_t ci = 0; ci < in.c; ++ci) {
      for (std::size_t ky = 0; ky < kKernel; ++ky) {
        const long dy = static_cast<long>(ky) - 1;
        for (std::size_t kx = 0; kx < kKernel; ++kx) {
          const long dx = static_cast<long>(kx) - 1;
          const std::size_t x0 = tap_lo(dx), x1 = tap_hi(dx, W);
          std::fill(row_acc.begin(), row_acc.end(), T(0));
          for (std::size_t n = 0; n < in.n; ++n) {
            const T* up = upstream.plane(n, co);
            const T* src = input.plane(n, ci);
            for (std::size_t y = tap_lo(dy); y < tap_hi(dy, H); ++y) {
              const T* urow = up + y * W;
              const T* irow = src + (y + dy) * W;
              for (std::size_t x = x0; x < x1; ++x) row_acc[x] += urow[x] * irow[x + dx];
            }
          }
          T acc = T(0);
          for (std::size_t x = 0; x < W; ++x) acc += row_acc[x];
          g.d_params.weight.at(co, ci, ky, kx) = acc;
        }
      }
    }
  }

  if (want_input_grad) {
    for (std::size_t n = 0; n < in.n; ++n) {
      for (std::size_t ci = 0; ci < in.c; ++ci) {
        T* dst = g.d_input.plane(n, ci);
        for (std::size_t co = 0; co < out_c; ++co) {
          const T* up = upstream.plane(n, co);
          for (std::size_t ky = 0; ky < kKernel; ++ky) {
            const long dy = static_cast<long>(ky) - 1;
            for (std::size_t kx = 0; kx < kKernel; ++kx) {
              const long dx = static_cast<long>(kx) - 1;
              const T w = params.weight.at(co, ci, ky, kx);
              const std::size_t x0 = tap_lo(dx), x1 = tap_hi(dx, W);
              for (std::size_t y = tap_lo(dy); y < tap_hi(dy, H); ++y) {
                const T* urow = up + y * W;
                T* drow = dst + (y + dy) * W;
                for (std::size_t x = x0; x < x1; ++x) drow[x + dx] += w * urow[x];
              }
            }
          }
        }
      }
    }
  }
  return g;
}

template <typename T>
Tensor4<T> relu(const Tensor4<T>& input) {
  Tensor4<T> out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) {
    out[i] = input[i] > T(0) ? input[i] : T(0);
  }
  return out;
}

template <typename T>
Tensor4<T> relu_grad(const Tensor4<T>& pre_activation,
                     const Tensor4<T>& upstream) {
  require_same_shape(upstream.shape(), pre_activation.shape(), "relu_grad");
  Tensor4<T> out(upstream.shape());
  for (std::size_t i = 0; i < upstream.size(); ++i) {
    out[i] = pre_activation[i] > T(0) ? upstream[i] : T(0);
  }
  return out;
}

template <typename T>
MaxPoolResult<T> maxpool2(const Tensor4<T>& input) {
  const Shape4 in = input.shape();
  if (in.h % 2 != 0 || in.w % 2 != 0) {
    throw ShapeError("maxpool2 requires even height and width, got " +
                     in.str() + "; pad the input first");
  }
  const std::size_t oh = in.h / 2, ow = in.w / 2;
  MaxPoolResult<T> r;
  r.output = Tensor4<T>(Shape4{in.n, in.c, oh, ow});
  r.argmax.resize(r.output.size());
  std::size_t o = 0;
  for (std::size_t n = 0; n < in.n; ++n) {
    for (std::size_t c = 0; c < in.c; ++c) {
      for (std::size_t y = 0; y < oh; ++y) {
        for (std::size_t x = 0; x < ow; ++x, ++o) {
          std::size_t best = input.index(n, c, 2 * y, 2 * x);
          const std::size_t cands[3] = {best + 1, best + in.w, best + in.w + 1};
          for (std::size_t k : cands) {
            if (input[k] > input[best]) best = k;
          }
          r.output[o] = input[best];
          r.argmax[o] = best;
        }
      }
    }
  }
  return r;
}

template <typename T>
Tensor4<T> maxpool2_grad(const Shape4& input_shape,
                         const std::vector<std::size_t>& argmax,
                         const Tensor4<T>& upstream) {
  require_same_shape(
      upstream.shape(),
      Shape4{input_shape.n, input_shape.c, input_shape.h / 2, input_shape.w / 2},
      "maxpool2_grad upstream");
  if (argmax.size() != upstream.size()) {
    throw ShapeError("maxpool2_grad: argmax length does not match upstream");
  }
  Tensor4<T> d(input_shape);
  for (std::size_t i = 0; i < upstream.size(); ++i) d[argmax[i]] += upstream[i];
  return d;
}

template <typename T>
Tensor4<T> upsample2_nearest(const Tensor4<T>& input) {
  const Shape4 in = input.shape();
  const std::size_t W2 = in.w * 2;
  Tensor4<T> out(Shape4{in.n, in.c, in.h * 2, W2});
  for (std::size_t n = 0; n < in.n; ++n) {
    for (std::size_t c = 0; c < in.c; ++c) {
      const T* src = input.plane(n, c);
      T* dst = out.plane(n, c);
      for (std::size_t y = 0; y < in.h; ++y) {
        T* r0 = dst + (2 * y) * W2;
        T* r1 = r0 + W2;
        for (std::size_t x = 0; x < in.w; ++x) {
          const T v = src[y * in.w + x];
          r0[2 * x] = r0[2 * x + 1] = r1[2 * x] = r1[2 * x + 1] = v;
        }
      }
    }
  }
  return out;
}

template <typename T>
Tensor4<T> upsample2_grad(const Tensor4<T>& upstream) {
  const Shape4 up = upstream.shape();
  if (up.h % 2 != 0 || up.w % 2 != 0) {
    throw ShapeError("upsample2_grad upstream must have even dims, got " +
                     up.str());
  }
  const std::size_t h = up.h / 2, w = up.w / 2;
  Tensor4<T> d(Shape4{up.n, up.c, h, w});
  for (std::size_t n = 0; n < up.n; ++n) {
    for (std::size_t c = 0; c < up.c; ++c) {
      const T* src = upstream.plane(n, c);
      T* dst = d.plane(n, c);
      for (std::size_t y = 0; y < h; ++y) {
        const T* r0 = src + (2 * y) * up.w;
        const T* r1 = r0 + up.w;
        for (std::size_t x = 0; x < w; ++x) {
          dst[y * w + x] = (r0[2 * x] + r0[2 * x + 1]) + (r1[2 * x] + r1[2 * x + 1]);
        }
      }
    }
  }
  return d;
}

template <typename T>
Tensor4<T> sigmoid(const Tensor4<T>& input) {
  Tensor4<T> out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) {
    const T x = input[i];
    if (x >= T(0)) {
      out[i] = T(1) / (T(1) + std::exp(-x));
    } else {
      const T e = std::exp(x);
      out[i] = e / (T(1) + e);
    }
  }
  return out;
}

template <typename T>
Tensor4<T> sigmoid_grad(const Tensor4<T>& output, const Tensor4<T>& upstream) {
  require_same_shape(upstream.shape(), output.shape(), "sigmoid_grad");
  Tensor4<T> d(upstream.shape());
  for (std::size_t i = 0; i < upstream.size(); ++i) {
    const T y = output[i];
    d[i] = upstream[i] * y * (T(1) - y);
  }
  return d;
}

template <typename T>
LossResult<T> mse_loss(const Tensor4<T>& pred, const Tensor4<T>& target,
                       LossScale scale) {
  require_same_shape(pred.shape(), target.shape(), "mse_loss");
  const double denom = scale == LossScale::kElementMean
                           ? static_cast<double>(pred.size())
                           : static_cast<double>(pred.shape().n);
  LossResult<T> r;
  r.d_pred = Tensor4<T>(pred.shape());
  double sum = 0.0;
  const T k = static_cast<T>(2.0 / denom);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const T diff = pred[i] - target[i];
    sum += static_cast<double>(diff) * static_cast<double>(diff);
    r.d_pred[i] = k * diff;
  }
  r.loss = sum / denom;
  return r;
}

#define ADVDENOISE_INSTANTIATE_LAYERS(T)                                       \
  template struct ConvParams<T>;                                               \
  template Tensor4<T> conv2d_same(const Tensor4<T>&, const ConvParams<T>&);    \
  template ConvGrads<T> conv2d_grad(const Tensor4<T>&, const ConvParams<T>&,   \
                                    const Tensor4<T>&, bool);                  \
  template Tensor4<T> relu(const Tensor4<T>&);                                 \
  template Tensor4<T> relu_grad(const Tensor4<T>&, const Tensor4<T>&);         \
  template MaxPoolResult<T> maxpool2(const Tensor4<T>&);                       \
  template Tensor4<T> maxpool2_grad(const Shape4&,                             \
                                    const std::vector<std::size_t>&,           \
                                    const Tensor4<T>&);                        \
  template Tensor4<T> upsample2_nearest(const Tensor4<T>&);                    \
  template Tensor4<T> upsample2_grad(const Tensor4<T>&);                       \
  template Tensor4<T> sigmoid(const Tensor4<T>&);                              \
  template Tensor4<T> sigmoid_grad(const Tensor4<T>&, const Tensor4<T>&);      \
  template LossResult<T> mse_loss(const Tensor4<T>&, const Tensor4<T>&,        \
                                  LossScale);

ADVDENOISE_INSTANTIATE_LAYERS(float)
ADVDENOISE_INSTANTIATE_LAYERS(double)

#undef ADVDENOISE_INSTANTIATE_LAYERS

}  // namespace advdenoise
