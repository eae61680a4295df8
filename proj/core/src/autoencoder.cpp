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

#include "advdenoise/autoencoder.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <numeric>

#include "advdenoise/attack.hpp"
#include "advdenoise/errors.hpp"
#include "advdenoise/random.hpp"

namespace advdenoise {
namespace {

template <typename T>
struct Activations {
  Tensor4<T> h1_pre;
  Tensor4<T> pooled;
  std::vector<std::size_t> argmax;
  Tensor4<T> h2_pre;
  Tensor4<T> upsampled;
  Tensor4<T> out;
};

template <typename T>
void check_even(const Shape4& s) {
  if (s.c != kImageChannels) {
    throw ShapeError("autoencoder expects 3-channel input, got " + s.str());
  }
  if (s.h % 2 != 0 || s.w % 2 != 0) {
    throw ShapeError("autoencoder forward needs even height and width, got " +
                     s.str() + "; use denoise_image, which pads odd sizes");
  }
}

template <typename T>
Activations<T> run_forward(const AutoencoderNet<T>& net, const Tensor4<T>& x) {
  check_even<T>(x.shape());
  Activations<T> a;
  a.h1_pre = conv2d_same(x, net.enc_conv);
  MaxPoolResult<T> pool = maxpool2(relu(a.h1_pre));
  a.pooled = std::move(pool.output);
  a.argmax = std::move(pool.argmax);
  a.h2_pre = conv2d_same(a.pooled, net.dec_conv);
  a.upsampled = upsample2_nearest(relu(a.h2_pre));
  a.out = sigmoid(conv2d_same(a.upsampled, net.out_conv));
  return a;
}

template <typename T>
void add_into(ConvParams<T>& acc, const ConvParams<T>& g) {
  for (std::size_t i = 0; i < acc.weight.size(); ++i) acc.weight[i] += g.weight[i];
  for (std::size_t i = 0; i < acc.bias.size(); ++i) acc.bias[i] += g.bias[i];
}

void glorot_uniform(ConvParams<float>& p, SplitMix64& rng) {
  const double fan_in = static_cast<double>(p.in_channels() * 9);
  const double fan_out = static_cast<double>(p.out_channels() * 9);
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (float& w : p.weight.values()) {
    w = static_cast<float>(rng.uniform(-limit, limit));
  }
  std::fill(p.bias.begin(), p.bias.end(), 0.0f);
}

}  // namespace

template <typename T>
AutoencoderNet<T> AutoencoderNet<T>::zeros() {
  return AutoencoderNet{ConvParams<T>::zeros(kHiddenChannels, kImageChannels),
                        ConvParams<T>::zeros(kHiddenChannels, kHiddenChannels),
                        ConvParams<T>::zeros(kImageChannels, kHiddenChannels)};
}

template <typename T>
std::array<std::span<T>, 6> AutoencoderNet<T>::tensors() {
  return {std::span<T>(enc_conv.weight.values()), std::span<T>(enc_conv.bias),
          std::span<T>(dec_conv.weight.values()), std::span<T>(dec_conv.bias),
          std::span<T>(out_conv.weight.values()), std::span<T>(out_conv.bias)};
}

template <typename T>
std::array<std::span<const T>, 6> AutoencoderNet<T>::tensors() const {
  return {std::span<const T>(enc_conv.weight.values()),
          std::span<const T>(enc_conv.bias),
          std::span<const T>(dec_conv.weight.values()),
          std::span<const T>(dec_conv.bias),
          std::span<const T>(out_conv.weight.values()),
          std::span<const T>(out_conv.bias)};
}

template <typename T>
Tensor4<T> forward(const AutoencoderNet<T>& net, const Tensor4<T>& batch) {
  return run_forward(net, batch).out;
}

template <typename T>
double loss_and_gradients(const AutoencoderNet<T>& net, const Tensor4<T>& input,
                          const Tensor4<T>& target, LossScale scale,
                          AutoencoderNet<T>* grads) {
  Activations<T> a = run_forward(net, input);
  LossResult<T> loss = mse_loss(a.out, target, scale);
  if (grads == nullptr) return loss.loss;

  Tensor4<T> d = sigmoid_grad(a.out, loss.d_pred);
  ConvGrads<T> g3 = conv2d_grad(a.upsampled, net.out_conv, d);
  d = relu_grad(a.h2_pre, upsample2_grad(g3.d_input));
  ConvGrads<T> g2 = conv2d_grad(a.pooled, net.dec_conv, d);
  d = relu_grad(a.h1_pre, maxpool2_grad(a.h1_pre.shape(), a.argmax, g2.d_input));
  ConvGrads<T> g1 = conv2d_grad(input, net.enc_conv, d, /*want_input_grad=*/false);

  grads->enc_conv = std::move(g1.d_params);
  grads->dec_conv = std::move(g2.d_params);
  grads->out_conv = std::move(g3.d_params);
  return loss.loss;
}

AutoencoderModel build_model(std::uint64_t seed) {
  AutoencoderModel model;
  model.net = AutoencoderNet<float>::zeros();
  SplitMix64 rng(derive_seed(seed, 0x61657a));
  glorot_uniform(model.net.enc_conv, rng);
  glorot_uniform(model.net.dec_conv, rng);
  glorot_uniform(model.net.out_conv, rng);
  auto tensors = model.net.tensors();
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    model.adam[i] = AdamState<float>(kTensorNames[i], tensors[i].size());
  }
  return model;
}

void TrainConfig::validate() const {
  if (input_width == 0 || input_height == 0 || batch_size == 0 || epochs == 0) {
    throw ConfigError("train config: input size, batch size and epochs must be positive");
  }
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("train config: learning rate must be finite and >= 0");
  }
  if (pairs == TrainingPairs::kAttackedToClean) attack.validate();
}

double evaluate_loss(const AutoencoderNet<float>& net,
                     std::span<const ImageTensor> inputs,
                     std::span<const ImageTensor> targets) {
  if (inputs.size() != targets.size()) {
    throw ShapeError("evaluate_loss: " + std::to_string(inputs.size()) +
                     " inputs vs " + std::to_string(targets.size()) + " targets");
  }
  if (inputs.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    sum += loss_and_gradients<float>(net, image_to_batch(inputs[i]),
                                     image_to_batch(targets[i]),
                                     LossScale::kElementMean, nullptr);
  }
  return sum / static_cast<double>(inputs.size());
}

TrainHistory train(AutoencoderModel& model,
                   std::span<const ImageTensor> train_images,
                   std::span<const ImagePair> val_pairs,
                   const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (train_images.empty()) throw ConfigError("training set is empty");
  auto check_size = [&](const ImageTensor& img, const std::string& what) {
    if (img.width != config.input_width || img.height != config.input_height) {
      throw ConfigError(what + " is " + std::to_string(img.width) + "x" +
                        std::to_string(img.height) + ", expected " +
                        std::to_string(config.input_width) + "x" +
                        std::to_string(config.input_height) +
                        "; resize before training");
    }
  };
  for (std::size_t i = 0; i < train_images.size(); ++i) {
    check_size(train_images[i], "training image " + std::to_string(i));
  }
  for (std::size_t i = 0; i < val_pairs.size(); ++i) {
    check_size(val_pairs[i].adversarial, "validation input " + std::to_string(i));
    check_size(val_pairs[i].clean, "validation target " + std::to_string(i));
  }

  std::vector<ImageTensor> attacked;
  std::span<const ImageTensor> inputs = train_images;
  if (config.pairs == TrainingPairs::kAttackedToClean) {
    std::vector<std::uint64_t> ids(train_images.size());
    std::iota(ids.begin(), ids.end(), std::uint64_t{0});
    for (AttackResult& r : attack_batch(train_images, ids, config.attack)) {
      if (!r.image) throw ConfigError("building denoising pairs: " + r.error);
      attacked.push_back(std::move(*r.image));
    }
    inputs = attacked;
  }
  std::vector<ImageTensor> val_inputs, val_targets;
  for (const ImagePair& p : val_pairs) {
    val_inputs.push_back(p.adversarial);
    val_targets.push_back(p.clean);
  }

  TrainHistory history;
  history.initial_train_loss = evaluate_loss(model.net, inputs, train_images);

  const std::size_t count = train_images.size();
  double best_val = std::numeric_limits<double>::infinity();
  AutoencoderNet<float> batch_grads = AutoencoderNet<float>::zeros();
  AutoencoderNet<float> sample_grads;

  for (std::size_t epoch = model.epoch; epoch < config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    SplitMix64 rng(derive_seed(config.seed, epoch));
    rng.shuffle(order);

    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < count; begin += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(begin + config.batch_size, count);
      const float inv_batch = 1.0f / static_cast<float>(end - begin);

      // The batch loss is the mean of per-sample losses under either loss
      // scale, so gradients accumulate one sample at a time.
      for (auto t : batch_grads.tensors()) std::fill(t.begin(), t.end(), 0.0f);
      double batch_loss = 0.0;
      for (std::size_t k = begin; k < end; ++k) {
        const std::size_t idx = order[k];
        batch_loss += loss_and_gradients<float>(
            model.net, image_to_batch(inputs[idx]),
            image_to_batch(train_images[idx]), config.loss_scale, &sample_grads);
        add_into(batch_grads.enc_conv, sample_grads.enc_conv);
        add_into(batch_grads.dec_conv, sample_grads.dec_conv);
        add_into(batch_grads.out_conv, sample_grads.out_conv);
      }
      if (!std::isfinite(batch_loss)) {
        throw NumericError("non-finite training loss at epoch " +
                           std::to_string(epoch + 1) + ", batch " +
                           std::to_string(batch_index + 1));
      }
      loss_sum += batch_loss;

      auto params = model.net.tensors();
      auto grads = batch_grads.tensors();
      for (std::size_t t = 0; t < params.size(); ++t) {
        for (float& g : grads[t]) g *= inv_batch;
        adam_step<float>(params[t], grads[t], model.adam[t], config.learning_rate,
                         config.adam);
      }
    }

    EpochRecord record;
    record.epoch = static_cast<std::uint32_t>(epoch + 1);
    record.train_loss = loss_sum / static_cast<double>(count);
    record.val_loss = evaluate_loss(model.net, val_inputs, val_targets);
    model.epoch = record.epoch;
    record.seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count();
    const bool improved = !val_inputs.empty() && record.val_loss < best_val;
    if (improved) best_val = record.val_loss;
    history.epochs.push_back(record);
    if (on_epoch) on_epoch(record, model, improved);
  }
  return history;
}

ImageTensor denoise_image(const AutoencoderNet<float>& net,
                          const ImageTensor& image) {
  if (image.empty()) return image;
  const std::size_t pw = image.width + image.width % 2;
  const std::size_t ph = image.height + image.height % 2;
  if (pw == image.width && ph == image.height) {
    return batch_to_image(forward(net, image_to_batch(image)), 0);
  }
  ImageTensor padded(pw, ph);
  for (std::size_t y = 0; y < ph; ++y) {
    const std::size_t sy = std::min(y, image.height - 1);
    for (std::size_t x = 0; x < pw; ++x) {
      const std::size_t sx = std::min(x, image.width - 1);
      for (std::size_t c = 0; c < ImageTensor::kChannels; ++c) {
        padded.at(x, y, c) = image.at(sx, sy, c);
      }
    }
  }
  const ImageTensor full = batch_to_image(forward(net, image_to_batch(padded)), 0);
  ImageTensor out(image.width, image.height);
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) {
      for (std::size_t c = 0; c < ImageTensor::kChannels; ++c) {
        out.at(x, y, c) = full.at(x, y, c);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr char kMagic[4] = {'A', 'D', 'N', 'Z'};

class ByteWriter {
 public:
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void bytes(const void* p, std::size_t n) {
    const char* c = static_cast<const char*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }
  void tensor(const std::string& name, const std::vector<std::uint32_t>& dims,
              std::span<const float> data) {
    u32(static_cast<std::uint32_t>(name.size()));
    bytes(name.data(), name.size());
    u32(static_cast<std::uint32_t>(dims.size()));
    for (std::uint32_t d : dims) u32(d);
    for (float f : data) u32(std::bit_cast<std::uint32_t>(f));
  }
  const std::vector<char>& buffer() const { return buf_; }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  std::vector<char> buf_;
};

class ByteReader {
 public:
  ByteReader(std::vector<char> buf, std::string path)
      : buf_(std::move(buf)), path_(std::move(path)) {}

  std::uint64_t uint(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(buf_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == buf_.size(); }
  [[noreturn]] void fail(const std::string& msg) const {
    throw CheckpointError("checkpoint " + path_ + ": " + msg);
  }

 private:
  void need(std::size_t n) const {
    if (buf_.size() - pos_ < n) {
      fail("truncated at byte " + std::to_string(pos_));
    }
  }
  std::vector<char> buf_;
  std::string path_;
  std::size_t pos_ = 0;
};

std::vector<std::uint32_t> dims_of(std::size_t index, const AutoencoderNet<float>& net) {
  const ConvParams<float>* convs[3] = {&net.enc_conv, &net.dec_conv, &net.out_conv};
  const ConvParams<float>& p = *convs[index / 2];
  if (index % 2 == 1) return {static_cast<std::uint32_t>(p.bias.size())};
  const Shape4 s = p.weight.shape();
  return {static_cast<std::uint32_t>(s.n), static_cast<std::uint32_t>(s.c),
          static_cast<std::uint32_t>(s.h), static_cast<std::uint32_t>(s.w)};
}

}  // namespace

void save_checkpoint(const AutoencoderModel& model, const std::string& path) {
  ByteWriter w;
  w.bytes(kMagic, sizeof(kMagic));
  w.u16(kCheckpointVersion);
  w.u32(model.epoch);
  w.u64(model.adam[0].t);
  w.u32(static_cast<std::uint32_t>(kTensorNames.size() * 3));
  const auto params = model.net.tensors();
  for (std::size_t i = 0; i < params.size(); ++i) {
    w.tensor(kTensorNames[i], dims_of(i, model.net), params[i]);
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    w.tensor(std::string(kTensorNames[i]) + ".adam_m", dims_of(i, model.net),
             model.adam[i].m);
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    w.tensor(std::string(kTensorNames[i]) + ".adam_v", dims_of(i, model.net),
             model.adam[i].v);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path);
  out.write(w.buffer().data(), static_cast<std::streamsize>(w.buffer().size()));
  if (!out) throw IoError("failed writing checkpoint: " + path);
}

AutoencoderModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path);
  std::vector<char> buf((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  ByteReader r(std::move(buf), path);

  if (r.str(4) != std::string(kMagic, 4)) r.fail("bad magic bytes");
  const auto version = static_cast<std::uint16_t>(r.uint(2));
  if (version != kCheckpointVersion) {
    r.fail("unsupported format version " + std::to_string(version));
  }
  AutoencoderModel model = build_model(0);
  model.epoch = static_cast<std::uint32_t>(r.uint(4));
  const std::uint64_t step = r.uint(8);
  const auto count = static_cast<std::uint32_t>(r.uint(4));

  std::map<std::string, std::span<float>> slots;
  std::map<std::string, std::vector<std::uint32_t>> expected_dims;
  auto params = model.net.tensors();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string name = kTensorNames[i];
    const auto dims = dims_of(i, model.net);
    slots[name] = params[i];
    slots[name + ".adam_m"] = model.adam[i].m;
    slots[name + ".adam_v"] = model.adam[i].v;
    for (const char* suffix : {"", ".adam_m", ".adam_v"}) {
      expected_dims[name + suffix] = dims;
    }
  }
  if (count != slots.size()) {
    r.fail("expected " + std::to_string(slots.size()) + " tensors, found " +
           std::to_string(count));
  }
  std::map<std::string, bool> seen;
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto name_len = static_cast<std::size_t>(r.uint(4));
    if (name_len > 256) r.fail("implausible tensor name length");
    const std::string name = r.str(name_len);
    auto slot = slots.find(name);
    if (slot == slots.end()) r.fail("unknown tensor '" + name + "'");
    if (seen[name]) r.fail("duplicate tensor '" + name + "'");
    seen[name] = true;
    const auto rank = static_cast<std::size_t>(r.uint(4));
    if (rank > 8) r.fail("implausible rank for '" + name + "'");
    std::vector<std::uint32_t> dims(rank);
    for (auto& d : dims) d = static_cast<std::uint32_t>(r.uint(4));
    if (dims != expected_dims[name]) r.fail("shape mismatch for '" + name + "'");
    for (float& f : slot->second) {
      f = std::bit_cast<float>(static_cast<std::uint32_t>(r.uint(4)));
    }
  }
  if (!r.done()) r.fail("trailing bytes after last tensor");
  for (auto& s : model.adam) s.t = step;
  return model;
}

template struct AutoencoderNet<float>;
template struct AutoencoderNet<double>;
template Tensor4<float> forward(const AutoencoderNet<float>&, const Tensor4<float>&);
template Tensor4<double> forward(const AutoencoderNet<double>&, const Tensor4<double>&);
template double loss_and_gradients(const AutoencoderNet<float>&, const Tensor4<float>&,
                                   const Tensor4<float>&, LossScale,
                                   AutoencoderNet<float>*);
template double loss_and_gradients(const AutoencoderNet<double>&, const Tensor4<double>&,
                                   const Tensor4<double>&, LossScale,
                                   AutoencoderNet<double>*);

}  // namespace advdenoise
