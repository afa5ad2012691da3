// Copyright 2026 The specmon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
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
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "specmon/datasets.hpp"
#include "specmon/features.hpp"
#include "specmon/labels.hpp"
#include "specmon/nn/adam.hpp"
#include "specmon/nn/graph.hpp"
#include "specmon/nn/kernels.hpp"

namespace specmon {

// Network geometry. Three conv blocks (conv -> batchnorm -> relu -> maxpool ->
// dropout) feed a 256-unit hidden layer and a class-count output layer.
inline constexpr std::array<std::size_t, 3> kConvChannels = {64, 32, 16};
inline constexpr std::size_t kConvKernel = 9;
inline constexpr std::size_t kHiddenUnits = 256;
inline constexpr double kConvDropout = 0.5;
inline constexpr double kHiddenDropout = 0.3;

struct ActivationLengths {
  std::array<std::size_t, 3> conv{};
  std::array<std::size_t, 3> pool{};
  std::size_t flatten = 0;
};

constexpr ActivationLengths activation_lengths(std::size_t input = kWindowLength) {
  ActivationLengths a;
  std::size_t len = input;
  for (std::size_t i = 0; i < 3; ++i) {
    len = len - kConvKernel + 1;  // valid convolution
    a.conv[i] = len;
    len /= 2;  // pool, floor
    a.pool[i] = len;
  }
  a.flatten = kConvChannels.back() * len;
  return a;
}

// Trainable element count for `classes` outputs: conv weights and biases,
// batchnorm gamma and beta, and both dense layers.
constexpr std::size_t parameter_count_for(std::size_t classes) {
  std::size_t total = 0;
  std::size_t in = kFeatureChannels;
  for (std::size_t out : kConvChannels) {
    total += out * in * kConvKernel + out;  // conv
    total += 2 * out;                       // batchnorm
    in = out;
  }
  total += activation_lengths().flatten * kHiddenUnits + kHiddenUnits;
  total += kHiddenUnits * classes + classes;
  return total;
}

static_assert(activation_lengths().conv[0] == 1016);
static_assert(activation_lengths().pool[0] == 508);
static_assert(activation_lengths().conv[1] == 500);
static_assert(activation_lengths().pool[1] == 250);
static_assert(activation_lengths().conv[2] == 242);
static_assert(activation_lengths().pool[2] == 121);
static_assert(activation_lengths().flatten == 1936);

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 256;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  bool shuffle = true;
  // Validation passes per epoch; each one adds a history record.
  std::size_t evals_per_epoch = 1;
  // Training windows used to recalibrate batchnorm statistics before every
  // validation pass; 0 keeps the momentum-tracked statistics.
  std::size_t recalibration_windows = 1024;

  // ConfigError on epochs == 0, batch_size == 0, lr <= 0 or
  // evals_per_epoch == 0.
  void validate() const;
};

// How the training data was drawn; stored with the model so evaluation can
// rebuild the same split and inference applies the same normalization.
struct DataConfig {
  SplitSizes split;
  SplitPolicy policy = SplitPolicy::kRandom;
  NormalizePolicy normalize = NormalizePolicy::kNone;
  std::uint64_t seed = 0;
};

// Shapes seen by one forward pass.
struct ForwardTrace {
  std::vector<nn::Shape> conv;
  std::vector<nn::Shape> pool;
  nn::Shape flatten;
  nn::Shape hidden;
  nn::Shape logits;
};

template <typename T>
class BasicCnn {
 public:
  using Node = typename nn::Graph<T>::Node;

  // Conv and dense weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)),
  // gamma 1, beta 0, all drawn from one stream seeded by `seed`.
  BasicCnn(TaskKind task, std::uint64_t seed);
  // Copies own their parameter storage.
  BasicCnn(const BasicCnn& other);
  BasicCnn& operator=(const BasicCnn& other);
  BasicCnn(BasicCnn&&) noexcept = default;
  BasicCnn& operator=(BasicCnn&&) noexcept = default;

  TaskKind task() const noexcept { return task_; }
  const std::vector<std::string>& class_map() const noexcept { return class_map_; }
  std::size_t num_classes() const noexcept { return class_map_.size(); }

  // Trainable tensors in declared layer order.
  std::vector<nn::NamedParameter<T>>& parameters() noexcept { return params_; }
  const std::vector<nn::NamedParameter<T>>& parameters() const noexcept {
    return params_;
  }
  std::vector<nn::BatchNormState<T>>& norm_states() noexcept { return norms_; }
  const std::vector<nn::BatchNormState<T>>& norm_states() const noexcept {
    return norms_;
  }

  const TrainConfig& train_config() const noexcept { return train_config_; }
  void set_train_config(const TrainConfig& cfg) { train_config_ = cfg; }
  const DataConfig& data_config() const noexcept { return data_config_; }
  void set_data_config(const DataConfig& cfg) { data_config_ = cfg; }

  // batch [B, 4, 1024] -> logits [B, C]. Train mode updates batchnorm running
  // statistics and needs `dropout_rng`.
  Node forward(nn::Graph<T>& graph, const Node& batch, nn::Mode mode,
               std::mt19937_64* dropout_rng, ForwardTrace* trace = nullptr);

  // Eval-mode forward without a tape; a pure function of (parameters, input)
  // that is safe to call concurrently.
  nn::Tensor<T> logits(const nn::Tensor<T>& batch, ForwardTrace* trace = nullptr) const;
  // Eval-mode hidden activations after the 256-unit layer and its ReLU.
  nn::Tensor<T> embeddings(const nn::Tensor<T>& batch) const;

  // Replaces the batchnorm running statistics with the average of per-batch
  // statistics over `batches`, measured with dropout disabled. Dropout ahead
  // of a batchnorm layer inflates the variance seen during training, so
  // momentum-tracked statistics do not match the eval-mode input.
  void recalibrate_norms(std::span<const nn::Tensor<T>> batches);

 private:
  template <typename Norms>
  Node run(nn::Graph<T>& graph, const Node& batch, nn::Mode mode,
           std::mt19937_64* dropout_rng, Norms& norms, ForwardTrace* trace,
           bool stop_at_hidden, bool dropout) const;

  const Node& param(std::size_t i) const { return params_[i].tensor; }

  TaskKind task_;
  std::vector<std::string> class_map_;
  std::vector<nn::NamedParameter<T>> params_;
  std::vector<nn::BatchNormState<T>> norms_;
  TrainConfig train_config_;
  DataConfig data_config_;
};

using CnnModel = BasicCnn<float>;

CnnModel build_model(TaskKind task, std::uint64_t seed);

template <typename T>
std::size_t count_parameters(const BasicCnn<T>& model);

// Checks the shape of a single window or batch and reports the expected
// layout on mismatch.
void check_input_shape(const nn::Shape& shape);

// Stacks windows into [B, 4, 1024].
nn::Tensor<float> make_batch(std::span<const ChannelizedWindow> windows);
nn::Tensor<float> make_batch(std::span<const LabeledWindow> windows,
                             NormalizePolicy policy);

// Argmax with ties resolved to the lowest class index.
std::size_t argmax_class(std::span<const float> scores);

struct Prediction {
  std::size_t class_index = 0;
  std::string class_name;
  std::vector<float> probabilities;
};

// window is [4, 1024].
Prediction predict(const CnnModel& model, const ChannelizedWindow& window);
std::vector<Prediction> predict_batch(const CnnModel& model,
                                      const nn::Tensor<float>& batch);

std::vector<float> extract_embedding(const CnnModel& model,
                                     const ChannelizedWindow& window);

struct TrainRecord {
  double seconds = 0.0;   // wall clock since training started
  double epoch = 0.0;     // epochs completed, fractional between epoch ends
  double train_loss = 0.0;  // mean batch loss since the previous record
  double val_accuracy = 0.0;
};

struct TrainHistory {
  std::vector<TrainRecord> records;
  std::size_t best_record = 0;  // index of the record whose parameters were kept
  std::size_t steps_per_epoch = 0;
};

using TrainObserver = std::function<void(const TrainRecord&)>;

// Mini-batch Adam over shuffled epochs with validation after every
// 1/evals_per_epoch of an epoch. On return the model holds the parameters
// from the record with the highest validation accuracy (earliest on ties).
// A non-finite loss aborts with a TrainingError naming the batch.
TrainHistory train(CnnModel& model, std::span<const LabeledWindow> train_set,
                   std::span<const LabeledWindow> val_set, const TrainConfig& cfg,
                   NormalizePolicy policy = NormalizePolicy::kNone,
                   const TrainObserver& observer = {});

std::size_t steps_per_epoch(std::size_t samples, std::size_t batch_size);

// Eval-mode predicted class for each window, computed in batches.
std::vector<std::size_t> predict_classes(const CnnModel& model,
                                         std::span<const LabeledWindow> windows,
                                         NormalizePolicy policy,
                                         std::size_t batch_size = 256);

}  // namespace specmon
