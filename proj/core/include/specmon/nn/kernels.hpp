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

// Forward and backward kernels for the layer types used by the classifier.
// Every backward kernel accumulates (+=) into the gradient spans it is given;
// an empty span means that gradient is not wanted. All reductions run in a
// fixed order that does not depend on the worker count, so results are
// bit-reproducible for a given build.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "specmon/nn/tensor.hpp"

namespace specmon::nn {

enum class Mode { kTrain, kEval };

// Valid (unpadded) stride-1 convolution.
// input [B, Cin, L], weight [Cout, Cin, K], bias [Cout] -> [B, Cout, L-K+1]
template <typename T>
Tensor<T> conv1d_forward(const Tensor<T>& input, const Tensor<T>& weight,
                         const Tensor<T>& bias);

template <typename T>
void conv1d_backward(const Tensor<T>& input, const Tensor<T>& weight,
                     std::span<const T> grad_output, std::span<T> grad_input,
                     std::span<T> grad_weight, std::span<T> grad_bias);

template <typename T>
struct PoolResult {
  Tensor<T> output;
  // Flat input index of the winning element for each output element.
  std::vector<std::uint32_t> argmax;
};

// Kernel 2, stride 2; a trailing odd element is dropped.
template <typename T>
PoolResult<T> maxpool1d_forward(const Tensor<T>& input);

template <typename T>
void maxpool1d_backward(std::span<const std::uint32_t> argmax,
                        std::span<const T> grad_output,
                        std::span<T> grad_input);

// Running statistics are state, not trainable parameters.
template <typename T>
struct BatchNormState {
  explicit BatchNormState(std::size_t channels = 0)
      : running_mean(channels, T{0}), running_var(channels, T{1}) {}

  std::vector<T> running_mean;
  std::vector<T> running_var;
  T momentum = T(0.1);
  T eps = T(1e-5);
};

// Per-channel statistics used by the forward pass, kept for backward.
template <typename T>
struct BatchNormCache {
  std::vector<T> mean;
  std::vector<T> inv_std;
};

// Train mode normalizes by the biased batch variance over (B, L) and folds
// the unbiased variance into the running estimate. Eval mode uses the running
// estimate only.
template <typename T>
Tensor<T> batchnorm1d_forward(const Tensor<T>& input, const Tensor<T>& gamma,
                              const Tensor<T>& beta, BatchNormState<T>& state,
                              Mode mode, BatchNormCache<T>* cache = nullptr);

// Eval-mode forward from the running statistics; never mutates `state`.
template <typename T>
Tensor<T> batchnorm1d_forward(const Tensor<T>& input, const Tensor<T>& gamma,
                              const Tensor<T>& beta,
                              const BatchNormState<T>& state,
                              BatchNormCache<T>* cache = nullptr);

// Train-mode cache gives the full batch-statistics gradient; an eval-mode
// cache treats the statistics as constants.
template <typename T>
void batchnorm1d_backward(const Tensor<T>& input, const Tensor<T>& gamma,
                          const BatchNormCache<T>& cache, Mode mode,
                          std::span<const T> grad_output,
                          std::span<T> grad_input, std::span<T> grad_gamma,
                          std::span<T> grad_beta);

// input [B, N], weight [M, N], bias [M] -> [B, M]
template <typename T>
Tensor<T> dense_forward(const Tensor<T>& input, const Tensor<T>& weight,
                        const Tensor<T>& bias);

template <typename T>
void dense_backward(const Tensor<T>& input, const Tensor<T>& weight,
                    std::span<const T> grad_output, std::span<T> grad_input,
                    std::span<T> grad_weight, std::span<T> grad_bias);

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& input);

// Subgradient at exactly zero is zero.
template <typename T>
void relu_backward(const Tensor<T>& input, std::span<const T> grad_output,
                   std::span<T> grad_input);

// Inverted dropout. `mask` receives the per-element multiplier (0 or
// 1/(1-rate)); it is left empty in eval mode and when rate is 0.
template <typename T>
Tensor<T> dropout_forward(const Tensor<T>& input, double rate, Mode mode,
                          std::mt19937_64& rng, std::vector<T>* mask = nullptr);

template <typename T>
struct CrossEntropyResult {
  double loss = 0.0;
  Tensor<T> probabilities;
};

// Max-subtracted softmax and mean negative log-likelihood over the batch.
template <typename T>
CrossEntropyResult<T> softmax_cross_entropy(const Tensor<T>& logits,
                                            std::span<const std::size_t> labels);

// d(mean loss)/d(logits) scaled by `upstream`: (p - onehot) / B.
template <typename T>
void softmax_cross_entropy_backward(const Tensor<T>& probabilities,
                                    std::span<const std::size_t> labels,
                                    T upstream, std::span<T> grad_logits);

}  // namespace specmon::nn
