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

#include <cstddef>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "specmon/nn/kernels.hpp"
#include "specmon/nn/tensor.hpp"

namespace specmon::nn {

// Records a forward pass as a tape of backward closures and replays it in
// reverse. A tape is consumed by backward(); calling backward() again without
// a new forward pass is a state error.
//
// With recording disabled the graph is a thin forward-only evaluator.
template <typename T>
class Graph {
 public:
  using Node = std::shared_ptr<Tensor<T>>;

  explicit Graph(bool record = true) : record_(record) {}

  bool recording() const noexcept { return record_; }
  std::size_t tape_size() const noexcept { return tape_.size(); }

  // Wraps a tensor as a graph leaf. Leaves that require gradients get them
  // accumulated by backward().
  static Node leaf(Tensor<T> value, bool requires_grad = false);

  Node conv1d(const Node& input, const Node& weight, const Node& bias);
  Node maxpool1d(const Node& input);
  Node batchnorm1d(const Node& input, const Node& gamma, const Node& beta,
                   BatchNormState<T>& state, Mode mode);
  // Eval mode only; a train-mode request is a StateError.
  Node batchnorm1d(const Node& input, const Node& gamma, const Node& beta,
                   const BatchNormState<T>& state, Mode mode);
  Node dense(const Node& input, const Node& weight, const Node& bias);
  Node relu(const Node& input);
  // `rng` may be null in eval mode.
  Node dropout(const Node& input, double rate, Mode mode, std::mt19937_64* rng);
  // [B, ...] -> [B, prod(...)]
  Node flatten(const Node& input);
  // Scalar sum of every element.
  Node sum(const Node& input);
  // Scalar mean cross-entropy; the softmax probabilities are written to
  // `probabilities` when given.
  Node softmax_cross_entropy(const Node& logits,
                             std::span<const std::size_t> labels,
                             Tensor<T>* probabilities = nullptr);

  // Seeds d(root)/d(root) = 1 and runs the tape in reverse.
  void backward(const Node& root);

 private:
  Node make_output(Tensor<T> value, std::initializer_list<Node> inputs) const;
  void push(std::function<void()> step);

  bool record_;
  std::vector<std::function<void()>> tape_;
};

}  // namespace specmon::nn
