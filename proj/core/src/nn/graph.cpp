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

#include "specmon/nn/graph.hpp"

#include <string>
#include <utility>

namespace specmon::nn {
namespace {

template <typename T>
bool wants_grad(const std::shared_ptr<Tensor<T>>& t) {
  return t && t->requires_grad();
}

template <typename T>
std::span<T> grad_or_empty(const std::shared_ptr<Tensor<T>>& t) {
  return wants_grad(t) ? t->ensure_grad() : std::span<T>{};
}

}  // namespace

template <typename T>
typename Graph<T>::Node Graph<T>::leaf(Tensor<T> value, bool requires_grad) {
  auto node = std::make_shared<Tensor<T>>(std::move(value));
  node->set_requires_grad(requires_grad);
  return node;
}

template <typename T>
typename Graph<T>::Node Graph<T>::make_output(
    Tensor<T> value, std::initializer_list<Node> inputs) const {
  auto node = std::make_shared<Tensor<T>>(std::move(value));
  if (record_) {
    for (const auto& in : inputs) {
      if (wants_grad(in)) {
        node->set_requires_grad(true);
        break;
      }
    }
  }
  return node;
}

template <typename T>
void Graph<T>::push(std::function<void()> step) {
  tape_.push_back(std::move(step));
}

template <typename T>
typename Graph<T>::Node Graph<T>::conv1d(const Node& input, const Node& weight,
                                         const Node& bias) {
  Node out = make_output(conv1d_forward(*input, *weight, *bias),
                         {input, weight, bias});
  if (out->requires_grad()) {
    push([input, weight, bias, out] {
      if (!out->has_grad()) return;
      conv1d_backward<T>(*input, *weight, out->grad(), grad_or_empty(input),
                         grad_or_empty(weight), grad_or_empty(bias));
    });
  }
  return out;
}

template <typename T>
typename Graph<T>::Node Graph<T>::maxpool1d(const Node& input) {
  PoolResult<T> pooled = maxpool1d_forward(*input);
  Node out = make_output(std::move(pooled.output), {input});
  if (out->requires_grad()) {
    push([input, out, argmax = std::move(pooled.argmax)] {
      if (!out->has_grad()) return;
      maxpool1d_backward<T>(argmax, out->grad(), input->ensure_grad());
    });
  }
  return out;
}

template <typename T>
typename Graph<T>::Node Graph<T>::batchnorm1d(const Node& input,
                                              const Node& gamma,
                                              const Node& beta,
                                              BatchNormState<T>& state,
                                              Mode mode) {
  BatchNormCache<T> cache;
  Node out = make_output(
      batchnorm1d_forward(*input, *gamma, *beta, state, mode, &cache),
      {input, gamma, beta});
  if (out->requires_grad()) {
    push([input, gamma, beta, out, mode, cache = std::move(cache)] {
      if (!out->has_grad()) return;
      batchnorm1d_backward<T>(*input, *gamma, cache, mode, out->grad(),
                              grad_or_empty(input), grad_or_empty(gamma),
                              grad_or_empty(beta));
    });
  }
  return out;
}

template <typename T>
typename Graph<T>::Node Graph<T>::batchnorm1d(const Node& input,
                                              const Node& gamma,
                                              const Node& beta,
                                              const BatchNormState<T>& state,
                                              Mode mode) {
  if (mode == Mode::kTrain) {
    throw StateError("train-mode batchnorm needs mutable running statistics");
  }
  BatchNormCache<T> cache;
  Node out = make_output(batchnorm1d_forward(*input, *gamma, *beta, state, &cache),
                         {input, gamma, beta});
  if (out->requires_grad()) {
    push([input, gamma, beta, out, cache = std::move(cache)] {
      if (!out->has_grad()) return;
      batchnorm1d_backward<T>(*input, *gamma, cache, Mode::kEval, out->grad(),
                              grad_or_empty(input), grad_or_empty(gamma),
                              grad_or_empty(beta));
    });
  }
  return out;
}

template <typename T>
typename Graph<T>::Node Graph<T>::dense(const Node& input, const Node& weight,
                                        const Node& bias) {
  Node out = make_output(dense_forward(*input, *weight, *bias),
                         {input, weight, bias});
  if (out->requires_grad()) {
    push([input, weight, bias, out] {
      if (!out->has_grad()) return;
      dense_backward<T>(*input, *weight, out->grad(), grad_or_empty(input),
                        grad_or_empty(weight), grad_or_empty(bias));
    });
  }
  return out;
}

template <typename T>
typename Graph<T>::Node Graph<T>::relu(const Node& input) {
  Node out = make_output(relu_forward(*input), {input});
  if (out->requires_grad()) {
    push([input, out] {
      if (!out->has_grad()) return;
      relu_backward<T>(*input, out->grad(), input->ensure_grad());
    });
  }
  return out;
}

template <typename T>
typename Graph<T>::Node Graph<T>::dropout(const Node& input, double rate,
                                          Mode mode, std::mt19937_64* rng) {
  std::vector<T> mask;
  Tensor<T> value;
  if (mode == Mode::kEval || rate == 0.0) {
    std::mt19937_64 unused;
    value = dropout_forward(*input, rate, mode, unused, &mask);
  } else {
    if (!rng) throw StateError("train-mode dropout needs a random generator");
    value = dropout_forward(*input, rate, mode, *rng, &mask);
  }
  Node out = make_output(std::move(value), {input});
  if (out->requires_grad()) {
    push([input, out, mask = std::move(mask)] {
      if (!out->has_grad()) return;
      auto gx = input->ensure_grad();
      auto gy = out->grad();
      if (mask.empty()) {
        for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i];
      } else {
        for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] * mask[i];
      }
    });
  }
  return out;
}

template <typename T>
typename Graph<T>::Node Graph<T>::flatten(const Node& input) {
  const std::size_t batch = input->dim(0);
  Node out = make_output(input->reshaped({batch, input->size() / batch}),
                         {input});
  if (out->requires_grad()) {
    push([input, out] {
      if (!out->has_grad()) return;
      auto gx = input->ensure_grad();
      auto gy = out->grad();
      for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i];
    });
  }
  return out;
}

template <typename T>
typename Graph<T>::Node Graph<T>::sum(const Node& input) {
  T total{};
  for (T v : input->data()) total += v;
  Node out = make_output(Tensor<T>({1}, std::vector<T>{total}), {input});
  if (out->requires_grad()) {
    push([input, out] {
      if (!out->has_grad()) return;
      const T g = out->grad()[0];
      for (T& v : input->ensure_grad()) v += g;
    });
  }
  return out;
}

template <typename T>
typename Graph<T>::Node Graph<T>::softmax_cross_entropy(
    const Node& logits, std::span<const std::size_t> labels,
    Tensor<T>* probabilities) {
  CrossEntropyResult<T> ce = nn::softmax_cross_entropy(*logits, labels);
  if (probabilities) *probabilities = ce.probabilities;
  Node out = make_output(
      Tensor<T>({1}, std::vector<T>{static_cast<T>(ce.loss)}), {logits});
  if (out->requires_grad()) {
    push([logits, out, probs = std::move(ce.probabilities),
          owned = std::vector<std::size_t>(labels.begin(), labels.end())] {
      if (!out->has_grad()) return;
      softmax_cross_entropy_backward<T>(probs, owned, out->grad()[0],
                                        logits->ensure_grad());
    });
  }
  return out;
}

template <typename T>
void Graph<T>::backward(const Node& root) {
  if (tape_.empty()) {
    throw StateError(
        "backward called without a recorded forward pass (was the tape "
        "already consumed?)");
  }
  if (!root || root->size() != 1) {
    throw StateError("backward root must be a scalar, got shape " +
                     (root ? shape_string(root->shape()) : std::string("null")));
  }
  if (!root->requires_grad()) {
    throw StateError("backward root is not connected to any trainable input");
  }
  root->ensure_grad()[0] = T{1};
  for (auto it = tape_.rbegin(); it != tape_.rend(); ++it) (*it)();
  tape_.clear();
}

template class Graph<float>;
template class Graph<double>;

}  // namespace specmon::nn
