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

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "specmon/nn/tensor.hpp"

namespace specmon::nn {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Optimizer state for one parameter tensor.
template <typename T>
struct AdamState {
  std::uint64_t step_count = 0;
  std::vector<T> m;
  std::vector<T> v;
  AdamOptions options;
};

// One bias-corrected Adam update of `param` in place. Throws TrainingError
// naming `name` when any gradient entry is non-finite; the parameter and the
// state are left untouched in that case.
template <typename T>
void adam_step(std::span<T> param, std::span<const T> grad, AdamState<T>& state,
               const std::string& name = "parameter");

template <typename T>
struct NamedParameter {
  std::string name;
  std::shared_ptr<Tensor<T>> tensor;
};

// Adam over a fixed list of parameters, each with its own state.
template <typename T>
class Adam {
 public:
  Adam(std::vector<NamedParameter<T>> params, AdamOptions options);

  // Applies one update from the gradients currently held by the parameters.
  // Parameters without a gradient are treated as having a zero gradient.
  void step();
  void zero_grad();

  std::uint64_t step_count() const noexcept { return step_count_; }
  const AdamState<T>& state(std::size_t i) const { return states_.at(i); }

 private:
  std::vector<NamedParameter<T>> params_;
  std::vector<AdamState<T>> states_;
  std::uint64_t step_count_ = 0;
};

}  // namespace specmon::nn
