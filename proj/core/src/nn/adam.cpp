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

#include "specmon/nn/adam.hpp"

#include <cmath>
#include <string>

#include "specmon/error.hpp"

namespace specmon::nn {

template <typename T>
void adam_step(std::span<T> param, std::span<const T> grad, AdamState<T>& state,
               const std::string& name) {
  if (param.size() != grad.size()) {
    throw DimensionError("adam: gradient of " + name + " holds " +
                         std::to_string(grad.size()) + " values for " +
                         std::to_string(param.size()) + " parameters");
  }
  if (!(state.options.lr > 0.0)) {
    throw ConfigError("adam: learning rate must be positive");
  }
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad[i])) {
      throw TrainingError("adam: non-finite gradient in " + name + " at index " +
                          std::to_string(i));
    }
  }
  if (state.m.size() != param.size()) {
    state.m.assign(param.size(), T{});
    state.v.assign(param.size(), T{});
  }
  const AdamOptions& o = state.options;
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(o.beta1, t);
  const double c2 = 1.0 - std::pow(o.beta2, t);
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    const double m = o.beta1 * state.m[i] + (1.0 - o.beta1) * g;
    const double v = o.beta2 * state.v[i] + (1.0 - o.beta2) * g * g;
    state.m[i] = static_cast<T>(m);
    state.v[i] = static_cast<T>(v);
    const double m_hat = m / c1;
    const double v_hat = v / c2;
    param[i] = static_cast<T>(param[i] - o.lr * m_hat / (std::sqrt(v_hat) + o.eps));
  }
}

template <typename T>
Adam<T>::Adam(std::vector<NamedParameter<T>> params, AdamOptions options)
    : params_(std::move(params)) {
  states_.resize(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) {
    states_[i].options = options;
    states_[i].m.assign(params_[i].tensor->size(), T{});
    states_[i].v.assign(params_[i].tensor->size(), T{});
  }
}

template <typename T>
void Adam<T>::step() {
  // Validate every gradient before touching any parameter.
  for (auto& p : params_) {
    std::span<const T> g = p.tensor->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!std::isfinite(g[i])) {
        throw TrainingError("adam: non-finite gradient in " + p.name +
                            " at index " + std::to_string(i));
      }
    }
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor<T>& p = *params_[i].tensor;
    std::span<const T> g = p.ensure_grad();
    adam_step<T>(p.data(), g, states_[i], params_[i].name);
  }
  ++step_count_;
}

template <typename T>
void Adam<T>::zero_grad() {
  for (auto& p : params_) p.tensor->zero_grad();
}

template void adam_step<float>(std::span<float>, std::span<const float>,
                               AdamState<float>&, const std::string&);
template void adam_step<double>(std::span<double>, std::span<const double>,
                                AdamState<double>&, const std::string&);
template class Adam<float>;
template class Adam<double>;

}  // namespace specmon::nn
