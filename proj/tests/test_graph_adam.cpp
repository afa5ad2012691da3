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


#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "specmon/error.hpp"
#include "specmon/nn/adam.hpp"
#include "specmon/nn/graph.hpp"

namespace specmon::nn {
namespace {

TEST(Graph, BackwardTwiceIsStateError) {
  Graph<double> g;
  auto x = Graph<double>::leaf(Tensor<double>({3}, 1.0), true);
  auto s = g.sum(g.relu(x));
  g.backward(s);
  EXPECT_EQ(x->grad()[0], 1.0);
  EXPECT_THROW(g.backward(s), StateError);
}

TEST(Graph, NonScalarRootIsStateError) {
  Graph<double> g;
  auto x = Graph<double>::leaf(Tensor<double>({3}, 1.0), true);
  auto y = g.relu(x);
  EXPECT_THROW(g.backward(y), StateError);
}

TEST(Graph, NonRecordingGraphBuildsNoTape) {
  Graph<double> g(false);
  auto x = Graph<double>::leaf(Tensor<double>({3}, 1.0), true);
  auto s = g.sum(x);
  EXPECT_EQ(g.tape_size(), 0u);
  EXPECT_FALSE(s->requires_grad());
}

TEST(Graph, GradientsAccumulateAcrossUses) {
  Graph<double> g;
  auto x = Graph<double>::leaf(Tensor<double>({2}, 2.0), true);
  auto s = g.sum(g.flatten(g.relu(x)));
  g.backward(s);
  Graph<double> g2;
  g2.backward(g2.sum(x));
  EXPECT_EQ(x->grad()[0], 2.0);
}

TEST(Graph, TrainDropoutWithoutGeneratorIsStateError) {
  Graph<float> g;
  auto x = Graph<float>::leaf(Tensor<float>({4}, 1.0f));
  EXPECT_THROW(g.dropout(x, 0.5, Mode::kTrain, nullptr), StateError);
  EXPECT_NO_THROW(g.dropout(x, 0.5, Mode::kEval, nullptr));
}

TEST(Graph, ConstBatchNormStateRejectsTrainMode) {
  Graph<float> g;
  auto x = Graph<float>::leaf(Tensor<float>({2, 1, 4}, 1.0f));
  auto gamma = Graph<float>::leaf(Tensor<float>({1}, 1.0f));
  auto beta = Graph<float>::leaf(Tensor<float>({1}, 0.0f));
  const BatchNormState<float> state(1);
  EXPECT_THROW(g.batchnorm1d(x, gamma, beta, state, Mode::kTrain), StateError);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  // With bias correction the first update is lr * g / (|g| + eps').
  std::vector<double> p{1.0, -2.0, 0.5};
  const std::vector<double> g{0.5, -3.0, 1e-3};
  AdamState<double> state;
  adam_step<double>(p, g, state, "p");
  EXPECT_NEAR(p[0], 1.0 - 1e-3, 1e-9);
  EXPECT_NEAR(p[1], -2.0 + 1e-3, 1e-9);
  EXPECT_NEAR(p[2], 0.5 - 1e-3 * 1e-3 / (1e-3 + 1e-8), 1e-12);
  EXPECT_EQ(state.step_count, 1u);
}

TEST(Adam, MatchesHandComputedSecondStep) {
  std::vector<double> p{0.0};
  AdamState<double> state;
  adam_step<double>(p, std::vector<double>{1.0}, state, "p");
  adam_step<double>(p, std::vector<double>{-1.0}, state, "p");
  const double m = 0.9 * 0.1 - 0.1, v = 0.999 * 0.001 + 0.001;
  const double m_hat = m / (1 - 0.81), v_hat = v / (1 - 0.999 * 0.999);
  EXPECT_NEAR(p[0], -1e-3 / (1.0 + 1e-8) - 1e-3 * m_hat / (std::sqrt(v_hat) + 1e-8), 1e-15);
}

TEST(Adam, NonFiniteGradientLeavesEveryParameterUntouched) {
  auto a = Graph<float>::leaf(Tensor<float>({2}, 1.0f), true);
  auto b = Graph<float>::leaf(Tensor<float>({2}, 1.0f), true);
  Adam<float> opt({{"a", a}, {"b", b}}, {});
  a->ensure_grad()[0] = 1.0f;
  b->ensure_grad()[1] = std::numeric_limits<float>::quiet_NaN();
  try {
    opt.step();
    FAIL() << "expected a training error";
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("b"), std::string::npos);
  }
  EXPECT_EQ((*a)[0], 1.0f);
  EXPECT_EQ(opt.step_count(), 0u);
}

TEST(Adam, NonPositiveLearningRateIsConfigError) {
  std::vector<float> p{1.0f};
  AdamState<float> state;
  state.options.lr = 0.0;
  EXPECT_THROW(adam_step<float>(p, std::vector<float>{1.0f}, state, "p"), ConfigError);
}

}  // namespace
}  // namespace specmon::nn
