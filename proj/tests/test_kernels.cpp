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

#include "specmon/error.hpp"
#include "specmon/nn/kernels.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace specmon::nn {
namespace {

using specmon::testing::naive_conv;
using specmon::testing::naive_pool;
using specmon::testing::random_tensor;

TEST(Conv1d, MatchesNaiveReferenceOnRandomInstances) {
  std::mt19937_64 rng(2024);
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
  };
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t B = pick(1, 3), Cin = pick(1, 6), Cout = pick(1, 20);
    const std::size_t K = pick(1, 9), L = K + pick(0, 40);
    auto x = random_tensor<float>({B, Cin, L}, rng());
    auto w = random_tensor<float>({Cout, Cin, K}, rng());
    auto b = random_tensor<float>({Cout}, rng());
    const auto got = conv1d_forward(x, w, b);
    const auto want = naive_conv(x, w, b);
    ASSERT_EQ(got.shape(), want.shape());
    ASSERT_EQ(got.values(), want.values()) << "trial " << trial;
  }
}

TEST(Conv1d, PaperGeometry) {
  auto x = random_tensor<float>({1, 4, 1024}, 1);
  auto w = random_tensor<float>({64, 4, 9}, 2);
  auto b = random_tensor<float>({64}, 3);
  const auto y = conv1d_forward(x, w, b);
  EXPECT_EQ(y.shape(), (Shape{1, 64, 1016}));
  EXPECT_EQ(y.values(), naive_conv(x, w, b).values());
}

TEST(Conv1d, ChannelMismatchIsDimensionError) {
  auto x = random_tensor<float>({1, 3, 32}, 1);
  auto w = random_tensor<float>({8, 4, 9}, 2);
  auto b = random_tensor<float>({8}, 3);
  EXPECT_THROW(conv1d_forward(x, w, b), DimensionError);
}

TEST(Conv1d, KernelLongerThanInputIsDimensionError) {
  auto x = random_tensor<float>({1, 4, 8}, 1);
  auto w = random_tensor<float>({8, 4, 9}, 2);
  auto b = random_tensor<float>({8}, 3);
  EXPECT_THROW(conv1d_forward(x, w, b), DimensionError);
}

TEST(MaxPool1d, MatchesNaiveReferenceOnRandomInstances) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t B = 1 + rng() % 3, C = 1 + rng() % 5, L = 2 + rng() % 60;
    auto x = random_tensor<float>({B, C, L}, rng());
    // Force some ties.
    for (std::size_t i = 0; i + 1 < x.size(); i += 7) x[i + 1] = x[i];
    const auto got = maxpool1d_forward(x);
    ASSERT_EQ(got.output.values(), naive_pool(x).values()) << "trial " << trial;
  }
}

TEST(MaxPool1d, GeometryAndTieRule) {
  Tensor<float> x({1, 1, 5}, std::vector<float>{3, 3, 1, 2, 9});
  const auto r = maxpool1d_forward(x);
  EXPECT_EQ(r.output.shape(), (Shape{1, 1, 2}));
  EXPECT_EQ(r.argmax[0], 0u);  // tie goes to the first element
  EXPECT_EQ(r.argmax[1], 3u);
  std::vector<float> g(5, 0.0f);
  const std::vector<float> up{1.0f, 2.0f};
  maxpool1d_backward<float>(r.argmax, up, g);
  EXPECT_EQ(g, (std::vector<float>{1, 0, 0, 2, 0}));
}

TEST(MaxPool1d, PaperLengths) {
  for (auto [in, out] : {std::pair{1016, 508}, {500, 250}, {242, 121}}) {
    Tensor<float> x({1, 1, std::size_t(in)});
    EXPECT_EQ(maxpool1d_forward(x).output.dim(2), std::size_t(out));
  }
}

TEST(MaxPool1d, LengthOneIsDegenerate) {
  Tensor<float> x({1, 1, 1});
  EXPECT_THROW(maxpool1d_forward(x), DegenerateInputError);
}

TEST(BatchNorm1d, EvalBeforeAnyUpdateUsesInitialStatistics) {
  auto x = random_tensor<double>({2, 3, 5}, 4);
  Tensor<double> gamma({3}, 1.0), beta({3}, 0.0);
  BatchNormState<double> state(3);
  const auto y = batchnorm1d_forward(x, gamma, beta, state, Mode::kEval);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_DOUBLE_EQ(y[i], x[i] / std::sqrt(1.0 + 1e-5));
  }
}

TEST(BatchNorm1d, TrainNormalizesAndUpdatesRunningStats) {
  auto x = random_tensor<double>({4, 2, 16}, 5, 3.0);
  Tensor<double> gamma({2}, 2.0), beta({2}, 0.5);
  BatchNormState<double> state(2);
  const auto y = batchnorm1d_forward(x, gamma, beta, state, Mode::kTrain);
  for (std::size_t c = 0; c < 2; ++c) {
    double m = 0, v = 0, xm = 0, xv = 0;
    for (std::size_t n = 0; n < 4; ++n)
      for (std::size_t t = 0; t < 16; ++t) {
        m += y[(n * 2 + c) * 16 + t];
        xm += x[(n * 2 + c) * 16 + t];
      }
    m /= 64;
    xm /= 64;
    for (std::size_t n = 0; n < 4; ++n)
      for (std::size_t t = 0; t < 16; ++t) {
        v += std::pow(y[(n * 2 + c) * 16 + t] - m, 2);
        xv += std::pow(x[(n * 2 + c) * 16 + t] - xm, 2);
      }
    v /= 64;
    EXPECT_NEAR(m, 0.5, 1e-12);
    EXPECT_NEAR(v, 4.0 * (xv / 64) / (xv / 64 + 1e-5), 1e-9);
    EXPECT_NEAR(state.running_mean[c], 0.1 * xm, 1e-12);
    EXPECT_NEAR(state.running_var[c], 0.9 + 0.1 * xv / 63, 1e-12);
  }
}

TEST(BatchNorm1d, ConstStateOverloadMatchesEvalMode) {
  auto x = random_tensor<float>({2, 3, 7}, 6);
  auto gamma = random_tensor<float>({3}, 7);
  auto beta = random_tensor<float>({3}, 8);
  BatchNormState<float> state(3);
  state.running_mean = {0.5f, -1.0f, 2.0f};
  state.running_var = {1.5f, 0.25f, 4.0f};
  const BatchNormState<float>& cstate = state;
  EXPECT_EQ(batchnorm1d_forward(x, gamma, beta, state, Mode::kEval).values(),
            batchnorm1d_forward(x, gamma, beta, cstate).values());
}

TEST(BatchNorm1d, SingleValuePerChannelInTrainModeIsDegenerate) {
  Tensor<float> x({1, 2, 1}), gamma({2}, 1.0f), beta({2}, 0.0f);
  BatchNormState<float> state(2);
  EXPECT_THROW(batchnorm1d_forward(x, gamma, beta, state, Mode::kTrain),
               DegenerateInputError);
}

TEST(Dense, KnownProduct) {
  Tensor<double> x({1, 2}, std::vector<double>{1, 2});
  Tensor<double> w({3, 2}, std::vector<double>{1, 0, 0, 1, 1, 1});
  Tensor<double> b({3}, std::vector<double>{0, 0, 0.5});
  EXPECT_EQ(dense_forward(x, w, b).values(), (std::vector<double>{1, 2, 3.5}));
}

TEST(Relu, ForwardAndZeroSubgradient) {
  Tensor<float> x({4}, std::vector<float>{-1, 0, 2, -0.0f});
  EXPECT_EQ(relu_forward(x).values(), (std::vector<float>{0, 0, 2, 0}));
  std::vector<float> g(4, 0.0f);
  const std::vector<float> up(4, 1.0f);
  relu_backward<float>(x, up, g);
  EXPECT_EQ(g, (std::vector<float>{0, 0, 1, 0}));
}

TEST(Dropout, EvalIsIdentity) {
  auto x = random_tensor<float>({3, 50}, 1);
  std::mt19937_64 rng(1);
  EXPECT_EQ(dropout_forward(x, 0.5, Mode::kEval, rng).values(), x.values());
  EXPECT_EQ(dropout_forward(x, 0.0, Mode::kTrain, rng).values(), x.values());
}

TEST(Dropout, TrainZeroesAboutRateAndScalesSurvivors) {
  Tensor<float> x({100000}, 1.0f);
  std::mt19937_64 rng(3);
  const auto y = dropout_forward(x, 0.3, Mode::kTrain, rng);
  std::size_t zeros = 0;
  for (float v : y.data()) {
    if (v == 0.0f) {
      ++zeros;
    } else {
      EXPECT_FLOAT_EQ(v, static_cast<float>(1.0 / 0.7));
    }
  }
  EXPECT_NEAR(zeros / 100000.0, 0.3, 0.01);
}

TEST(Dropout, SameSeedSameMask) {
  auto x = random_tensor<float>({1000}, 2);
  std::mt19937_64 a(9), b(9);
  EXPECT_EQ(dropout_forward(x, 0.5, Mode::kTrain, a).values(),
            dropout_forward(x, 0.5, Mode::kTrain, b).values());
}

TEST(Dropout, RateOutsideRangeIsInputError) {
  Tensor<float> x({4});
  std::mt19937_64 rng(1);
  EXPECT_THROW(dropout_forward(x, 1.0, Mode::kTrain, rng), InputError);
  EXPECT_THROW(dropout_forward(x, -0.1, Mode::kTrain, rng), InputError);
}

TEST(SoftmaxCrossEntropy, UniformLogits) {
  Tensor<double> logits({2, 4}, 3.0);
  const std::vector<std::size_t> labels{0, 3};
  const auto r = softmax_cross_entropy(logits, labels);
  EXPECT_NEAR(r.loss, std::log(4.0), 1e-15);
  for (double p : r.probabilities.data()) EXPECT_DOUBLE_EQ(p, 0.25);
}

TEST(SoftmaxCrossEntropy, LargeLogitsStayFinite) {
  Tensor<float> logits({1, 3}, std::vector<float>{1000.0f, 0.0f, -1000.0f});
  const std::vector<std::size_t> labels{0};
  const auto r = softmax_cross_entropy(logits, labels);
  EXPECT_TRUE(std::isfinite(r.loss));
  EXPECT_NEAR(r.loss, 0.0, 1e-12);
}

TEST(SoftmaxCrossEntropy, LabelOutOfRange) {
  Tensor<float> logits({1, 3});
  const std::vector<std::size_t> labels{3};
  EXPECT_THROW(softmax_cross_entropy(logits, labels), LabelError);
}

}  // namespace
}  // namespace specmon::nn
