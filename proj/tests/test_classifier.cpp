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
#include <numeric>

#include "specmon/classifier.hpp"
#include "specmon/error.hpp"
#include "specmon/synthgen.hpp"
#include "test_util.hpp"

namespace specmon {
namespace {

std::vector<RecordingPtr> small_corpus(std::uint64_t seed, std::size_t samples = 4096) {
  auto s = synth::default_scenario(seed);
  s.samples_per_recording = samples;
  s.recordings_per_pair = 1;
  std::vector<RecordingPtr> out;
  for (std::size_t p = 0; p < s.pairs.size(); ++p) {
    out.push_back(std::make_shared<IQRecording>(synth::generate_recording(s, p, 0)));
  }
  return out;
}

TEST(Model, ParameterCountsAndClassMaps) {
  EXPECT_EQ(count_parameters(build_model(TaskKind::kProtocol, 1)), 522323u);
  EXPECT_EQ(count_parameters(build_model(TaskKind::kTransmitter, 1)), 522580u);
  EXPECT_EQ(count_parameters(build_model(TaskKind::kJoint, 1)), 524636u);
  EXPECT_EQ(parameter_count_for(3), 522323u);
  EXPECT_EQ(build_model(TaskKind::kProtocol, 1).class_map(),
            (std::vector<std::string>{"4G", "5G NR", "802.11a"}));
  const auto joint = build_model(TaskKind::kJoint, 1).class_map();
  ASSERT_EQ(joint.size(), 12u);
  EXPECT_EQ(joint[0], "bes_4G");
  EXPECT_EQ(joint[11], "meb_802.11a");
}

TEST(Model, LayerOrderAndInitRange) {
  const auto model = build_model(TaskKind::kTransmitter, 4);
  const auto& params = model.parameters();
  ASSERT_EQ(params.size(), 16u);
  EXPECT_EQ(params[0].name, "conv1.weight");
  EXPECT_EQ(params[12].name, "fc1.weight");
  EXPECT_EQ(params[12].tensor->shape(), (nn::Shape{256, 1936}));
  EXPECT_EQ(params[14].tensor->shape(), (nn::Shape{4, 256}));
  const float bound = 1.0f / std::sqrt(4.0f * 9.0f);
  for (float v : params[0].tensor->values()) EXPECT_LE(std::abs(v), bound);
  for (float v : params[2].tensor->values()) EXPECT_EQ(v, 1.0f);  // gamma
  for (float v : params[3].tensor->values()) EXPECT_EQ(v, 0.0f);  // beta
}

TEST(Model, SameSeedSameWeights) {
  const auto a = build_model(TaskKind::kJoint, 9);
  const auto b = build_model(TaskKind::kJoint, 9);
  const auto c = build_model(TaskKind::kJoint, 10);
  for (std::size_t i = 0; i < a.parameters().size(); ++i) {
    EXPECT_EQ(a.parameters()[i].tensor->values(), b.parameters()[i].tensor->values());
  }
  EXPECT_NE(a.parameters()[0].tensor->values(), c.parameters()[0].tensor->values());
}

TEST(Model, ForwardShapes) {
  const auto model = build_model(TaskKind::kProtocol, 2);
  ForwardTrace trace;
  const auto logits = model.logits(testing::random_tensor<float>({2, 4, 1024}, 3, 1.0),
                                   &trace);
  EXPECT_EQ(logits.shape(), (nn::Shape{2, 3}));
  ASSERT_EQ(trace.conv.size(), 3u);
  EXPECT_EQ(trace.conv[0], (nn::Shape{2, 64, 1016}));
  EXPECT_EQ(trace.pool[0], (nn::Shape{2, 64, 508}));
  EXPECT_EQ(trace.conv[1], (nn::Shape{2, 32, 500}));
  EXPECT_EQ(trace.pool[1], (nn::Shape{2, 32, 250}));
  EXPECT_EQ(trace.conv[2], (nn::Shape{2, 16, 242}));
  EXPECT_EQ(trace.pool[2], (nn::Shape{2, 16, 121}));
  EXPECT_EQ(trace.flatten, (nn::Shape{2, 1936}));
  EXPECT_EQ(trace.hidden, (nn::Shape{2, 256}));
}

TEST(Model, SingleZeroWindowGivesFiniteLogits) {
  const auto model = build_model(TaskKind::kJoint, 2);
  const auto logits = model.logits(nn::Tensor<float>(nn::Shape{1, 4, 1024}));
  EXPECT_EQ(logits.shape(), (nn::Shape{1, 12}));
  for (float v : logits.values()) EXPECT_TRUE(std::isfinite(v));
  // Rank-2 input is one window.
  EXPECT_EQ(model.logits(nn::Tensor<float>(nn::Shape{4, 1024})).values(), logits.values());
}

TEST(Model, WrongShapeIsDimensionError) {
  const auto model = build_model(TaskKind::kProtocol, 2);
  try {
    model.logits(nn::Tensor<float>(nn::Shape{2, 4, 1000}));
    FAIL();
  } catch (const DimensionError& e) {
    EXPECT_NE(std::string(e.what()).find("[B, 4, 1024]"), std::string::npos);
  }
  EXPECT_THROW(check_input_shape({3, 1024}), DimensionError);
  EXPECT_NO_THROW(check_input_shape({4, 1024}));
}

TEST(Model, CopyIsDeep) {
  auto a = build_model(TaskKind::kProtocol, 2);
  auto b = a;
  (*b.parameters()[0].tensor)[0] += 1.0f;
  EXPECT_NE((*a.parameters()[0].tensor)[0], (*b.parameters()[0].tensor)[0]);
}

TEST(Predict, ArgmaxTiesGoLow) {
  const std::vector<float> s = {0.1f, 0.7f, 0.7f, 0.2f};
  EXPECT_EQ(argmax_class(s), 1u);
  const std::vector<float> flat(5, 0.0f);
  EXPECT_EQ(argmax_class(flat), 0u);
}

TEST(Predict, ArgmaxIsShiftInvariant) {
  auto scores = testing::random_tensor<float>({50, 7}, 5, 2.0);
  for (std::size_t r = 0; r < 50; ++r) {
    std::span<float> row = scores.data().subspan(r * 7, 7);
    const std::size_t before = argmax_class(row);
    for (float& v : row) v += 3.25f;
    EXPECT_EQ(argmax_class(row), before);
  }
}

TEST(Predict, ProbabilitiesSumToOneAndEmbeddingsAreRectified) {
  const auto model = build_model(TaskKind::kTransmitter, 6);
  const auto corpus = small_corpus(3);
  const auto windows = sample_windows(corpus, 8, TaskKind::kTransmitter, 1);
  const auto preds = predict_batch(model, make_batch(windows, NormalizePolicy::kNone));
  ASSERT_EQ(preds.size(), 8u);
  for (const auto& p : preds) {
    const double sum = std::accumulate(p.probabilities.begin(), p.probabilities.end(), 0.0);
    EXPECT_NEAR(sum, 1.0, 1e-5);
    EXPECT_EQ(p.class_name, model.class_map()[p.class_index]);
    EXPECT_EQ(p.class_index, argmax_class(p.probabilities));
  }
  const auto emb = extract_embedding(model, windows[0].channels());
  EXPECT_EQ(emb.size(), 256u);
  for (float v : emb) EXPECT_GE(v, 0.0f);
  EXPECT_EQ(predict(model, windows[0].channels()).class_index, preds[0].class_index);
}

TEST(Train, StepsPerEpoch) {
  EXPECT_EQ(steps_per_epoch(38000, 256), 149u);
  EXPECT_EQ(steps_per_epoch(256, 256), 1u);
  EXPECT_EQ(steps_per_epoch(257, 256), 2u);
}

TEST(Train, ConfigValidation) {
  TrainConfig cfg;
  cfg.lr = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.epochs = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Train, SameSeedSameModel) {
  const auto corpus = small_corpus(4);
  const auto windows = sample_windows(corpus, 60, TaskKind::kProtocol, 2);
  const auto split = split_dataset(windows, {48, 6, 6}, 3, SplitPolicy::kRandom);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 16;
  cfg.seed = 5;
  cfg.evals_per_epoch = 2;
  cfg.recalibration_windows = 32;
  auto a = build_model(TaskKind::kProtocol, 1);
  auto b = build_model(TaskKind::kProtocol, 1);
  const auto ha = train(a, split.train, split.val, cfg);
  const auto hb = train(b, split.train, split.val, cfg);
  ASSERT_EQ(ha.records.size(), 2u);
  EXPECT_EQ(ha.steps_per_epoch, 3u);
  EXPECT_DOUBLE_EQ(ha.records[0].epoch, 2.0 / 3.0);
  for (std::size_t i = 0; i < ha.records.size(); ++i) {
    EXPECT_EQ(ha.records[i].train_loss, hb.records[i].train_loss);
    EXPECT_EQ(ha.records[i].val_accuracy, hb.records[i].val_accuracy);
  }
  for (std::size_t i = 0; i < a.parameters().size(); ++i) {
    EXPECT_EQ(a.parameters()[i].tensor->values(), b.parameters()[i].tensor->values());
  }
  for (std::size_t i = 0; i < a.norm_states().size(); ++i) {
    EXPECT_EQ(a.norm_states()[i].running_var, b.norm_states()[i].running_var);
  }
  EXPECT_EQ(a.train_config().seed, 5u);
}

TEST(Train, EmptyAndMislabeledInputsAreRejected) {
  auto model = build_model(TaskKind::kProtocol, 1);
  const auto corpus = small_corpus(4);
  const auto windows = sample_windows(corpus, 12, TaskKind::kProtocol, 2);
  TrainConfig cfg;
  cfg.epochs = 1;
  EXPECT_THROW(train(model, {}, windows, cfg), InputError);
  EXPECT_THROW(train(model, windows, {}, cfg), InputError);
}

TEST(Train, LearnsAnEasyProblem) {
  // wifi-like against lte-like is separable within a few steps.
  auto s = synth::default_scenario(8);
  s.samples_per_recording = 20'000;
  s.recordings_per_pair = 1;
  std::vector<RecordingPtr> corpus;
  for (std::size_t p = 0; p < s.pairs.size(); ++p) {
    corpus.push_back(std::make_shared<IQRecording>(synth::generate_recording(s, p, 0)));
  }
  const auto windows = sample_windows(corpus, 300, TaskKind::kProtocol, 1);
  const auto split = split_dataset(windows, {240, 30, 30}, 2, SplitPolicy::kRandom);
  auto model = build_model(TaskKind::kProtocol, 3);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 32;
  cfg.seed = 3;
  cfg.recalibration_windows = 128;
  const auto history = train(model, split.train, split.val, cfg);
  EXPECT_GT(history.records[history.best_record].val_accuracy, 0.5);
  for (const auto& r : history.records) EXPECT_TRUE(std::isfinite(r.train_loss));
}

}  // namespace
}  // namespace specmon
