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


#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "specmon/classifier.hpp"

namespace {

using specmon::nn::Graph;
using specmon::nn::Mode;
using specmon::nn::Tensor;

Tensor<float> random_batch(std::size_t batch, std::uint64_t seed) {
  Tensor<float> t({batch, specmon::kFeatureChannels, specmon::kWindowLength});
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> dist(0.0f, 1.0f);
  for (float& v : t.data()) v = dist(rng);
  return t;
}

// One optimizer step: forward, loss, backward, Adam.
void BM_TrainStep(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  auto model = specmon::build_model(specmon::TaskKind::kTransmitter, 1);
  specmon::nn::Adam<float> adam(model.parameters(), {});
  std::mt19937_64 rng(2);
  const Tensor<float> x = random_batch(batch, 3);
  std::vector<std::size_t> labels(batch);
  for (std::size_t i = 0; i < batch; ++i) labels[i] = i % 4;
  for (auto _ : state) {
    Graph<float> graph;
    adam.zero_grad();
    auto logits = model.forward(graph, Graph<float>::leaf(x), Mode::kTrain, &rng);
    auto loss = graph.softmax_cross_entropy(logits, labels);
    graph.backward(loss);
    adam.step();
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * batch));
}

void BM_EvalLogits(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const auto model = specmon::build_model(specmon::TaskKind::kTransmitter, 1);
  const Tensor<float> x = random_batch(batch, 3);
  for (auto _ : state) {
    auto y = model.logits(x);
    benchmark::DoNotOptimize(y.data().data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * batch));
}

}  // namespace

BENCHMARK(BM_TrainStep)->ArgNames({"B"})->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EvalLogits)->ArgNames({"B"})->Arg(64)->Unit(benchmark::kMillisecond);
