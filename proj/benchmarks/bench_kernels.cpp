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

#include "specmon/nn/kernels.hpp"

using specmon::nn::Tensor;

namespace {

Tensor<float> random_tensor(specmon::nn::Shape shape, std::uint64_t seed) {
  Tensor<float> t(std::move(shape));
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> dist(0.0f, 1.0f);
  for (float& v : t.data()) v = dist(rng);
  return t;
}

// Args: batch, cin, cout, length
void BM_Conv1dForward(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const auto cin = static_cast<std::size_t>(state.range(1));
  const auto cout = static_cast<std::size_t>(state.range(2));
  const auto len = static_cast<std::size_t>(state.range(3));
  auto x = random_tensor({batch, cin, len}, 1);
  auto w = random_tensor({cout, cin, 9}, 2);
  auto b = random_tensor({cout}, 3);
  for (auto _ : state) {
    auto y = specmon::nn::conv1d_forward(x, w, b);
    benchmark::DoNotOptimize(y.data().data());
  }
  const double macs = double(batch) * cout * cin * 9 * (len - 8);
  state.counters["GMAC/s"] = benchmark::Counter(
      macs, benchmark::Counter::kIsIterationInvariantRate,
      benchmark::Counter::kIs1000);
}

void BM_Conv1dBackward(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const auto cin = static_cast<std::size_t>(state.range(1));
  const auto cout = static_cast<std::size_t>(state.range(2));
  const auto len = static_cast<std::size_t>(state.range(3));
  auto x = random_tensor({batch, cin, len}, 1);
  auto w = random_tensor({cout, cin, 9}, 2);
  auto gy = random_tensor({batch, cout, len - 8}, 3);
  std::vector<float> gx(x.size()), gw(w.size()), gb(cout);
  for (auto _ : state) {
    specmon::nn::conv1d_backward<float>(x, w, gy.data(), gx, gw, gb);
    benchmark::DoNotOptimize(gw.data());
  }
  const double macs = 2.0 * double(batch) * cout * cin * 9 * (len - 8);
  state.counters["GMAC/s"] = benchmark::Counter(
      macs, benchmark::Counter::kIsIterationInvariantRate,
      benchmark::Counter::kIs1000);
}

void BM_DenseForward(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  auto x = random_tensor({batch, 1936}, 1);
  auto w = random_tensor({256, 1936}, 2);
  auto b = random_tensor({256}, 3);
  for (auto _ : state) {
    auto y = specmon::nn::dense_forward(x, w, b);
    benchmark::DoNotOptimize(y.data().data());
  }
}

}  // namespace

BENCHMARK(BM_Conv1dForward)
    ->ArgNames({"B", "Cin", "Cout", "L"})
    ->Args({32, 4, 64, 1024})
    ->Args({32, 64, 32, 508})
    ->Args({32, 32, 16, 250})
    ->Unit(benchmark::kMillisecond);

BENCHMARK(BM_Conv1dBackward)
    ->ArgNames({"B", "Cin", "Cout", "L"})
    ->Args({32, 4, 64, 1024})
    ->Args({32, 64, 32, 508})
    ->Args({32, 32, 16, 250})
    ->Unit(benchmark::kMillisecond);

BENCHMARK(BM_DenseForward)->ArgNames({"B"})->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
