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

#include "specmon/error.hpp"
#include "specmon/nn/tensor.hpp"

namespace specmon::nn {
namespace {

TEST(Tensor, ShapeAndFill) {
  Tensor<float> t({2, 3}, 1.5f);
  EXPECT_EQ(t.rank(), 2u);
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.dim(1), 3u);
  for (float v : t.data()) EXPECT_EQ(v, 1.5f);
}

TEST(Tensor, ZeroAxisIsDimensionError) {
  EXPECT_THROW(Tensor<float>({2, 0}), DimensionError);
}

TEST(Tensor, DataSizeMismatchIsDimensionError) {
  EXPECT_THROW(Tensor<float>({2, 2}, std::vector<float>{1, 2, 3}), DimensionError);
}

TEST(Tensor, ReshapeKeepsValues) {
  Tensor<double> t({2, 3}, std::vector<double>{0, 1, 2, 3, 4, 5});
  auto r = t.reshaped({3, 2});
  EXPECT_EQ(r.shape(), (Shape{3, 2}));
  EXPECT_EQ(r.values(), t.values());
  EXPECT_THROW(t.reshaped({4, 2}), DimensionError);
}

TEST(Tensor, GradientSlot) {
  Tensor<float> t({3}, 2.0f);
  EXPECT_FALSE(t.has_grad());
  auto g = t.ensure_grad();
  ASSERT_EQ(g.size(), 3u);
  g[1] = 4.0f;
  EXPECT_EQ(t.grad()[1], 4.0f);
  t.zero_grad();
  EXPECT_EQ(t.grad()[1], 0.0f);
  t.clear_grad();
  EXPECT_FALSE(t.has_grad());
}

TEST(Tensor, ShapeString) { EXPECT_EQ(shape_string({4, 1024}), "[4,1024]"); }

}  // namespace
}  // namespace specmon::nn
