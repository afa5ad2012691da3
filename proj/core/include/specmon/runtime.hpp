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
#include <cstdint>
#include <functional>
#include <initializer_list>

namespace specmon {

// Worker count for internal parallel loops. Reads SPECMON_THREADS once; falls
// back to the hardware concurrency. Always >= 1.
std::size_t thread_count();

// Runs fn(i) for every i in [begin, end). Iterations must be independent:
// callers only parallelize work whose per-element reduction order does not
// depend on how the range is partitioned.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& fn);

// Mixes a master seed with a list of tags into an independent 64-bit seed.
std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> tags);

}  // namespace specmon
