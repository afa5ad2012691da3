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

#include "specmon/runtime.hpp"

#include <algorithm>
#include <cstdlib>
#include <random>
#include <string>
#include <mutex>
#include <thread>
#include <vector>

#include "specmon/error.hpp"

namespace specmon {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimension: return "dimension error";
    case ErrorKind::kDegenerateInput: return "degenerate input";
    case ErrorKind::kLabel: return "label error";
    case ErrorKind::kState: return "state error";
    case ErrorKind::kTraining: return "training error";
    case ErrorKind::kFormat: return "format error";
    case ErrorKind::kCorruption: return "corruption error";
    case ErrorKind::kVocabulary: return "vocabulary error";
    case ErrorKind::kCoverage: return "coverage error";
    case ErrorKind::kConfig: return "configuration error";
    case ErrorKind::kInput: return "input error";
    case ErrorKind::kEvaluation: return "evaluation error";
    case ErrorKind::kIo: return "I/O error";
  }
  return "error";
}

std::size_t thread_count() {
  static const std::size_t count = [] {
    std::size_t n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("SPECMON_THREADS")) {
      char* end = nullptr;
      const long cap = std::strtol(env, &end, 10);
      if (end != env && cap > 0) n = std::min<std::size_t>(n, cap);
    }
    return n;
  }();
  return count;
}

void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& fn) {
  if (end <= begin) return;
  const std::size_t n = end - begin;
  const std::size_t workers = std::min(thread_count(), n);
  if (workers <= 1) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&](std::size_t lo, std::size_t hi) {
    try {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t lo = begin + w * chunk;
    const std::size_t hi = std::min(end, lo + chunk);
    if (lo < hi) pool.emplace_back(run, lo, hi);
  }
  run(begin, std::min(end, begin + chunk));
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> tags) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * tags.size());
  auto push = [&](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(master);
  for (std::uint64_t tag : tags) push(tag);
  std::seed_seq seq(words.begin(), words.end());
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace specmon
