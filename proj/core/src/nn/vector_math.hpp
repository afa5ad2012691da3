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

#include <cmath>
#include <cstddef>
#include <cstring>
#include <type_traits>
#include <utility>

#if defined(__FMA__) || defined(__AVX512F__)
#include <immintrin.h>
#endif

namespace specmon::nn::detail {

// y[i] += a * x[i]
template <typename T>
inline void axpy(T* __restrict y, T a, const T* __restrict x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

// Eight interleaved partial sums combined in a fixed tree. The lane layout is
// part of the numeric contract: it keeps results independent of the vector
// width the compiler picks.
template <typename T>
inline T dot(const T* __restrict a, const T* __restrict b, std::size_t n) {
  T acc[8] = {};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t j = 0; j < 8; ++j) acc[j] = std::fma(a[i + j], b[i + j], acc[j]);
  }
  T tail{};
  for (; i < n; ++i) tail = std::fma(a[i], b[i], tail);
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) +
         ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail;
}

template <typename T>
inline T sum(const T* __restrict a, std::size_t n) {
  T acc[8] = {};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t j = 0; j < 8; ++j) acc[j] += a[i + j];
  }
  T tail{};
  for (; i < n; ++i) tail += a[i];
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) +
         ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail;
}

}  // namespace specmon::nn::detail

namespace specmon::nn::detail {

// Vectors through the GCC/Clang vector extension, as wide as the target
// allows. Lane-wise arithmetic only, and every multiply-accumulate is a fused
// multiply-add (scalar code uses std::fma), so per-element results match the
// scalar code exactly whatever the width.
#if defined(__AVX512F__)
inline constexpr std::size_t kVectorBytes = 64;
#else
inline constexpr std::size_t kVectorBytes = 32;
#endif

template <typename T>
struct Simd {
  typedef T type __attribute__((vector_size(kVectorBytes)));
  static constexpr std::size_t kWidth = kVectorBytes / sizeof(T);
};

// a * b + c with a single rounding.
template <typename V>
inline V fmadd(V a, V b, V c) {
  if constexpr (std::is_floating_point_v<V>) {
    return std::fma(a, b, c);
  }
#if defined(__AVX512F__)
  else if constexpr (sizeof(V) == 64 && std::is_same_v<std::remove_cvref_t<decltype(a[0])>, float>) {
    return reinterpret_cast<V>(_mm512_fmadd_ps(reinterpret_cast<__m512>(a),
                                               reinterpret_cast<__m512>(b),
                                               reinterpret_cast<__m512>(c)));
  } else if constexpr (sizeof(V) == 64) {
    return reinterpret_cast<V>(_mm512_fmadd_pd(reinterpret_cast<__m512d>(a),
                                               reinterpret_cast<__m512d>(b),
                                               reinterpret_cast<__m512d>(c)));
  }
#endif
#if defined(__FMA__)
  else if constexpr (sizeof(V) == 32 && std::is_same_v<std::remove_cvref_t<decltype(a[0])>, float>) {
    return reinterpret_cast<V>(_mm256_fmadd_ps(reinterpret_cast<__m256>(a),
                                               reinterpret_cast<__m256>(b),
                                               reinterpret_cast<__m256>(c)));
  } else if constexpr (sizeof(V) == 32) {
    return reinterpret_cast<V>(_mm256_fmadd_pd(reinterpret_cast<__m256d>(a),
                                               reinterpret_cast<__m256d>(b),
                                               reinterpret_cast<__m256d>(c)));
  }
#endif
  else {
    V out;
    for (std::size_t l = 0; l < sizeof(V) / sizeof(a[0]); ++l) {
      out[l] = std::fma(a[l], b[l], c[l]);
    }
    return out;
  }
}

template <typename T>
inline typename Simd<T>::type load(const T* p) {
  typename Simd<T>::type v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

template <typename T>
inline void store(T* p, typename Simd<T>::type v) {
  std::memcpy(p, &v, sizeof v);
}

template <typename T>
inline typename Simd<T>::type broadcast(T value) {
  // x - 0 is exact for every x, signed zeros included.
  return value - typename Simd<T>::type{};
}

}  // namespace specmon::nn::detail
