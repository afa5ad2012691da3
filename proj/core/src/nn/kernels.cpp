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

#include "specmon/nn/kernels.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>
#include <type_traits>

#include "specmon/runtime.hpp"
#include "vector_math.hpp"

namespace specmon::nn {
namespace {

void require_rank(const Shape& shape, std::size_t rank, const char* what) {
  if (shape.size() != rank) {
    throw DimensionError(std::string(what) + " expects rank " +
                         std::to_string(rank) + ", got shape " +
                         shape_string(shape));
  }
}

void require_axis(const char* what, const char* axis, std::size_t got,
                  std::size_t expected) {
  if (got != expected) {
    throw DimensionError(std::string(what) + ": axis " + axis + " is " +
                         std::to_string(got) + ", expected " +
                         std::to_string(expected));
  }
}

}  // namespace

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

// --- conv1d -----------------------------------------------------------------
//
// The tiles below keep a block of outputs in registers. Each output element
// still accumulates bias first and then (ci, k) in lexicographic order with
// fused multiply-adds, the same sequence as a textbook five-loop convolution.

namespace {

constexpr std::size_t kTileC = 4;    // channels per tile
constexpr std::size_t kTileV = 4;    // vectors per channel in a full tile
constexpr std::size_t kLanes = 16;   // weight-gradient partial sums

template <typename T, std::size_t CB, std::size_t NV>
inline void conv_forward_tile(const T* x, const T* w, const T* b, T* y,
                              std::size_t co0, std::size_t t0, std::size_t cin,
                              std::size_t len, std::size_t kernel,
                              std::size_t lout) {
  using V = typename detail::Simd<T>::type;
  constexpr std::size_t kW = detail::Simd<T>::kWidth;
  V acc[CB][NV];
#pragma GCC unroll 8
  for (std::size_t c = 0; c < CB; ++c) {
#pragma GCC unroll 8
    for (std::size_t j = 0; j < NV; ++j) acc[c][j] = detail::broadcast<T>(b[co0 + c]);
  }
  for (std::size_t ci = 0; ci < cin; ++ci) {
    const T* xrow = x + ci * len + t0;
    const T* wbase = w + (co0 * cin + ci) * kernel;
    for (std::size_t k = 0; k < kernel; ++k) {
      V xv[NV];
#pragma GCC unroll 8
      for (std::size_t j = 0; j < NV; ++j) xv[j] = detail::load<T>(xrow + k + j * kW);
#pragma GCC unroll 8
      for (std::size_t c = 0; c < CB; ++c) {
        const V wv = detail::broadcast<T>(wbase[c * cin * kernel + k]);
#pragma GCC unroll 8
        for (std::size_t j = 0; j < NV; ++j) acc[c][j] = detail::fmadd(wv, xv[j], acc[c][j]);
      }
    }
  }
#pragma GCC unroll 8
  for (std::size_t c = 0; c < CB; ++c) {
    T* row = y + (co0 + c) * lout + t0;
#pragma GCC unroll 8
    for (std::size_t j = 0; j < NV; ++j) {
      const V out = acc[c][j];
      detail::store<T>(row + j * kW, out);
    }
  }
}

// Scalar fallback for tile edges; same accumulation order as the tiles.
template <typename T>
inline T conv_forward_point(const T* x, const T* w, T bias, std::size_t co,
                            std::size_t t, std::size_t cin, std::size_t len,
                            std::size_t kernel) {
  T acc = bias;
  for (std::size_t ci = 0; ci < cin; ++ci) {
    for (std::size_t k = 0; k < kernel; ++k) {
      acc = std::fma(w[(co * cin + ci) * kernel + k], x[ci * len + t + k], acc);
    }
  }
  return acc;
}

// grad_input[ci, s] += sum_co sum_k w[co, ci, k] * gy[co, s - k], reading a
// zero-padded copy of gy so every tile is branch-free.
template <typename T, std::size_t CB, std::size_t NV>
inline void conv_grad_input_tile(const T* gy_pad, std::size_t pad_len,
                                 const T* w, T* gx, std::size_t ci0,
                                 std::size_t s0, std::size_t cin,
                                 std::size_t cout, std::size_t len,
                                 std::size_t kernel) {
  using V = typename detail::Simd<T>::type;
  constexpr std::size_t kW = detail::Simd<T>::kWidth;
  V acc[CB][NV];
#pragma GCC unroll 8
  for (std::size_t c = 0; c < CB; ++c) {
#pragma GCC unroll 8
    for (std::size_t j = 0; j < NV; ++j) {
      acc[c][j] = detail::load<T>(gx + (ci0 + c) * len + s0 + j * kW);
    }
  }
  for (std::size_t co = 0; co < cout; ++co) {
    const T* prow = gy_pad + co * pad_len + s0 + (kernel - 1);
    const T* wbase = w + (co * cin + ci0) * kernel;
    for (std::size_t k = 0; k < kernel; ++k) {
      V src[NV];
#pragma GCC unroll 8
      for (std::size_t j = 0; j < NV; ++j) src[j] = detail::load<T>(prow - k + j * kW);
#pragma GCC unroll 8
      for (std::size_t c = 0; c < CB; ++c) {
        const V wv = detail::broadcast<T>(wbase[c * kernel + k]);
#pragma GCC unroll 8
        for (std::size_t j = 0; j < NV; ++j) acc[c][j] = detail::fmadd(wv, src[j], acc[c][j]);
      }
    }
  }
#pragma GCC unroll 8
  for (std::size_t c = 0; c < CB; ++c) {
#pragma GCC unroll 8
    for (std::size_t j = 0; j < NV; ++j) {
      const V out = acc[c][j];
      detail::store<T>(gx + (ci0 + c) * len + s0 + j * kW, out);
    }
  }
}

template <typename T>
inline void conv_grad_input_point(const T* gy_pad, std::size_t pad_len,
                                  const T* w, T* gx, std::size_t ci,
                                  std::size_t s, std::size_t cin,
                                  std::size_t cout, std::size_t len,
                                  std::size_t kernel) {
  T acc = gx[ci * len + s];
  for (std::size_t co = 0; co < cout; ++co) {
    const T* prow = gy_pad + co * pad_len + s + (kernel - 1);
    for (std::size_t k = 0; k < kernel; ++k) {
      acc = std::fma(w[(co * cin + ci) * kernel + k],
                     prow[-static_cast<std::ptrdiff_t>(k)], acc);
    }
  }
  gx[ci * len + s] = acc;
}

// Weight gradient for OB output channels times CB input channels over samples
// [n0, n1). Each (co, ci, k) sum keeps kLanes interleaved partial sums in
// `lanes`, laid out [Cout][Cin][K][kLanes], that persist across calls. A
// ragged row end is staged into zero-padded buffers so it runs through the
// same vector code.
template <std::size_t K, std::size_t OB, std::size_t CB, typename T>
inline void conv_grad_weight_fixed(const T* gy, const T* x, std::size_t n0,
                                   std::size_t n1, std::size_t cin, std::size_t cout,
                                   std::size_t co0, std::size_t ci0,
                                   std::size_t len, std::size_t lout, T* lanes) {
  using V = typename detail::Simd<T>::type;
  constexpr std::size_t kW = detail::Simd<T>::kWidth;
  constexpr std::size_t NV = kLanes / kW;
  const auto slot = [&](std::size_t o, std::size_t c, std::size_t k, std::size_t j) {
    return lanes + (((co0 + o) * cin + ci0 + c) * K + k) * kLanes + j * kW;
  };
  V acc[OB][CB][K][NV];
#pragma GCC unroll 8
  for (std::size_t o = 0; o < OB; ++o) {
#pragma GCC unroll 8
    for (std::size_t c = 0; c < CB; ++c) {
#pragma GCC unroll 16
      for (std::size_t k = 0; k < K; ++k) {
#pragma GCC unroll 8
        for (std::size_t j = 0; j < NV; ++j) acc[o][c][k][j] = detail::load<T>(slot(o, c, k, j));
      }
    }
  }
  const auto step = [&](const T* const* grows, const T* const* xrows, std::size_t t) {
    V g[OB][NV];
#pragma GCC unroll 8
    for (std::size_t o = 0; o < OB; ++o) {
#pragma GCC unroll 8
      for (std::size_t j = 0; j < NV; ++j) g[o][j] = detail::load<T>(grows[o] + t + j * kW);
    }
#pragma GCC unroll 8
    for (std::size_t c = 0; c < CB; ++c) {
#pragma GCC unroll 16
      for (std::size_t k = 0; k < K; ++k) {
#pragma GCC unroll 8
        for (std::size_t j = 0; j < NV; ++j) {
          const V xv = detail::load<T>(xrows[c] + t + k + j * kW);
#pragma GCC unroll 8
          for (std::size_t o = 0; o < OB; ++o) {
            acc[o][c][k][j] = detail::fmadd(g[o][j], xv, acc[o][c][k][j]);
          }
        }
      }
    }
  };
  const std::size_t body = lout - lout % kLanes;
  T gtail[OB][kLanes];
  T xtail[CB][kLanes + K - 1];
  for (std::size_t n = n0; n < n1; ++n) {
    const T* grows[OB];
    const T* xrows[CB];
    for (std::size_t o = 0; o < OB; ++o) grows[o] = gy + (n * cout + co0 + o) * lout;
    for (std::size_t c = 0; c < CB; ++c) xrows[c] = x + (n * cin + ci0 + c) * len;
    for (std::size_t t = 0; t < body; t += kLanes) step(grows, xrows, t);
    if (body == lout) continue;
    const std::size_t rest = lout - body;
    for (std::size_t o = 0; o < OB; ++o) {
      std::fill(gtail[o], gtail[o] + kLanes, T{});
      std::copy(grows[o] + body, grows[o] + lout, gtail[o]);
      grows[o] = gtail[o];
    }
    for (std::size_t c = 0; c < CB; ++c) {
      std::fill(xtail[c], xtail[c] + kLanes + K - 1, T{});
      std::copy(xrows[c] + body, xrows[c] + body + rest + K - 1, xtail[c]);
      xrows[c] = xtail[c];
    }
    step(grows, xrows, 0);
  }
#pragma GCC unroll 8
  for (std::size_t o = 0; o < OB; ++o) {
#pragma GCC unroll 8
    for (std::size_t c = 0; c < CB; ++c) {
#pragma GCC unroll 16
      for (std::size_t k = 0; k < K; ++k) {
#pragma GCC unroll 8
        for (std::size_t j = 0; j < NV; ++j) {
          const V out = acc[o][c][k][j];
          std::memcpy(slot(o, c, k, j), &out, sizeof(V));
        }
      }
    }
  }
}

template <typename T>
inline void conv_grad_weight_generic(const T* gyrow, const T* xrow,
                                     std::size_t lout, std::size_t kernel,
                                     T* gw) {
  for (std::size_t k = 0; k < kernel; ++k) {
    gw[k] += detail::dot(gyrow, xrow + k, lout);
  }
}

// Visits [0, extent) in full tiles, then single-vector tiles. A ragged end is
// covered by one more single-vector tile ending at `extent`, which recomputes
// a few positions; callers must be idempotent per position. Extents shorter
// than one vector fall back to points.
template <typename T, typename Full, typename Single, typename Point>
inline void tile_positions(std::size_t extent, Full full, Single single, Point point) {
  constexpr std::size_t kW = detail::Simd<T>::kWidth;
  std::size_t t = 0;
  for (; t + kTileV * kW <= extent; t += kTileV * kW) full(t);
  for (; t + kW <= extent; t += kW) single(t);
  if (t == extent) return;
  if (extent >= kW) {
    single(extent - kW);
  } else {
    for (; t < extent; ++t) point(t);
  }
}

inline std::size_t round_up(std::size_t n, std::size_t m) { return (n + m - 1) / m * m; }

}  // namespace

template <typename T>
Tensor<T> conv1d_forward(const Tensor<T>& input, const Tensor<T>& weight,
                         const Tensor<T>& bias) {
  require_rank(input.shape(), 3, "conv1d input");
  require_rank(weight.shape(), 3, "conv1d weight");
  require_rank(bias.shape(), 1, "conv1d bias");
  const std::size_t batch = input.dim(0), cin = input.dim(1), len = input.dim(2);
  const std::size_t cout = weight.dim(0), kernel = weight.dim(2);
  require_axis("conv1d", "Cin (weight axis 1)", weight.dim(1), cin);
  require_axis("conv1d", "Cout (bias axis 0)", bias.dim(0), cout);
  if (len < kernel) {
    throw DimensionError("conv1d: input axis L is " + std::to_string(len) +
                         ", shorter than kernel " + std::to_string(kernel));
  }
  const std::size_t lout = len - kernel + 1;
  Tensor<T> out({batch, cout, lout});
  const T* x = input.data().data();
  const T* w = weight.data().data();
  const T* b = bias.data().data();
  T* y = out.data().data();
  parallel_for(0, batch, [&](std::size_t n) {
    const T* xs = x + n * cin * len;
    T* ys = y + n * cout * lout;
    std::size_t co = 0;
    for (; co + kTileC <= cout; co += kTileC) {
      tile_positions<T>(
          lout,
          [&](std::size_t t) {
            conv_forward_tile<T, kTileC, kTileV>(xs, w, b, ys, co, t, cin, len,
                                                 kernel, lout);
          },
          [&](std::size_t t) {
            conv_forward_tile<T, kTileC, 1>(xs, w, b, ys, co, t, cin, len,
                                            kernel, lout);
          },
          [&](std::size_t t) {
            for (std::size_t c = co; c < co + kTileC; ++c) {
              ys[c * lout + t] = conv_forward_point(xs, w, b[c], c, t, cin, len, kernel);
            }
          });
    }
    for (; co < cout; ++co) {
      for (std::size_t t = 0; t < lout; ++t) {
        ys[co * lout + t] = conv_forward_point(xs, w, b[co], co, t, cin, len, kernel);
      }
    }
  });
  return out;
}

template <typename T>
void conv1d_backward(const Tensor<T>& input, const Tensor<T>& weight,
                     std::span<const T> grad_output, std::span<T> grad_input,
                     std::span<T> grad_weight, std::span<T> grad_bias) {
  const std::size_t batch = input.dim(0), cin = input.dim(1), len = input.dim(2);
  const std::size_t cout = weight.dim(0), kernel = weight.dim(2);
  const std::size_t lout = len - kernel + 1;
  const T* x = input.data().data();
  const T* w = weight.data().data();
  const T* gy = grad_output.data();

  if (!grad_input.empty()) {
    // Rows are widened to a whole number of vectors so the tiles never need a
    // ragged edge: gy is zero-padded on both sides and grad_input is staged in
    // a widened copy.
    constexpr std::size_t kW = detail::Simd<T>::kWidth;
    const std::size_t wide = round_up(len, kW);
    const std::size_t pad_len = wide + kernel - 1;
    parallel_for(0, batch, [&](std::size_t n) {
      std::vector<T> pad(cout * pad_len, T{});
      for (std::size_t co = 0; co < cout; ++co) {
        const T* src = gy + (n * cout + co) * lout;
        std::copy(src, src + lout, pad.data() + co * pad_len + (kernel - 1));
      }
      std::vector<T> stage(cin * wide, T{});
      T* gx = grad_input.data() + n * cin * len;
      for (std::size_t ci = 0; ci < cin; ++ci) {
        std::copy(gx + ci * len, gx + (ci + 1) * len, stage.data() + ci * wide);
      }
      const T* p = pad.data();
      T* gs = stage.data();
      std::size_t ci = 0;
      for (; ci + kTileC <= cin; ci += kTileC) {
        std::size_t s = 0;
        for (; s + kTileV * kW <= wide; s += kTileV * kW) {
          conv_grad_input_tile<T, kTileC, kTileV>(p, pad_len, w, gs, ci, s, cin,
                                                  cout, wide, kernel);
        }
        for (; s < wide; s += kW) {
          conv_grad_input_tile<T, kTileC, 1>(p, pad_len, w, gs, ci, s, cin, cout,
                                             wide, kernel);
        }
      }
      for (; ci < cin; ++ci) {
        for (std::size_t s = 0; s < len; ++s) {
          conv_grad_input_point(p, pad_len, w, gs, ci, s, cin, cout, wide, kernel);
        }
      }
      for (std::size_t c = 0; c < cin; ++c) {
        std::copy(gs + c * wide, gs + c * wide + len, gx + c * len);
      }
    });
  }
  if (!grad_bias.empty()) {
    for (std::size_t co = 0; co < cout; ++co) {
      for (std::size_t n = 0; n < batch; ++n) {
        grad_bias[co] += detail::sum(gy + (n * cout + co) * lout, lout);
      }
    }
  }
  if (!grad_weight.empty()) {
    T* gw = grad_weight.data();
    if (kernel == 9) {
      // Samples are taken a few at a time so their rows stay cache resident
      // while every (co, ci) block sweeps over them.
      constexpr std::size_t kOut = 3;
      constexpr std::size_t kSamples = 4;
      std::vector<T> lanes(cout * cin * 9 * kLanes, T{});
      const std::size_t blocks = cout / kOut;
      for (std::size_t n0 = 0; n0 < batch; n0 += kSamples) {
        const std::size_t n1 = std::min(batch, n0 + kSamples);
        parallel_for(0, blocks + (cout - blocks * kOut), [&](std::size_t b) {
          const std::size_t co = b < blocks ? b * kOut : blocks * kOut + (b - blocks);
          for (std::size_t ci = 0; ci < cin; ++ci) {
            if (b < blocks) {
              conv_grad_weight_fixed<9, kOut, 1>(gy, x, n0, n1, cin, cout, co, ci,
                                                 len, lout, lanes.data());
            } else {
              conv_grad_weight_fixed<9, 1, 1>(gy, x, n0, n1, cin, cout, co, ci, len,
                                              lout, lanes.data());
            }
          }
        });
      }
      for (std::size_t i = 0; i < cout * cin * 9; ++i) {
        T s{};
        for (std::size_t l = 0; l < kLanes; ++l) s += lanes[i * kLanes + l];
        gw[i] += s;
      }
      return;
    }
    parallel_for(0, cout, [&](std::size_t co) {
      for (std::size_t n = 0; n < batch; ++n) {
        const T* gyrow = gy + (n * cout + co) * lout;
        for (std::size_t ci = 0; ci < cin; ++ci) {
          conv_grad_weight_generic(gyrow, x + (n * cin + ci) * len, lout, kernel,
                                   gw + (co * cin + ci) * kernel);
        }
      }
    });
  }
}

// --- maxpool1d --------------------------------------------------------------

template <typename T>
PoolResult<T> maxpool1d_forward(const Tensor<T>& input) {
  require_rank(input.shape(), 3, "maxpool1d input");
  const std::size_t batch = input.dim(0), ch = input.dim(1), len = input.dim(2);
  if (len < 2) {
    throw DegenerateInputError("maxpool1d: input axis L is " +
                               std::to_string(len) + ", needs at least 2");
  }
  const std::size_t lout = len / 2;
  PoolResult<T> result{Tensor<T>({batch, ch, lout}), {}};
  result.argmax.resize(batch * ch * lout);
  const T* x = input.data().data();
  T* y = result.output.data().data();
  for (std::size_t r = 0; r < batch * ch; ++r) {
    const T* xrow = x + r * len;
    for (std::size_t t = 0; t < lout; ++t) {
      const std::size_t a = 2 * t;
      const std::size_t pick = xrow[a + 1] > xrow[a] ? a + 1 : a;
      y[r * lout + t] = xrow[pick];
      result.argmax[r * lout + t] = static_cast<std::uint32_t>(r * len + pick);
    }
  }
  return result;
}

template <typename T>
void maxpool1d_backward(std::span<const std::uint32_t> argmax,
                        std::span<const T> grad_output,
                        std::span<T> grad_input) {
  for (std::size_t i = 0; i < argmax.size(); ++i) {
    grad_input[argmax[i]] += grad_output[i];
  }
}

// --- batchnorm1d ------------------------------------------------------------

namespace {

template <typename T>
void check_batchnorm(const Tensor<T>& input, const Tensor<T>& gamma,
                     const Tensor<T>& beta, const BatchNormState<T>& state) {
  require_rank(input.shape(), 3, "batchnorm1d input");
  const std::size_t ch = input.dim(1);
  require_axis("batchnorm1d", "C (gamma axis 0)", gamma.size(), ch);
  require_axis("batchnorm1d", "C (beta axis 0)", beta.size(), ch);
  require_axis("batchnorm1d", "C (running stats)", state.running_mean.size(), ch);
}

template <typename T>
Tensor<T> batchnorm_apply(const Tensor<T>& input, const Tensor<T>& gamma,
                          const Tensor<T>& beta, std::vector<T> mean,
                          std::vector<T> inv_std, BatchNormCache<T>* cache) {
  const std::size_t batch = input.dim(0), ch = input.dim(1), len = input.dim(2);
  Tensor<T> out(input.shape());
  const T* x = input.data().data();
  T* y = out.data().data();
  const T* g = gamma.data().data();
  const T* b = beta.data().data();
  parallel_for(0, batch, [&](std::size_t n) {
    for (std::size_t c = 0; c < ch; ++c) {
      const T* row = x + (n * ch + c) * len;
      T* orow = y + (n * ch + c) * len;
      const T scale = g[c] * inv_std[c];
      const T m = mean[c];
      for (std::size_t t = 0; t < len; ++t) orow[t] = (row[t] - m) * scale + b[c];
    }
  });
  if (cache) {
    cache->mean = std::move(mean);
    cache->inv_std = std::move(inv_std);
  }
  return out;
}

}  // namespace

template <typename T>
Tensor<T> batchnorm1d_forward(const Tensor<T>& input, const Tensor<T>& gamma,
                              const Tensor<T>& beta,
                              const BatchNormState<T>& state,
                              BatchNormCache<T>* cache) {
  check_batchnorm(input, gamma, beta, state);
  const std::size_t ch = input.dim(1);
  std::vector<T> mean(ch), inv_std(ch);
  for (std::size_t c = 0; c < ch; ++c) {
    mean[c] = state.running_mean[c];
    inv_std[c] = static_cast<T>(
        1.0 / std::sqrt(static_cast<double>(state.running_var[c]) + state.eps));
  }
  return batchnorm_apply(input, gamma, beta, std::move(mean), std::move(inv_std),
                         cache);
}

template <typename T>
Tensor<T> batchnorm1d_forward(const Tensor<T>& input, const Tensor<T>& gamma,
                              const Tensor<T>& beta, BatchNormState<T>& state,
                              Mode mode, BatchNormCache<T>* cache) {
  if (mode == Mode::kEval) {
    return batchnorm1d_forward(input, gamma, beta,
                               static_cast<const BatchNormState<T>&>(state), cache);
  }
  check_batchnorm(input, gamma, beta, state);
  const std::size_t batch = input.dim(0), ch = input.dim(1), len = input.dim(2);
  const std::size_t count = batch * len;
  if (count < 2) {
    throw DegenerateInputError(
        "batchnorm1d: train mode needs at least 2 values per channel");
  }
  const T* x = input.data().data();
  std::vector<T> mean(ch), inv_std(ch);
  parallel_for(0, ch, [&](std::size_t c) {
    double s = 0.0;
    for (std::size_t n = 0; n < batch; ++n) {
      const T* row = x + (n * ch + c) * len;
      for (std::size_t t = 0; t < len; ++t) s += row[t];
    }
    const double m = s / static_cast<double>(count);
    double ss = 0.0;
    for (std::size_t n = 0; n < batch; ++n) {
      const T* row = x + (n * ch + c) * len;
      for (std::size_t t = 0; t < len; ++t) {
        const double d = row[t] - m;
        ss += d * d;
      }
    }
    const double var = ss / static_cast<double>(count);
    mean[c] = static_cast<T>(m);
    inv_std[c] = static_cast<T>(1.0 / std::sqrt(var + state.eps));
    const double unbiased = ss / static_cast<double>(count - 1);
    state.running_mean[c] = static_cast<T>(
        (1.0 - state.momentum) * state.running_mean[c] + state.momentum * m);
    state.running_var[c] = static_cast<T>(
        (1.0 - state.momentum) * state.running_var[c] + state.momentum * unbiased);
  });
  return batchnorm_apply(input, gamma, beta, std::move(mean), std::move(inv_std),
                         cache);
}

template <typename T>
void batchnorm1d_backward(const Tensor<T>& input, const Tensor<T>& gamma,
                          const BatchNormCache<T>& cache, Mode mode,
                          std::span<const T> grad_output,
                          std::span<T> grad_input, std::span<T> grad_gamma,
                          std::span<T> grad_beta) {
  const std::size_t batch = input.dim(0), ch = input.dim(1), len = input.dim(2);
  const double count = static_cast<double>(batch * len);
  const T* x = input.data().data();
  const T* gy = grad_output.data();
  const T* g = gamma.data().data();

  parallel_for(0, ch, [&](std::size_t c) {
    const double m = cache.mean[c];
    const double is = cache.inv_std[c];
    double sum_gy = 0.0, sum_gy_xhat = 0.0;
    for (std::size_t n = 0; n < batch; ++n) {
      const T* row = x + (n * ch + c) * len;
      const T* grow = gy + (n * ch + c) * len;
      for (std::size_t t = 0; t < len; ++t) {
        sum_gy += grow[t];
        sum_gy_xhat += grow[t] * ((row[t] - m) * is);
      }
    }
    if (!grad_gamma.empty()) grad_gamma[c] += static_cast<T>(sum_gy_xhat);
    if (!grad_beta.empty()) grad_beta[c] += static_cast<T>(sum_gy);
    if (grad_input.empty()) return;
    const double scale = g[c] * is;
    for (std::size_t n = 0; n < batch; ++n) {
      const T* row = x + (n * ch + c) * len;
      const T* grow = gy + (n * ch + c) * len;
      T* gxrow = grad_input.data() + (n * ch + c) * len;
      if (mode == Mode::kTrain) {
        const double mean_gy = sum_gy / count;
        const double mean_gy_xhat = sum_gy_xhat / count;
        for (std::size_t t = 0; t < len; ++t) {
          const double xhat = (row[t] - m) * is;
          gxrow[t] += static_cast<T>(scale *
                                     (grow[t] - mean_gy - xhat * mean_gy_xhat));
        }
      } else {
        for (std::size_t t = 0; t < len; ++t) {
          gxrow[t] += static_cast<T>(scale * grow[t]);
        }
      }
    }
  });
}

// --- dense ------------------------------------------------------------------

template <typename T>
Tensor<T> dense_forward(const Tensor<T>& input, const Tensor<T>& weight,
                        const Tensor<T>& bias) {
  require_rank(input.shape(), 2, "dense input");
  require_rank(weight.shape(), 2, "dense weight");
  const std::size_t batch = input.dim(0), in = input.dim(1);
  const std::size_t outn = weight.dim(0);
  require_axis("dense", "N (weight axis 1)", weight.dim(1), in);
  require_axis("dense", "M (bias axis 0)", bias.size(), outn);
  Tensor<T> out({batch, outn});
  const T* x = input.data().data();
  const T* w = weight.data().data();
  const T* b = bias.data().data();
  T* y = out.data().data();
  parallel_for(0, batch, [&](std::size_t n) {
    for (std::size_t m = 0; m < outn; ++m) {
      y[n * outn + m] = b[m] + detail::dot(x + n * in, w + m * in, in);
    }
  });
  return out;
}

template <typename T>
void dense_backward(const Tensor<T>& input, const Tensor<T>& weight,
                    std::span<const T> grad_output, std::span<T> grad_input,
                    std::span<T> grad_weight, std::span<T> grad_bias) {
  const std::size_t batch = input.dim(0), in = input.dim(1);
  const std::size_t outn = weight.dim(0);
  const T* x = input.data().data();
  const T* w = weight.data().data();
  const T* gy = grad_output.data();
  if (!grad_input.empty()) {
    parallel_for(0, batch, [&](std::size_t n) {
      T* gx = grad_input.data() + n * in;
      for (std::size_t m = 0; m < outn; ++m) {
        detail::axpy(gx, gy[n * outn + m], w + m * in, in);
      }
    });
  }
  if (!grad_weight.empty() || !grad_bias.empty()) {
    parallel_for(0, outn, [&](std::size_t m) {
      for (std::size_t n = 0; n < batch; ++n) {
        const T g = gy[n * outn + m];
        if (!grad_bias.empty()) grad_bias[m] += g;
        if (!grad_weight.empty()) {
          detail::axpy(grad_weight.data() + m * in, g, x + n * in, in);
        }
      }
    });
  }
}

// --- relu -------------------------------------------------------------------

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& input) {
  Tensor<T> out(input.shape());
  const T* x = input.data().data();
  T* y = out.data().data();
  for (std::size_t i = 0; i < input.size(); ++i) y[i] = x[i] > T{0} ? x[i] : T{0};
  return out;
}

template <typename T>
void relu_backward(const Tensor<T>& input, std::span<const T> grad_output,
                   std::span<T> grad_input) {
  const T* x = input.data().data();
  const T* g = grad_output.data();
  T* gx = grad_input.data();
  for (std::size_t i = 0; i < input.size(); ++i) {
    gx[i] += x[i] > T{0} ? g[i] : T{0};
  }
}

// --- dropout ----------------------------------------------------------------

template <typename T>
Tensor<T> dropout_forward(const Tensor<T>& input, double rate, Mode mode,
                          std::mt19937_64& rng, std::vector<T>* mask) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw InputError("dropout rate must lie in [0, 1), got " +
                     std::to_string(rate));
  }
  if (mask) mask->clear();
  if (mode == Mode::kEval || rate == 0.0) return input.reshaped(input.shape());
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
  std::vector<T> local;
  std::vector<T>& m = mask ? *mask : local;
  m.resize(input.size());
  // Each 64-bit draw feeds two elements, low half first; an element is
  // dropped when its 32-bit half falls below rate * 2^32.
  const auto threshold = static_cast<std::uint64_t>(std::llround(rate * 0x1.0p32));
  const std::size_t n = m.size();
  // Bit select instead of a branch: the outcome is a coin flip.
  using Bits = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  const Bits scale_bits = std::bit_cast<Bits>(keep_scale);
  const auto keep = [&](std::uint64_t half) {
    return std::bit_cast<T>(scale_bits & (Bits{0} - static_cast<Bits>(half >= threshold)));
  };
  Tensor<T> out(input.shape());
  const T* x = input.data().data();
  T* y = out.data().data();
  T* mp = m.data();
  for (std::size_t i = 0; i + 1 < n; i += 2) {
    const std::uint64_t bits = rng();
    mp[i] = keep(bits & 0xFFFFFFFFu);
    mp[i + 1] = keep(bits >> 32);
    y[i] = x[i] * mp[i];
    y[i + 1] = x[i + 1] * mp[i + 1];
  }
  if (n % 2 == 1) {
    mp[n - 1] = keep(rng() & 0xFFFFFFFFu);
    y[n - 1] = x[n - 1] * mp[n - 1];
  }
  return out;
}

// --- softmax + cross-entropy --------------------------------------------------

template <typename T>
CrossEntropyResult<T> softmax_cross_entropy(
    const Tensor<T>& logits, std::span<const std::size_t> labels) {
  require_rank(logits.shape(), 2, "softmax_cross_entropy logits");
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  if (labels.size() != batch) {
    throw DimensionError("softmax_cross_entropy: " +
                         std::to_string(labels.size()) + " labels for batch " +
                         std::to_string(batch));
  }
  CrossEntropyResult<T> result{0.0, Tensor<T>(logits.shape())};
  const T* z = logits.data().data();
  T* p = result.probabilities.data().data();
  std::vector<double> e(classes);
  double total = 0.0;
  for (std::size_t n = 0; n < batch; ++n) {
    if (labels[n] >= classes) {
      throw LabelError("label " + std::to_string(labels[n]) + " at batch row " +
                       std::to_string(n) + " is outside [0, " +
                       std::to_string(classes) + ")");
    }
    const T* row = z + n * classes;
    const double mx = *std::max_element(row, row + classes);
    double s = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      e[c] = std::exp(static_cast<double>(row[c]) - mx);
      s += e[c];
    }
    for (std::size_t c = 0; c < classes; ++c) {
      p[n * classes + c] = static_cast<T>(e[c] / s);
    }
    // -log softmax = log(sum) - (z - max)
    total += std::log(s) - (static_cast<double>(row[labels[n]]) - mx);
  }
  result.loss = total / static_cast<double>(batch);
  return result;
}

template <typename T>
void softmax_cross_entropy_backward(const Tensor<T>& probabilities,
                                    std::span<const std::size_t> labels,
                                    T upstream, std::span<T> grad_logits) {
  const std::size_t batch = probabilities.dim(0),
                    classes = probabilities.dim(1);
  const T scale = upstream / static_cast<T>(batch);
  const T* p = probabilities.data().data();
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t c = 0; c < classes; ++c) {
      const T onehot = c == labels[n] ? T{1} : T{0};
      grad_logits[n * classes + c] += (p[n * classes + c] - onehot) * scale;
    }
  }
}

#define SPECMON_INSTANTIATE_KERNELS(T)                                        \
  template Tensor<T> conv1d_forward(const Tensor<T>&, const Tensor<T>&,       \
                                    const Tensor<T>&);                        \
  template void conv1d_backward(const Tensor<T>&, const Tensor<T>&,           \
                                std::span<const T>, std::span<T>,             \
                                std::span<T>, std::span<T>);                  \
  template PoolResult<T> maxpool1d_forward(const Tensor<T>&);                 \
  template void maxpool1d_backward(std::span<const std::uint32_t>,            \
                                   std::span<const T>, std::span<T>);         \
  template Tensor<T> batchnorm1d_forward(const Tensor<T>&, const Tensor<T>&,  \
                                         const Tensor<T>&, BatchNormState<T>&, \
                                         Mode, BatchNormCache<T>*);           \
  template Tensor<T> batchnorm1d_forward(const Tensor<T>&, const Tensor<T>&,  \
                                         const Tensor<T>&,                    \
                                         const BatchNormState<T>&,            \
                                         BatchNormCache<T>*);                 \
  template void batchnorm1d_backward(                                         \
      const Tensor<T>&, const Tensor<T>&, const BatchNormCache<T>&, Mode,     \
      std::span<const T>, std::span<T>, std::span<T>, std::span<T>);          \
  template Tensor<T> dense_forward(const Tensor<T>&, const Tensor<T>&,        \
                                   const Tensor<T>&);                         \
  template void dense_backward(const Tensor<T>&, const Tensor<T>&,            \
                               std::span<const T>, std::span<T>,              \
                               std::span<T>, std::span<T>);                   \
  template Tensor<T> relu_forward(const Tensor<T>&);                          \
  template void relu_backward(const Tensor<T>&, std::span<const T>,           \
                              std::span<T>);                                  \
  template Tensor<T> dropout_forward(const Tensor<T>&, double, Mode,          \
                                     std::mt19937_64&, std::vector<T>*);      \
  template CrossEntropyResult<T> softmax_cross_entropy(                       \
      const Tensor<T>&, std::span<const std::size_t>);                        \
  template void softmax_cross_entropy_backward(                               \
      const Tensor<T>&, std::span<const std::size_t>, T, std::span<T>);

SPECMON_INSTANTIATE_KERNELS(float)
SPECMON_INSTANTIATE_KERNELS(double)

#undef SPECMON_INSTANTIATE_KERNELS

}  // namespace specmon::nn
