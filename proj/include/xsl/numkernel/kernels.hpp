/*
 * Copyright (c) 2026 The xsl Authors
 *
 * Licensed under the Apache License, Version 2.0;
 * You may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an 'AS IS' BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#pragma once

// Raw forward/backward kernels over flat row-major buffers.
//
// Two implementations share these signatures: xsl::kernels (OpenMP-parallel,
// im2col + blocked GEMM) and xsl::kernels::serial (plain loops, kept as the
// reference the parallel path is tested against). Every parallel loop writes
// disjoint outputs and every reduction runs in a fixed order, so results do
// not depend on the thread count.
//
// Backward kernels accumulate (+=) into their gradient buffers. An empty
// gradient span means "not needed" and is skipped.

#include <cstddef>
#include <cstdint>
#include <span>

namespace xsl::kernels {

struct ConvDims {
  std::size_t batch = 1;
  std::size_t in_maps = 1;
  std::size_t height = 1;
  std::size_t width = 1;
  std::size_t out_maps = 1;
  std::size_t kernel_h = 1;
  std::size_t kernel_w = 1;
  std::size_t padding = 0;

  std::size_t out_height() const { return height + 2 * padding - kernel_h + 1; }
  std::size_t out_width() const { return width + 2 * padding - kernel_w + 1; }
  std::size_t input_size() const { return batch * in_maps * height * width; }
  std::size_t kernel_size() const { return out_maps * in_maps * kernel_h * kernel_w; }
  std::size_t output_size() const { return batch * out_maps * out_height() * out_width(); }

  /// Throws DimensionError when the kernel does not fit the padded input.
  void validate() const;
};

struct PoolDims {
  std::size_t planes = 1;  // batch * channels
  std::size_t height = 2;
  std::size_t width = 2;

  std::size_t out_height() const { return height / 2; }
  std::size_t out_width() const { return width / 2; }
  std::size_t output_size() const { return planes * out_height() * out_width(); }

  /// Throws DimensionError for odd extents.
  void validate() const;
};

struct DenseDims {
  std::size_t batch = 1;
  std::size_t in = 1;
  std::size_t out = 1;
};

template <typename T>
void conv2d_forward(const ConvDims& d, std::span<const T> input, std::span<const T> kernels,
                    std::span<const T> bias, std::span<T> output);

template <typename T>
void conv2d_backward(const ConvDims& d, std::span<const T> input, std::span<const T> kernels,
                     std::span<const T> grad_output, std::span<T> grad_input,
                     std::span<T> grad_kernels, std::span<T> grad_bias);

/// argmax receives, per output cell, the flat input index of the window maximum
/// (ties resolve to the first cell in row-major order).
template <typename T>
void maxpool2x2_forward(const PoolDims& d, std::span<const T> input, std::span<T> output,
                        std::span<std::uint32_t> argmax);

template <typename T>
void maxpool2x2_backward(const PoolDims& d, std::span<const T> grad_output,
                         std::span<const std::uint32_t> argmax, std::span<T> grad_input);

/// output[b][i] = bias[i] + sum_j weights[i][j] * input[b][j]
template <typename T>
void dense_forward(const DenseDims& d, std::span<const T> input, std::span<const T> weights,
                   std::span<const T> bias, std::span<T> output);

template <typename T>
void dense_backward(const DenseDims& d, std::span<const T> input, std::span<const T> weights,
                    std::span<const T> grad_output, std::span<T> grad_input,
                    std::span<T> grad_weights, std::span<T> grad_bias);

namespace serial {

template <typename T>
void conv2d_forward(const ConvDims& d, std::span<const T> input, std::span<const T> kernels,
                    std::span<const T> bias, std::span<T> output);

template <typename T>
void conv2d_backward(const ConvDims& d, std::span<const T> input, std::span<const T> kernels,
                     std::span<const T> grad_output, std::span<T> grad_input,
                     std::span<T> grad_kernels, std::span<T> grad_bias);

template <typename T>
void maxpool2x2_forward(const PoolDims& d, std::span<const T> input, std::span<T> output,
                        std::span<std::uint32_t> argmax);

template <typename T>
void maxpool2x2_backward(const PoolDims& d, std::span<const T> grad_output,
                         std::span<const std::uint32_t> argmax, std::span<T> grad_input);

template <typename T>
void dense_forward(const DenseDims& d, std::span<const T> input, std::span<const T> weights,
                   std::span<const T> bias, std::span<T> output);

template <typename T>
void dense_backward(const DenseDims& d, std::span<const T> input, std::span<const T> weights,
                    std::span<const T> grad_output, std::span<T> grad_input,
                    std::span<T> grad_weights, std::span<T> grad_bias);

}  // namespace serial

/// Numerically stable logistic function.
template <typename T>
T sigmoid(T x);

}  // namespace xsl::kernels
