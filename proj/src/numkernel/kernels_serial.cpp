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


#include <algorithm>
#include <cmath>
#include <string>

#include "xsl/errors.hpp"
#include "xsl/numkernel/kernels.hpp"

namespace xsl::kernels {

void ConvDims::validate() const {
  if (batch == 0 || in_maps == 0 || height == 0 || width == 0 || out_maps == 0 || kernel_h == 0 ||
      kernel_w == 0)
    throw DimensionError("conv2d: all extents must be positive");
  if (kernel_h > height + 2 * padding || kernel_w > width + 2 * padding)
    throw DimensionError("conv2d: kernel " + std::to_string(kernel_h) + "x" +
                         std::to_string(kernel_w) + " does not fit padded input " +
                         std::to_string(height + 2 * padding) + "x" +
                         std::to_string(width + 2 * padding));
}

void PoolDims::validate() const {
  if (height == 0 || width == 0 || height % 2 != 0 || width % 2 != 0)
    throw DimensionError("maxpool2x2: extents must be even and positive, got " +
                         std::to_string(height) + "x" + std::to_string(width));
}

template <typename T>
T sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

template float sigmoid<float>(float);
template double sigmoid<double>(double);

namespace serial {

template <typename T>
void conv2d_forward(const ConvDims& d, std::span<const T> input, std::span<const T> kernels,
                    std::span<const T> bias, std::span<T> output) {
  d.validate();
  const std::size_t oh = d.out_height(), ow = d.out_width();
  const auto pad = static_cast<std::ptrdiff_t>(d.padding);
  for (std::size_t n = 0; n < d.batch; ++n)
    for (std::size_t o = 0; o < d.out_maps; ++o)
      for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t x = 0; x < ow; ++x) {
          T acc = bias[o];
          for (std::size_t c = 0; c < d.in_maps; ++c)
            for (std::size_t ky = 0; ky < d.kernel_h; ++ky)
              for (std::size_t kx = 0; kx < d.kernel_w; ++kx) {
                const auto iy = static_cast<std::ptrdiff_t>(y + ky) - pad;
                const auto ix = static_cast<std::ptrdiff_t>(x + kx) - pad;
                if (iy < 0 || ix < 0 || iy >= static_cast<std::ptrdiff_t>(d.height) ||
                    ix >= static_cast<std::ptrdiff_t>(d.width))
                  continue;
                acc += kernels[((o * d.in_maps + c) * d.kernel_h + ky) * d.kernel_w + kx] *
                       input[((n * d.in_maps + c) * d.height + iy) * d.width + ix];
              }
          output[((n * d.out_maps + o) * oh + y) * ow + x] = acc;
        }
}

template <typename T>
void conv2d_backward(const ConvDims& d, std::span<const T> input, std::span<const T> kernels,
                     std::span<const T> grad_output, std::span<T> grad_input,
                     std::span<T> grad_kernels, std::span<T> grad_bias) {
  d.validate();
  const std::size_t oh = d.out_height(), ow = d.out_width();
  const auto pad = static_cast<std::ptrdiff_t>(d.padding);
  for (std::size_t n = 0; n < d.batch; ++n)
    for (std::size_t o = 0; o < d.out_maps; ++o)
      for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t x = 0; x < ow; ++x) {
          const T go = grad_output[((n * d.out_maps + o) * oh + y) * ow + x];
          if (!grad_bias.empty()) grad_bias[o] += go;
          for (std::size_t c = 0; c < d.in_maps; ++c)
            for (std::size_t ky = 0; ky < d.kernel_h; ++ky)
              for (std::size_t kx = 0; kx < d.kernel_w; ++kx) {
                const auto iy = static_cast<std::ptrdiff_t>(y + ky) - pad;
                const auto ix = static_cast<std::ptrdiff_t>(x + kx) - pad;
                if (iy < 0 || ix < 0 || iy >= static_cast<std::ptrdiff_t>(d.height) ||
                    ix >= static_cast<std::ptrdiff_t>(d.width))
                  continue;
                const std::size_t ki = ((o * d.in_maps + c) * d.kernel_h + ky) * d.kernel_w + kx;
                const std::size_t ii = ((n * d.in_maps + c) * d.height + iy) * d.width + ix;
                if (!grad_kernels.empty()) grad_kernels[ki] += go * input[ii];
                if (!grad_input.empty()) grad_input[ii] += go * kernels[ki];
              }
        }
}

template <typename T>
void maxpool2x2_forward(const PoolDims& d, std::span<const T> input, std::span<T> output,
                        std::span<std::uint32_t> argmax) {
  d.validate();
  const std::size_t oh = d.out_height(), ow = d.out_width();
  for (std::size_t p = 0; p < d.planes; ++p)
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t x = 0; x < ow; ++x) {
        std::size_t best = (p * d.height + 2 * y) * d.width + 2 * x;
        for (std::size_t dy = 0; dy < 2; ++dy)
          for (std::size_t dx = 0; dx < 2; ++dx) {
            const std::size_t i = (p * d.height + 2 * y + dy) * d.width + 2 * x + dx;
            if (input[i] > input[best]) best = i;
          }
        const std::size_t o = (p * oh + y) * ow + x;
        output[o] = input[best];
        if (!argmax.empty()) argmax[o] = static_cast<std::uint32_t>(best);
      }
}

template <typename T>
void maxpool2x2_backward(const PoolDims& d, std::span<const T> grad_output,
                         std::span<const std::uint32_t> argmax, std::span<T> grad_input) {
  d.validate();
  for (std::size_t o = 0; o < d.output_size(); ++o) grad_input[argmax[o]] += grad_output[o];
}

template <typename T>
void dense_forward(const DenseDims& d, std::span<const T> input, std::span<const T> weights,
                   std::span<const T> bias, std::span<T> output) {
  for (std::size_t b = 0; b < d.batch; ++b)
    for (std::size_t i = 0; i < d.out; ++i) {
      T acc = bias[i];
      for (std::size_t j = 0; j < d.in; ++j) acc += weights[i * d.in + j] * input[b * d.in + j];
      output[b * d.out + i] = acc;
    }
}

template <typename T>
void dense_backward(const DenseDims& d, std::span<const T> input, std::span<const T> weights,
                    std::span<const T> grad_output, std::span<T> grad_input,
                    std::span<T> grad_weights, std::span<T> grad_bias) {
  for (std::size_t b = 0; b < d.batch; ++b)
    for (std::size_t i = 0; i < d.out; ++i) {
      const T go = grad_output[b * d.out + i];
      if (!grad_bias.empty()) grad_bias[i] += go;
      for (std::size_t j = 0; j < d.in; ++j) {
        if (!grad_weights.empty()) grad_weights[i * d.in + j] += go * input[b * d.in + j];
        if (!grad_input.empty()) grad_input[b * d.in + j] += go * weights[i * d.in + j];
      }
    }
}

#define XSL_INSTANTIATE(T)                                                                      \
  template void conv2d_forward<T>(const ConvDims&, std::span<const T>, std::span<const T>,      \
                                  std::span<const T>, std::span<T>);                            \
  template void conv2d_backward<T>(const ConvDims&, std::span<const T>, std::span<const T>,     \
                                   std::span<const T>, std::span<T>, std::span<T>,              \
                                   std::span<T>);                                               \
  template void maxpool2x2_forward<T>(const PoolDims&, std::span<const T>, std::span<T>,        \
                                      std::span<std::uint32_t>);                                \
  template void maxpool2x2_backward<T>(const PoolDims&, std::span<const T>,                     \
                                       std::span<const std::uint32_t>, std::span<T>);           \
  template void dense_forward<T>(const DenseDims&, std::span<const T>, std::span<const T>,      \
                                 std::span<const T>, std::span<T>);                             \
  template void dense_backward<T>(const DenseDims&, std::span<const T>, std::span<const T>,     \
                                  std::span<const T>, std::span<T>, std::span<T>, std::span<T>);

XSL_INSTANTIATE(float)
XSL_INSTANTIATE(double)

#undef XSL_INSTANTIATE

}  // namespace serial
}  // namespace xsl::kernels
