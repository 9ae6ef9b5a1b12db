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
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "xsl/numkernel/kernels.hpp"

namespace xsl::kernels {

namespace {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<Mat<T>>;
template <typename T>
using MapConstMat = Eigen::Map<const Mat<T>>;

// Work is split into blocks whose boundaries never depend on the thread
// count, and Eigen's own threading is off, so every sum is accumulated in
// the same order whatever the team size. kChunk is images per conv GEMM,
// kFeatureBlock output features per dense GEMM.
constexpr std::size_t kChunk = 8;
constexpr std::size_t kFeatureBlock = 32;

// Parallel regions below this many scalar operations stay serial.
constexpr std::size_t kParallelMin = 1 << 14;

// Per-thread scratch buffers that only grow; every caller overwrites what it
// reads, so reuse skips the zero fill of a fresh vector.
template <typename T>
T* scratch(std::size_t slot, std::size_t n) {
  thread_local std::vector<std::unique_ptr<T[]>> buffers;
  thread_local std::vector<std::size_t> sizes;
  if (slot >= buffers.size()) {
    buffers.resize(slot + 1);
    sizes.resize(slot + 1, 0);
  }
  if (sizes[slot] < n) {
    buffers[slot].reset(new T[n]);
    sizes[slot] = n;
  }
  return buffers[slot].get();
}

// col is [C*kh*kw, nb*HWo]; column n*HWo + y*ow + x holds the receptive field
// of output (y, x) of image n.
template <typename T>
void im2col(const ConvDims& d, const T* input, std::size_t nb, T* col) {
  const std::size_t oh = d.out_height(), ow = d.out_width(), hwo = oh * ow;
  const std::size_t cols = nb * hwo;
  const auto pad = static_cast<std::ptrdiff_t>(d.padding);
  const auto H = static_cast<std::ptrdiff_t>(d.height), W = static_cast<std::ptrdiff_t>(d.width);
  for (std::size_t n = 0; n < nb; ++n) {
    for (std::size_t c = 0; c < d.in_maps; ++c) {
      const T* plane = input + (n * d.in_maps + c) * d.height * d.width;
      for (std::size_t ky = 0; ky < d.kernel_h; ++ky)
        for (std::size_t kx = 0; kx < d.kernel_w; ++kx) {
          const std::size_t row = (c * d.kernel_h + ky) * d.kernel_w + kx;
          T* dst = col + row * cols + n * hwo;
          const auto dx = static_cast<std::ptrdiff_t>(kx) - pad;
          const std::ptrdiff_t x_lo = std::max<std::ptrdiff_t>(0, -dx);
          const std::ptrdiff_t x_hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(ow), W - dx);
          for (std::size_t y = 0; y < oh; ++y) {
            const auto iy = static_cast<std::ptrdiff_t>(y + ky) - pad;
            T* out_row = dst + y * ow;
            if (iy < 0 || iy >= H || x_lo >= x_hi) {
              std::fill(out_row, out_row + ow, T(0));
              continue;
            }
            std::fill(out_row, out_row + x_lo, T(0));
            const T* src = plane + iy * W + dx;
            for (std::ptrdiff_t x = x_lo; x < x_hi; ++x) out_row[x] = src[x];
            std::fill(out_row + x_hi, out_row + ow, T(0));
          }
        }
    }
  }
}

template <typename T>
void col2im_add(const ConvDims& d, const T* col, std::size_t nb, T* grad_input) {
  const std::size_t oh = d.out_height(), ow = d.out_width(), hwo = oh * ow;
  const std::size_t cols = nb * hwo;
  const auto pad = static_cast<std::ptrdiff_t>(d.padding);
  const auto H = static_cast<std::ptrdiff_t>(d.height), W = static_cast<std::ptrdiff_t>(d.width);
  for (std::size_t n = 0; n < nb; ++n) {
    for (std::size_t c = 0; c < d.in_maps; ++c) {
      T* plane = grad_input + (n * d.in_maps + c) * d.height * d.width;
      for (std::size_t ky = 0; ky < d.kernel_h; ++ky)
        for (std::size_t kx = 0; kx < d.kernel_w; ++kx) {
          const std::size_t row = (c * d.kernel_h + ky) * d.kernel_w + kx;
          const T* src = col + row * cols + n * hwo;
          const auto dx = static_cast<std::ptrdiff_t>(kx) - pad;
          const std::ptrdiff_t x_lo = std::max<std::ptrdiff_t>(0, -dx);
          const std::ptrdiff_t x_hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(ow), W - dx);
          for (std::size_t y = 0; y < oh; ++y) {
            const auto iy = static_cast<std::ptrdiff_t>(y + ky) - pad;
            if (iy < 0 || iy >= H) continue;
            T* dst = plane + iy * W + dx;
            const T* in_row = src + y * ow;
            for (std::ptrdiff_t x = x_lo; x < x_hi; ++x) dst[x] += in_row[x];
          }
        }
    }
  }
}

template <typename T>
void pool_plane(const PoolDims& d, const T* src, T* dst, std::uint32_t* arg, std::uint32_t base) {
  const std::size_t oh = d.out_height(), ow = d.out_width(), W = d.width;
  for (std::size_t y = 0; y < oh; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      // Same loop shape as the reference so the compiler vectorizes the
      // comparisons instead of branching on them.
      std::size_t best = 2 * y * W + 2 * x;
      for (std::size_t dy = 0; dy < 2; ++dy)
        for (std::size_t dx = 0; dx < 2; ++dx) {
          const std::size_t i = (2 * y + dy) * W + 2 * x + dx;
          if (src[i] > src[best]) best = i;
        }
      dst[y * ow + x] = src[best];
      if (arg) arg[y * ow + x] = base + static_cast<std::uint32_t>(best);
    }
}

}  // namespace

template <typename T>
void conv2d_forward(const ConvDims& d, std::span<const T> input, std::span<const T> kernels,
                    std::span<const T> bias, std::span<T> output) {
  d.validate();
  const std::size_t hwo = d.out_height() * d.out_width();
  const std::size_t ck = d.in_maps * d.kernel_h * d.kernel_w;
  const std::size_t image_in = d.in_maps * d.height * d.width;
  const std::size_t image_out = d.out_maps * hwo;
  const std::size_t chunks = (d.batch + kChunk - 1) / kChunk;
  MapConstMat<T> w(kernels.data(), d.out_maps, ck);

#pragma omp parallel for schedule(static) if (d.output_size() * ck > kParallelMin)
  for (std::size_t chunk = 0; chunk < chunks; ++chunk) {
    const std::size_t n0 = chunk * kChunk;
    const std::size_t nb = std::min(kChunk, d.batch - n0);
    const std::size_t cols = nb * hwo;
    T* col = scratch<T>(0, ck * cols);
    T* y = scratch<T>(1, d.out_maps * cols);
    im2col(d, input.data() + n0 * image_in, nb, col);
    MapConstMat<T> c(col, ck, cols);
    MapMat<T> out(y, d.out_maps, cols);
    out.noalias() = w * c;
    T* dst = output.data() + n0 * image_out;
    for (std::size_t n = 0; n < nb; ++n)
      for (std::size_t o = 0; o < d.out_maps; ++o) {
        const T* src = y + o * cols + n * hwo;
        T* row = dst + (n * d.out_maps + o) * hwo;
        const T b = bias[o];
        for (std::size_t p = 0; p < hwo; ++p) row[p] = src[p] + b;
      }
  }
}

template <typename T>
void conv2d_backward(const ConvDims& d, std::span<const T> input, std::span<const T> kernels,
                     std::span<const T> grad_output, std::span<T> grad_input,
                     std::span<T> grad_kernels, std::span<T> grad_bias) {
  d.validate();
  const std::size_t hwo = d.out_height() * d.out_width();
  const std::size_t ck = d.in_maps * d.kernel_h * d.kernel_w;
  const std::size_t image_in = d.in_maps * d.height * d.width;
  const std::size_t image_out = d.out_maps * hwo;
  const std::size_t chunks = (d.batch + kChunk - 1) / kChunk;
  const std::size_t wsize = d.out_maps * ck;
  // Per-chunk partial sums for the weight and bias gradients, reduced in
  // chunk order afterwards.
  T* partial = scratch<T>(3, chunks * (wsize + d.out_maps));
  MapConstMat<T> w(kernels.data(), d.out_maps, ck);

#pragma omp parallel for schedule(static) if (d.output_size() * ck > kParallelMin)
  for (std::size_t chunk = 0; chunk < chunks; ++chunk) {
    const std::size_t n0 = chunk * kChunk;
    const std::size_t nb = std::min(kChunk, d.batch - n0);
    const std::size_t cols = nb * hwo;
    T* dy = scratch<T>(2, d.out_maps * cols);
    const T* go = grad_output.data() + n0 * image_out;
    for (std::size_t o = 0; o < d.out_maps; ++o)
      for (std::size_t n = 0; n < nb; ++n)
        std::copy_n(go + (n * d.out_maps + o) * hwo, hwo, dy + o * cols + n * hwo);
    MapConstMat<T> g(dy, d.out_maps, cols);
    T* pw = partial + chunk * (wsize + d.out_maps);

    if (!grad_bias.empty())
      for (std::size_t o = 0; o < d.out_maps; ++o) {
        T acc = 0;
        const T* row = dy + o * cols;
        for (std::size_t p = 0; p < cols; ++p) acc += row[p];
        pw[wsize + o] = acc;
      }
    if (!grad_kernels.empty()) {
      T* col = scratch<T>(0, ck * cols);
      im2col(d, input.data() + n0 * image_in, nb, col);
      MapConstMat<T> c(col, ck, cols);
      MapMat<T> gw(pw, d.out_maps, ck);
      gw.noalias() = g * c.transpose();
    }
    if (!grad_input.empty()) {
      T* dcol = scratch<T>(1, ck * cols);
      MapMat<T> dc(dcol, ck, cols);
      dc.noalias() = w.transpose() * g;
      col2im_add(d, dcol, nb, grad_input.data() + n0 * image_in);
    }
  }

  for (std::size_t chunk = 0; chunk < chunks; ++chunk) {
    const T* pw = partial + chunk * (wsize + d.out_maps);
    if (!grad_kernels.empty())
      for (std::size_t i = 0; i < wsize; ++i) grad_kernels[i] += pw[i];
    if (!grad_bias.empty())
      for (std::size_t o = 0; o < d.out_maps; ++o) grad_bias[o] += pw[wsize + o];
  }
}

template <typename T>
void maxpool2x2_forward(const PoolDims& d, std::span<const T> input, std::span<T> output,
                        std::span<std::uint32_t> argmax) {
  d.validate();
  const std::size_t plane_in = d.height * d.width, plane_out = d.out_height() * d.out_width();
  const T* in = input.data();
  T* out = output.data();
  std::uint32_t* arg = argmax.empty() ? nullptr : argmax.data();
#pragma omp parallel for schedule(static) if (d.planes * plane_in > kParallelMin)
  for (std::size_t p = 0; p < d.planes; ++p)
    pool_plane(d, in + p * plane_in, out + p * plane_out, arg ? arg + p * plane_out : nullptr,
               static_cast<std::uint32_t>(p * plane_in));
}

template <typename T>
void maxpool2x2_backward(const PoolDims& d, std::span<const T> grad_output,
                         std::span<const std::uint32_t> argmax, std::span<T> grad_input) {
  d.validate();
  const std::size_t per_plane = d.out_height() * d.out_width();
  // Windows are disjoint, so planes can be scattered independently.
#pragma omp parallel for schedule(static) if (d.planes * per_plane > kParallelMin)
  for (std::size_t p = 0; p < d.planes; ++p)
    for (std::size_t o = p * per_plane; o < (p + 1) * per_plane; ++o)
      grad_input[argmax[o]] += grad_output[o];
}

template <typename T>
void dense_forward(const DenseDims& d, std::span<const T> input, std::span<const T> weights,
                   std::span<const T> bias, std::span<T> output) {
  MapConstMat<T> x(input.data(), d.batch, d.in);
  const std::size_t blocks = (d.out + kFeatureBlock - 1) / kFeatureBlock;
#pragma omp parallel for schedule(static) if (d.batch * d.in * d.out > kParallelMin)
  for (std::size_t blk = 0; blk < blocks; ++blk) {
    const std::size_t o0 = blk * kFeatureBlock, no = std::min(kFeatureBlock, d.out - o0);
    MapConstMat<T> w(weights.data() + o0 * d.in, no, d.in);
    Eigen::Map<Mat<T>, 0, Eigen::OuterStride<>> y(output.data() + o0, d.batch, no, Eigen::OuterStride<>(d.out));
    y.noalias() = x * w.transpose();
    for (std::size_t b = 0; b < d.batch; ++b)
      for (std::size_t i = o0; i < o0 + no; ++i) output[b * d.out + i] += bias[i];
  }
}

template <typename T>
void dense_backward(const DenseDims& d, std::span<const T> input, std::span<const T> weights,
                    std::span<const T> grad_output, std::span<T> grad_input,
                    std::span<T> grad_weights, std::span<T> grad_bias) {
  using Strided = Eigen::Map<const Mat<T>, 0, Eigen::OuterStride<>>;
  using StridedMut = Eigen::Map<Mat<T>, 0, Eigen::OuterStride<>>;
  MapConstMat<T> g(grad_output.data(), d.batch, d.out);
  const bool big = d.batch * d.in * d.out > kParallelMin;
  if (!grad_weights.empty()) {
    MapConstMat<T> x(input.data(), d.batch, d.in);
    const std::size_t blocks = (d.out + kFeatureBlock - 1) / kFeatureBlock;
#pragma omp parallel for schedule(static) if (big)
    for (std::size_t blk = 0; blk < blocks; ++blk) {
      const std::size_t o0 = blk * kFeatureBlock, no = std::min(kFeatureBlock, d.out - o0);
      Strided gb(grad_output.data() + o0, d.batch, no, Eigen::OuterStride<>(d.out));
      MapMat<T> gw(grad_weights.data() + o0 * d.in, no, d.in);
      gw.noalias() += gb.transpose() * x;
    }
  }
  if (!grad_input.empty()) {
    const std::size_t blocks = (d.in + kFeatureBlock - 1) / kFeatureBlock;
#pragma omp parallel for schedule(static) if (big)
    for (std::size_t blk = 0; blk < blocks; ++blk) {
      const std::size_t i0 = blk * kFeatureBlock, ni = std::min(kFeatureBlock, d.in - i0);
      Strided w(weights.data() + i0, d.out, ni, Eigen::OuterStride<>(d.in));
      StridedMut gx(grad_input.data() + i0, d.batch, ni, Eigen::OuterStride<>(d.in));
      gx.noalias() += g * w;
    }
  }
  if (!grad_bias.empty())
    for (std::size_t b = 0; b < d.batch; ++b)
      for (std::size_t i = 0; i < d.out; ++i) grad_bias[i] += grad_output[b * d.out + i];
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

}  // namespace xsl::kernels
