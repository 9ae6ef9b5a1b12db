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


// Parallel kernels against the serial reference at the layer shapes the
// matching network uses.
#include <benchmark/benchmark.h>

#include <vector>

#include "xsl/numkernel/kernels.hpp"
#include "xsl/numkernel/rng.hpp"

namespace {

using xsl::kernels::ConvDims;
using xsl::kernels::DenseDims;
using xsl::kernels::PoolDims;

std::vector<float> random_values(std::size_t n, std::uint64_t seed) {
  xsl::Rng rng(seed);
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.uniform(-1, 1));
  return v;
}

// Arg 0: batch. Arg 1: 1 for conv1 (1 -> 16 maps, 28x28), 2 for conv2 (16 -> 32 maps, 14x14).
ConvDims conv_dims(const benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  if (state.range(1) == 1) return {batch, 1, 28, 28, 16, 3, 3, 1};
  return {batch, 16, 14, 14, 32, 3, 3, 1};
}

void set_conv_flops(benchmark::State& state, const ConvDims& d, double passes) {
  const double macs = static_cast<double>(d.batch * d.out_maps * d.out_height() * d.out_width() * d.in_maps *
                                          d.kernel_h * d.kernel_w);
  state.counters["GFLOPS"] =
      benchmark::Counter(2 * macs * passes * static_cast<double>(state.iterations()), benchmark::Counter::kIsRate,
                         benchmark::Counter::kIs1000);
}

template <bool Parallel>
void BM_ConvForward(benchmark::State& state) {
  const ConvDims d = conv_dims(state);
  const auto x = random_values(d.input_size(), 1), k = random_values(d.kernel_size(), 2),
             b = random_values(d.out_maps, 3);
  std::vector<float> y(d.output_size());
  for (auto _ : state) {
    if constexpr (Parallel)
      xsl::kernels::conv2d_forward<float>(d, x, k, b, y);
    else
      xsl::kernels::serial::conv2d_forward<float>(d, x, k, b, y);
    benchmark::DoNotOptimize(y.data());
  }
  set_conv_flops(state, d, 1);
}

template <bool Parallel>
void BM_ConvBackward(benchmark::State& state) {
  const ConvDims d = conv_dims(state);
  const auto x = random_values(d.input_size(), 1), k = random_values(d.kernel_size(), 2),
             go = random_values(d.output_size(), 3);
  std::vector<float> gx(d.input_size()), gk(d.kernel_size()), gb(d.out_maps);
  for (auto _ : state) {
    if constexpr (Parallel)
      xsl::kernels::conv2d_backward<float>(d, x, k, go, gx, gk, gb);
    else
      xsl::kernels::serial::conv2d_backward<float>(d, x, k, go, gx, gk, gb);
    benchmark::DoNotOptimize(gx.data());
  }
  set_conv_flops(state, d, 2);
}

template <bool Parallel>
void BM_MaxPool(benchmark::State& state) {
  const PoolDims d{static_cast<std::size_t>(state.range(0)) * 16, 28, 28};
  const auto x = random_values(d.planes * d.height * d.width, 4);
  std::vector<float> y(d.planes * d.out_height() * d.out_width());
  std::vector<std::uint32_t> arg(y.size());
  for (auto _ : state) {
    if constexpr (Parallel)
      xsl::kernels::maxpool2x2_forward<float>(d, x, y, arg);
    else
      xsl::kernels::serial::maxpool2x2_forward<float>(d, x, y, arg);
    benchmark::DoNotOptimize(y.data());
  }
}

template <bool Parallel>
void BM_Dense(benchmark::State& state) {
  const DenseDims d{static_cast<std::size_t>(state.range(0)), 1568, 128};
  const auto x = random_values(d.batch * d.in, 5), w = random_values(d.in * d.out, 6), b = random_values(d.out, 7);
  std::vector<float> y(d.batch * d.out);
  for (auto _ : state) {
    if constexpr (Parallel)
      xsl::kernels::dense_forward<float>(d, x, w, b, y);
    else
      xsl::kernels::serial::dense_forward<float>(d, x, w, b, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.counters["GFLOPS"] = benchmark::Counter(
      2.0 * static_cast<double>(d.batch * d.in * d.out) * static_cast<double>(state.iterations()),
      benchmark::Counter::kIsRate, benchmark::Counter::kIs1000);
}

void conv_args(benchmark::internal::Benchmark* b) {
  for (int layer : {1, 2})
    for (int batch : {12, 120, 480}) b->Args({batch, layer});
}

}  // namespace

BENCHMARK(BM_ConvForward<true>)->Apply(conv_args)->Name("conv_forward/omp");
BENCHMARK(BM_ConvForward<false>)->Apply(conv_args)->Name("conv_forward/serial");
BENCHMARK(BM_ConvBackward<true>)->Apply(conv_args)->Name("conv_backward/omp");
BENCHMARK(BM_ConvBackward<false>)->Apply(conv_args)->Name("conv_backward/serial");
BENCHMARK(BM_MaxPool<true>)->Arg(120)->Name("maxpool/omp");
BENCHMARK(BM_MaxPool<false>)->Arg(120)->Name("maxpool/serial");
BENCHMARK(BM_Dense<true>)->Arg(120)->Arg(480)->Name("dense/omp");
BENCHMARK(BM_Dense<false>)->Arg(120)->Arg(480)->Name("dense/serial");

BENCHMARK_MAIN();
