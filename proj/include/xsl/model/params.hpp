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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "xsl/numkernel/checkpoint.hpp"
#include "xsl/numkernel/tensor.hpp"

namespace xsl {

enum class Arch { kObjectCnn, kSceneCnn };

const char* arch_name(Arch a);
Arch parse_arch(const std::string& text);

inline constexpr std::size_t kEmbedDim = 64;
inline constexpr std::size_t kVocabSize = 10;
inline constexpr std::size_t kConv1Maps = 16;
inline constexpr std::size_t kConv2Maps = 32;
inline constexpr std::size_t kKernelSide = 3;
inline constexpr std::size_t kConvPadding = 1;
inline constexpr double kDropout = 0.5;

/// Layer widths per architecture.
struct ArchShape {
  std::size_t input_side;  // 28 per quadrant (object) or 56 per scene
  std::size_t hidden;      // first dense layer
  std::size_t head;        // second dense layer: 64, or 4 x 64 for the scene network

  std::size_t flat() const { return kConv2Maps * (input_side / 4) * (input_side / 4); }
};

ArchShape arch_shape(Arch a);

/// All learnable state of the matching network.
template <typename T>
struct ModelParams {
  static constexpr std::size_t kCount = 9;
  static const std::array<const char*, kCount> kNames;

  Arch arch = Arch::kObjectCnn;
  Tensor<T> conv1_w, conv1_b, conv2_w, conv2_b;
  Tensor<T> fc1_w, fc1_b, fc2_w, fc2_b;
  Tensor<T> embedding;  // kVocabSize x kEmbedDim

  /// Tensors in kNames order.
  std::array<Tensor<T>*, kCount> tensors();
  std::array<const Tensor<T>*, kCount> tensors() const;

  template <typename U>
  ModelParams<U> cast() const {
    ModelParams<U> out;
    out.arch = arch;
    auto dst = out.tensors();
    auto src = tensors();
    for (std::size_t i = 0; i < kCount; ++i) *dst[i] = src[i]->template cast<U>();
    return out;
  }

  std::vector<NamedTensor> to_named() const;
  static ModelParams from_named(Arch arch, const std::vector<NamedTensor>& named);
};

template <typename T>
const std::array<const char*, ModelParams<T>::kCount> ModelParams<T>::kNames = {
    "conv1.weight", "conv1.bias", "conv2.weight", "conv2.bias", "fc1.weight",
    "fc1.bias",     "fc2.weight", "fc2.bias",     "embedding.weight"};

/// Conv and dense weights uniform in +-1/sqrt(fan_in), biases zero, the word
/// table a rectangular identity (ones at (i, i), i < 10). Deterministic per seed.
template <typename T>
ModelParams<T> init_params(Arch arch, std::uint64_t seed);

extern template struct ModelParams<float>;
extern template struct ModelParams<double>;

}  // namespace xsl
