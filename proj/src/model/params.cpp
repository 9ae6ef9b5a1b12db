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


#include "xsl/model/params.hpp"

#include <cmath>

#include "xsl/errors.hpp"
#include "xsl/numkernel/rng.hpp"

namespace xsl {

const char* arch_name(Arch a) { return a == Arch::kObjectCnn ? "object_cnn" : "scene_cnn"; }

Arch parse_arch(const std::string& text) {
  if (text == "object_cnn") return Arch::kObjectCnn;
  if (text == "scene_cnn") return Arch::kSceneCnn;
  throw ConfigError("arch must be 'object_cnn' or 'scene_cnn', got '" + text + "'");
}

ArchShape arch_shape(Arch a) {
  if (a == Arch::kObjectCnn) return {28, 128, kEmbedDim};
  return {56, 256, 4 * kEmbedDim};
}

template <typename T>
std::array<Tensor<T>*, ModelParams<T>::kCount> ModelParams<T>::tensors() {
  return {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &fc1_w, &fc1_b, &fc2_w, &fc2_b, &embedding};
}

template <typename T>
std::array<const Tensor<T>*, ModelParams<T>::kCount> ModelParams<T>::tensors() const {
  return {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &fc1_w, &fc1_b, &fc2_w, &fc2_b, &embedding};
}

template <typename T>
std::vector<NamedTensor> ModelParams<T>::to_named() const {
  std::vector<NamedTensor> out;
  const auto ts = tensors();
  for (std::size_t i = 0; i < kCount; ++i) out.push_back({kNames[i], ts[i]->template cast<float>()});
  return out;
}

template <typename T>
ModelParams<T> ModelParams<T>::from_named(Arch arch, const std::vector<NamedTensor>& named) {
  ModelParams<T> reference = init_params<T>(arch, 0);
  ModelParams<T> out;
  out.arch = arch;
  auto dst = out.tensors();
  const auto ref = reference.tensors();
  for (std::size_t i = 0; i < kCount; ++i) {
    const NamedTensor* found = nullptr;
    for (const auto& n : named)
      if (n.name == kNames[i]) found = &n;
    if (!found) throw ConsistencyError(std::string("checkpoint lacks parameter '") + kNames[i] + "'");
    if (found->tensor.shape() != ref[i]->shape())
      throw DimensionError(std::string("checkpoint parameter '") + kNames[i] + "' has shape " +
                           to_string(found->tensor.shape()) + ", " + arch_name(arch) + " expects " +
                           to_string(ref[i]->shape()));
    *dst[i] = found->tensor.template cast<T>();
  }
  return out;
}

namespace {

template <typename T>
Tensor<T> fan_in_uniform(Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Tensor<T> t(std::move(shape));
  for (auto& v : t.data()) v = static_cast<T>(rng.uniform(-bound, bound));
  return t;
}

}  // namespace

template <typename T>
ModelParams<T> init_params(Arch arch, std::uint64_t seed) {
  const ArchShape s = arch_shape(arch);
  Rng rng(derive_seed(seed, {0x1a17}));
  ModelParams<T> p;
  p.arch = arch;
  p.conv1_w = fan_in_uniform<T>({kConv1Maps, 1, kKernelSide, kKernelSide}, kKernelSide * kKernelSide, rng);
  p.conv1_b = Tensor<T>({kConv1Maps});
  p.conv2_w = fan_in_uniform<T>({kConv2Maps, kConv1Maps, kKernelSide, kKernelSide},
                                kConv1Maps * kKernelSide * kKernelSide, rng);
  p.conv2_b = Tensor<T>({kConv2Maps});
  p.fc1_w = fan_in_uniform<T>({s.hidden, s.flat()}, s.flat(), rng);
  p.fc1_b = Tensor<T>({s.hidden});
  p.fc2_w = fan_in_uniform<T>({s.head, s.hidden}, s.hidden, rng);
  p.fc2_b = Tensor<T>({s.head});
  p.embedding = Tensor<T>({kVocabSize, kEmbedDim});
  for (std::size_t i = 0; i < kVocabSize; ++i) p.embedding[i * kEmbedDim + i] = T(1);
  return p;
}

template struct ModelParams<float>;
template struct ModelParams<double>;
template ModelParams<float> init_params<float>(Arch, std::uint64_t);
template ModelParams<double> init_params<double>(Arch, std::uint64_t);

}  // namespace xsl
