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
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "xsl/data/idx.hpp"

namespace xsl {

inline constexpr int kNumClasses = 10;
inline constexpr std::size_t kDigitSide = 28;
inline constexpr std::size_t kDigitPixels = kDigitSide * kDigitSide;

enum class Split { kTrain, kTest };

const char* split_name(Split s);

/// One digit image identified by its position in the original IDX file.
struct ExemplarRef {
  Split split = Split::kTrain;
  std::uint32_t index = 0;
  int label = 0;
};

/// Immutable class-indexed collection of 28x28 exemplars. Copies share the
/// underlying storage, so a store can be handed to concurrent runs freely.
class DigitStore {
 public:
  /// Groups images by label, keeping original indices ascending per class.
  /// Throws ConsistencyError on a count mismatch and DataError on an empty
  /// class when `require_all_classes` is set.
  static DigitStore build(const ImageStack& images, std::span<const std::uint8_t> labels, Split split,
                          bool require_all_classes = true);

  /// Loads `<dir>/{train,t10k}-{images-idx3,labels-idx1}-ubyte[.gz]`.
  static DigitStore load(const std::filesystem::path& dir, Split split);

  Split split() const;
  std::size_t size() const;
  std::size_t class_size(int label) const;
  std::span<const std::uint32_t> class_indices(int label) const;

  /// Pixels of the exemplar at original dataset index `index`.
  std::span<const float> pixels(std::uint32_t index) const;
  int label(std::uint32_t index) const;

 private:
  struct Data;
  explicit DigitStore(std::shared_ptr<const Data> data) : data_(std::move(data)) {}
  std::shared_ptr<const Data> data_;
};

/// For each class, the exemplar with the smallest original index. Train split
/// only (UsageError otherwise).
std::array<ExemplarRef, kNumClasses> first_instances(const DigitStore& store);

/// first_instances for a single class; DataError when the class is empty.
ExemplarRef first_instance(const DigitStore& store, int label);

/// Directory from the XSL_MNIST_DIR environment variable, or `fallback`.
std::filesystem::path dataset_dir(const std::filesystem::path& fallback = "data/mnist");

/// True when both splits' files exist under dir.
bool dataset_available(const std::filesystem::path& dir);

}  // namespace xsl
