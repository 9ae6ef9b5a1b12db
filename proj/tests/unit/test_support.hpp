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

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "xsl/data/digit_store.hpp"
#include "xsl/numkernel/rng.hpp"
#include "xsl/numkernel/tensor.hpp"

namespace xsl::test {

template <typename T>
Tensor<T> random_tensor(Shape shape, std::uint64_t seed, double lo = -1, double hi = 1) {
  Tensor<T> t(std::move(shape));
  Rng rng(seed);
  for (auto& v : t.data()) v = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("xsl_test_" + name + "_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Store with `per_class` exemplars of every class, labels cycling 0..9.
/// Pixel values depend on the dataset index, so exemplars are distinguishable.
/// With `noise`, pixels are uniform random instead of a regular pattern; the
/// pattern's repeated values put some ReLUs and pooling windows near ties.
inline DigitStore synthetic_store(Split split, std::size_t per_class = 3, bool noise = false) {
  Rng rng(per_class);
  const std::size_t n = per_class * kNumClasses;
  ImageStack images{n, kDigitSide, kDigitSide, std::vector<float>(n * kDigitPixels)};
  std::vector<std::uint8_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<std::uint8_t>(i % kNumClasses);
    for (std::size_t p = 0; p < kDigitPixels; ++p)
      images.pixels[i * kDigitPixels + p] =
          noise ? static_cast<float>(rng.uniform01()) : static_cast<float>((i * 37 + p * 11) % 256) / 255.0f;
  }
  return DigitStore::build(images, labels, split);
}

/// MNIST directory from the environment, empty when not configured.
inline std::filesystem::path mnist_dir() {
  const char* env = std::getenv("XSL_MNIST_DIR");
  if (!env || !*env) return {};
  std::filesystem::path dir(env);
  return dataset_available(dir) ? dir : std::filesystem::path{};
}

}  // namespace xsl::test

#define XSL_REQUIRE_MNIST(dir)                                                   \
  const auto dir = ::xsl::test::mnist_dir();                                     \
  if (dir.empty()) GTEST_SKIP() << "XSL_MNIST_DIR not set or missing IDX files"
