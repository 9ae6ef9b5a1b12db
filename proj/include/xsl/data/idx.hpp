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

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace xsl {

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;  // 2051
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;  // 2049

enum class IdxKind { kImages, kLabels };

struct IdxHeader {
  std::uint32_t magic = 0;
  std::vector<std::uint32_t> dims;

  std::size_t header_bytes() const { return 4 + 4 * dims.size(); }
  std::size_t element_count() const;
};

/// n images of rows x cols, intensities byte / 255 in [0, 1].
struct ImageStack {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> pixels;

  std::span<const float> image(std::size_t i) const {
    return std::span<const float>(pixels).subspan(i * rows * cols, rows * cols);
  }
};

/// Validates magic and dimensionality for the expected kind, and that the
/// payload holds exactly the declared element count.
IdxHeader parse_idx_header(std::span<const std::uint8_t> bytes, IdxKind expected);

ImageStack parse_idx_images(std::span<const std::uint8_t> bytes);

/// Labels must lie in [0, 9] (ValueError otherwise).
std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> serialize_idx_images(const ImageStack& images);
std::vector<std::uint8_t> serialize_idx_labels(std::span<const std::uint8_t> labels);

/// Reads a whole file, inflating it when it starts with the gzip signature.
std::vector<std::uint8_t> read_idx_file(const std::filesystem::path& path);

}  // namespace xsl
