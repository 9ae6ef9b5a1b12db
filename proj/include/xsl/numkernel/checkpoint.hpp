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
#include <string>
#include <vector>

#include "xsl/numkernel/tensor.hpp"

namespace xsl {

struct NamedTensor {
  std::string name;
  Tensor<float> tensor;
};

struct ManifestEntry {
  std::string name;
  Shape shape;
  std::uint64_t offset = 0;
};

// Binary layout, per parameter in order: the extents as 64-bit little-endian
// integers, then the values as 32-bit little-endian IEEE floats. The manifest
// (`<path>.manifest`) has one line per parameter: name, shape "AxBxC", byte
// offset of the parameter's first extent.

void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& params);
std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest_path);

/// FNV-1a over names, extents, and raw value bytes.
std::uint64_t checksum(const std::vector<NamedTensor>& params);

}  // namespace xsl
