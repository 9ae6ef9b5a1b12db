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


#include "xsl/numkernel/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "xsl/errors.hpp"

namespace xsl {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename U>
void put_le(std::ostream& os, U value) {
  unsigned char bytes[sizeof(U)];
  std::memcpy(bytes, &value, sizeof(U));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(U));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(U));
}

template <typename U>
U get_le(std::istream& is) {
  unsigned char bytes[sizeof(U)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(U))) throw LengthError("checkpoint: truncated file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(U));
  U value;
  std::memcpy(&value, bytes, sizeof(U));
  return value;
}

std::filesystem::path manifest_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".manifest");
}

Shape parse_shape(const std::string& text) {
  Shape shape;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, 'x')) shape.push_back(std::stoull(part));
  return shape;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& params) {
  std::ofstream bin(path, std::ios::binary | std::ios::trunc);
  std::ofstream man(manifest_path(path), std::ios::trunc);
  if (!bin || !man) throw IoError("checkpoint: cannot write " + path.string());
  std::uint64_t offset = 0;
  for (const auto& p : params) {
    if (p.name.find_first_of(" \t\n") != std::string::npos)
      throw ValueError("checkpoint: parameter name '" + p.name + "' contains whitespace");
    std::string shape;
    for (std::size_t i = 0; i < p.tensor.rank(); ++i) {
      if (i) shape += "x";
      shape += std::to_string(p.tensor.extent(i));
    }
    man << p.name << ' ' << shape << ' ' << offset << '\n';
    for (auto e : p.tensor.shape()) put_le<std::uint64_t>(bin, e);
    for (float v : p.tensor.data()) put_le<std::uint32_t>(bin, std::bit_cast<std::uint32_t>(v));
    offset += 8 * p.tensor.rank() + 4 * p.tensor.size();
  }
  if (!bin || !man) throw IoError("checkpoint: write failed for " + path.string());
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("checkpoint: cannot read manifest " + path.string());
  std::vector<ManifestEntry> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    ManifestEntry e;
    std::string shape;
    if (!(ls >> e.name >> shape >> e.offset)) throw FormatError("checkpoint: bad manifest line '" + line + "'");
    e.shape = parse_shape(shape);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path) {
  const auto manifest = read_manifest(manifest_path(path));
  std::ifstream bin(path, std::ios::binary);
  if (!bin) throw IoError("checkpoint: cannot read " + path.string());
  std::vector<NamedTensor> out;
  for (const auto& e : manifest) {
    bin.seekg(static_cast<std::streamoff>(e.offset));
    Shape shape;
    for (std::size_t i = 0; i < e.shape.size(); ++i) shape.push_back(get_le<std::uint64_t>(bin));
    if (shape != e.shape)
      throw ConsistencyError("checkpoint: '" + e.name + "' manifest shape " + to_string(e.shape) +
                             " disagrees with stored " + to_string(shape));
    Tensor<float> t(shape);
    for (auto& v : t.data()) v = std::bit_cast<float>(get_le<std::uint32_t>(bin));
    out.push_back({e.name, std::move(t)});
  }
  return out;
}

std::uint64_t checksum(const std::vector<NamedTensor>& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const void* data, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& p : params) {
    feed(p.name.data(), p.name.size());
    for (auto e : p.tensor.shape()) feed(&e, sizeof(e));
    feed(p.tensor.data().data(), p.tensor.size() * sizeof(float));
  }
  return h;
}

}  // namespace xsl
