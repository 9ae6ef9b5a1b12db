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


#include "xsl/data/idx.hpp"

#include <fstream>
#include <iterator>
#include <string>

#include <zlib.h>

#include "xsl/errors.hpp"

namespace xsl {

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
         (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::vector<std::uint8_t> gunzip(const std::vector<std::uint8_t>& in, const std::string& name) {
  z_stream zs{};
  if (inflateInit2(&zs, 15 + 16) != Z_OK) throw IoError("gzip: cannot initialise inflater");
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  std::vector<std::uint8_t> out;
  std::uint8_t buf[1 << 16];
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = buf;
    zs.avail_out = sizeof(buf);
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc == Z_BUF_ERROR) {
      inflateEnd(&zs);
      throw LengthError("gzip: truncated stream in " + name);
    }
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw FormatError("gzip: corrupt stream in " + name);
    }
    out.insert(out.end(), buf, buf + (sizeof(buf) - zs.avail_out));
    if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
      inflateEnd(&zs);
      throw LengthError("gzip: truncated stream in " + name);
    }
  }
  inflateEnd(&zs);
  return out;
}

}  // namespace

std::size_t IdxHeader::element_count() const {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

IdxHeader parse_idx_header(std::span<const std::uint8_t> bytes, IdxKind expected) {
  if (bytes.size() < 4) throw LengthError("idx: file shorter than the magic number");
  IdxHeader h;
  h.magic = read_be32(bytes, 0);
  const std::uint32_t want = expected == IdxKind::kImages ? kIdxImagesMagic : kIdxLabelsMagic;
  if (h.magic != want)
    throw FormatError("idx: magic " + std::to_string(h.magic) + ", expected " + std::to_string(want) +
                      (expected == IdxKind::kImages ? " (images)" : " (labels)"));
  const std::size_t ndims = expected == IdxKind::kImages ? 3 : 1;
  if (bytes.size() < 4 + 4 * ndims) throw LengthError("idx: truncated header");
  for (std::size_t i = 0; i < ndims; ++i) h.dims.push_back(read_be32(bytes, 4 + 4 * i));
  const std::size_t payload = bytes.size() - h.header_bytes();
  if (payload != h.element_count())
    throw LengthError("idx: header declares " + std::to_string(h.element_count()) +
                      " bytes of payload, file holds " + std::to_string(payload));
  return h;
}

ImageStack parse_idx_images(std::span<const std::uint8_t> bytes) {
  const IdxHeader h = parse_idx_header(bytes, IdxKind::kImages);
  ImageStack s;
  s.count = h.dims[0];
  s.rows = h.dims[1];
  s.cols = h.dims[2];
  s.pixels.resize(h.element_count());
  const auto payload = bytes.subspan(h.header_bytes());
  for (std::size_t i = 0; i < payload.size(); ++i) s.pixels[i] = static_cast<float>(payload[i]) / 255.0f;
  return s;
}

std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes) {
  const IdxHeader h = parse_idx_header(bytes, IdxKind::kLabels);
  const auto payload = bytes.subspan(h.header_bytes());
  std::vector<std::uint8_t> labels(payload.begin(), payload.end());
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] > 9)
      throw ValueError("idx: label " + std::to_string(labels[i]) + " at position " +
                       std::to_string(i) + " is outside [0, 9]");
  return labels;
}

std::vector<std::uint8_t> serialize_idx_images(const ImageStack& images) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + images.pixels.size());
  write_be32(out, kIdxImagesMagic);
  write_be32(out, static_cast<std::uint32_t>(images.count));
  write_be32(out, static_cast<std::uint32_t>(images.rows));
  write_be32(out, static_cast<std::uint32_t>(images.cols));
  for (float v : images.pixels) {
    const float scaled = v * 255.0f + 0.5f;
    out.push_back(static_cast<std::uint8_t>(scaled < 0.f ? 0.f : (scaled > 255.f ? 255.f : scaled)));
  }
  return out;
}

std::vector<std::uint8_t> serialize_idx_labels(std::span<const std::uint8_t> labels) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + labels.size());
  write_be32(out, kIdxLabelsMagic);
  write_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

std::vector<std::uint8_t> read_idx_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("idx: cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b) return gunzip(bytes, path.string());
  return bytes;
}

}  // namespace xsl
