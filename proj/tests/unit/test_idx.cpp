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


#include <zlib.h>

#include <fstream>

#include "test_support.hpp"
#include "xsl/data/idx.hpp"
#include "xsl/errors.hpp"

namespace xsl {
namespace {

std::vector<std::uint8_t> be32(std::initializer_list<std::uint32_t> words) {
  std::vector<std::uint8_t> out;
  for (auto w : words)
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(w >> s));
  return out;
}

std::vector<std::uint8_t> tiny_images() {
  auto b = be32({0x803, 2, 2, 3});
  for (std::uint8_t v : {0, 255, 128, 1, 2, 3, 4, 5, 6, 7, 8, 9}) b.push_back(v);
  return b;
}

std::vector<std::uint8_t> raw_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

TEST(Idx, ParsesImagesAndNormalises) {
  const auto bytes = tiny_images();
  const auto s = parse_idx_images(bytes);
  EXPECT_EQ(s.count, 2u);
  EXPECT_EQ(s.rows, 2u);
  EXPECT_EQ(s.cols, 3u);
  EXPECT_EQ(s.pixels[0], 0.0f);
  EXPECT_EQ(s.pixels[1], 1.0f);
  EXPECT_FLOAT_EQ(s.pixels[2], 128.0f / 255.0f);
  EXPECT_EQ(serialize_idx_images(s), bytes);
}

TEST(Idx, LabelsRoundTripAndRange) {
  auto b = be32({0x801, 4});
  for (std::uint8_t v : {5, 0, 9, 3}) b.push_back(v);
  const auto labels = parse_idx_labels(b);
  EXPECT_EQ(labels, (std::vector<std::uint8_t>{5, 0, 9, 3}));
  EXPECT_EQ(serialize_idx_labels(labels), b);
  b.back() = 10;
  EXPECT_THROW(parse_idx_labels(b), ValueError);
}

TEST(Idx, BadMagicTruncationAndKindMismatch) {
  auto zero = be32({0, 1});
  EXPECT_THROW(parse_idx_labels(zero), FormatError);
  auto images = tiny_images();
  EXPECT_THROW(parse_idx_labels(images), FormatError);
  images.pop_back();
  EXPECT_THROW(parse_idx_images(images), LengthError);
  auto longer = tiny_images();
  longer.push_back(0);
  EXPECT_THROW(parse_idx_images(longer), LengthError);
  EXPECT_THROW(parse_idx_images(std::vector<std::uint8_t>{0, 0}), LengthError);
  EXPECT_THROW(parse_idx_images(be32({0x803, 2, 2})), LengthError);
}

TEST(Idx, ReadsGzipTransparently) {
  const auto dir = test::temp_dir("idx_gz");
  const auto bytes = tiny_images();
  {
    gzFile f = gzopen((dir / "x.gz").c_str(), "wb");
    gzwrite(f, bytes.data(), static_cast<unsigned>(bytes.size()));
    gzclose(f);
    std::ofstream(dir / "x.raw", std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  }
  EXPECT_EQ(read_idx_file(dir / "x.gz"), bytes);
  EXPECT_EQ(read_idx_file(dir / "x.raw"), bytes);
  EXPECT_THROW(read_idx_file(dir / "absent"), IoError);

  auto gz = raw_file(dir / "x.gz");
  gz.resize(gz.size() / 2);
  std::ofstream(dir / "cut.gz", std::ios::binary).write(reinterpret_cast<const char*>(gz.data()), gz.size());
  EXPECT_THROW(read_idx_file(dir / "cut.gz"), LengthError);
}

ImageStack blank_digits(std::size_t n) {
  ImageStack s{n, 28, 28, std::vector<float>(n * kDigitPixels)};
  for (std::size_t i = 0; i < n; ++i) s.pixels[i * kDigitPixels] = static_cast<float>(i) / 10;
  return s;
}

TEST(DigitStore, GroupsByClassKeepingIndexOrder) {
  const std::vector<std::uint8_t> labels = {1, 1, 7};
  EXPECT_THROW(DigitStore::build(blank_digits(3), labels, Split::kTrain), DataError);
  const auto s = DigitStore::build(blank_digits(3), labels, Split::kTrain, false);
  EXPECT_EQ(s.class_size(1), 2u);
  EXPECT_EQ(s.class_size(7), 1u);
  EXPECT_EQ(s.class_size(0), 0u);
  EXPECT_EQ(std::vector<std::uint32_t>(s.class_indices(1).begin(), s.class_indices(1).end()),
            (std::vector<std::uint32_t>{0, 1}));
  EXPECT_EQ(s.label(2), 7);
  EXPECT_FLOAT_EQ(s.pixels(2)[0], 0.2f);
  EXPECT_THROW(s.pixels(3), IndexError);
  EXPECT_THROW(s.class_size(10), IndexError);
}

TEST(DigitStore, CountMismatchIsConsistencyError) {
  const std::vector<std::uint8_t> labels = {1, 2, 3};
  EXPECT_THROW(DigitStore::build(blank_digits(2), labels, Split::kTrain, false), ConsistencyError);
}

TEST(DigitStore, FirstInstancesSynthetic) {
  const std::vector<std::uint8_t> labels = {3, 3, 0};
  const auto s = DigitStore::build(blank_digits(3), labels, Split::kTrain, false);
  EXPECT_EQ(first_instance(s, 3).index, 0u);
  EXPECT_EQ(first_instance(s, 0).index, 2u);
  EXPECT_THROW(first_instance(s, 5), DataError);
  const auto t = DigitStore::build(blank_digits(3), labels, Split::kTest, false);
  EXPECT_THROW(first_instance(t, 3), UsageError);
}

// Official files, checked against a byte-level scan written here.
TEST(Mnist, OfficialFilesParseAndMatchRawScan) {
  XSL_REQUIRE_MNIST(dir);
  const auto train = DigitStore::load(dir, Split::kTrain);
  const auto test = DigitStore::load(dir, Split::kTest);
  EXPECT_EQ(train.size(), 60000u);
  EXPECT_EQ(test.size(), 10000u);

  const auto raw_labels = read_idx_file(dir / "train-labels-idx1-ubyte");
  ASSERT_EQ(raw_labels.size(), 60008u);
  EXPECT_EQ(raw_labels[8], 5);
  std::array<std::size_t, 10> counts{};
  std::array<long, 10> first;
  first.fill(-1);
  for (std::size_t i = 8; i < raw_labels.size(); ++i) {
    const int c = raw_labels[i];
    ++counts[c];
    if (first[c] < 0) first[c] = static_cast<long>(i - 8);
  }
  std::size_t total = 0;
  const auto fi = first_instances(train);
  for (int c = 0; c < 10; ++c) {
    EXPECT_EQ(train.class_size(c), counts[c]) << c;
    EXPECT_EQ(fi[c].index, static_cast<std::uint32_t>(first[c]));
    EXPECT_EQ(fi[c].label, c);
    total += train.class_size(c);
  }
  EXPECT_EQ(total, 60000u);
  EXPECT_EQ(fi[5].index, 0u);
  EXPECT_EQ(train.label(0), 5);

  // Round trip of the official image file, byte for byte.
  const auto raw_images = read_idx_file(dir / "t10k-images-idx3-ubyte");
  const auto stack = parse_idx_images(raw_images);
  EXPECT_EQ(stack.count, 10000u);
  EXPECT_EQ(serialize_idx_images(stack), raw_images);
  for (float v : stack.pixels) {
    ASSERT_GE(v, 0.0f);
    ASSERT_LE(v, 1.0f);
  }
}

TEST(Mnist, GzipAndRawCopiesAgree) {
  XSL_REQUIRE_MNIST(dir);
  if (!std::filesystem::exists(dir / "t10k-labels-idx1-ubyte.gz") || !std::filesystem::exists(dir / "t10k-labels-idx1-ubyte"))
    GTEST_SKIP() << "needs both compressed and raw label files";
  EXPECT_EQ(read_idx_file(dir / "t10k-labels-idx1-ubyte.gz"), raw_file(dir / "t10k-labels-idx1-ubyte"));
}

TEST(Mnist, DatasetDirFromEnvironment) {
  const char* old = std::getenv("XSL_MNIST_DIR");
  const std::string saved = old ? old : "";
  ::setenv("XSL_MNIST_DIR", "/some/where", 1);
  EXPECT_EQ(dataset_dir(), std::filesystem::path("/some/where"));
  ::unsetenv("XSL_MNIST_DIR");
  EXPECT_EQ(dataset_dir("fallback/x"), std::filesystem::path("fallback/x"));
  EXPECT_FALSE(dataset_available("/nonexistent/dir"));
  if (old) ::setenv("XSL_MNIST_DIR", saved.c_str(), 1);
}

}  // namespace
}  // namespace xsl
