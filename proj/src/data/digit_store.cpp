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


#include "xsl/data/digit_store.hpp"

#include <cstdlib>

#include "xsl/errors.hpp"

namespace xsl {

struct DigitStore::Data {
  Split split = Split::kTrain;
  std::vector<float> pixels;  // count x 784
  std::vector<std::uint8_t> labels;
  std::array<std::vector<std::uint32_t>, kNumClasses> by_class;
};

const char* split_name(Split s) { return s == Split::kTrain ? "train" : "test"; }

DigitStore DigitStore::build(const ImageStack& images, std::span<const std::uint8_t> labels, Split split,
                             bool require_all_classes) {
  if (images.count != labels.size())
    throw ConsistencyError("digit store: " + std::to_string(images.count) + " images but " +
                           std::to_string(labels.size()) + " labels");
  if (images.count > 0 && (images.rows != kDigitSide || images.cols != kDigitSide))
    throw DimensionError("digit store: exemplars must be 28x28, got " + std::to_string(images.rows) +
                         "x" + std::to_string(images.cols));
  auto data = std::make_shared<Data>();
  data->split = split;
  data->pixels = images.pixels;
  data->labels.assign(labels.begin(), labels.end());
  for (std::uint32_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= kNumClasses)
      throw ValueError("digit store: label " + std::to_string(labels[i]) + " at index " +
                       std::to_string(i) + " is outside [0, 9]");
    data->by_class[labels[i]].push_back(i);
  }
  if (require_all_classes)
    for (int c = 0; c < kNumClasses; ++c)
      if (data->by_class[c].empty())
        throw DataError("digit store: class " + std::to_string(c) + " has no exemplars");
  return DigitStore(std::move(data));
}

namespace {

std::filesystem::path find_file(const std::filesystem::path& dir, const std::string& stem) {
  for (const auto& name : {stem, stem + ".gz"}) {
    const auto p = dir / name;
    if (std::filesystem::exists(p)) return p;
  }
  throw IoError("dataset file " + (dir / stem).string() + "[.gz] not found");
}

std::string prefix(Split s) { return s == Split::kTrain ? "train" : "t10k"; }

}  // namespace

DigitStore DigitStore::load(const std::filesystem::path& dir, Split split) {
  const auto images = parse_idx_images(read_idx_file(find_file(dir, prefix(split) + "-images-idx3-ubyte")));
  const auto labels = parse_idx_labels(read_idx_file(find_file(dir, prefix(split) + "-labels-idx1-ubyte")));
  return build(images, labels, split);
}

Split DigitStore::split() const { return data_->split; }
std::size_t DigitStore::size() const { return data_->labels.size(); }

std::size_t DigitStore::class_size(int label) const { return class_indices(label).size(); }

std::span<const std::uint32_t> DigitStore::class_indices(int label) const {
  if (label < 0 || label >= kNumClasses)
    throw IndexError("digit store: class " + std::to_string(label) + " outside [0, 9]");
  return data_->by_class[label];
}

std::span<const float> DigitStore::pixels(std::uint32_t index) const {
  if (index >= data_->labels.size())
    throw IndexError("digit store: index " + std::to_string(index) + " outside the " +
                     split_name(data_->split) + " split");
  return std::span<const float>(data_->pixels).subspan(std::size_t{index} * kDigitPixels, kDigitPixels);
}

int DigitStore::label(std::uint32_t index) const {
  if (index >= data_->labels.size())
    throw IndexError("digit store: index " + std::to_string(index) + " outside the split");
  return data_->labels[index];
}

ExemplarRef first_instance(const DigitStore& store, int label) {
  if (store.split() != Split::kTrain)
    throw UsageError("first_instances: fixed exemplars come from the train split");
  const auto idx = store.class_indices(label);
  if (idx.empty()) throw DataError("first_instances: class " + std::to_string(label) + " is empty");
  return ExemplarRef{Split::kTrain, idx.front(), label};
}

std::array<ExemplarRef, kNumClasses> first_instances(const DigitStore& store) {
  std::array<ExemplarRef, kNumClasses> out{};
  for (int c = 0; c < kNumClasses; ++c) out[c] = first_instance(store, c);
  return out;
}

std::filesystem::path dataset_dir(const std::filesystem::path& fallback) {
  if (const char* env = std::getenv("XSL_MNIST_DIR"); env && *env) return env;
  return fallback;
}

bool dataset_available(const std::filesystem::path& dir) {
  for (const char* stem : {"train-images-idx3-ubyte", "train-labels-idx1-ubyte", "t10k-images-idx3-ubyte",
                           "t10k-labels-idx1-ubyte"}) {
    const auto p = dir / stem;
    if (!std::filesystem::exists(p) && !std::filesystem::exists(p.string() + ".gz")) return false;
  }
  return true;
}

}  // namespace xsl
