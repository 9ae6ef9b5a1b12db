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


#include <cmath>
#include <cstring>
#include <fstream>

#include "test_support.hpp"
#include "xsl/errors.hpp"
#include "xsl/numkernel/adamw.hpp"
#include "xsl/numkernel/checkpoint.hpp"

namespace xsl {
namespace {

template <typename T>
void step(AdamW<T>& opt, std::vector<Tensor<T>>& params, const std::vector<Tensor<T>>& grads) {
  std::vector<Tensor<T>*> p;
  std::vector<const Tensor<T>*> g;
  for (auto& t : params) p.push_back(&t);
  for (auto& t : grads) g.push_back(&t);
  opt.step(std::span<Tensor<T>* const>(p), std::span<const Tensor<T>* const>(g));
}

TEST(AdamW, ZeroGradientNoDecayIsFixedPoint) {
  AdamW<double> opt({.lr = 0.1, .weight_decay = 0});
  std::vector<Tensor<double>> p = {test::random_tensor<double>({4, 3}, 1)};
  const auto before = p[0];
  for (int i = 0; i < 5; ++i) step(opt, p, {Tensor<double>({4, 3})});
  EXPECT_TRUE(p[0] == before);
  EXPECT_EQ(opt.steps(), 5u);
}

// At t = 1 the bias-corrected moments are g and g^2 exactly.
TEST(AdamW, FirstStepIsSignedLearningRate) {
  const double lr = 0.01, eps = 1e-8;
  AdamW<double> opt({.lr = lr, .eps = eps, .weight_decay = 0});
  std::vector<Tensor<double>> p = {Tensor<double>({3}, {1, 2, 3})};
  const Tensor<double> g({3}, {0.5, -2, 1e-3});
  step(opt, p, {g});
  for (int i = 0; i < 3; ++i) {
    const double want = (i + 1) - lr * g[i] / (std::abs(g[i]) + eps);
    EXPECT_NEAR(p[0][i], want, 1e-12);
  }
  EXPECT_NEAR(p[0][0], 1 - lr, 1e-9);
  EXPECT_NEAR(p[0][1], 2 + lr, 1e-9);
}

TEST(AdamW, DecoupledDecayShrinksGeometrically) {
  const double lr = 0.1, wd = 0.2;
  AdamW<double> opt({.lr = lr, .weight_decay = wd});
  std::vector<Tensor<double>> p = {Tensor<double>({2}, {1, -4})};
  for (int i = 0; i < 3; ++i) step(opt, p, {Tensor<double>({2})});
  const double f = std::pow(1 - lr * wd, 3);
  EXPECT_NEAR(p[0][0], f, 1e-12);
  EXPECT_NEAR(p[0][1], -4 * f, 1e-12);
  for (double m : opt.first_moments()[0].data()) EXPECT_EQ(m, 0.0);
}

// Two steps traced by hand with the update rule written out.
TEST(AdamW, SecondStepMatchesHandTrace) {
  const AdamWOptions o{.lr = 0.05, .beta1 = 0.9, .beta2 = 0.999, .eps = 1e-8, .weight_decay = 0.01};
  AdamW<double> opt(o);
  std::vector<Tensor<double>> p = {Tensor<double>({1}, {0.7})};
  const double g1 = 0.3, g2 = -0.1;
  step(opt, p, {Tensor<double>({1}, {g1})});
  step(opt, p, {Tensor<double>({1}, {g2})});
  double x = 0.7, m = 0, v = 0;
  int t = 0;
  for (double g : {g1, g2}) {
    ++t;
    m = o.beta1 * m + (1 - o.beta1) * g;
    v = o.beta2 * v + (1 - o.beta2) * g * g;
    const double mh = m / (1 - std::pow(o.beta1, t)), vh = v / (1 - std::pow(o.beta2, t));
    x -= o.lr * (mh / (std::sqrt(vh) + o.eps) + o.weight_decay * x);
  }
  EXPECT_NEAR(p[0][0], x, 1e-12);
}

TEST(AdamW, ShapeMismatchIsDimensionError) {
  AdamW<float> opt;
  std::vector<Tensor<float>> p = {Tensor<float>({3})};
  EXPECT_THROW(step(opt, p, {Tensor<float>({4})}), DimensionError);
  step(opt, p, {Tensor<float>({3})});
  std::vector<Tensor<float>> other = {Tensor<float>({2})};
  EXPECT_THROW(step(opt, other, {Tensor<float>({2})}), DimensionError);
}

std::vector<NamedTensor> sample_params() {
  return {{"conv1.w", test::random_tensor<float>({16, 1, 3, 3}, 1)},
          {"conv1.b", test::random_tensor<float>({16}, 2)},
          {"emb", test::random_tensor<float>({10, 64}, 3)}};
}

TEST(Checkpoint, RoundTripIsExact) {
  const auto dir = test::temp_dir("ckpt");
  const auto params = sample_params();
  save_checkpoint(dir / "m.ckpt", params);
  const auto back = load_checkpoint(dir / "m.ckpt");
  ASSERT_EQ(back.size(), params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    EXPECT_EQ(back[i].name, params[i].name);
    EXPECT_TRUE(back[i].tensor == params[i].tensor);
  }
  EXPECT_EQ(checksum(back), checksum(params));
}

// Layout: each parameter is its extents as u64 LE, then values as f32 LE.
TEST(Checkpoint, BinaryLayoutAndManifestOffsets) {
  const auto dir = test::temp_dir("ckpt_layout");
  const std::vector<NamedTensor> params = {{"a", Tensor<float>({2, 1}, {1.0f, -2.0f})}, {"b", Tensor<float>({1}, {0.5f})}};
  save_checkpoint(dir / "x.ckpt", params);
  std::ifstream in(dir / "x.ckpt", std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), {});
  ASSERT_EQ(bytes.size(), 2 * 8 + 2 * 4 + 8 + 4u);
  auto u64 = [&](std::size_t at) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[at + i];
    return v;
  };
  auto f32 = [&](std::size_t at) {
    std::uint32_t u = 0;
    for (int i = 3; i >= 0; --i) u = (u << 8) | bytes[at + i];
    float f;
    std::memcpy(&f, &u, 4);
    return f;
  };
  EXPECT_EQ(u64(0), 2u);
  EXPECT_EQ(u64(8), 1u);
  EXPECT_EQ(f32(16), 1.0f);
  EXPECT_EQ(f32(20), -2.0f);
  EXPECT_EQ(u64(24), 1u);
  EXPECT_EQ(f32(32), 0.5f);

  const auto manifest = read_manifest(dir / "x.ckpt.manifest");
  ASSERT_EQ(manifest.size(), 2u);
  EXPECT_EQ(manifest[0].name, "a");
  EXPECT_EQ(manifest[0].shape, (Shape{2, 1}));
  EXPECT_EQ(manifest[0].offset, 0u);
  EXPECT_EQ(manifest[1].offset, 24u);
}

TEST(Checkpoint, Errors) {
  const auto dir = test::temp_dir("ckpt_err");
  EXPECT_THROW(load_checkpoint(dir / "missing.ckpt"), IoError);
  EXPECT_THROW(save_checkpoint(dir / "w.ckpt", {{"bad name", Tensor<float>({1})}}), ValueError);

  save_checkpoint(dir / "t.ckpt", sample_params());
  std::filesystem::resize_file(dir / "t.ckpt", std::filesystem::file_size(dir / "t.ckpt") - 3);
  EXPECT_THROW(load_checkpoint(dir / "t.ckpt"), LengthError);

  save_checkpoint(dir / "m.ckpt", sample_params());
  {
    std::ofstream man(dir / "m.ckpt.manifest", std::ios::app);
    man << "garbage\n";
  }
  EXPECT_THROW(load_checkpoint(dir / "m.ckpt"), FormatError);
}

TEST(Checkpoint, ChecksumSeesValueAndNameChanges) {
  auto p = sample_params();
  const auto base = checksum(p);
  p[1].tensor[3] += 1e-6f;
  EXPECT_NE(checksum(p), base);
  p = sample_params();
  p[0].name = "conv1.W";
  EXPECT_NE(checksum(p), base);
}

}  // namespace
}  // namespace xsl
