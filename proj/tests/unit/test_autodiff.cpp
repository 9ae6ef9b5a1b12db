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


// Graph ops: the documented examples, per-op finite-difference checks in
// double precision, and the checker's own failure modes.
#include <cmath>

#include "test_support.hpp"
#include "xsl/errors.hpp"
#include "xsl/numkernel/gradcheck.hpp"
#include "xsl/numkernel/ops.hpp"

namespace xsl {
namespace {

template <typename T>
std::vector<T> values(Graph<T>& g, Var v) {
  const auto s = g.value(v).data();
  return {s.begin(), s.end()};
}

TEST(Ops, ConvDegenerateAndBiasOnly) {
  Graph<double> g;
  const auto y = conv2d(g, g.constant(Tensor<double>({1, 1, 1, 1}, {3})),
                        g.constant(Tensor<double>({1, 1, 1, 1}, {2})), g.constant(Tensor<double>({1}, {0.5})), 0);
  EXPECT_EQ(values(g, y), std::vector<double>{6.5});
  const auto z = conv2d(g, g.constant(Tensor<double>({1, 1, 3, 3})), g.constant(test::random_tensor<double>({1, 1, 3, 3}, 1)),
                        g.constant(Tensor<double>({1}, {0.7})), 1);
  EXPECT_EQ(g.value(z).shape(), (Shape{1, 1, 3, 3}));
  for (double v : values(g, z)) EXPECT_DOUBLE_EQ(v, 0.7);
  EXPECT_THROW(conv2d(g, g.constant(Tensor<double>({1, 2, 3, 3})), g.constant(Tensor<double>({1, 1, 3, 3})),
                      g.constant(Tensor<double>({1})), 1),
               DimensionError);
}

TEST(Ops, PoolExamples) {
  Graph<float> g;
  EXPECT_EQ(values(g, maxpool2x2(g, g.constant(Tensor<float>({1, 1, 2, 2}, {1, 2, 3, 4})))), std::vector<float>{4});
  const auto c = maxpool2x2(g, g.constant(Tensor<float>::filled({1, 2, 4, 6}, 0.3f)));
  EXPECT_EQ(g.value(c).shape(), (Shape{1, 2, 2, 3}));
  for (float v : values(g, c)) EXPECT_EQ(v, 0.3f);
  EXPECT_THROW(maxpool2x2(g, g.constant(Tensor<float>({1, 1, 3, 2}))), DimensionError);
}

TEST(Ops, DenseExamples) {
  Graph<double> g;
  Tensor<double> eye({3, 3});
  for (int i = 0; i < 3; ++i) eye[i * 4] = 1;
  const Tensor<double> x({3}, {0.2, -1, 4});
  EXPECT_EQ(values(g, dense(g, g.constant(x), g.constant(eye), g.constant(Tensor<double>({3})))),
            (std::vector<double>{0.2, -1, 4}));
  const Tensor<double> b({2}, {1.5, -2});
  EXPECT_EQ(values(g, dense(g, g.constant(x), g.constant(Tensor<double>({2, 3})), g.constant(b))),
            (std::vector<double>{1.5, -2}));
  EXPECT_THROW(dense(g, g.constant(Tensor<double>({4})), g.constant(eye), g.constant(Tensor<double>({3}))),
               DimensionError);
}

TEST(Ops, ActivationExamples) {
  Graph<double> g;
  EXPECT_EQ(values(g, relu(g, g.constant(Tensor<double>({2}, {-1, 2})))), (std::vector<double>{0, 2}));
  const auto s = values(g, sigmoid(g, g.constant(Tensor<double>({3}, {0, 30, -800}))));
  EXPECT_DOUBLE_EQ(s[0], 0.5);
  EXPECT_NEAR(s[1], 1.0, 1e-9);
  EXPECT_GT(s[2], 0.0);

  Graph<float> gf;
  for (float v : values(gf, sigmoid(gf, gf.constant(Tensor<float>({2}, {-200, 200}))))) {
    EXPECT_GT(v, 0.0f);
    EXPECT_LT(v, 1.0f);
  }
}

TEST(Ops, EmbeddingExamples) {
  Graph<double> g;
  Tensor<double> table({10, 64});
  for (int i = 0; i < 10; ++i) table[i * 64 + i] = 1;
  const auto t = g.constant(table);
  const std::vector<int> ids = {3, 3};
  const auto rows = values(g, embedding(g, t, std::span<const int>(ids)));
  for (int j = 0; j < 64; ++j) {
    EXPECT_EQ(rows[j], j == 3 ? 1.0 : 0.0);
    EXPECT_EQ(rows[j], rows[64 + j]);
  }
  const std::vector<int> bad = {10};
  EXPECT_THROW(embedding(g, t, std::span<const int>(bad)), IndexError);
}

TEST(Ops, EmbeddingGradientReachesOnlyLookedUpRows) {
  Graph<double> g;
  auto table = test::random_tensor<double>({5, 4}, 3);
  const auto t = g.parameter(table);
  const std::vector<int> ids = {1, 3, 1};
  g.backward(sum(g, embedding(g, t, std::span<const int>(ids))));
  const auto& grad = g.grad(t);
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(grad[r * 4 + c], r == 1 ? 2.0 : r == 3 ? 1.0 : 0.0);
}

TEST(Ops, DropoutModes) {
  Graph<double> g;
  const auto x = test::random_tensor<double>({10000}, 4, 0.5, 1.5);
  const auto xv = g.constant(x);
  Rng rng(8);
  EXPECT_EQ(values(g, dropout(g, xv, 0.0, Mode::kTrain, &rng)), values(g, xv));
  EXPECT_EQ(values(g, dropout(g, xv, 0.5, Mode::kEval, nullptr)), values(g, xv));
  EXPECT_THROW(dropout(g, xv, 1.0, Mode::kTrain, &rng), ParameterError);
  EXPECT_THROW(dropout(g, xv, 0.5, Mode::kTrain, nullptr), UsageError);

  const auto y = values(g, dropout(g, xv, 0.5, Mode::kTrain, &rng));
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 0)
      ++zeros;
    else
      EXPECT_DOUBLE_EQ(y[i], 2 * x[i]);
  }
  // 3-sigma binomial band: 5000 +- 3 * 50.
  EXPECT_NEAR(static_cast<double>(zeros), 5000.0, 150.0);
}

TEST(Ops, DropoutIsDeterministicGivenStream) {
  const auto x = test::random_tensor<float>({500}, 6);
  Graph<float> g;
  Rng a(77), b(77);
  EXPECT_EQ(values(g, dropout(g, g.constant(x), 0.5, Mode::kTrain, &a)),
            values(g, dropout(g, g.constant(x), 0.5, Mode::kTrain, &b)));
}

TEST(Ops, BceLossExamples) {
  EXPECT_NEAR(bce_loss(0.5, 1), 0.693147, 1e-6);
  EXPECT_NEAR(bce_loss(0.9, 1), 0.105361, 1e-6);
  EXPECT_LE(bce_loss(1.0, 1), -std::log(1 - 1e-7) + 1e-12);
  EXPECT_TRUE(std::isfinite(bce_loss(0.0, 1)));
  EXPECT_TRUE(std::isfinite(bce_loss(1.0, 0)));
  EXPECT_NEAR(bce_loss(0.0, 1), -std::log(1e-7), 1e-9);

  Graph<double> g;
  const std::vector<double> labels = {1, 0};
  const auto m = bce_mean(g, g.constant(Tensor<double>({2}, {0.9, 0.2})), std::span<const double>(labels));
  EXPECT_NEAR(values(g, m)[0], (bce_loss(0.9, 1) + bce_loss(0.2, 0)) / 2, 1e-12);
}

TEST(Ops, PairScoresLayoutIsWordMajorPerTrial) {
  Graph<double> g;
  // Two trials, dim 2; trial 0 has 1 word, trial 1 has 2.
  const Tensor<double> img({8, 2}, {1, 0, 0, 1, 1, 1, 2, 0, 0, 0, 1, 2, 3, 0, 0, 3});
  const Tensor<double> words({3, 2}, {1, 2, 1, 0, 0, 1});
  const std::vector<std::size_t> counts = {1, 2};
  const auto s = values(g, pair_scores(g, g.constant(img), g.constant(words), std::span<const std::size_t>(counts), 0.5));
  const std::vector<double> want = {0.5, 1, 1.5, 1, 0, 0.5, 1.5, 0, 0, 1, 0, 1.5};
  ASSERT_EQ(s.size(), want.size());
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_DOUBLE_EQ(s[i], want[i]) << i;
}

TEST(Ops, GroupMaxAndSegmentProduct) {
  Graph<double> g;
  const auto m = group_max(g, g.constant(Tensor<double>({8}, {1, 5, 2, 5, -1, -3, -2, -4})), 4);
  EXPECT_EQ(values(g, m), (std::vector<double>{5, -1}));
  const std::vector<std::size_t> lens = {1, 3};
  const auto p = segment_product(g, g.constant(Tensor<double>({4}, {0.5, 0.2, 0.5, 0.4})), std::span<const std::size_t>(lens));
  const auto pv = values(g, p);
  EXPECT_DOUBLE_EQ(pv[0], 0.5);
  EXPECT_NEAR(pv[1], 0.04, 1e-15);
  const std::vector<std::size_t> empty = {0, 4};
  EXPECT_THROW(segment_product(g, g.constant(Tensor<double>({4})), std::span<const std::size_t>(empty)), DimensionError);
}

TEST(Ops, GroupMaxTieSendsGradientToFirst) {
  Graph<double> g;
  Tensor<double> x({4}, {0.1, 0.9, 0.9, 0.2});
  const auto xv = g.parameter(x);
  g.backward(sum(g, group_max(g, xv, 4)));
  EXPECT_EQ(values<double>(g, xv).size(), 4u);
  const auto& gr = g.grad(xv);
  EXPECT_EQ(gr[1], 1.0);
  EXPECT_EQ(gr[2], 0.0);
}

// d/dx_i of a product containing zeros must still be the product of the others.
TEST(Ops, SegmentProductGradientWithZeros) {
  Graph<double> g;
  Tensor<double> x({4}, {0.0, 0.5, 0.0, 0.8});
  const auto xv = g.parameter(x);
  const std::vector<std::size_t> lens = {2, 2};
  g.backward(sum(g, segment_product(g, xv, std::span<const std::size_t>(lens))));
  const auto& gr = g.grad(xv);
  EXPECT_DOUBLE_EQ(gr[0], 0.5);
  EXPECT_DOUBLE_EQ(gr[1], 0.0);
  EXPECT_DOUBLE_EQ(gr[2], 0.8);
  EXPECT_DOUBLE_EQ(gr[3], 0.0);

  Graph<double> g2;
  Tensor<double> z({2}, {0.0, 0.0});
  const auto zv = g2.parameter(z);
  const std::vector<std::size_t> one = {2};
  g2.backward(sum(g2, segment_product(g2, zv, std::span<const std::size_t>(one))));
  EXPECT_DOUBLE_EQ(g2.grad(zv)[0], 0.0);
}

TEST(Backward, SigmoidOfZeroHasQuarterSlope) {
  Graph<double> g;
  Tensor<double> w({1, 1}, {0});
  const auto wv = g.parameter(w);
  const auto y = sigmoid(g, dense(g, g.constant(Tensor<double>({1}, {1})), wv, g.constant(Tensor<double>({1}))));
  g.backward(sum(g, y));
  EXPECT_DOUBLE_EQ(g.grad(wv)[0], 0.25);
}

TEST(Backward, UnusedParameterGetsZeroAndConstantsGetNone) {
  Graph<double> g;
  Tensor<double> a({2}, {1, 2}), b({3}, {4, 5, 6});
  const auto av = g.parameter(a), bv = g.parameter(b);
  const auto c = g.constant(Tensor<double>({2}, {1, 1}));
  g.backward(sum(g, relu(g, av)));
  for (double v : g.grad(bv).data()) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(g.grad(c), UsageError);
  EXPECT_EQ(g.grad_sink(c), nullptr);
}

TEST(Backward, NonScalarLossIsShapeError) {
  Graph<double> g;
  Tensor<double> a({2}, {1, 2});
  EXPECT_THROW(g.backward(relu(g, g.parameter(a))), ShapeError);
}

// Random downstream weights so every output coordinate gets a distinct
// upstream gradient.
Var project(Graph<double>& g, Var x, std::uint64_t seed) {
  const std::size_t n = g.value(x).size();
  const auto flat = reshape(g, x, {1, n});
  const auto w = g.constant(test::random_tensor<double>({1, n}, seed));
  return sum(g, dense(g, flat, w, g.constant(Tensor<double>({1}))));
}

GradCheckReport check(const LossClosure<double>& f, std::vector<Tensor<double>>& ps, double tol = 1e-4,
                      const std::function<void(Graph<double>&)>& configure = {}) {
  std::vector<Tensor<double>*> ptrs;
  for (auto& p : ps) ptrs.push_back(&p);
  GradCheckOptions opt;
  opt.tolerance = tol;
  return grad_check<double>(f, std::span<Tensor<double>* const>(ptrs), opt, configure);
}

TEST(GradCheck, Conv) {
  std::vector<Tensor<double>> ps = {test::random_tensor<double>({2, 2, 5, 6}, 1),
                                    test::random_tensor<double>({3, 2, 3, 3}, 2), test::random_tensor<double>({3}, 3)};
  const auto r = check([](Graph<double>& g, std::span<const Var> p) { return project(g, conv2d(g, p[0], p[1], p[2], 1), 9); }, ps);
  EXPECT_TRUE(r.passed) << r.max_rel_error;
}

TEST(GradCheck, PoolReluSigmoidDense) {
  std::vector<Tensor<double>> ps = {test::random_tensor<double>({2, 3, 4, 4}, 4), test::random_tensor<double>({5, 24}, 5),
                                    test::random_tensor<double>({5}, 6)};
  const auto r = check(
      [](Graph<double>& g, std::span<const Var> p) {
        auto h = reshape(g, maxpool2x2(g, relu(g, p[0])), {2, 12});
        h = gather_rows(g, h, std::vector<std::uint32_t>{0, 1, 1, 0});
        h = reshape(g, h, {2, 24});
        return project(g, sigmoid(g, dense(g, h, p[1], p[2])), 10);
      },
      ps);
  EXPECT_TRUE(r.passed) << r.max_rel_error;
}

TEST(GradCheck, MatchingHead) {
  std::vector<Tensor<double>> ps = {test::random_tensor<double>({8, 6}, 7), test::random_tensor<double>({5, 6}, 8)};
  const auto r = check(
      [](Graph<double>& g, std::span<const Var> p) {
        const std::vector<int> ids = {0, 3, 4, 1};
        const std::vector<std::size_t> counts = {1, 3};
        const auto words = embedding(g, p[1], std::span<const int>(ids));
        const auto s = sigmoid(g, pair_scores(g, p[0], words, std::span<const std::size_t>(counts), 0.125));
        const auto m = group_max(g, s, 4);
        const auto out = segment_product(g, m, std::span<const std::size_t>(counts));
        const std::vector<double> labels = {1, 0};
        return bce_mean(g, out, std::span<const double>(labels));
      },
      ps);
  EXPECT_TRUE(r.passed) << r.max_rel_error;
}

TEST(GradCheck, FrozenDropoutMaskPasses) {
  std::vector<Tensor<double>> ps = {test::random_tensor<double>({4, 10}, 11)};
  const auto r = check(
      [](Graph<double>& g, std::span<const Var> p) {
        Rng frozen(1234);
        return project(g, dropout(g, p[0], 0.5, Mode::kTrain, &frozen), 12);
      },
      ps);
  EXPECT_TRUE(r.passed) << r.max_rel_error;
}

TEST(GradCheck, LinearClosureAtMachinePrecision) {
  std::vector<Tensor<double>> ps = {test::random_tensor<double>({3, 7}, 13)};
  const auto r = check([](Graph<double>& g, std::span<const Var> p) { return project(g, p[0], 14); }, ps);
  EXPECT_TRUE(r.passed);
  EXPECT_LT(r.max_rel_error, 1e-8);
}

TEST(GradCheck, CorruptedRuleFails) {
  std::vector<Tensor<double>> ps = {test::random_tensor<double>({2, 2, 4, 4}, 15), test::random_tensor<double>({2, 2, 3, 3}, 16),
                                    test::random_tensor<double>({2}, 17)};
  const LossClosure<double> f = [](Graph<double>& g, std::span<const Var> p) {
    return project(g, relu(g, conv2d(g, p[0], p[1], p[2], 1)), 18);
  };
  EXPECT_TRUE(check(f, ps).passed);
  for (OpKind kind : {OpKind::kConv2d, OpKind::kRelu, OpKind::kDense}) {
    const auto r = check(f, ps, 1e-4, [kind](Graph<double>& g) { g.inject_gradient_fault(kind, 1.01); });
    EXPECT_FALSE(r.passed) << op_name(kind);
    EXPECT_GT(r.max_rel_error, 1e-3);
  }
}

TEST(GradCheck, NonDeterministicClosureIsVerificationError) {
  std::vector<Tensor<double>> ps = {test::random_tensor<double>({3}, 19)};
  int calls = 0;
  const LossClosure<double> f = [&calls](Graph<double>& g, std::span<const Var> p) {
    Rng fresh(static_cast<std::uint64_t>(++calls));
    return project(g, dropout(g, p[0], 0.5, Mode::kTrain, &fresh), 20);
  };
  EXPECT_THROW(check(f, ps), VerificationError);
}

TEST(GradCheck, RefinesStepAcrossAKink) {
  // relu at 3e-6: a 1e-5 central difference straddles the kink.
  std::vector<Tensor<double>> ps = {Tensor<double>({1}, {3e-6})};
  const LossClosure<double> f = [](Graph<double>& g, std::span<const Var> p) { return sum(g, relu(g, p[0])); };
  const auto r = check(f, ps);
  EXPECT_TRUE(r.passed) << r.max_rel_error;
  ASSERT_EQ(r.entries.size(), 1u);
  EXPECT_LT(r.entries[0].step, 1e-5);
  EXPECT_NEAR(r.entries[0].numeric, 1.0, 1e-9);

  std::vector<Tensor<double>*> ptrs = {&ps[0]};
  GradCheckOptions no_refine;
  no_refine.max_refinements = 0;
  EXPECT_FALSE(grad_check<double>(f, std::span<Tensor<double>* const>(ptrs), no_refine).passed);
}

TEST(GradCheck, RestoresParameters) {
  std::vector<Tensor<double>> ps = {test::random_tensor<double>({6}, 21)};
  const auto before = ps[0];
  check([](Graph<double>& g, std::span<const Var> p) { return project(g, sigmoid(g, p[0]), 22); }, ps);
  EXPECT_TRUE(ps[0] == before);
}

}  // namespace
}  // namespace xsl
