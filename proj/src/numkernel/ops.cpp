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


#include "xsl/numkernel/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "xsl/errors.hpp"
#include "xsl/numkernel/kernels.hpp"

namespace xsl {

namespace {

template <typename T>
std::span<T> sink_span(Tensor<T>* t) {
  return t ? t->data() : std::span<T>{};
}

void expect_rank(const Shape& s, std::size_t rank, const char* op, const char* what) {
  if (s.size() != rank)
    throw DimensionError(std::string(op) + ": " + what + " must have rank " + std::to_string(rank) +
                         ", got " + to_string(s));
}

}  // namespace

template <typename T>
Var conv2d(Graph<T>& g, Var x, Var kernels, Var bias, std::size_t padding) {
  const auto& xv = g.value(x);
  const auto& kv = g.value(kernels);
  const auto& bv = g.value(bias);
  expect_rank(xv.shape(), 4, "conv2d", "input");
  expect_rank(kv.shape(), 4, "conv2d", "kernels");
  expect_rank(bv.shape(), 1, "conv2d", "bias");
  if (kv.extent(1) != xv.extent(1))
    throw DimensionError("conv2d: kernels expect " + std::to_string(kv.extent(1)) +
                         " input maps, input " + to_string(xv.shape()) + " has " +
                         std::to_string(xv.extent(1)));
  if (bv.extent(0) != kv.extent(0))
    throw DimensionError("conv2d: bias has " + std::to_string(bv.extent(0)) + " entries for " +
                         std::to_string(kv.extent(0)) + " output maps");
  kernels::ConvDims d{xv.extent(0), xv.extent(1), xv.extent(2), xv.extent(3),
                      kv.extent(0), kv.extent(2), kv.extent(3), padding};
  d.validate();
  Tensor<T> out({d.batch, d.out_maps, d.out_height(), d.out_width()});
  kernels::conv2d_forward<T>(d, xv.data(), kv.data(), bv.data(), out.data());
  const bool rg = g.requires_grad(x) || g.requires_grad(kernels) || g.requires_grad(bias);
  return g.record(OpKind::kConv2d, std::move(out), rg,
                  [x, kernels, bias, d](Graph<T>& g, const Tensor<T>& go) {
                    kernels::conv2d_backward<T>(d, g.value(x).data(), g.value(kernels).data(),
                                                go.data(), sink_span(g.grad_sink(x)),
                                                sink_span(g.grad_sink(kernels)),
                                                sink_span(g.grad_sink(bias)));
                  });
}

template <typename T>
Var maxpool2x2(Graph<T>& g, Var x) {
  const auto& xv = g.value(x);
  expect_rank(xv.shape(), 4, "maxpool2x2", "input");
  kernels::PoolDims d{xv.extent(0) * xv.extent(1), xv.extent(2), xv.extent(3)};
  d.validate();
  Tensor<T> out({xv.extent(0), xv.extent(1), d.out_height(), d.out_width()});
  std::vector<std::uint32_t> argmax(out.size());
  kernels::maxpool2x2_forward<T>(d, xv.data(), out.data(), argmax);
  return g.record(OpKind::kMaxPool, std::move(out), g.requires_grad(x),
                  [x, d, argmax = std::move(argmax)](Graph<T>& g, const Tensor<T>& go) {
                    kernels::maxpool2x2_backward<T>(d, go.data(), argmax, g.grad_sink(x)->data());
                  });
}

template <typename T>
Var dense(Graph<T>& g, Var x, Var weights, Var bias) {
  const auto& xv = g.value(x);
  const auto& wv = g.value(weights);
  const auto& bv = g.value(bias);
  expect_rank(wv.shape(), 2, "dense", "weights");
  expect_rank(bv.shape(), 1, "dense", "bias");
  if (xv.rank() != 1 && xv.rank() != 2)
    throw DimensionError("dense: input must be a vector or a batch of vectors, got " +
                         to_string(xv.shape()));
  const std::size_t in = xv.shape().back();
  const std::size_t batch = xv.rank() == 2 ? xv.extent(0) : 1;
  if (wv.extent(1) != in)
    throw DimensionError("dense: weights " + to_string(wv.shape()) + " take " +
                         std::to_string(wv.extent(1)) + " inputs, input has length " +
                         std::to_string(in));
  if (bv.extent(0) != wv.extent(0))
    throw DimensionError("dense: bias length " + std::to_string(bv.extent(0)) +
                         " does not match " + std::to_string(wv.extent(0)) + " outputs");
  kernels::DenseDims d{batch, in, wv.extent(0)};
  Tensor<T> out(xv.rank() == 2 ? Shape{batch, d.out} : Shape{d.out});
  kernels::dense_forward<T>(d, xv.data(), wv.data(), bv.data(), out.data());
  const bool rg = g.requires_grad(x) || g.requires_grad(weights) || g.requires_grad(bias);
  return g.record(OpKind::kDense, std::move(out), rg,
                  [x, weights, bias, d](Graph<T>& g, const Tensor<T>& go) {
                    kernels::dense_backward<T>(d, g.value(x).data(), g.value(weights).data(),
                                               go.data(), sink_span(g.grad_sink(x)),
                                               sink_span(g.grad_sink(weights)),
                                               sink_span(g.grad_sink(bias)));
                  });
}

template <typename T>
Var activation(Graph<T>& g, Var x, Activation kind) {
  const auto& xv = g.value(x);
  Tensor<T> out(xv.shape());
  const auto in = xv.data();
  auto o = out.data();
  if (kind == Activation::kRelu) {
    for (std::size_t i = 0; i < in.size(); ++i) o[i] = in[i] > T(0) ? in[i] : T(0);
    return g.record(OpKind::kRelu, std::move(out), g.requires_grad(x),
                    [x](Graph<T>& g, const Tensor<T>& go) {
                      const auto in = g.value(x).data();
                      auto gx = g.grad_sink(x)->data();
                      for (std::size_t i = 0; i < in.size(); ++i)
                        if (in[i] > T(0)) gx[i] += go[i];
                    });
  }
  // Keep outputs strictly inside (0, 1) even where the logistic rounds to 0 or 1.
  const T lo = std::numeric_limits<T>::min();
  const T hi = T(1) - std::numeric_limits<T>::epsilon() / T(2);
  for (std::size_t i = 0; i < in.size(); ++i) o[i] = std::clamp(kernels::sigmoid(in[i]), lo, hi);
  const Var y{static_cast<std::uint32_t>(g.size())};
  return g.record(OpKind::kSigmoid, std::move(out), g.requires_grad(x),
                  [x, y](Graph<T>& g, const Tensor<T>& go) {
                    const auto s = g.value(y).data();
                    auto gx = g.grad_sink(x)->data();
                    for (std::size_t i = 0; i < s.size(); ++i) gx[i] += go[i] * s[i] * (T(1) - s[i]);
                  });
}

template <typename T>
Var embedding(Graph<T>& g, Var table, std::span<const int> ids) {
  const auto& tv = g.value(table);
  expect_rank(tv.shape(), 2, "embedding", "table");
  const std::size_t rows = tv.extent(0), dim = tv.extent(1);
  if (ids.empty()) throw DimensionError("embedding: no ids given");
  std::vector<int> idx(ids.begin(), ids.end());
  Tensor<T> out({idx.size(), dim});
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] < 0 || static_cast<std::size_t>(idx[r]) >= rows)
      throw IndexError("embedding: id " + std::to_string(idx[r]) + " outside [0, " +
                       std::to_string(rows) + ")");
    std::copy_n(tv.data().begin() + idx[r] * dim, dim, out.data().begin() + r * dim);
  }
  return g.record(OpKind::kEmbedding, std::move(out), g.requires_grad(table),
                  [table, dim, idx = std::move(idx)](Graph<T>& g, const Tensor<T>& go) {
                    auto gt = g.grad_sink(table)->data();
                    for (std::size_t r = 0; r < idx.size(); ++r)
                      for (std::size_t c = 0; c < dim; ++c) gt[idx[r] * dim + c] += go[r * dim + c];
                  });
}

template <typename T>
Var dropout(Graph<T>& g, Var x, double p, Mode mode, Rng* rng) {
  if (!(p >= 0.0 && p < 1.0))
    throw ParameterError("dropout: probability must lie in [0, 1), got " + std::to_string(p));
  if (mode == Mode::kEval || p == 0.0) return x;
  if (!rng) throw UsageError("dropout: training mode needs a random stream");
  const auto& xv = g.value(x);
  const T keep_scale = T(1) / static_cast<T>(1.0 - p);
  std::vector<T> mask(xv.size());
  for (auto& m : mask) m = rng->bernoulli(p) ? T(0) : keep_scale;
  Tensor<T> out(xv.shape());
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = xv[i] * mask[i];
  return g.record(OpKind::kDropout, std::move(out), g.requires_grad(x),
                  [x, mask = std::move(mask)](Graph<T>& g, const Tensor<T>& go) {
                    auto gx = g.grad_sink(x)->data();
                    for (std::size_t i = 0; i < mask.size(); ++i) gx[i] += go[i] * mask[i];
                  });
}

template <typename T>
Var gather_rows(Graph<T>& g, Var x, std::span<const std::uint32_t> rows) {
  const auto& xv = g.value(x);
  if (xv.rank() < 1) throw DimensionError("gather_rows: input needs a leading axis");
  const std::size_t n = xv.extent(0);
  const std::size_t width = xv.size() / n;
  Shape shape = xv.shape();
  shape[0] = rows.size();
  std::vector<std::uint32_t> idx(rows.begin(), rows.end());
  Tensor<T> out(shape);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] >= n)
      throw IndexError("gather_rows: row " + std::to_string(idx[r]) + " outside [0, " +
                       std::to_string(n) + ")");
    std::copy_n(xv.data().begin() + idx[r] * width, width, out.data().begin() + r * width);
  }
  return g.record(OpKind::kGatherRows, std::move(out), g.requires_grad(x),
                  [x, width, idx = std::move(idx)](Graph<T>& g, const Tensor<T>& go) {
                    auto gx = g.grad_sink(x)->data();
                    for (std::size_t r = 0; r < idx.size(); ++r)
                      for (std::size_t c = 0; c < width; ++c) gx[idx[r] * width + c] += go[r * width + c];
                  });
}

template <typename T>
Var reshape(Graph<T>& g, Var x, Shape shape) {
  Tensor<T> out = g.value(x);
  out.reshape(std::move(shape));
  return g.record(OpKind::kReshape, std::move(out), g.requires_grad(x),
                  [x](Graph<T>& g, const Tensor<T>& go) {
                    auto gx = g.grad_sink(x)->data();
                    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += go[i];
                  });
}

template <typename T>
Var pair_scores(Graph<T>& g, Var images, Var words, std::span<const std::size_t> word_counts,
                T scale) {
  constexpr std::size_t kQuadrants = 4;
  const auto& iv = g.value(images);
  const auto& wv = g.value(words);
  expect_rank(iv.shape(), 2, "pair_scores", "image embeddings");
  expect_rank(wv.shape(), 2, "pair_scores", "word embeddings");
  const std::size_t dim = iv.extent(1);
  if (wv.extent(1) != dim)
    throw DimensionError("pair_scores: image embeddings have dimension " + std::to_string(dim) +
                         ", word embeddings " + std::to_string(wv.extent(1)));
  if (iv.extent(0) != kQuadrants * word_counts.size())
    throw DimensionError("pair_scores: " + std::to_string(word_counts.size()) + " trials need " +
                         std::to_string(kQuadrants * word_counts.size()) + " image rows, got " +
                         std::to_string(iv.extent(0)));
  const std::size_t total_words = std::accumulate(word_counts.begin(), word_counts.end(), std::size_t{0});
  if (wv.extent(0) != total_words)
    throw DimensionError("pair_scores: captions hold " + std::to_string(total_words) +
                         " words, got " + std::to_string(wv.extent(0)) + " word rows");
  std::vector<std::size_t> counts(word_counts.begin(), word_counts.end());
  Tensor<T> out({total_words * kQuadrants});
  const auto I = iv.data();
  const auto W = wv.data();
  std::size_t word = 0;
  for (std::size_t t = 0; t < counts.size(); ++t)
    for (std::size_t j = 0; j < counts[t]; ++j, ++word)
      for (std::size_t q = 0; q < kQuadrants; ++q) {
        const T* u = I.data() + (kQuadrants * t + q) * dim;
        const T* v = W.data() + word * dim;
        T acc = 0;
        for (std::size_t c = 0; c < dim; ++c) acc += u[c] * v[c];
        out[word * kQuadrants + q] = scale * acc;
      }
  const bool rg = g.requires_grad(images) || g.requires_grad(words);
  return g.record(
      OpKind::kPairScores, std::move(out), rg,
      [images, words, dim, scale, counts = std::move(counts)](Graph<T>& g, const Tensor<T>& go) {
        const auto I = g.value(images).data();
        const auto W = g.value(words).data();
        auto* gi = g.grad_sink(images);
        auto* gw = g.grad_sink(words);
        std::size_t word = 0;
        for (std::size_t t = 0; t < counts.size(); ++t)
          for (std::size_t j = 0; j < counts[t]; ++j, ++word)
            for (std::size_t q = 0; q < kQuadrants; ++q) {
              const T s = scale * go[word * kQuadrants + q];
              const std::size_t ui = (kQuadrants * t + q) * dim, vi = word * dim;
              if (gi)
                for (std::size_t c = 0; c < dim; ++c) gi->data()[ui + c] += s * W[vi + c];
              if (gw)
                for (std::size_t c = 0; c < dim; ++c) gw->data()[vi + c] += s * I[ui + c];
            }
      });
}

template <typename T>
Var group_max(Graph<T>& g, Var x, std::size_t group) {
  const auto& xv = g.value(x);
  if (group == 0 || xv.size() % group != 0)
    throw DimensionError("group_max: " + std::to_string(xv.size()) +
                         " values do not split into groups of " + std::to_string(group));
  const std::size_t n = xv.size() / group;
  Tensor<T> out({n});
  std::vector<std::uint32_t> arg(n);
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t best = r * group;
    for (std::size_t i = r * group + 1; i < (r + 1) * group; ++i)
      if (xv[i] > xv[best]) best = i;
    arg[r] = static_cast<std::uint32_t>(best);
    out[r] = xv[best];
  }
  return g.record(OpKind::kGroupMax, std::move(out), g.requires_grad(x),
                  [x, arg = std::move(arg)](Graph<T>& g, const Tensor<T>& go) {
                    auto gx = g.grad_sink(x)->data();
                    for (std::size_t r = 0; r < arg.size(); ++r) gx[arg[r]] += go[r];
                  });
}

template <typename T>
Var segment_product(Graph<T>& g, Var x, std::span<const std::size_t> lengths) {
  const auto& xv = g.value(x);
  const std::size_t total = std::accumulate(lengths.begin(), lengths.end(), std::size_t{0});
  if (total != xv.size())
    throw DimensionError("segment_product: segments cover " + std::to_string(total) +
                         " values, input has " + std::to_string(xv.size()));
  std::vector<std::size_t> lens(lengths.begin(), lengths.end());
  Tensor<T> out({lens.size()});
  std::size_t at = 0;
  for (std::size_t s = 0; s < lens.size(); ++s) {
    if (lens[s] == 0) throw DimensionError("segment_product: empty segment");
    T p = xv[at];
    for (std::size_t i = 1; i < lens[s]; ++i) p *= xv[at + i];
    out[s] = p;
    at += lens[s];
  }
  return g.record(OpKind::kSegmentProduct, std::move(out), g.requires_grad(x),
                  [x, lens = std::move(lens)](Graph<T>& g, const Tensor<T>& go) {
                    const auto xs = g.value(x).data();
                    auto gx = g.grad_sink(x)->data();
                    std::size_t at = 0;
                    for (std::size_t s = 0; s < lens.size(); ++s) {
                      // Product of all other members via prefix/suffix sweeps.
                      T prefix = 1;
                      std::vector<T> suffix(lens[s] + 1, T(1));
                      for (std::size_t i = lens[s]; i-- > 0;) suffix[i] = suffix[i + 1] * xs[at + i];
                      for (std::size_t i = 0; i < lens[s]; ++i) {
                        gx[at + i] += go[s] * prefix * suffix[i + 1];
                        prefix *= xs[at + i];
                      }
                      at += lens[s];
                    }
                  });
}

template <typename T>
Var bce_mean(Graph<T>& g, Var predictions, std::span<const T> labels, T clamp) {
  const auto& pv = g.value(predictions);
  if (pv.size() != labels.size())
    throw DimensionError("bce_mean: " + std::to_string(pv.size()) + " predictions for " +
                         std::to_string(labels.size()) + " labels");
  if (labels.empty()) throw DimensionError("bce_mean: empty batch");
  std::vector<T> y(labels.begin(), labels.end());
  const T lo = clamp, hi = T(1) - clamp;
  T loss = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const T p = std::clamp(pv[i], lo, hi);
    loss -= y[i] * std::log(p) + (T(1) - y[i]) * std::log(T(1) - p);
  }
  loss /= static_cast<T>(y.size());
  return g.record(OpKind::kBce, Tensor<T>({1}, {loss}), g.requires_grad(predictions),
                  [predictions, lo, hi, y = std::move(y)](Graph<T>& g, const Tensor<T>& go) {
                    const auto p = g.value(predictions).data();
                    auto gp = g.grad_sink(predictions)->data();
                    const T inv_n = go[0] / static_cast<T>(y.size());
                    for (std::size_t i = 0; i < y.size(); ++i) {
                      if (p[i] < lo || p[i] > hi) continue;  // flat outside the clamp
                      gp[i] += inv_n * (-y[i] / p[i] + (T(1) - y[i]) / (T(1) - p[i]));
                    }
                  });
}

template <typename T>
Var sum(Graph<T>& g, Var x) {
  const auto& xv = g.value(x);
  T acc = 0;
  for (auto v : xv.data()) acc += v;
  return g.record(OpKind::kSum, Tensor<T>({1}, {acc}), g.requires_grad(x),
                  [x](Graph<T>& g, const Tensor<T>& go) {
                    for (auto& v : g.grad_sink(x)->data()) v += go[0];
                  });
}

double bce_loss(double prediction, int label, double clamp) {
  const double p = std::clamp(prediction, clamp, 1.0 - clamp);
  return -(label * std::log(p) + (1 - label) * std::log(1.0 - p));
}

#define XSL_INSTANTIATE(T)                                                                      \
  template Var conv2d<T>(Graph<T>&, Var, Var, Var, std::size_t);                                \
  template Var maxpool2x2<T>(Graph<T>&, Var);                                                   \
  template Var dense<T>(Graph<T>&, Var, Var, Var);                                              \
  template Var activation<T>(Graph<T>&, Var, Activation);                                       \
  template Var embedding<T>(Graph<T>&, Var, std::span<const int>);                              \
  template Var dropout<T>(Graph<T>&, Var, double, Mode, Rng*);                                  \
  template Var gather_rows<T>(Graph<T>&, Var, std::span<const std::uint32_t>);                  \
  template Var reshape<T>(Graph<T>&, Var, Shape);                                               \
  template Var pair_scores<T>(Graph<T>&, Var, Var, std::span<const std::size_t>, T);            \
  template Var group_max<T>(Graph<T>&, Var, std::size_t);                                       \
  template Var segment_product<T>(Graph<T>&, Var, std::span<const std::size_t>);                \
  template Var bce_mean<T>(Graph<T>&, Var, std::span<const T>, T);                              \
  template Var sum<T>(Graph<T>&, Var);

XSL_INSTANTIATE(float)
XSL_INSTANTIATE(double)

#undef XSL_INSTANTIATE

}  // namespace xsl
