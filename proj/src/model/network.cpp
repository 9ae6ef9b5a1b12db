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


#include "xsl/model/network.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "xsl/errors.hpp"

namespace xsl {

namespace {

enum ParamIndex : std::size_t { kConv1W, kConv1B, kConv2W, kConv2B, kFc1W, kFc1B, kFc2W, kFc2B, kTable };

// Conv trunk plus the first dense layer: [N, 1, S, S] -> [N, hidden].
template <typename T>
Var trunk(Graph<T>& g, std::span<const Var> p, Var images) {
  const std::size_t n = g.value(images).extent(0);
  Var x = maxpool2x2(g, relu(g, conv2d(g, images, p[kConv1W], p[kConv1B], kConvPadding)));
  x = maxpool2x2(g, relu(g, conv2d(g, x, p[kConv2W], p[kConv2B], kConvPadding)));
  const std::size_t flat = g.value(x).size() / n;
  x = reshape(g, x, {n, flat});
  return relu(g, dense(g, x, p[kFc1W], p[kFc1B]));
}

void check_scene(const Scene& s) {
  if (s.pixels.size() != kScenePixels)
    throw DimensionError("scene must be 56x56 (" + std::to_string(kScenePixels) + " values), got " +
                         std::to_string(s.pixels.size()));
}

bool quadrant_blank(const Scene& s, int q) {
  const std::size_t r0 = kDigitSide * (q / 2), c0 = kDigitSide * (q % 2);
  for (std::size_t r = 0; r < kDigitSide; ++r)
    for (std::size_t c = 0; c < kDigitSide; ++c)
      if (s.pixels[(r0 + r) * kSceneSide + c0 + c] != 0.0f) return false;
  return true;
}

// Identity of a quadrant image: a dataset exemplar, the blank image, or
// (for scenes without provenance) the quadrant itself.
using QuadrantKey = std::tuple<int, int, std::uintptr_t, int>;

QuadrantKey quadrant_key(const Scene& s, int q) {
  if (const auto src = s.spec.quadrant_sources()[q])
    return {1, static_cast<int>(src->split), src->index, 0};
  if (s.spec.entries.size() > 0 || quadrant_blank(s, q)) return {0, 0, 0, 0};
  return {2, 0, reinterpret_cast<std::uintptr_t>(&s), q};
}

// [4 * scenes.size(), 64] image embeddings.
template <typename T>
Var embed_images(Graph<T>& g, Arch arch, std::span<const Var> p, std::span<const Scene* const> scenes, Mode mode,
                 Rng* rng) {
  for (const Scene* s : scenes) check_scene(*s);
  const std::size_t n = scenes.size();
  if (arch == Arch::kObjectCnn) {
    std::map<QuadrantKey, std::uint32_t> unique;
    std::vector<std::pair<const Scene*, int>> sources;
    std::vector<std::uint32_t> rows(kQuadrants * n);
    for (std::size_t t = 0; t < n; ++t)
      for (int q = 0; q < kQuadrants; ++q) {
        auto [it, inserted] = unique.try_emplace(quadrant_key(*scenes[t], q), static_cast<std::uint32_t>(sources.size()));
        if (inserted) sources.emplace_back(scenes[t], q);
        rows[kQuadrants * t + q] = it->second;
      }
    Tensor<T> images({sources.size(), 1, kDigitSide, kDigitSide});
    for (std::size_t u = 0; u < sources.size(); ++u) {
      const auto quad = extract_quadrant(sources[u].first->pixels, sources[u].second);
      std::transform(quad.begin(), quad.end(), images.data().begin() + u * kDigitPixels,
                     [](float v) { return static_cast<T>(v); });
    }
    Var h = trunk(g, p, g.constant(std::move(images)));
    h = dropout(g, gather_rows(g, h, rows), kDropout, mode, rng);
    return dense(g, h, p[kFc2W], p[kFc2B]);
  }

  std::map<const Scene*, std::uint32_t> unique;
  std::vector<const Scene*> sources;
  std::vector<std::uint32_t> rows(n);
  for (std::size_t t = 0; t < n; ++t) {
    auto [it, inserted] = unique.try_emplace(scenes[t], static_cast<std::uint32_t>(sources.size()));
    if (inserted) sources.push_back(scenes[t]);
    rows[t] = it->second;
  }
  Tensor<T> images({sources.size(), 1, kSceneSide, kSceneSide});
  for (std::size_t u = 0; u < sources.size(); ++u)
    std::transform(sources[u]->pixels.begin(), sources[u]->pixels.end(), images.data().begin() + u * kScenePixels,
                   [](float v) { return static_cast<T>(v); });
  Var h = trunk(g, p, g.constant(std::move(images)));
  h = dropout(g, gather_rows(g, h, rows), kDropout, mode, rng);
  return reshape(g, dense(g, h, p[kFc2W], p[kFc2B]), {kQuadrants * n, kEmbedDim});
}

template <typename T>
T score_scale() {
  return T(1) / std::sqrt(static_cast<T>(kEmbedDim));
}

void require_arch(Arch have, Arch want) {
  if (have != want)
    throw UsageError(std::string("parameters belong to ") + arch_name(have) + ", call needs " + arch_name(want));
}

}  // namespace

int AttentionMap::argmax(std::size_t word) const {
  int best = 0;
  for (int q = 1; q < kQuadrants; ++q)
    if (at(word, q) > at(word, best)) best = q;
  return best;
}

template <typename T>
std::vector<Var> bind_params(Graph<T>& g, const ModelParams<T>& params, bool trainable) {
  std::vector<Var> out;
  for (const auto* t : params.tensors()) out.push_back(trainable ? g.parameter(*t) : g.input(*t));
  return out;
}

template <typename T>
NetworkVars build_network(Graph<T>& g, Arch arch, std::span<const Var> params,
                          std::span<const Trial* const> trials, Mode mode, Rng* rng) {
  if (params.size() != ModelParams<T>::kCount)
    throw UsageError("build_network: expected " + std::to_string(ModelParams<T>::kCount) + " parameter leaves");
  if (trials.empty()) throw UsageError("build_network: empty batch");
  std::vector<const Scene*> scenes;
  std::vector<int> ids;
  NetworkVars out;
  for (const Trial* t : trials) {
    if (t->caption.empty()) throw UsageError("build_network: trial with an empty caption");
    scenes.push_back(t->scene.get());
    ids.insert(ids.end(), t->caption.begin(), t->caption.end());
    out.word_counts.push_back(t->caption.size());
  }
  out.image_embeddings = embed_images(g, arch, params, scenes, mode, rng);
  out.word_embeddings = embedding(g, params[kTable], ids);
  const Var scores = pair_scores(g, out.image_embeddings, out.word_embeddings, out.word_counts, score_scale<T>());
  out.attention = sigmoid(g, scores);
  out.sub_outputs = group_max(g, out.attention, kQuadrants);
  out.match_probability = segment_product(g, out.sub_outputs, out.word_counts);
  return out;
}

template <typename T>
Tensor<T> embed_quadrants_object(std::span<const float> scene, const ModelParams<T>& params, Mode mode, Rng* rng) {
  require_arch(params.arch, Arch::kObjectCnn);
  Scene s;
  s.pixels.assign(scene.begin(), scene.end());
  Graph<T> g;
  const auto p = bind_params(g, params, false);
  const Scene* ptr = &s;
  return g.value(embed_images(g, Arch::kObjectCnn, p, std::span(&ptr, 1), mode, rng));
}

template <typename T>
Tensor<T> embed_scene_cnn(std::span<const float> scene, const ModelParams<T>& params, Mode mode, Rng* rng) {
  require_arch(params.arch, Arch::kSceneCnn);
  Scene s;
  s.pixels.assign(scene.begin(), scene.end());
  Graph<T> g;
  const auto p = bind_params(g, params, false);
  const Scene* ptr = &s;
  return g.value(embed_images(g, Arch::kSceneCnn, p, std::span(&ptr, 1), mode, rng));
}

template <typename T>
Tensor<T> embed_words(std::span<const int> caption, const ModelParams<T>& params) {
  Graph<T> g;
  return g.value(embedding(g, g.input(params.embedding), caption));
}

template <typename T>
AttentionMap attention_scores(const Tensor<T>& u, const Tensor<T>& v, std::span<const int> words) {
  if (u.rank() != 2 || u.extent(0) != kQuadrants)
    throw DimensionError("attention_scores: image embeddings must be [4, d], got " + to_string(u.shape()));
  if (v.rank() != 2)
    throw DimensionError("attention_scores: word embeddings must be [k, d], got " + to_string(v.shape()));
  Graph<T> g;
  const std::size_t k = v.extent(0);
  const std::size_t counts[] = {k};
  const T scale = T(1) / std::sqrt(static_cast<T>(u.extent(1)));
  const Var a = sigmoid(g, pair_scores(g, g.input(u), g.input(v), std::span(counts), scale));
  AttentionMap map;
  map.words.assign(words.begin(), words.end());
  if (map.words.empty()) map.words.assign(k, -1);
  for (auto x : g.value(a).data()) map.scores.push_back(static_cast<double>(x));
  return map;
}

ModelOutput aggregate_output(AttentionMap attention) {
  ModelOutput out;
  out.match_probability = 1.0;
  for (std::size_t j = 0; j < attention.rows(); ++j) {
    const double o = attention.at(j, attention.argmax(j));
    out.sub_outputs.push_back(o);
    out.match_probability *= o;
  }
  out.attention = std::move(attention);
  return out;
}

namespace {

template <typename T>
std::vector<ModelOutput> collect(const Graph<T>& g, const NetworkVars& vars, std::span<const Trial* const> trials) {
  std::vector<ModelOutput> out;
  const auto& att = g.value(vars.attention);
  const auto& sub = g.value(vars.sub_outputs);
  const auto& prob = g.value(vars.match_probability);
  std::size_t word = 0;
  for (std::size_t t = 0; t < trials.size(); ++t) {
    ModelOutput o;
    o.attention.words = trials[t]->caption;
    for (std::size_t j = 0; j < vars.word_counts[t]; ++j, ++word) {
      for (int q = 0; q < kQuadrants; ++q) o.attention.scores.push_back(att[word * kQuadrants + q]);
      o.sub_outputs.push_back(sub[word]);
    }
    o.match_probability = prob[t];
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace

template <typename T>
ModelOutput forward(const Scene& scene, std::span<const int> caption, const ModelParams<T>& params, Mode mode,
                    Rng* rng) {
  Trial trial;
  trial.scene = std::shared_ptr<const Scene>(&scene, [](const Scene*) {});
  trial.caption.assign(caption.begin(), caption.end());
  const Trial* ptr = &trial;
  Graph<T> g;
  const auto p = bind_params(g, params, false);
  const auto vars = build_network(g, params.arch, p, std::span(&ptr, 1), mode, rng);
  return collect(g, vars, std::span(&ptr, 1)).front();
}

template <typename T>
std::vector<ModelOutput> predict(const ModelParams<T>& params, std::span<const Trial> trials, std::size_t batch_size) {
  std::vector<ModelOutput> out;
  out.reserve(trials.size());
  for (std::size_t b0 = 0; b0 < trials.size(); b0 += batch_size) {
    std::vector<const Trial*> batch;
    for (std::size_t i = b0; i < std::min(trials.size(), b0 + batch_size); ++i) batch.push_back(&trials[i]);
    Graph<T> g;
    const auto p = bind_params(g, params, false);
    const auto vars = build_network(g, params.arch, p, batch, Mode::kEval, nullptr);
    auto part = collect(g, vars, batch);
    std::move(part.begin(), part.end(), std::back_inserter(out));
  }
  return out;
}

#define XSL_INSTANTIATE(T)                                                                                  \
  template std::vector<Var> bind_params<T>(Graph<T>&, const ModelParams<T>&, bool);                        \
  template NetworkVars build_network<T>(Graph<T>&, Arch, std::span<const Var>,                             \
                                        std::span<const Trial* const>, Mode, Rng*);                       \
  template Tensor<T> embed_quadrants_object<T>(std::span<const float>, const ModelParams<T>&, Mode, Rng*); \
  template Tensor<T> embed_scene_cnn<T>(std::span<const float>, const ModelParams<T>&, Mode, Rng*);        \
  template Tensor<T> embed_words<T>(std::span<const int>, const ModelParams<T>&);                          \
  template AttentionMap attention_scores<T>(const Tensor<T>&, const Tensor<T>&, std::span<const int>);     \
  template ModelOutput forward<T>(const Scene&, std::span<const int>, const ModelParams<T>&, Mode, Rng*);  \
  template std::vector<ModelOutput> predict<T>(const ModelParams<T>&, std::span<const Trial>, std::size_t);

XSL_INSTANTIATE(float)
XSL_INSTANTIATE(double)

#undef XSL_INSTANTIATE

}  // namespace xsl
