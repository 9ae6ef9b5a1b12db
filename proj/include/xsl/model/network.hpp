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

#include <span>
#include <vector>

#include "xsl/model/params.hpp"
#include "xsl/numkernel/graph.hpp"
#include "xsl/numkernel/ops.hpp"
#include "xsl/scene/scene.hpp"

namespace xsl {

/// Word-by-quadrant attention scores for one trial.
struct AttentionMap {
  std::vector<int> words;
  std::vector<double> scores;  // words.size() x 4, row-major

  double at(std::size_t word, int quadrant) const { return scores[word * kQuadrants + quadrant]; }
  std::size_t rows() const { return words.size(); }
  /// Argmax over the row's quadrants; ties go to the lowest quadrant.
  int argmax(std::size_t word) const;
};

struct ModelOutput {
  AttentionMap attention;
  std::vector<double> sub_outputs;
  double match_probability = 0;
};

/// Graph values produced for a batch of trials.
struct NetworkVars {
  Var image_embeddings;   // [4B, 64]
  Var word_embeddings;    // [W, 64]
  Var attention;          // flat, trial after trial, k_t x 4 each
  Var sub_outputs;        // [W]
  Var match_probability;  // [B]
  std::vector<std::size_t> word_counts;
};

/// Parameter leaves on g, in ModelParams::kNames order. Untracked leaves skip
/// gradient bookkeeping (evaluation).
template <typename T>
std::vector<Var> bind_params(Graph<T>& g, const ModelParams<T>& params, bool trainable);

/// Records the full matching network for a batch on g. Identical quadrant
/// images (object network) or identical scenes (scene network) within the
/// batch share one pass through the convolutional trunk.
template <typename T>
NetworkVars build_network(Graph<T>& g, Arch arch, std::span<const Var> params,
                          std::span<const Trial* const> trials, Mode mode, Rng* rng);

/// Per-quadrant embeddings of one 56x56 scene via the shared object network: [4, 64].
template <typename T>
Tensor<T> embed_quadrants_object(std::span<const float> scene, const ModelParams<T>& params, Mode mode,
                                 Rng* rng);

/// Four embeddings of one 56x56 scene via the unsegmented scene network: [4, 64].
template <typename T>
Tensor<T> embed_scene_cnn(std::span<const float> scene, const ModelParams<T>& params, Mode mode, Rng* rng);

/// Rows of the word table, caption order: [k, 64].
template <typename T>
Tensor<T> embed_words(std::span<const int> caption, const ModelParams<T>& params);

/// a[j][i] = sigmoid(<u_i, v_j> / sqrt(d)); u is [4, d], v is [k, d].
template <typename T>
AttentionMap attention_scores(const Tensor<T>& u, const Tensor<T>& v, std::span<const int> words = {});

/// o_j = max_i a[j][i]; o = product of o_j in caption order.
ModelOutput aggregate_output(AttentionMap attention);

/// Single-trial forward pass.
template <typename T>
ModelOutput forward(const Scene& scene, std::span<const int> caption, const ModelParams<T>& params, Mode mode,
                    Rng* rng);

/// Evaluation-mode outputs for many trials, batched.
template <typename T>
std::vector<ModelOutput> predict(const ModelParams<T>& params, std::span<const Trial> trials,
                                 std::size_t batch_size = 128);

}  // namespace xsl
