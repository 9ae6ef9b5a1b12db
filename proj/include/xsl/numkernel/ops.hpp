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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "xsl/numkernel/graph.hpp"
#include "xsl/numkernel/rng.hpp"

namespace xsl {

enum class Activation { kRelu, kSigmoid };
enum class Mode { kTrain, kEval };

// Differentiable primitives recorded on a Graph. Image tensors are NCHW.

/// x: [N, C, H, W], kernels: [O, C, kh, kw], bias: [O]; stride 1.
template <typename T>
Var conv2d(Graph<T>& g, Var x, Var kernels, Var bias, std::size_t padding);

/// x: [N, C, H, W] with H, W even -> [N, C, H/2, W/2].
template <typename T>
Var maxpool2x2(Graph<T>& g, Var x);

/// x: [N, in] (or [in]), weights: [out, in], bias: [out].
template <typename T>
Var dense(Graph<T>& g, Var x, Var weights, Var bias);

template <typename T>
Var activation(Graph<T>& g, Var x, Activation kind);

template <typename T>
Var relu(Graph<T>& g, Var x) {
  return activation(g, x, Activation::kRelu);
}

/// Outputs are clamped into the open interval (0, 1).
template <typename T>
Var sigmoid(Graph<T>& g, Var x) {
  return activation(g, x, Activation::kSigmoid);
}

/// table: [V, d]; returns [ids.size(), d]. Gradient reaches only the looked-up rows.
template <typename T>
Var embedding(Graph<T>& g, Var table, std::span<const int> ids);

/// Inverted dropout. Eval mode returns x unchanged. Throws ParameterError for p
/// outside [0, 1).
template <typename T>
Var dropout(Graph<T>& g, Var x, double p, Mode mode, Rng* rng);

/// out[i] = x[rows[i]] along the first axis.
template <typename T>
Var gather_rows(Graph<T>& g, Var x, std::span<const std::uint32_t> rows);

template <typename T>
Var reshape(Graph<T>& g, Var x, Shape shape);

/// Scaled dot products between image and word embeddings, per trial.
/// images: [4 * n_trials, d]; words: [sum(word_counts), d]. Trial t owns image
/// rows [4t, 4t+4) and the next word_counts[t] word rows. The result is flat,
/// trial after trial, each a word_counts[t] x 4 block (word-major):
///   s[j][i] = scale * <image_i, word_j>.
template <typename T>
Var pair_scores(Graph<T>& g, Var images, Var words, std::span<const std::size_t> word_counts,
                T scale);

/// Maximum over consecutive groups of `group` entries of a flat input.
/// Ties pass the gradient to the first maximal entry.
template <typename T>
Var group_max(Graph<T>& g, Var x, std::size_t group);

/// Products over consecutive segments, multiplied in order.
template <typename T>
Var segment_product(Graph<T>& g, Var x, std::span<const std::size_t> lengths);

/// Mean binary cross-entropy; predictions clamped to [clamp, 1 - clamp].
template <typename T>
Var bce_mean(Graph<T>& g, Var predictions, std::span<const T> labels, T clamp = T(1e-7));

template <typename T>
Var sum(Graph<T>& g, Var x);

/// Scalar BCE on one prediction, clamped the same way as bce_mean.
double bce_loss(double prediction, int label, double clamp = 1e-7);

}  // namespace xsl
