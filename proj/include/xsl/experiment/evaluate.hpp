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

#include "xsl/model/network.hpp"
#include "xsl/scene/scene.hpp"

namespace xsl {

/// Fraction of trials where (p >= 0.5) agrees with the label. Throws
/// UsageError for empty input or mismatched lengths.
double discrimination_accuracy(std::span<const double> match_probabilities, std::span<const TrialLabel> labels);

/// Evaluation-mode discrimination accuracy of params on trials.
double discrimination_accuracy(const ModelParams<float>& params, std::span<const Trial> trials);

struct AfcRecord {
  int target_word = 0;
  int target_quadrant = 0;
  int chosen_quadrant = 0;
  bool correct = false;
};

struct AfcResult {
  double accuracy = 0;
  std::vector<AfcRecord> records;
};

/// Quadrant picked for a single-word caption: argmax of the attention row,
/// lowest index on ties. Throws ProtocolError unless exactly one word.
int choose_quadrant(const AttentionMap& attention);

/// Four-alternative forced choice over eval trials. Throws ProtocolError for
/// captions that are not a single word, or scenes with an empty quadrant.
AfcResult evaluate_4afc(const ModelParams<float>& params, std::span<const EvalTrial> trials);

/// Init seed of the fresh model that scores baseline trial i.
std::uint64_t baseline_init_seed(std::uint64_t seed, std::size_t trial);

/// 4AFC accuracy of untrained networks, one freshly initialized model per
/// trial. A single initialization carries fixed word-to-class affinities
/// that move its accuracy well away from chance; independent draws make the
/// hit count binomial at 0.25.
AfcResult evaluate_untrained_baseline(Arch arch, std::span<const EvalTrial> trials, std::uint64_t seed);

}  // namespace xsl
