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


#include "xsl/experiment/evaluate.hpp"

#include "xsl/errors.hpp"

namespace xsl {

double discrimination_accuracy(std::span<const double> match_probabilities, std::span<const TrialLabel> labels) {
  if (match_probabilities.empty()) throw UsageError("discrimination_accuracy: empty trial list");
  if (match_probabilities.size() != labels.size())
    throw UsageError("discrimination_accuracy: " + std::to_string(match_probabilities.size()) +
                     " outputs for " + std::to_string(labels.size()) + " labels");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if ((match_probabilities[i] >= 0.5) == (labels[i] == TrialLabel::kMatch)) ++correct;
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

double discrimination_accuracy(const ModelParams<float>& params, std::span<const Trial> trials) {
  if (trials.empty()) throw UsageError("discrimination_accuracy: empty trial list");
  const auto outputs = predict(params, trials);
  std::vector<double> probs;
  std::vector<TrialLabel> labels;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    probs.push_back(outputs[i].match_probability);
    labels.push_back(trials[i].label);
  }
  return discrimination_accuracy(probs, labels);
}

int choose_quadrant(const AttentionMap& attention) {
  if (attention.rows() != 1)
    throw ProtocolError("4AFC needs a single-word caption, got " + std::to_string(attention.rows()) + " words");
  return attention.argmax(0);
}

AfcResult evaluate_4afc(const ModelParams<float>& params, std::span<const EvalTrial> trials) {
  if (trials.empty()) throw UsageError("evaluate_4afc: no trials");
  std::vector<Trial> plain;
  for (const auto& e : trials) {
    if (e.trial.caption.size() != 1)
      throw ProtocolError("4AFC trial caption has " + std::to_string(e.trial.caption.size()) + " words");
    for (int c : e.trial.scene->spec.quadrant_classes())
      if (c < 0) throw ProtocolError("4AFC trial scene has an empty quadrant");
    plain.push_back(e.trial);
  }
  const auto outputs = predict(params, std::span<const Trial>(plain));
  AfcResult result;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    AfcRecord r;
    r.target_word = trials[i].target_word;
    r.target_quadrant = trials[i].target_quadrant;
    r.chosen_quadrant = choose_quadrant(outputs[i].attention);
    r.correct = r.chosen_quadrant == r.target_quadrant;
    correct += r.correct;
    result.records.push_back(r);
  }
  result.accuracy = static_cast<double>(correct) / static_cast<double>(trials.size());
  return result;
}

std::uint64_t baseline_init_seed(std::uint64_t seed, std::size_t trial) {
  return derive_seed(seed, {0xba5e, static_cast<std::uint64_t>(trial)});
}

AfcResult evaluate_untrained_baseline(Arch arch, std::span<const EvalTrial> trials, std::uint64_t seed) {
  if (trials.empty()) throw UsageError("evaluate_untrained_baseline: no trials");
  AfcResult result;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const auto params = init_params<float>(arch, baseline_init_seed(seed, i));
    const auto one = evaluate_4afc(params, trials.subspan(i, 1));
    correct += one.records[0].correct;
    result.records.push_back(one.records[0]);
  }
  result.accuracy = static_cast<double>(correct) / static_cast<double>(trials.size());
  return result;
}

}  // namespace xsl
