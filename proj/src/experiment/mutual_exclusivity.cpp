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


#include "xsl/experiment/mutual_exclusivity.hpp"

#include <chrono>

#include "xsl/errors.hpp"
#include "xsl/experiment/evaluate.hpp"
#include "xsl/experiment/train.hpp"

namespace xsl {

namespace {
constexpr std::array<const char*, kMeClassCount> kMeClassNames = {"novel", "foil", "blank", "non_match"};
constexpr std::uint64_t kMeTag = 0x3e;
}  // namespace

const char* me_class_name(MeClass c) { return kMeClassNames[static_cast<std::size_t>(c)]; }

MeClass parse_me_class(const std::string& text) {
  for (std::size_t i = 0; i < kMeClassCount; ++i)
    if (text == kMeClassNames[i]) return static_cast<MeClass>(i);
  throw ConfigError("unknown ME classification '" + text + "'");
}

MeClass classify_me_probe(const ModelOutput& probe_output, int novel_quadrant, int foil_quadrant) {
  if (probe_output.match_probability < 0.5) return MeClass::kNonMatch;
  const int q = probe_output.attention.argmax(0);
  if (q == novel_quadrant) return MeClass::kNovel;
  if (q == foil_quadrant) return MeClass::kFoil;
  return MeClass::kBlank;
}

MeSummary summarize_me(std::span<const MeRun> runs) {
  MeSummary s;
  s.runs = runs.size();
  for (const auto& r : runs) ++s.counts[static_cast<std::size_t>(r.outcome)];
  const auto novel = s.counts[0], foil = s.counts[1], blank = s.counts[2], non_match = s.counts[3];
  if (novel + foil > 0) s.preference = static_cast<double>(novel) / static_cast<double>(novel + foil);
  if (s.runs > 0) {
    s.blank_fraction = static_cast<double>(blank) / static_cast<double>(s.runs);
    s.excluded_fraction = static_cast<double>(blank + non_match) / static_cast<double>(s.runs);
  }
  return s;
}

MeRun run_me_single(MeMode mode, std::uint64_t seed, int epochs, const DigitStore& train) {
  const auto start = std::chrono::steady_clock::now();
  MeRun run;
  run.seed = seed;
  run.excluded_class = me_excluded_class(seed);

  // Both modes share the base set and probe for a given seed.
  Rng data_rng(derive_seed(seed, {kMeTag, 1}));
  const MeDataset me = generate_me_dataset(run.excluded_class, mode, train, data_rng);
  std::vector<Trial> trials = me.base;
  trials.insert(trials.end(), me.additions.begin(), me.additions.end());

  TrainConfig config;
  config.epochs = epochs;
  config.batch_size = 12;
  config.seed = derive_seed(seed, {kMeTag, 3});
  const auto params =
      train_run(config, std::span<const Trial>(trials), init_params<float>(Arch::kObjectCnn, derive_seed(seed, {kMeTag, 2})));

  run.final_train_acc = discrimination_accuracy(params, trials);
  const auto out = forward(*me.probe.scene, me.probe.caption, params, Mode::kEval, nullptr);
  run.match_probability = out.match_probability;
  run.outcome = classify_me_probe(out, me.novel_quadrant, me.foil_quadrant);
  run.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

}  // namespace xsl
