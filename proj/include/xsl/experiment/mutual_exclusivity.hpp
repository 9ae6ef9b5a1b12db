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

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "xsl/model/network.hpp"
#include "xsl/scene/scene.hpp"

namespace xsl {

enum class MeClass { kNovel, kFoil, kBlank, kNonMatch };
inline constexpr std::size_t kMeClassCount = 4;

const char* me_class_name(MeClass c);
MeClass parse_me_class(const std::string& text);

/// non_match when p < 0.5; otherwise the content of the argmax quadrant of the
/// novel word's attention row.
MeClass classify_me_probe(const ModelOutput& probe_output, int novel_quadrant, int foil_quadrant);

struct MeRun {
  int excluded_class = 0;
  std::uint64_t seed = 0;
  MeClass outcome = MeClass::kNonMatch;
  double match_probability = 0;
  double final_train_acc = 0;
  double duration_seconds = 0;
};

struct MeSummary {
  std::array<std::size_t, kMeClassCount> counts{};
  std::size_t runs = 0;
  /// novel / (novel + foil); 0 when neither occurred.
  double preference = 0;
  /// Fraction of runs whose argmax fell on a blank quadrant.
  double blank_fraction = 0;
  /// Fraction of runs left out of the preference (blank or non_match).
  double excluded_fraction = 0;
};

MeSummary summarize_me(std::span<const MeRun> runs);

/// Excluded class of the ME run with this seed. Runs use consecutive seeds,
/// so seeds s..s+10r-1 cover every class r times.
inline int me_excluded_class(std::uint64_t seed) { return static_cast<int>(seed % 10); }

/// One ME run: dataset, 500 (or `epochs`) epochs of training on base plus
/// additions, then classification of the probe.
MeRun run_me_single(MeMode mode, std::uint64_t seed, int epochs, const DigitStore& train);

}  // namespace xsl
