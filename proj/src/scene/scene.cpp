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


#include "xsl/scene/scene.hpp"

#include <algorithm>

#include "xsl/errors.hpp"

namespace xsl {

std::array<int, kQuadrants> SceneSpec::quadrant_classes() const {
  std::array<int, kQuadrants> out;
  out.fill(-1);
  for (const auto& e : entries)
    if (e.quadrant >= 0 && e.quadrant < kQuadrants) out[e.quadrant] = e.exemplar.label;
  return out;
}

std::array<std::optional<ExemplarRef>, kQuadrants> SceneSpec::quadrant_sources() const {
  std::array<std::optional<ExemplarRef>, kQuadrants> out;
  for (const auto& e : entries)
    if (e.quadrant >= 0 && e.quadrant < kQuadrants) out[e.quadrant] = e.exemplar;
  return out;
}

const char* exemplar_mode_name(ExemplarMode m) { return m == ExemplarMode::kFixed ? "fixed" : "varying"; }

ExemplarMode parse_exemplar_mode(const std::string& text) {
  if (text == "fixed") return ExemplarMode::kFixed;
  if (text == "varying") return ExemplarMode::kVarying;
  throw ConfigError("exemplar mode must be 'fixed' or 'varying', got '" + text + "'");
}

const char* me_mode_name(MeMode m) {
  return m == MeMode::kMatchOnly ? "match_only" : "match_plus_mismatch";
}

MeMode parse_me_mode(const std::string& text) {
  if (text == "match_only") return MeMode::kMatchOnly;
  if (text == "match_plus_mismatch") return MeMode::kMatchPlusMismatch;
  throw ConfigError("ME mode must be 'match_only' or 'match_plus_mismatch', got '" + text + "'");
}

void DatasetConfig::validate() const {
  if (complexity < 2 || complexity > 4)
    throw ConfigError("complexity must be 2, 3 or 4, got " + std::to_string(complexity));
  if (n_pairs <= 0) throw ConfigError("n_pairs must be positive, got " + std::to_string(n_pairs));
  if (n_pairs % complexity != 0)
    throw ConfigError("n_pairs " + std::to_string(n_pairs) + " is not divisible by complexity " +
                      std::to_string(complexity));
  if (excluded_class < -1 || excluded_class >= kNumClasses)
    throw ConfigError("excluded class " + std::to_string(excluded_class) + " outside [0, 9]");
}

std::vector<float> compose_scene(const SceneSpec& spec, const DigitStore& store) {
  if (spec.entries.size() > kQuadrants)
    throw SpecError("scene spec has " + std::to_string(spec.entries.size()) + " entries, at most 4 fit");
  std::array<bool, kQuadrants> used{};
  std::vector<float> grid(kScenePixels, 0.0f);
  for (const auto& e : spec.entries) {
    if (e.quadrant < 0 || e.quadrant >= kQuadrants)
      throw SpecError("scene spec quadrant " + std::to_string(e.quadrant) + " outside [0, 3]");
    if (used[e.quadrant]) throw SpecError("scene spec uses quadrant " + std::to_string(e.quadrant) + " twice");
    used[e.quadrant] = true;
    if (e.exemplar.split != store.split())
      throw SpecError(std::string("scene spec exemplar comes from the ") + split_name(e.exemplar.split) +
                      " split, store holds " + split_name(store.split()));
    if (store.label(e.exemplar.index) != e.exemplar.label)
      throw SpecError("scene spec exemplar " + std::to_string(e.exemplar.index) + " is labelled " +
                      std::to_string(store.label(e.exemplar.index)) + ", not " +
                      std::to_string(e.exemplar.label));
    const auto src = store.pixels(e.exemplar.index);
    const std::size_t r0 = kDigitSide * (e.quadrant / 2), c0 = kDigitSide * (e.quadrant % 2);
    for (std::size_t r = 0; r < kDigitSide; ++r)
      std::copy_n(src.begin() + r * kDigitSide, kDigitSide, grid.begin() + (r0 + r) * kSceneSide + c0);
  }
  return grid;
}

std::vector<float> extract_quadrant(std::span<const float> scene, int quadrant) {
  if (scene.size() != kScenePixels)
    throw DimensionError("scene must hold 56x56 values, got " + std::to_string(scene.size()));
  if (quadrant < 0 || quadrant >= kQuadrants)
    throw IndexError("quadrant " + std::to_string(quadrant) + " outside [0, 3]");
  std::vector<float> out(kDigitPixels);
  const std::size_t r0 = kDigitSide * (quadrant / 2), c0 = kDigitSide * (quadrant % 2);
  for (std::size_t r = 0; r < kDigitSide; ++r)
    std::copy_n(scene.begin() + (r0 + r) * kSceneSide + c0, kDigitSide, out.begin() + r * kDigitSide);
  return out;
}

}  // namespace xsl
