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
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xsl/data/digit_store.hpp"
#include "xsl/numkernel/rng.hpp"

namespace xsl {

// Quadrants are numbered row-major: 0 top-left, 1 top-right, 2 bottom-left,
// 3 bottom-right. Quadrant q occupies rows 28*(q/2).. and columns 28*(q%2)..
inline constexpr int kQuadrants = 4;
inline constexpr std::size_t kSceneSide = 2 * kDigitSide;
inline constexpr std::size_t kScenePixels = kSceneSide * kSceneSide;

struct SceneEntry {
  int quadrant = 0;
  ExemplarRef exemplar;  // exemplar.label is the digit class
};

struct SceneSpec {
  std::vector<SceneEntry> entries;

  /// Class in each quadrant, -1 where blank.
  std::array<int, kQuadrants> quadrant_classes() const;
  /// Source exemplar per quadrant, empty where blank.
  std::array<std::optional<ExemplarRef>, kQuadrants> quadrant_sources() const;
};

struct Scene {
  std::uint64_t id = 0;
  SceneSpec spec;
  std::vector<float> pixels;  // kScenePixels, row-major
};

enum class TrialLabel { kMismatch = 0, kMatch = 1 };

struct Trial {
  std::shared_ptr<const Scene> scene;
  std::vector<int> caption;
  TrialLabel label = TrialLabel::kMatch;
  /// Index of the matching scene the caption was borrowed from (mismatches
  /// only; -1 otherwise).
  std::int64_t caption_donor = -1;
};

enum class ExemplarMode { kFixed, kVarying };

const char* exemplar_mode_name(ExemplarMode m);
ExemplarMode parse_exemplar_mode(const std::string& text);

struct DatasetConfig {
  int complexity = 2;  // objects per scene, 2..4
  ExemplarMode exemplar_mode = ExemplarMode::kFixed;
  int n_pairs = 72;  // matching word-object pairs, divisible by complexity
  std::uint64_t seed = 0;
  bool strict_mismatch = false;
  /// Class kept out of every scene and caption (-1: none).
  int excluded_class = -1;

  /// Throws ConfigError when an invariant fails.
  void validate() const;
};

struct EvalTrial {
  Trial trial;  // caption holds just the target word
  int target_word = 0;
  int target_quadrant = 0;
  std::array<int, 3> foils{};
};

enum class MeMode { kMatchOnly, kMatchPlusMismatch };

const char* me_mode_name(MeMode m);
MeMode parse_me_mode(const std::string& text);

struct MeDataset {
  int novel_class = 0;
  int foil_class = 0;
  int novel_quadrant = 0;
  int foil_quadrant = 0;
  std::vector<Trial> base;       // matching then mismatching
  std::vector<Trial> additions;  // probe first, then any novel-word mismatches
  Trial probe;
};

struct GenerationStats {
  /// Scenes whose (placement, exemplar) tuple already occurred in the set.
  std::size_t duplicate_scenes = 0;
};

/// Renders a spec into a 56x56 grid; blank quadrants are zero. Throws
/// SpecError for duplicate or out-of-range quadrants, or exemplars from a
/// different split than `store`.
std::vector<float> compose_scene(const SceneSpec& spec, const DigitStore& store);

/// Copies quadrant q (28x28) out of a 56x56 grid.
std::vector<float> extract_quadrant(std::span<const float> scene, int quadrant);

std::vector<Trial> generate_matching_trials(const DatasetConfig& config, const DigitStore& train, Rng& rng,
                                            GenerationStats* stats = nullptr);

/// Reassigns captions by a derangement. In strict mode a donor caption whose
/// class multiset equals the recipient scene's classes is also rejected.
std::vector<Trial> generate_mismatching_trials(std::span<const Trial> matching, Rng& rng, bool strict,
                                               std::size_t max_retries = 1000);

/// per_word trials for each of the 10 words. Fixed mode reuses the train
/// split's first instances; varying mode draws from the test split.
std::vector<EvalTrial> generate_eval_trials(const DigitStore& train, const DigitStore& test,
                                            ExemplarMode mode, Rng& rng, int per_word = 10);

MeDataset generate_me_dataset(int excluded_class, MeMode mode, const DigitStore& train, Rng& rng);

/// Writes one binary PGM per trial (`trial_00000.pgm`) plus manifest.csv.
void dump_trials(std::span<const Trial> trials, const std::filesystem::path& dir);

/// Binary PGM (P5, maxval 255) of a grid of intensities in [0, 1].
void write_pgm(const std::filesystem::path& path, std::span<const float> pixels, std::size_t width,
               std::size_t height);

/// Reads a P5 PGM back into intensities in [0, 1].
std::vector<float> read_pgm(const std::filesystem::path& path, std::size_t* width = nullptr,
                            std::size_t* height = nullptr);

}  // namespace xsl
