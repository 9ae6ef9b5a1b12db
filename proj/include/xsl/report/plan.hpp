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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "xsl/experiment/run.hpp"

namespace xsl {

/// One (k, exemplar mode, n_pairs, arch) condition.
struct PlanCell {
  int complexity = 2;
  ExemplarMode exemplar_mode = ExemplarMode::kFixed;
  int n_pairs = 72;
  Arch arch = Arch::kObjectCnn;
};

/// A condition grid to sweep. Text form: flat `key=value` lines, then any
/// number of `[cell]` blocks. Cell values may be comma-separated lists, which
/// expand to their cross product. `#` starts a comment.
///
/// Global keys: dataset_dir, output_dir, seeds (runs per cell), seed (first
/// seed; runs use seed, seed+1, ...), epochs, strict_mismatch, eval_per_word,
/// workers, save_checkpoints. Cell keys: k, exemplar_mode, n_pairs, arch.
struct ExperimentPlan {
  std::filesystem::path dataset_dir;
  std::filesystem::path output_dir = "results";
  int seeds = 5;
  std::uint64_t seed = 0;
  int epochs = 1000;
  bool strict_mismatch = false;
  int eval_per_word = 10;
  int workers = 1;
  bool save_checkpoints = true;
  std::vector<PlanCell> cells;

  /// Every (cell, seed) run in plan order: cells outer, seeds inner.
  std::vector<RunSpec> runs() const;

  /// Canonical text with every default written out; parses back to an equal
  /// plan.
  std::string snapshot() const;

  /// Throws ConfigError when a cell or global value is out of range.
  void validate() const;
};

/// Throws ConfigError naming the line number and key for unknown keys,
/// malformed values, keys outside their section, or a dataset_dir that does
/// not exist. When dataset_dir is omitted the dataset directory variable (or
/// its fallback) is used.
ExperimentPlan parse_plan(const std::string& text);
ExperimentPlan load_plan(const std::filesystem::path& path);

}  // namespace xsl
