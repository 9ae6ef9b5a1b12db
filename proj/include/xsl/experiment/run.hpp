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
#include <optional>

#include "xsl/experiment/evaluate.hpp"
#include "xsl/experiment/results_csv.hpp"
#include "xsl/experiment/train.hpp"

namespace xsl {

/// One grid cell at one seed.
struct RunSpec {
  int complexity = 2;
  ExemplarMode exemplar_mode = ExemplarMode::kFixed;
  int n_pairs = 72;
  Arch arch = Arch::kObjectCnn;
  std::uint64_t seed = 0;
  int epochs = 1000;
  bool strict_mismatch = false;
  int eval_per_word = 10;
};

struct RunResult {
  RunSpec spec;
  ModelParams<float> params;
  RunMetrics metrics;
  /// Evaluation-mode discrimination accuracy on the training set.
  double final_train_acc = 0;
  AfcResult eval;
  /// Repeated (placement, exemplar) scenes in the generated training set.
  std::size_t duplicate_scenes = 0;
  std::optional<std::filesystem::path> checkpoint;
};

/// Substream seed for one purpose of one run; every cell and seed gets
/// independent data, init, training and evaluation streams.
std::uint64_t run_stream(const RunSpec& spec, std::uint64_t purpose);

inline constexpr std::uint64_t kStreamData = 1;
inline constexpr std::uint64_t kStreamInit = 2;
inline constexpr std::uint64_t kStreamTrain = 3;
inline constexpr std::uint64_t kStreamEval = 4;

/// Generates data, trains, evaluates, and optionally writes a checkpoint into
/// checkpoint_dir.
RunResult execute_run(const RunSpec& spec, const DigitStore& train, const DigitStore& test,
                      const std::optional<std::filesystem::path>& checkpoint_dir = std::nullopt,
                      const EpochCallback& on_epoch = {});

RunRow to_row(const RunResult& result);

std::string checkpoint_name(const RunSpec& spec);

}  // namespace xsl
