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
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xsl/experiment/stats.hpp"
#include "xsl/model/params.hpp"
#include "xsl/scene/scene.hpp"

namespace xsl {

/// One row of the per-run results table. ME rows leave eval_acc empty; grid
/// rows leave me_mode and me_class empty.
struct RunRow {
  int condition_k = 2;
  ExemplarMode exemplar_mode = ExemplarMode::kFixed;
  int n_pairs = 72;
  Arch arch = Arch::kObjectCnn;
  std::uint64_t seed = 0;
  double final_train_acc = 0;
  std::optional<double> eval_acc;
  std::string me_mode;
  std::string me_class;
  double duration_seconds = 0;
};

inline constexpr const char* kResultsHeader =
    "condition_k,exemplar_mode,n_pairs,arch,seed,final_train_acc,eval_acc,me_mode,me_class,duration_seconds";
inline constexpr const char* kAggregateHeader = "condition_k,exemplar_mode,n_pairs,arch,mean,ci95_halfwidth,n";

std::string format_row(const RunRow& row);
RunRow parse_row(const std::string& line);
/// The row with duration_seconds removed; the remaining columns are fully
/// determined by the plan and seed.
std::string deterministic_part(const std::string& line);

std::vector<RunRow> read_results_csv(const std::filesystem::path& path);

/// Appends rows to a results CSV, writing the header for a new file and
/// flushing after every row. Safe to call from several threads.
class ResultsWriter {
 public:
  explicit ResultsWriter(const std::filesystem::path& path);
  void append(const RunRow& row);

 private:
  std::filesystem::path path_;
  std::mutex mutex_;
};

struct ConditionKey {
  int condition_k = 2;
  ExemplarMode exemplar_mode = ExemplarMode::kFixed;
  int n_pairs = 72;
  Arch arch = Arch::kObjectCnn;

  auto operator<=>(const ConditionKey&) const = default;
};

struct AggregateRow {
  ConditionKey key;
  Summary eval;
};

/// Groups grid rows (those with eval_acc) by condition and summarizes eval
/// accuracy; output is sorted by key.
std::vector<AggregateRow> aggregate_results(std::span<const RunRow> rows);

void write_aggregate_csv(const std::filesystem::path& path, std::span<const AggregateRow> rows);
std::vector<AggregateRow> read_aggregate_csv(const std::filesystem::path& path);

}  // namespace xsl
