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

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "xsl/experiment/mutual_exclusivity.hpp"
#include "xsl/report/plan.hpp"

namespace xsl {

/// Files produced by a sweep.
struct ReportBundle {
  std::filesystem::path run_csv;
  std::filesystem::path aggregate_csv;
  std::filesystem::path plan_snapshot;
  std::vector<std::filesystem::path> plots;
  std::vector<std::filesystem::path> heatmaps;
  std::size_t completed = 0;
  std::size_t skipped = 0;
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
};

using ProgressFn = std::function<void(const std::string&)>;

/// Runs every plan cell on up to plan.workers threads. Rows go to
/// output_dir/results.csv as each run finishes; runs whose row is already
/// present are skipped, so an interrupted sweep resumes where it stopped.
/// Afterwards writes aggregate.csv, the SVG plots and one attention export
/// per cell. Dataset files are loaded before any training (IoError).
ReportBundle run_experiment(const ExperimentPlan& plan, const ProgressFn& progress = {});

struct MePlan {
  MeMode mode = MeMode::kMatchOnly;
  int runs_per_class = 10;
  std::uint64_t seed = 0;
  int epochs = 500;
  int workers = 1;
  std::filesystem::path dataset_dir;
  std::filesystem::path output_dir = "results/me";
};

struct MeReport {
  std::filesystem::path run_csv;
  std::filesystem::path summary_csv;
  MeSummary summary;
  std::vector<std::string> failures;
};

/// ME protocol over seeds seed .. seed + 10 * runs_per_class - 1 (each class
/// runs_per_class times). Rows are appended to output_dir/results.csv with
/// resume semantics as above; the summary CSV holds the preference, the
/// exclusion fractions and the classification histogram for this mode.
MeReport run_me_experiment(const MePlan& plan, const ProgressFn& progress = {});

std::vector<MeRun> me_runs_from_rows(std::span<const RunRow> rows, MeMode mode);

}  // namespace xsl
