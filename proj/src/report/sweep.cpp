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


#include "xsl/report/sweep.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "xsl/errors.hpp"
#include "xsl/report/attention_export.hpp"
#include "xsl/report/svg_report.hpp"

namespace xsl {

namespace {

// Calls fn(i) for i in [0, n) on up to `workers` threads. OpenMP threads are
// divided between the workers.
template <typename Fn>
void for_each_run(std::size_t n, int workers, Fn fn) {
  const auto threads = static_cast<std::size_t>(std::max(1, std::min<int>(workers, static_cast<int>(n))));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const int omp_each = std::max(1, omp_get_max_threads() / static_cast<int>(threads));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      omp_set_num_threads(omp_each);
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  for (auto& th : pool) th.join();
}

using RunKey = std::tuple<int, ExemplarMode, int, Arch, std::uint64_t>;

RunKey key_of(const RunSpec& s) { return {s.complexity, s.exemplar_mode, s.n_pairs, s.arch, s.seed}; }
RunKey key_of(const RunRow& r) { return {r.condition_k, r.exemplar_mode, r.n_pairs, r.arch, r.seed}; }

std::vector<RunRow> existing_rows(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path) || std::filesystem::file_size(path) == 0) return {};
  return read_results_csv(path);
}

std::string cell_dir_name(const PlanCell& c) {
  return "k" + std::to_string(c.complexity) + "_" + exemplar_mode_name(c.exemplar_mode) + "_" +
         std::to_string(c.n_pairs) + "_" + arch_name(c.arch);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

}  // namespace

ReportBundle run_experiment(const ExperimentPlan& plan, const ProgressFn& progress) {
  plan.validate();
  const auto say = [&](const std::string& m) {
    if (progress) progress(m);
  };
  const DigitStore train = DigitStore::load(plan.dataset_dir, Split::kTrain);
  const DigitStore test = DigitStore::load(plan.dataset_dir, Split::kTest);

  std::filesystem::create_directories(plan.output_dir);
  ReportBundle bundle;
  bundle.plan_snapshot = plan.output_dir / "plan.snapshot";
  write_text(bundle.plan_snapshot, plan.snapshot());
  bundle.run_csv = plan.output_dir / "results.csv";

  std::set<RunKey> done;
  for (const auto& r : existing_rows(bundle.run_csv))
    if (r.eval_acc) done.insert(key_of(r));
  std::vector<RunSpec> pending;
  for (const auto& spec : plan.runs()) {
    if (done.count(key_of(spec)))
      ++bundle.skipped;
    else
      pending.push_back(spec);
  }
  say(std::to_string(pending.size()) + " runs to do, " + std::to_string(bundle.skipped) + " already recorded");

  ResultsWriter writer(bundle.run_csv);
  std::mutex mutex;
  const std::optional<std::filesystem::path> ckpt_dir =
      plan.save_checkpoints ? std::optional(plan.output_dir / "checkpoints") : std::nullopt;
  for_each_run(pending.size(), plan.workers, [&](std::size_t i) {
    const RunSpec& spec = pending[i];
    const std::string name = checkpoint_name(spec);
    try {
      const auto result = execute_run(spec, train, test, ckpt_dir);
      const RunRow row = to_row(result);
      writer.append(row);
      const std::lock_guard lock(mutex);
      ++bundle.completed;
      say("done " + name + " eval_acc=" + std::to_string(*row.eval_acc) +
          " train_acc=" + std::to_string(row.final_train_acc));
    } catch (const std::exception& e) {
      const std::lock_guard lock(mutex);
      bundle.failures.push_back(name + ": " + e.what());
      say("FAILED " + name + ": " + e.what());
    }
  });

  std::set<RunKey> wanted;
  for (const auto& spec : plan.runs()) wanted.insert(key_of(spec));
  std::vector<RunRow> rows;
  for (const auto& r : existing_rows(bundle.run_csv))
    if (r.eval_acc && wanted.count(key_of(r))) rows.push_back(r);
  const auto aggregate = aggregate_results(rows);
  bundle.aggregate_csv = plan.output_dir / "aggregate.csv";
  write_aggregate_csv(bundle.aggregate_csv, aggregate);
  if (!aggregate.empty()) bundle.plots = emit_report(aggregate, plan.output_dir / "plots");

  // One attention export per cell, from its first seed's checkpoint and the
  // first training trial of that run.
  if (ckpt_dir)
    for (const auto& cell : plan.cells) {
      RunSpec spec = plan.runs().front();
      spec.complexity = cell.complexity;
      spec.exemplar_mode = cell.exemplar_mode;
      spec.n_pairs = cell.n_pairs;
      spec.arch = cell.arch;
      spec.seed = plan.seed;
      const auto path = *ckpt_dir / checkpoint_name(spec);
      if (!std::filesystem::exists(path)) continue;
      const auto params = ModelParams<float>::from_named(cell.arch, load_checkpoint(path));
      DatasetConfig data;
      data.complexity = cell.complexity;
      data.exemplar_mode = cell.exemplar_mode;
      data.n_pairs = cell.n_pairs;
      data.seed = spec.seed;
      Rng rng(run_stream(spec, kStreamData));
      const auto trials = generate_matching_trials(data, train, rng);
      auto files = export_attention(params, trials.front(), plan.output_dir / "attention" / cell_dir_name(cell));
      bundle.heatmaps.insert(bundle.heatmaps.end(), files.begin(), files.end());
    }
  return bundle;
}

std::vector<MeRun> me_runs_from_rows(std::span<const RunRow> rows, MeMode mode) {
  std::vector<MeRun> out;
  for (const auto& r : rows) {
    if (r.me_mode != me_mode_name(mode)) continue;
    MeRun run;
    run.seed = r.seed;
    run.excluded_class = me_excluded_class(r.seed);
    run.outcome = parse_me_class(r.me_class);
    run.final_train_acc = r.final_train_acc;
    run.duration_seconds = r.duration_seconds;
    out.push_back(run);
  }
  return out;
}

MeReport run_me_experiment(const MePlan& plan, const ProgressFn& progress) {
  if (plan.runs_per_class < 1) throw ConfigError("runs_per_class must be >= 1");
  if (plan.epochs < 0) throw ConfigError("epochs must be >= 0");
  const auto say = [&](const std::string& m) {
    if (progress) progress(m);
  };
  const DigitStore train = DigitStore::load(plan.dataset_dir, Split::kTrain);
  std::filesystem::create_directories(plan.output_dir);
  MeReport report;
  report.run_csv = plan.output_dir / "results.csv";

  const std::uint64_t n_runs = 10 * static_cast<std::uint64_t>(plan.runs_per_class);
  const auto in_range = [&](std::uint64_t s) { return s >= plan.seed && s < plan.seed + n_runs; };
  std::set<std::uint64_t> done;
  for (const auto& r : existing_rows(report.run_csv))
    if (r.me_mode == me_mode_name(plan.mode)) done.insert(r.seed);
  std::vector<std::uint64_t> pending;
  for (std::uint64_t s = plan.seed; s < plan.seed + n_runs; ++s)
    if (!done.count(s)) pending.push_back(s);
  say(std::to_string(pending.size()) + " ME runs to do (" + me_mode_name(plan.mode) + ")");

  ResultsWriter writer(report.run_csv);
  std::mutex mutex;
  for_each_run(pending.size(), plan.workers, [&](std::size_t i) {
    const std::uint64_t seed = pending[i];
    try {
      const MeRun run = run_me_single(plan.mode, seed, plan.epochs, train);
      RunRow row;
      row.seed = seed;
      row.final_train_acc = run.final_train_acc;
      row.me_mode = me_mode_name(plan.mode);
      row.me_class = me_class_name(run.outcome);
      row.duration_seconds = run.duration_seconds;
      writer.append(row);
      const std::lock_guard lock(mutex);
      say("ME seed " + std::to_string(seed) + " class " + std::to_string(run.excluded_class) + ": " +
          me_class_name(run.outcome) + " (p=" + std::to_string(run.match_probability) + ")");
    } catch (const std::exception& e) {
      const std::lock_guard lock(mutex);
      report.failures.push_back("ME seed " + std::to_string(seed) + ": " + e.what());
      say("FAILED ME seed " + std::to_string(seed) + ": " + e.what());
    }
  });

  std::vector<RunRow> rows;
  for (const auto& r : existing_rows(report.run_csv))
    if (in_range(r.seed)) rows.push_back(r);
  const auto runs = me_runs_from_rows(rows, plan.mode);
  report.summary = summarize_me(runs);
  report.summary_csv = plan.output_dir / (std::string("me_summary_") + me_mode_name(plan.mode) + ".csv");
  std::ofstream out(report.summary_csv, std::ios::trunc);
  if (!out) throw IoError("cannot write " + report.summary_csv.string());
  char buf[160];
  const auto& s = report.summary;
  std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%zu,%zu,%zu,%.6f,%.6f,%.6f\n", me_mode_name(plan.mode), s.runs,
                s.counts[0], s.counts[1], s.counts[2], s.counts[3], s.preference, s.blank_fraction,
                s.excluded_fraction);
  out << "me_mode,runs,novel,foil,blank,non_match,preference,blank_fraction,excluded_fraction\n" << buf;
  return report;
}

}  // namespace xsl
