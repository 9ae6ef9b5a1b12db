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


#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "xsl/errors.hpp"
#include "xsl/report/attention_export.hpp"
#include "xsl/report/svg_report.hpp"
#include "xsl/report/sweep.hpp"

namespace {

struct GlobalFlags {
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<int> epochs;
  bool strict_mismatch = false;
  std::optional<std::string> arch;
  std::optional<std::string> out;
};

void log_line(const std::string& message) {
  std::fprintf(stderr, "%s\n", message.c_str());
  std::fflush(stderr);
}

xsl::ModelParams<float> load_or_init(const std::string& checkpoint, xsl::Arch arch, std::uint64_t seed) {
  if (checkpoint.empty()) return xsl::init_params<float>(arch, seed);
  return xsl::ModelParams<float>::from_named(arch, xsl::load_checkpoint(checkpoint));
}

int cmd_train_sweep(const std::string& plan_path, const GlobalFlags& g) {
  auto plan = xsl::load_plan(plan_path);
  if (g.seed) plan.seed = *g.seed;
  if (g.workers) plan.workers = *g.workers;
  if (g.epochs) plan.epochs = *g.epochs;
  if (g.strict_mismatch) plan.strict_mismatch = true;
  if (g.out) plan.output_dir = *g.out;
  if (g.arch) {
    const auto arch = xsl::parse_arch(*g.arch);
    std::vector<xsl::PlanCell> cells;
    for (auto c : plan.cells) {
      c.arch = arch;
      if (std::find_if(cells.begin(), cells.end(), [&](const xsl::PlanCell& o) {
            return o.complexity == c.complexity && o.exemplar_mode == c.exemplar_mode && o.n_pairs == c.n_pairs;
          }) == cells.end())
        cells.push_back(c);
    }
    plan.cells = cells;
  }
  const auto bundle = xsl::run_experiment(plan, log_line);
  std::printf("results: %s\naggregate: %s\nsnapshot: %s\n", bundle.run_csv.c_str(), bundle.aggregate_csv.c_str(),
              bundle.plan_snapshot.c_str());
  for (const auto& p : bundle.plots) std::printf("plot: %s\n", p.c_str());
  std::printf("completed %zu, skipped %zu, failed %zu\n", bundle.completed, bundle.skipped, bundle.failures.size());
  for (const auto& f : bundle.failures) std::fprintf(stderr, "failed: %s\n", f.c_str());
  return bundle.ok() ? 0 : 1;
}

int cmd_eval(const std::string& checkpoint, const std::string& mode_text, int per_word, const std::string& dump_dir,
             const GlobalFlags& g) {
  const auto arch = xsl::parse_arch(g.arch.value_or("object_cnn"));
  const auto mode = xsl::parse_exemplar_mode(mode_text);
  const auto seed = g.seed.value_or(0);
  const auto dir = xsl::dataset_dir();
  const auto train = xsl::DigitStore::load(dir, xsl::Split::kTrain);
  const auto test = xsl::DigitStore::load(dir, xsl::Split::kTest);
  const auto params = load_or_init(checkpoint, arch, seed);
  xsl::Rng rng(xsl::derive_seed(seed, {0xe7a1}));
  const auto trials = xsl::generate_eval_trials(train, test, mode, rng, per_word);
  if (!dump_dir.empty()) {
    std::vector<xsl::Trial> scenes;
    for (const auto& t : trials) scenes.push_back(t.trial);
    xsl::dump_trials(scenes, dump_dir);
    std::printf("trial dump: %s\n", dump_dir.c_str());
  }
  const auto result = xsl::evaluate_4afc(params, trials);
  std::printf("4afc_accuracy=%.6f trials=%zu\n", result.accuracy, result.records.size());
  if (g.out) {
    std::filesystem::create_directories(*g.out);
    const auto path = std::filesystem::path(*g.out) / "eval_records.csv";
    std::ofstream out(path);
    if (!out) throw xsl::IoError("cannot write " + path.string());
    out << "trial,target_word,target_quadrant,chosen_quadrant,correct\n";
    for (std::size_t i = 0; i < result.records.size(); ++i) {
      const auto& r = result.records[i];
      out << i << ',' << r.target_word << ',' << r.target_quadrant << ',' << r.chosen_quadrant << ','
          << (r.correct ? 1 : 0) << '\n';
    }
    std::printf("records: %s\n", path.c_str());
  }
  return 0;
}

int cmd_me(const std::string& mode_text, int runs_per_class, const GlobalFlags& g) {
  xsl::MePlan plan;
  plan.mode = xsl::parse_me_mode(mode_text);
  plan.runs_per_class = runs_per_class;
  plan.seed = g.seed.value_or(0);
  plan.epochs = g.epochs.value_or(500);
  plan.workers = g.workers.value_or(1);
  plan.dataset_dir = xsl::dataset_dir();
  if (g.out) plan.output_dir = *g.out;
  const auto report = xsl::run_me_experiment(plan, log_line);
  const auto& s = report.summary;
  std::printf("mode=%s runs=%zu novel=%zu foil=%zu blank=%zu non_match=%zu\n", xsl::me_mode_name(plan.mode), s.runs,
              s.counts[0], s.counts[1], s.counts[2], s.counts[3]);
  std::printf("preference=%.4f blank_fraction=%.4f excluded_fraction=%.4f\nsummary: %s\n", s.preference,
              s.blank_fraction, s.excluded_fraction, report.summary_csv.c_str());
  for (const auto& f : report.failures) std::fprintf(stderr, "failed: %s\n", f.c_str());
  return report.failures.empty() ? 0 : 1;
}

int cmd_export_attention(const std::string& checkpoint, std::uint64_t trial_seed, int k, const std::string& mode_text,
                         const GlobalFlags& g) {
  const auto arch = xsl::parse_arch(g.arch.value_or("object_cnn"));
  const auto params = load_or_init(checkpoint, arch, g.seed.value_or(0));
  const auto train = xsl::DigitStore::load(xsl::dataset_dir(), xsl::Split::kTrain);
  xsl::DatasetConfig data;
  data.complexity = k;
  data.exemplar_mode = xsl::parse_exemplar_mode(mode_text);
  data.n_pairs = k;
  data.seed = trial_seed;
  data.validate();
  xsl::Rng rng(xsl::derive_seed(trial_seed, {0xa77e}));
  const auto trials = xsl::generate_matching_trials(data, train, rng);
  const auto files = xsl::export_attention(params, trials.front(), g.out.value_or("attention"));
  for (const auto& f : files) std::printf("%s\n", f.c_str());
  return 0;
}

int cmd_report(const std::string& in_dir, const GlobalFlags& g) {
  const std::filesystem::path in(in_dir);
  const std::filesystem::path out = g.out ? std::filesystem::path(*g.out) : in;
  const auto rows = xsl::read_results_csv(in / "results.csv");
  const auto aggregate = xsl::aggregate_results(rows);
  std::filesystem::create_directories(out);
  if (!aggregate.empty()) {
    xsl::write_aggregate_csv(out / "aggregate.csv", aggregate);
    for (const auto& p : xsl::emit_report(aggregate, out / "plots")) std::printf("plot: %s\n", p.c_str());
    for (const auto& a : aggregate)
      std::printf("k=%d %s n_pairs=%d %s: mean=%.4f ci95=%.4f n=%zu\n", a.key.condition_k,
                  xsl::exemplar_mode_name(a.key.exemplar_mode), a.key.n_pairs, xsl::arch_name(a.key.arch),
                  a.eval.mean, a.eval.ci95_halfwidth, a.eval.n);
  }
  bool any_me = false;
  for (auto mode : {xsl::MeMode::kMatchOnly, xsl::MeMode::kMatchPlusMismatch}) {
    const auto runs = xsl::me_runs_from_rows(rows, mode);
    if (runs.empty()) continue;
    any_me = true;
    const auto s = xsl::summarize_me(runs);
    std::printf("ME %s: runs=%zu novel=%zu foil=%zu blank=%zu non_match=%zu preference=%.4f blank_fraction=%.4f\n",
                xsl::me_mode_name(mode), s.runs, s.counts[0], s.counts[1], s.counts[2], s.counts[3], s.preference,
                s.blank_fraction);
  }
  if (aggregate.empty() && !any_me) throw xsl::UsageError("report: " + (in / "results.csv").string() + " has no rows");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-situational word learning experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalFlags g;
  app.add_option("--seed", g.seed, "Master seed (first seed of a sweep)");
  app.add_option("--workers", g.workers, "Concurrent runs");
  app.add_option("--epochs", g.epochs, "Training epochs");
  app.add_flag("--strict-mismatch", g.strict_mismatch, "Reject mismatches whose caption names the scene's classes");
  app.add_option("--arch", g.arch, "object_cnn or scene_cnn");
  app.add_option("--out", g.out, "Output directory");

  std::string plan_path;
  auto* sweep = app.add_subcommand("train-sweep", "Train and evaluate every cell of a plan");
  sweep->add_option("plan", plan_path, "Plan file")->required()->check(CLI::ExistingFile);

  std::string checkpoint, exemplar_mode = "fixed";
  int per_word = 10;
  auto* eval = app.add_subcommand("eval", "4AFC evaluation of a checkpoint");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file (fresh parameters when omitted)");
  eval->add_option("--mode", exemplar_mode, "fixed or varying exemplars");
  eval->add_option("--per-word", per_word, "Trials per word");
  std::string dump_dir;
  eval->add_option("--dump-trials", dump_dir, "Write the evaluation scenes as PGM files plus manifest.csv");

  std::string me_mode = "match_only";
  int runs_per_class = 10;
  auto* me = app.add_subcommand("me", "Mutual-exclusivity protocol");
  me->add_option("--mode", me_mode, "match_only or match_plus_mismatch");
  me->add_option("--runs-per-class", runs_per_class, "Runs per excluded class");

  std::uint64_t trial_seed = 0;
  int k = 2;
  auto* attention = app.add_subcommand("export-attention", "Attention maps for one trial");
  attention->add_option("--checkpoint", checkpoint, "Checkpoint file (fresh parameters when omitted)");
  attention->add_option("--trial-seed", trial_seed, "Seed of the generated trial");
  attention->add_option("--k", k, "Objects in the scene");
  attention->add_option("--mode", exemplar_mode, "fixed or varying exemplars");

  std::string in_dir;
  auto* report = app.add_subcommand("report", "Aggregate a results CSV and draw plots");
  report->add_option("dir", in_dir, "Directory holding results.csv")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*sweep) return cmd_train_sweep(plan_path, g);
    if (*eval) return cmd_eval(checkpoint, exemplar_mode, per_word, dump_dir, g);
    if (*me) return cmd_me(me_mode, runs_per_class, g);
    if (*attention) return cmd_export_attention(checkpoint, trial_seed, k, exemplar_mode, g);
    if (*report) return cmd_report(in_dir, g);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
