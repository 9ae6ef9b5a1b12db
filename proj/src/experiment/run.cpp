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


#include "xsl/experiment/run.hpp"

#include <chrono>
#include <cstdio>

#include "xsl/numkernel/checkpoint.hpp"

namespace xsl {

std::uint64_t run_stream(const RunSpec& spec, std::uint64_t purpose) {
  return derive_seed(spec.seed, {static_cast<std::uint64_t>(spec.complexity),
                                 static_cast<std::uint64_t>(spec.exemplar_mode),
                                 static_cast<std::uint64_t>(spec.n_pairs), static_cast<std::uint64_t>(spec.arch),
                                 purpose});
}

std::string checkpoint_name(const RunSpec& spec) {
  return "k" + std::to_string(spec.complexity) + "_" + exemplar_mode_name(spec.exemplar_mode) + "_" +
         std::to_string(spec.n_pairs) + "_" + arch_name(spec.arch) + "_s" + std::to_string(spec.seed) + ".ckpt";
}

RunResult execute_run(const RunSpec& spec, const DigitStore& train, const DigitStore& test,
                      const std::optional<std::filesystem::path>& checkpoint_dir, const EpochCallback& on_epoch) {
  const auto start = std::chrono::steady_clock::now();
  DatasetConfig data;
  data.complexity = spec.complexity;
  data.exemplar_mode = spec.exemplar_mode;
  data.n_pairs = spec.n_pairs;
  data.seed = spec.seed;
  data.strict_mismatch = spec.strict_mismatch;
  data.validate();

  Rng data_rng(run_stream(spec, kStreamData));
  GenerationStats stats;
  auto trials = generate_matching_trials(data, train, data_rng, &stats);
  if (stats.duplicate_scenes > 0)
    std::fprintf(stderr, "warning: %s: %zu of %zu training scenes repeat an earlier scene\n",
                 checkpoint_name(spec).c_str(), stats.duplicate_scenes, trials.size());
  auto mismatching = generate_mismatching_trials(trials, data_rng, spec.strict_mismatch);
  trials.insert(trials.end(), std::make_move_iterator(mismatching.begin()),
                std::make_move_iterator(mismatching.end()));

  TrainConfig config;
  config.epochs = spec.epochs;
  config.batch_size = batch_size_for(spec.exemplar_mode, spec.n_pairs);
  config.seed = run_stream(spec, kStreamTrain);
  config.arch = spec.arch;

  RunResult result;
  result.spec = spec;
  result.duplicate_scenes = stats.duplicate_scenes;
  result.params = train_run(config, std::span<const Trial>(trials),
                            init_params<float>(spec.arch, run_stream(spec, kStreamInit)), &result.metrics, on_epoch);
  result.final_train_acc = discrimination_accuracy(result.params, trials);

  Rng eval_rng(run_stream(spec, kStreamEval));
  const auto eval_trials = generate_eval_trials(train, test, spec.exemplar_mode, eval_rng, spec.eval_per_word);
  result.eval = evaluate_4afc(result.params, eval_trials);

  if (checkpoint_dir) {
    std::filesystem::create_directories(*checkpoint_dir);
    result.checkpoint = *checkpoint_dir / checkpoint_name(spec);
    save_checkpoint(*result.checkpoint, result.params.to_named());
  }
  result.metrics.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

RunRow to_row(const RunResult& result) {
  RunRow row;
  row.condition_k = result.spec.complexity;
  row.exemplar_mode = result.spec.exemplar_mode;
  row.n_pairs = result.spec.n_pairs;
  row.arch = result.spec.arch;
  row.seed = result.spec.seed;
  row.final_train_acc = result.final_train_acc;
  row.eval_acc = result.eval.accuracy;
  row.duration_seconds = result.metrics.duration_seconds;
  return row;
}

}  // namespace xsl
