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


#include "xsl/experiment/train.hpp"

#include <chrono>
#include <numeric>

#include "xsl/errors.hpp"
#include "xsl/numkernel/adamw.hpp"

namespace xsl {

void TrainConfig::validate() const {
  if (!(lr > 0)) throw ConfigError("lr must be positive, got " + std::to_string(lr));
  if (!(weight_decay > 0)) throw ConfigError("weight_decay must be positive, got " + std::to_string(weight_decay));
  if (epochs < 0) throw ConfigError("epochs must be >= 0, got " + std::to_string(epochs));
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
}

std::size_t batch_size_for(ExemplarMode mode, int n_pairs) {
  return mode == ExemplarMode::kVarying && n_pairs > 360 ? 120 : 12;
}

template <typename T>
ModelParams<T> train_run(const TrainConfig& config, std::span<const Trial> trials, ModelParams<T> params,
                         RunMetrics* metrics, const EpochCallback& on_epoch) {
  config.validate();
  if (trials.empty()) throw ConfigError("train_run: empty trial list");
  bool has_match = false, has_mismatch = false;
  for (const auto& t : trials) (t.label == TrialLabel::kMatch ? has_match : has_mismatch) = true;
  if (!has_match || !has_mismatch) throw ConfigError("train_run: trial list must contain both labels");
  if (params.arch != config.arch)
    throw ConfigError(std::string("train_run: parameters are ") + arch_name(params.arch) + ", config says " +
                      arch_name(config.arch));

  const auto start = std::chrono::steady_clock::now();
  RunMetrics local;
  AdamWOptions opts;
  opts.lr = config.lr;
  opts.weight_decay = config.weight_decay;
  AdamW<T> optimizer(opts);
  Rng order_rng(derive_seed(config.seed, {0x0d3e}));
  Rng dropout_rng(derive_seed(config.seed, {0xd7e0}));

  std::vector<std::size_t> order(trials.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<const Trial*> batch;
  std::vector<T> labels;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    order_rng.shuffle(order.begin(), order.end());
    double loss_sum = 0;
    std::size_t correct = 0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += config.batch_size) {
      const std::size_t b1 = std::min(order.size(), b0 + config.batch_size);
      batch.clear();
      labels.clear();
      for (std::size_t i = b0; i < b1; ++i) {
        batch.push_back(&trials[order[i]]);
        labels.push_back(trials[order[i]].label == TrialLabel::kMatch ? T(1) : T(0));
      }
      Graph<T> g;
      const auto leaves = bind_params(g, params, true);
      const auto vars = build_network(g, config.arch, leaves, batch, Mode::kTrain, &dropout_rng);
      const Var loss = bce_mean(g, vars.match_probability, std::span<const T>(labels));
      g.backward(loss);

      loss_sum += static_cast<double>(g.value(loss)[0]) * static_cast<double>(batch.size());
      const auto& prob = g.value(vars.match_probability);
      for (std::size_t i = 0; i < batch.size(); ++i)
        if ((prob[i] >= T(0.5)) == (labels[i] == T(1))) ++correct;

      std::array<const Tensor<T>*, ModelParams<T>::kCount> grads;
      for (std::size_t i = 0; i < grads.size(); ++i) grads[i] = &g.grad(leaves[i]);
      auto targets = params.tensors();
      optimizer.step(targets, grads);
    }
    const EpochRecord record{loss_sum / static_cast<double>(trials.size()),
                             static_cast<double>(correct) / static_cast<double>(trials.size())};
    local.epochs.push_back(record);
    if (on_epoch) on_epoch(epoch, record);
  }
  local.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (metrics) *metrics = std::move(local);
  return params;
}

template ModelParams<float> train_run<float>(const TrainConfig&, std::span<const Trial>, ModelParams<float>,
                                             RunMetrics*, const EpochCallback&);
template ModelParams<double> train_run<double>(const TrainConfig&, std::span<const Trial>, ModelParams<double>,
                                               RunMetrics*, const EpochCallback&);

}  // namespace xsl
