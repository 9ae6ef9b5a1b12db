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
#include <functional>
#include <span>
#include <vector>

#include "xsl/model/network.hpp"
#include "xsl/scene/scene.hpp"

namespace xsl {

struct TrainConfig {
  double lr = 3e-4;
  double weight_decay = 1e-4;
  int epochs = 1000;
  std::size_t batch_size = 12;
  std::uint64_t seed = 0;
  Arch arch = Arch::kObjectCnn;

  /// Throws ConfigError for non-positive lr, weight decay or batch size, or
  /// negative epochs.
  void validate() const;
};

/// 120 when exemplars vary and there are more than 360 pairs, otherwise 12.
std::size_t batch_size_for(ExemplarMode mode, int n_pairs);

struct EpochRecord {
  double mean_loss = 0;
  /// Discrimination accuracy of the training-mode forward passes.
  double accuracy = 0;
};

struct RunMetrics {
  std::vector<EpochRecord> epochs;
  double duration_seconds = 0;

  /// Accuracy of the last completed epoch, 0 when none ran.
  double final_epoch_accuracy() const { return epochs.empty() ? 0.0 : epochs.back().accuracy; }
};

using EpochCallback = std::function<void(int epoch, const EpochRecord&)>;

/// Minibatch AdamW on mean BCE. Each epoch shuffles the trials with the run
/// stream, keeps the final partial batch, and runs dropout in training mode.
/// Throws ConfigError for an empty list or one missing either label.
template <typename T>
ModelParams<T> train_run(const TrainConfig& config, std::span<const Trial> trials, ModelParams<T> params,
                         RunMetrics* metrics = nullptr, const EpochCallback& on_epoch = {});

}  // namespace xsl
