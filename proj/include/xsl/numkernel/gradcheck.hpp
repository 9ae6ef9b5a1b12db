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
#include <string>
#include <vector>

#include "xsl/numkernel/graph.hpp"

namespace xsl {

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  /// Coordinates sampled per parameter tensor (all of them when the tensor is smaller).
  std::size_t samples_per_param = 50;
  /// Denominator floor for the relative error.
  double abs_floor = 1e-6;
  /// Times the step may shrink tenfold when successive central differences
  /// disagree, which happens when a kink lies within the step.
  std::size_t max_refinements = 3;
  std::uint64_t seed = 0;
};

struct GradCheckEntry {
  std::size_t param = 0;
  std::size_t index = 0;
  double analytic = 0;
  double numeric = 0;
  double rel_error = 0;
  double step = 0;  // step behind `numeric`
};

struct GradCheckReport {
  double max_rel_error = 0;
  bool passed = false;
  std::vector<GradCheckEntry> entries;
};

/// Builds the loss on a fresh graph given parameter leaves. Must be
/// deterministic: frozen dropout, no hidden state.
template <typename T>
using LossClosure = std::function<Var(Graph<T>&, std::span<const Var> params)>;

/// Compares reverse-mode gradients against central differences
/// (f(p + h) - f(p - h)) / 2h on sampled coordinates, shrinking h when the
/// estimate is unstable (see max_refinements). The parameters are
/// restored afterwards. Throws VerificationError when two evaluations at the
/// same point disagree.
template <typename T>
GradCheckReport grad_check(const LossClosure<T>& closure, std::span<Tensor<T>* const> params,
                           const GradCheckOptions& options = {},
                           const std::function<void(Graph<T>&)>& configure = {});

}  // namespace xsl
