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
#include <span>
#include <string>
#include <vector>

#include "xsl/experiment/results_csv.hpp"

namespace xsl {

/// Accuracy against n_pairs (log x) for one exemplar mode: one series per
/// complexity with 95% CI bars and a dashed chance line at 0.25. Rows of
/// other modes or of the scene network are ignored.
std::string accuracy_plot_svg(std::span<const AggregateRow> rows, ExemplarMode mode);

/// Object network against scene network per complexity, at the largest
/// n_pairs both share for `mode`. Empty string when either is missing.
std::string arch_comparison_svg(std::span<const AggregateRow> rows, ExemplarMode mode);

/// Writes accuracy_<mode>.svg for every mode present and
/// arch_comparison_<mode>.svg where both networks are present. Throws
/// UsageError for empty input.
std::vector<std::filesystem::path> emit_report(std::span<const AggregateRow> rows,
                                               const std::filesystem::path& out_dir);

}  // namespace xsl
