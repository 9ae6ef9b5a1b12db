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

#include <cstddef>
#include <span>

namespace xsl {

/// Two-sided 95% Student t critical value, t(0.975, dof). dof >= 1.
double t_critical_95(std::size_t dof);

struct Summary {
  double mean = 0;
  double ci95_halfwidth = 0;
  std::size_t n = 0;
};

/// Mean and t-based 95% half-width (zero for n = 1). Throws UsageError when
/// values is empty.
Summary summarize(std::span<const double> values);

/// Two-sided exact binomial test p-value for `successes` out of n at rate p.
double binomial_two_sided_p(std::size_t successes, std::size_t n, double p);

}  // namespace xsl
