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


#include "xsl/experiment/stats.hpp"

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include "xsl/errors.hpp"

namespace xsl {

double t_critical_95(std::size_t dof) {
  if (dof == 0) throw UsageError("t_critical_95: dof must be >= 1");
  return boost::math::quantile(boost::math::students_t(static_cast<double>(dof)), 0.975);
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) throw UsageError("summarize: empty group");
  Summary s;
  s.n = values.size();
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(s.n);
  if (s.n == 1) return s;
  double ss = 0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  const double sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  s.ci95_halfwidth = t_critical_95(s.n - 1) * sd / std::sqrt(static_cast<double>(s.n));
  return s;
}

double binomial_two_sided_p(std::size_t successes, std::size_t n, double p) {
  if (n == 0 || successes > n) throw UsageError("binomial_two_sided_p: need 0 <= successes <= n, n > 0");
  // Sum of the probabilities of all outcomes no more likely than the observed one.
  const boost::math::binomial_distribution<double> dist(static_cast<double>(n), p);
  const double observed = boost::math::pdf(dist, static_cast<double>(successes));
  double total = 0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double pk = boost::math::pdf(dist, static_cast<double>(k));
    if (pk <= observed * (1 + 1e-7)) total += pk;
  }
  return std::min(1.0, total);
}

}  // namespace xsl
