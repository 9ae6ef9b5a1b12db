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


#include "xsl/numkernel/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

#include "xsl/errors.hpp"
#include "xsl/numkernel/rng.hpp"

namespace xsl {

namespace {

template <typename T>
T evaluate(const LossClosure<T>& closure, std::span<Tensor<T>* const> params,
           const std::function<void(Graph<T>&)>& configure) {
  Graph<T> g;
  if (configure) configure(g);
  std::vector<Var> leaves;
  leaves.reserve(params.size());
  for (auto* p : params) leaves.push_back(g.parameter(*p));
  const Var loss = closure(g, leaves);
  const auto& l = g.value(loss);
  if (l.size() != 1) throw ShapeError("grad_check: loss is not a scalar, shape " + to_string(l.shape()));
  return l[0];
}

template <typename T>
bool bitwise_equal(T a, T b) {
  return std::memcmp(&a, &b, sizeof(T)) == 0;
}

}  // namespace

template <typename T>
GradCheckReport grad_check(const LossClosure<T>& closure, std::span<Tensor<T>* const> params,
                           const GradCheckOptions& options,
                           const std::function<void(Graph<T>&)>& configure) {
  // Analytic gradients.
  std::vector<Tensor<T>> analytic;
  T base = 0;
  {
    Graph<T> g;
    if (configure) configure(g);
    std::vector<Var> leaves;
    for (auto* p : params) leaves.push_back(g.parameter(*p));
    const Var loss = closure(g, leaves);
    base = g.value(loss).size() == 1 ? g.value(loss)[0] : T(0);
    g.backward(loss);
    for (auto v : leaves) analytic.push_back(g.grad(v));
  }
  const T again = evaluate(closure, params, configure);
  if (!bitwise_equal(base, again))
    throw VerificationError("grad_check: closure is not deterministic (" + std::to_string(base) +
                            " vs " + std::to_string(again) + ")");

  Rng rng(options.seed);
  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto data = params[k]->data();
    std::vector<std::size_t> coords(data.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (coords.size() > options.samples_per_param) {
      rng.shuffle(coords.begin(), coords.end());
      coords.resize(options.samples_per_param);
      std::sort(coords.begin(), coords.end());
    }
    for (auto i : coords) {
      const T saved = data[i];
      // Central difference over the representable step actually taken.
      auto central = [&](double step) {
        const T hi = saved + static_cast<T>(step), lo = saved - static_cast<T>(step);
        data[i] = hi;
        const double up = evaluate(closure, params, configure);
        data[i] = lo;
        const double down = evaluate(closure, params, configure);
        data[i] = saved;
        return (up - down) / (static_cast<double>(hi) - static_cast<double>(lo));
      };
      double step = options.step;
      double numeric = central(step);
      // A ReLU or pooling switch inside [x - h, x + h] corrupts the central
      // difference; smaller steps settle on the local slope.
      // Disagreement within the rounding noise of the finer quotient does not
      // count.
      for (std::size_t r = 0; r < options.max_refinements; ++r) {
        const double finer = central(step / 10);
        const double scale = std::max({std::abs(numeric), std::abs(finer), options.abs_floor});
        const double noise = 8 * std::numeric_limits<T>::epsilon() * std::max(std::abs(double(base)), 1.0) / (step / 10);
        if (std::abs(numeric - finer) <= 0.1 * options.tolerance * scale + noise) break;
        numeric = finer;
        step /= 10;
      }
      const double a = analytic[k][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), options.abs_floor});
      const double rel = std::abs(a - numeric) / denom;
      report.entries.push_back({k, i, a, numeric, rel, step});
      report.max_rel_error = std::max(report.max_rel_error, rel);
    }
  }
  report.passed = report.max_rel_error <= options.tolerance;
  return report;
}

template GradCheckReport grad_check<float>(const LossClosure<float>&, std::span<Tensor<float>* const>,
                                           const GradCheckOptions&,
                                           const std::function<void(Graph<float>&)>&);
template GradCheckReport grad_check<double>(const LossClosure<double>&,
                                            std::span<Tensor<double>* const>,
                                            const GradCheckOptions&,
                                            const std::function<void(Graph<double>&)>&);

}  // namespace xsl
