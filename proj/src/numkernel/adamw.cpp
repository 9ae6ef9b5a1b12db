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


#include "xsl/numkernel/adamw.hpp"

#include <cmath>
#include <string>

#include "xsl/errors.hpp"

namespace xsl {

template <typename T>
void AdamW<T>::step(std::span<Tensor<T>* const> params, std::span<const Tensor<T>* const> grads) {
  if (params.size() != grads.size())
    throw DimensionError("adamw: " + std::to_string(params.size()) + " parameters but " +
                         std::to_string(grads.size()) + " gradients");
  if (m_.empty()) {
    for (auto* p : params) {
      m_.emplace_back(p->shape());
      v_.emplace_back(p->shape());
    }
  }
  if (m_.size() != params.size())
    throw DimensionError("adamw: optimizer tracks " + std::to_string(m_.size()) +
                         " parameters, step got " + std::to_string(params.size()));
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k]->shape() != m_[k].shape() || grads[k]->shape() != m_[k].shape())
      throw DimensionError("adamw: parameter " + std::to_string(k) + " has shape " +
                           to_string(params[k]->shape()) + ", gradient " +
                           to_string(grads[k]->shape()) + ", state " + to_string(m_[k].shape()));
  }

  ++t_;
  const auto& o = options_;
  const T b1 = static_cast<T>(o.beta1), b2 = static_cast<T>(o.beta2);
  const T c1 = static_cast<T>(1.0 - std::pow(o.beta1, static_cast<double>(t_)));
  const T c2 = static_cast<T>(1.0 - std::pow(o.beta2, static_cast<double>(t_)));
  const T lr = static_cast<T>(o.lr), eps = static_cast<T>(o.eps), wd = static_cast<T>(o.weight_decay);

  for (std::size_t k = 0; k < params.size(); ++k) {
    auto p = params[k]->data();
    const auto g = grads[k]->data();
    auto m = m_[k].data();
    auto v = v_[k].data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = b1 * m[i] + (T(1) - b1) * g[i];
      v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
      const T m_hat = m[i] / c1;
      const T v_hat = v[i] / c2;
      p[i] -= lr * (m_hat / (std::sqrt(v_hat) + eps) + wd * p[i]);
    }
  }
}

template class AdamW<float>;
template class AdamW<double>;

}  // namespace xsl
