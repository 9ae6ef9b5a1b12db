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


#include "xsl/numkernel/graph.hpp"

#include <string>

#include "xsl/errors.hpp"

namespace xsl {

const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kConstant: return "constant";
    case OpKind::kParameter: return "parameter";
    case OpKind::kConv2d: return "conv2d";
    case OpKind::kMaxPool: return "maxpool2x2";
    case OpKind::kDense: return "dense";
    case OpKind::kRelu: return "relu";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kEmbedding: return "embedding";
    case OpKind::kDropout: return "dropout";
    case OpKind::kGatherRows: return "gather_rows";
    case OpKind::kReshape: return "reshape";
    case OpKind::kPairScores: return "pair_scores";
    case OpKind::kGroupMax: return "group_max";
    case OpKind::kSegmentProduct: return "segment_product";
    case OpKind::kBce: return "bce";
    case OpKind::kSum: return "sum";
  }
  return "unknown";
}

template <typename T>
Var Graph<T>::constant(Tensor<T> value) {
  Node n;
  n.kind = OpKind::kConstant;
  n.owned = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
Var Graph<T>::input(const Tensor<T>& value) {
  Node n;
  n.kind = OpKind::kConstant;
  n.external = &value;
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
Var Graph<T>::parameter(const Tensor<T>& value) {
  Node n;
  n.kind = OpKind::kParameter;
  n.external = &value;
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
Var Graph<T>::record(OpKind kind, Tensor<T> value, bool requires_grad, BackwardFn backward) {
  Node n;
  n.kind = kind;
  n.owned = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
const typename Graph<T>::Node& Graph<T>::node(Var v) const {
  if (v.id >= nodes_.size()) throw IndexError("graph node " + std::to_string(v.id) + " does not exist");
  return nodes_[v.id];
}

template <typename T>
typename Graph<T>::Node& Graph<T>::node(Var v) {
  if (v.id >= nodes_.size()) throw IndexError("graph node " + std::to_string(v.id) + " does not exist");
  return nodes_[v.id];
}

template <typename T>
const Tensor<T>& Graph<T>::value(Var v) const {
  const Node& n = node(v);
  return n.external ? *n.external : n.owned;
}

template <typename T>
Tensor<T>* Graph<T>::grad_sink(Var v) {
  Node& n = node(v);
  if (!n.requires_grad) return nullptr;
  if (n.grad.empty()) n.grad = Tensor<T>(value(v).shape());
  return &n.grad;
}

template <typename T>
const Tensor<T>& Graph<T>::grad(Var v) const {
  const Node& n = node(v);
  if (!n.requires_grad)
    throw UsageError(std::string("node '") + op_name(n.kind) + "' does not track a gradient");
  if (n.grad.empty()) throw UsageError("gradient requested before backward()");
  return n.grad;
}

template <typename T>
void Graph<T>::backward(Var loss) {
  const Tensor<T>& l = value(loss);
  if (l.size() != 1)
    throw ShapeError("backward needs a scalar loss, got shape " + to_string(l.shape()));
  if (backward_done_) throw UsageError("backward already ran on this graph");
  backward_done_ = true;
  if (node(loss).requires_grad) grad_sink(loss)->fill(T(1));
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || !n.backward || n.grad.empty()) continue;
    if (fault_ && fault_->first == n.kind) {
      Tensor<T> scaled = n.grad;
      for (auto& g : scaled.data()) g *= fault_->second;
      n.backward(*this, scaled);
    } else {
      n.backward(*this, n.grad);
    }
  }
  // Leaves the loss does not depend on still report (zero) gradients.
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].requires_grad && nodes_[i].grad.empty())
      nodes_[i].grad = Tensor<T>(value(Var{static_cast<std::uint32_t>(i)}).shape());
}

template class Graph<float>;
template class Graph<double>;

}  // namespace xsl
