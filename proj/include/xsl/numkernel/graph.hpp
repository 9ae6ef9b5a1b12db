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
#include <optional>
#include <utility>
#include <vector>

#include "xsl/numkernel/tensor.hpp"

namespace xsl {

enum class OpKind : std::uint8_t {
  kConstant,
  kParameter,
  kConv2d,
  kMaxPool,
  kDense,
  kRelu,
  kSigmoid,
  kEmbedding,
  kDropout,
  kGatherRows,
  kReshape,
  kPairScores,
  kGroupMax,
  kSegmentProduct,
  kBce,
  kSum,
};

const char* op_name(OpKind kind);

/// Handle to a value recorded in a Graph.
struct Var {
  std::uint32_t id = 0;
};

/// Tape of executed primitives. Nodes are appended in execution order, so the
/// tape is always topologically sorted; backward() walks it once in reverse.
///
/// Parameter leaves reference caller-owned tensors, which must outlive the
/// graph. A graph is single-use: build, call backward once, read gradients.
template <typename T>
class Graph {
 public:
  /// Receives the gradient of the loss w.r.t. this node's output and pushes
  /// contributions into its inputs through Graph::grad_sink.
  using BackwardFn = std::function<void(Graph&, const Tensor<T>& grad_output)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor<T> value);
  /// Leaf referencing caller-owned storage without tracking a gradient.
  Var input(const Tensor<T>& value);
  Var parameter(const Tensor<T>& value);

  Var record(OpKind kind, Tensor<T> value, bool requires_grad, BackwardFn backward);

  const Tensor<T>& value(Var v) const;
  bool requires_grad(Var v) const { return node(v).requires_grad; }
  OpKind kind(Var v) const { return node(v).kind; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Gradient accumulated for v by the last backward(); zeros when nothing
  /// flowed into a node that requires a gradient. Throws UsageError for nodes
  /// that do not track gradients.
  const Tensor<T>& grad(Var v) const;

  /// Buffer into which backward rules accumulate; nullptr when v does not
  /// track gradients.
  Tensor<T>* grad_sink(Var v);

  /// Reverse-mode sweep from a scalar loss. Throws ShapeError otherwise.
  void backward(Var loss);

  /// Verification hook: every backward rule of `kind` sees its incoming
  /// gradient scaled by `factor`. Used to prove the gradient checker catches
  /// a broken rule.
  void inject_gradient_fault(OpKind kind, T factor) { fault_ = std::make_pair(kind, factor); }

 private:
  struct Node {
    OpKind kind = OpKind::kConstant;
    Tensor<T> owned;
    const Tensor<T>* external = nullptr;
    Tensor<T> grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  const Node& node(Var v) const;
  Node& node(Var v);

  std::vector<Node> nodes_;
  std::optional<std::pair<OpKind, T>> fault_;
  bool backward_done_ = false;
};

extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace xsl
