// Copyright 2026 The dpn-toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dpn/tensor.hpp"

namespace dpn {

/// Handle to a node inside one Graph.
struct NodeId {
  std::size_t index = 0;
  friend bool operator==(NodeId, NodeId) = default;
};

enum class OpKind {
  kInput,
  kParameter,
  kConstant,
  kMatMul,
  kAdd,
  kSub,
  kMul,
  kScale,
  kExp,
  kLog,
  kRelu,
  kLeakyRelu,
  kClamp,
  kLogSumExp,
  kSoftmaxNll,
  kSum,
  kMean,
  kRowSum,
  kDigamma,
  kLgamma,
  kDropout,
};

std::string_view op_name(OpKind op);

/// Named tensors bound to graph inputs.
using Bindings = std::map<std::string, Tensor, std::less<>>;

struct ForwardOptions {
  /// Enables dropout masks. Requires rng.
  bool training = false;
  std::mt19937_64* rng = nullptr;
};

class Graph;

/// Node values produced by one forward pass. Owned by the caller so that a
/// const Graph can be evaluated from several threads at once.
class Evaluation {
 public:
  bool has(NodeId id) const { return id.index < values_.size() && values_[id.index].has_value(); }
  const Tensor& value(NodeId id) const;

 private:
  friend class Graph;
  std::vector<std::optional<Tensor>> values_;
  // Dropout masks, indexed like values_.
  std::vector<std::optional<Tensor>> masks_;
  Bindings inputs_;
};

struct Gradients {
  std::map<std::string, Tensor, std::less<>> parameters;
  std::map<std::string, Tensor, std::less<>> inputs;
};

/// Static computation graph for reverse-mode differentiation.
///
/// Nodes are appended in topological order: every builder call may only
/// reference nodes that already exist. Inputs are bound by name at forward
/// time; parameters are named tensors owned by the graph. Elementwise binary
/// ops broadcast with the usual trailing-axis rules.
class Graph {
 public:
  NodeId input(std::string name);
  NodeId parameter(std::string name, Tensor init);
  NodeId constant(Tensor value);

  NodeId matmul(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId scale(NodeId a, double factor);
  NodeId exp(NodeId a);
  NodeId log(NodeId a);
  NodeId relu(NodeId a);
  NodeId leaky_relu(NodeId a, double slope);
  NodeId clamp(NodeId a, double lo, double hi);
  /// Log-sum-exp over the last axis, keeping it with extent 1.
  NodeId log_sum_exp(NodeId a);
  /// Per-row cross entropy -sum_k t_k log softmax(z)_k, shape [rows, 1].
  NodeId softmax_nll(NodeId logits, NodeId targets);
  /// Sum of all elements, shape [1].
  NodeId sum(NodeId a);
  NodeId mean(NodeId a);
  /// Sum over the last axis, keeping it with extent 1.
  NodeId row_sum(NodeId a);
  NodeId digamma(NodeId a);
  NodeId lgamma(NodeId a);
  /// Inverted dropout: at training time each unit is kept with probability
  /// keep_prob and scaled by 1/keep_prob; identity at evaluation time.
  NodeId dropout(NodeId a, double keep_prob);

  /// Evaluates the requested nodes and their ancestors only.
  Evaluation forward(const Bindings& inputs, std::span<const NodeId> outputs,
                     const ForwardOptions& options = {}) const;
  Evaluation forward(const Bindings& inputs, std::initializer_list<NodeId> outputs,
                     const ForwardOptions& options = {}) const {
    return forward(inputs, std::span<const NodeId>(outputs.begin(), outputs.size()), options);
  }

  /// Reverse pass from a scalar (shape [1]) node of a finished evaluation.
  /// Returns gradients for every parameter and bound input that the root
  /// depends on; unreached parameters and inputs get zero tensors.
  Gradients backward(const Evaluation& eval, NodeId root) const;

  /// Gradient of a scalar node with respect to one named input.
  Tensor grad_wrt_input(const Evaluation& eval, NodeId loss, std::string_view input_name) const;

  std::size_t node_count() const { return nodes_.size(); }
  OpKind op(NodeId id) const { return node(id).op; }
  std::span<const NodeId> node_inputs(NodeId id) const { return node(id).inputs; }

  bool has_parameter(std::string_view name) const;
  const Tensor& parameter_value(std::string_view name) const;
  Tensor& parameter_value(std::string_view name);
  /// Parameters in name order.
  const std::map<std::string, Tensor, std::less<>>& parameters() const { return params_; }
  std::vector<std::string> input_names() const;

 private:
  struct Node {
    OpKind op;
    std::vector<NodeId> inputs;
    std::string name;
    double attr0 = 0.0;
    double attr1 = 0.0;
    Tensor constant;
  };

  const Node& node(NodeId id) const;
  NodeId push(Node n);
  NodeId unary(OpKind op, NodeId a, double attr0 = 0.0, double attr1 = 0.0);
  NodeId binary(OpKind op, NodeId a, NodeId b);
  std::string describe(std::size_t index) const;
  std::vector<bool> ancestors(std::span<const NodeId> outputs) const;

  Tensor compute(std::size_t index, const Evaluation& eval, const ForwardOptions& options,
                 std::optional<Tensor>& mask) const;
  void propagate(std::size_t index, const Evaluation& eval, const Tensor& upstream,
                 std::vector<std::optional<Tensor>>& grads) const;

  std::vector<Node> nodes_;
  std::map<std::string, Tensor, std::less<>> params_;
  std::map<std::string, NodeId, std::less<>> input_nodes_;
};

/// Worst element-wise relative error between backward() and central finite
/// differences over every bound input and every parameter the root uses.
/// The denominator is max(|analytic|, |numeric|, 1e-8). Throws DomainError
/// for h <= 0.
double finite_diff_check(Graph& graph, const Bindings& point, NodeId root, double h);

}  // namespace dpn
