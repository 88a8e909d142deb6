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

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "dpn/checkpoint.hpp"
#include "dpn/dirichlet.hpp"
#include "dpn/graph.hpp"

namespace dpn {

/// Output interpretation: a plain softmax classifier or a Prior Network whose
/// exponentiated logits are Dirichlet concentrations.
enum class HeadKind { kSoftmax, kDirichlet };

enum class Activation { kRelu, kLeakyRelu };

enum class Objective { kNll, kForwardKl, kReverseKl };

struct ModelSpec {
  std::size_t input_dim = 2;
  std::size_t num_classes = 2;
  std::vector<std::size_t> hidden = {128, 128};
  /// Probability of keeping a hidden unit; 1 disables dropout.
  double dropout_keep = 1.0;
  Activation activation = Activation::kRelu;
  double leaky_slope = 0.01;
  HeadKind head = HeadKind::kDirichlet;
};

/// Logits are clamped to +-kLogitClamp before exponentiation.
inline constexpr double kLogitClamp = 30.0;

/// Multi-layer perceptron with every training loss wired into one graph.
///
/// Graph inputs:
///   x            [B, D]  features
///   onehot       [B, K]  targets for the softmax cross entropy
///   target_alpha [B, K]  target concentrations for the KL losses
///   row_weight   [B, 1]  per-row weight; scalar losses are sum(row * weight)
class Model {
 public:
  static constexpr std::string_view kX = "x";
  static constexpr std::string_view kOneHot = "onehot";
  static constexpr std::string_view kTargetAlpha = "target_alpha";
  static constexpr std::string_view kRowWeight = "row_weight";

  Model(ModelSpec spec, std::uint64_t seed);

  const ModelSpec& spec() const { return spec_; }
  std::size_t num_classes() const { return spec_.num_classes; }
  const Graph& graph() const { return graph_; }
  Graph& graph() { return graph_; }

  NodeId logits_node() const { return logits_; }
  NodeId alpha_node() const { return alpha_; }
  NodeId row_loss_node(Objective objective) const;
  NodeId loss_node(Objective objective) const;

  /// Evaluation-mode (no dropout) forward passes over a [B, D] batch.
  Tensor logits(const Tensor& x) const;
  Tensor alpha(const Tensor& x) const;
  Tensor probabilities(const Tensor& x) const;
  std::vector<int> predict(const Tensor& x) const;

  const ParameterSet& parameters() const { return graph_.parameters(); }
  /// Replaces every parameter; names and shapes must match exactly.
  void load_parameters(const ParameterSet& params);

 private:
  ModelSpec spec_;
  Graph graph_;
  NodeId x_{};
  NodeId logits_{};
  NodeId alpha_{};
  NodeId nll_rows_{};
  NodeId forward_kl_rows_{};
  NodeId reverse_kl_rows_{};
  NodeId nll_{};
  NodeId forward_kl_{};
  NodeId reverse_kl_{};
};

/// Builds a Model whose architecture is inferred from checkpoint shapes.
Model model_from_parameters(const ParameterSet& params, HeadKind head,
                            Activation activation = Activation::kRelu, double dropout_keep = 1.0);

// ---- Prior Network targets and losses -------------------------------------

struct TargetConcentration {
  double beta_in = 100.0;
  double beta_ood = 1.0;
  std::size_t num_classes = 2;
  void validate() const;
};

struct LossWeights {
  double gamma = 0.0;
};

enum class Domain { kIn, kOod };
enum class Divergence { kForward, kReverse };

/// Per-row Dirichlet parameters alpha = exp(clamp(logits)).
std::vector<DirichletParams> forward_alpha(const Model& model, const Tensor& x);

/// alpha_k = 1 + beta * [k == cls], beta chosen by domain.
DirichletParams target_alpha(int cls, const TargetConcentration& tc, Domain domain);

/// Rows of target_alpha(classes[i]) with an explicit beta, shape [n, K].
Tensor target_alpha_rows(std::span<const int> classes, double beta, std::size_t num_classes);
/// All-ones concentrations (the beta -> 0 limit), shape [n, K].
Tensor flat_alpha_rows(std::size_t n, std::size_t num_classes);
Tensor one_hot_rows(std::span<const int> labels, std::size_t num_classes);

struct LossEvaluation {
  double value = 0.0;
  Gradients gradients;
};

/// A scalar loss node of a model together with the bindings that define it.
struct BoundLoss {
  const Model* model = nullptr;
  NodeId node{};
  Bindings bindings;

  double value(const ForwardOptions& options = {}) const;
  LossEvaluation evaluate(const ForwardOptions& options = {}) const;
};

/// Mean over rows of KL(target || model).
BoundLoss loss_forward_kl(const Model& model, const Tensor& x, const Tensor& target_alpha);
/// Mean over rows of KL(model || target).
BoundLoss loss_reverse_kl(const Model& model, const Tensor& x, const Tensor& target_alpha);
/// Mean over rows of -ln softmax(logits)[label].
BoundLoss loss_nll(const Model& model, const Tensor& x, std::span<const int> labels);

struct JointBatch {
  Tensor in_x;
  std::vector<int> in_labels;
  /// Optional out-of-domain or adversarial rows with their target concentrations.
  Tensor ood_x;
  Tensor ood_target_alpha;
};

/// mean_in KL(. ; beta_in target on the label) + gamma * mean_ood KL(. ; ood target).
BoundLoss loss_joint(const Model& model, const JointBatch& batch, const TargetConcentration& tc,
                     const LossWeights& weights, Divergence divergence);

}  // namespace dpn
