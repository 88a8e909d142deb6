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

#include "dpn/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "dpn/error.hpp"

namespace dpn {
namespace {

std::string weight_name(std::size_t layer) { return "layer" + std::to_string(layer) + ".weight"; }
std::string bias_name(std::size_t layer) { return "layer" + std::to_string(layer) + ".bias"; }

// Row-wise KL(p || q) between Dirichlets held in [B, K] nodes.
NodeId dirichlet_kl_rows(Graph& g, NodeId p, NodeId q) {
  const NodeId p0 = g.row_sum(p);
  const NodeId q0 = g.row_sum(q);
  const NodeId norm = g.sub(g.lgamma(p0), g.lgamma(q0));
  const NodeId lgammas = g.row_sum(g.sub(g.lgamma(q), g.lgamma(p)));
  const NodeId cross = g.row_sum(g.mul(g.sub(p, q), g.sub(g.digamma(p), g.digamma(p0))));
  return g.add(g.add(norm, lgammas), cross);
}

}  // namespace

Model::Model(ModelSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
  if (spec_.input_dim == 0) throw DomainError("model input_dim must be positive");
  if (spec_.num_classes < 2) throw DomainError("model needs at least two classes");
  if (!(spec_.dropout_keep > 0.0 && spec_.dropout_keep <= 1.0)) {
    throw DomainError("dropout keep probability must lie in (0, 1]");
  }
  std::mt19937_64 rng(seed);
  x_ = graph_.input(std::string(kX));
  NodeId h = x_;
  std::size_t fan_in = spec_.input_dim;
  std::vector<std::size_t> widths = spec_.hidden;
  widths.push_back(spec_.num_classes);
  for (std::size_t layer = 0; layer < widths.size(); ++layer) {
    const std::size_t fan_out = widths[layer];
    if (fan_out == 0) throw DomainError("hidden layer width must be positive");
    // He initialization.
    std::normal_distribution<double> init(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
    Tensor w({fan_in, fan_out});
    for (auto& v : w.values()) v = init(rng);
    const NodeId wn = graph_.parameter(weight_name(layer), std::move(w));
    const NodeId bn = graph_.parameter(bias_name(layer), Tensor({fan_out}, 0.0));
    h = graph_.add(graph_.matmul(h, wn), bn);
    const bool last = layer + 1 == widths.size();
    if (!last) {
      h = spec_.activation == Activation::kRelu ? graph_.relu(h)
                                                : graph_.leaky_relu(h, spec_.leaky_slope);
      if (spec_.dropout_keep < 1.0) h = graph_.dropout(h, spec_.dropout_keep);
    }
    fan_in = fan_out;
  }
  logits_ = h;
  alpha_ = graph_.exp(graph_.clamp(logits_, -kLogitClamp, kLogitClamp));

  const NodeId onehot = graph_.input(std::string(kOneHot));
  const NodeId target = graph_.input(std::string(kTargetAlpha));
  const NodeId weight = graph_.input(std::string(kRowWeight));
  nll_rows_ = graph_.softmax_nll(logits_, onehot);
  forward_kl_rows_ = dirichlet_kl_rows(graph_, target, alpha_);
  reverse_kl_rows_ = dirichlet_kl_rows(graph_, alpha_, target);
  nll_ = graph_.sum(graph_.mul(nll_rows_, weight));
  forward_kl_ = graph_.sum(graph_.mul(forward_kl_rows_, weight));
  reverse_kl_ = graph_.sum(graph_.mul(reverse_kl_rows_, weight));
}

NodeId Model::row_loss_node(Objective objective) const {
  switch (objective) {
    case Objective::kNll: return nll_rows_;
    case Objective::kForwardKl: return forward_kl_rows_;
    case Objective::kReverseKl: return reverse_kl_rows_;
  }
  throw Error("unknown objective");
}

NodeId Model::loss_node(Objective objective) const {
  switch (objective) {
    case Objective::kNll: return nll_;
    case Objective::kForwardKl: return forward_kl_;
    case Objective::kReverseKl: return reverse_kl_;
  }
  throw Error("unknown objective");
}

namespace {

void check_features(const Model& model, const Tensor& x) {
  if (x.rank() != 2 || x.dim(1) != model.spec().input_dim) {
    throw ShapeError("model expects [B, " + std::to_string(model.spec().input_dim) +
                     "] features, got " + shape_string(x.shape()));
  }
}

Tensor eval_node(const Model& model, const Tensor& x, NodeId node) {
  check_features(model, x);
  Bindings b;
  b.emplace(std::string(Model::kX), x);
  return model.graph().forward(b, {node}).value(node);
}

}  // namespace

Tensor Model::logits(const Tensor& x) const { return eval_node(*this, x, logits_); }
Tensor Model::alpha(const Tensor& x) const { return eval_node(*this, x, alpha_); }

Tensor Model::probabilities(const Tensor& x) const {
  Tensor z = logits(x);
  const std::size_t k = z.dim(1);
  for (std::size_t r = 0; r < z.rows(); ++r) {
    auto row = z.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (auto& v : row) {
      v = std::exp(v - mx);
      total += v;
    }
    for (std::size_t c = 0; c < k; ++c) row[c] /= total;
  }
  return z;
}

std::vector<int> Model::predict(const Tensor& x) const {
  const Tensor z = logits(x);
  std::vector<int> out(z.rows());
  for (std::size_t r = 0; r < z.rows(); ++r) {
    auto row = z.row(r);
    out[r] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

void Model::load_parameters(const ParameterSet& params) {
  const auto& current = graph_.parameters();
  if (params.size() != current.size()) {
    throw ShapeError("checkpoint has " + std::to_string(params.size()) + " parameters, model has " +
                     std::to_string(current.size()));
  }
  for (const auto& [name, value] : current) {
    auto it = params.find(name);
    if (it == params.end()) throw ShapeError("checkpoint lacks parameter '" + name + "'");
    if (it->second.shape() != value.shape()) {
      throw ShapeError("parameter '" + name + "' has shape " + shape_string(it->second.shape()) +
                       ", expected " + shape_string(value.shape()));
    }
  }
  for (const auto& [name, value] : params) graph_.parameter_value(name) = value;
}

Model model_from_parameters(const ParameterSet& params, HeadKind head, Activation activation,
                            double dropout_keep) {
  ModelSpec spec;
  spec.head = head;
  spec.activation = activation;
  spec.dropout_keep = dropout_keep;
  spec.hidden.clear();
  std::size_t layer = 0;
  for (;; ++layer) {
    auto it = params.find(weight_name(layer));
    if (it == params.end()) break;
    if (it->second.rank() != 2) throw FormatError("weight '" + it->first + "' must be rank 2");
    if (layer == 0) spec.input_dim = it->second.dim(0);
    spec.hidden.push_back(it->second.dim(1));
  }
  if (layer == 0) throw FormatError("checkpoint contains no layer weights");
  spec.num_classes = spec.hidden.back();
  spec.hidden.pop_back();
  Model model(spec, 0);
  model.load_parameters(params);
  return model;
}

// ---- targets ---------------------------------------------------------------

void TargetConcentration::validate() const {
  if (!(beta_in > 0.0) || !std::isfinite(beta_in)) throw DomainError("beta_in must be > 0");
  if (!(beta_ood > 0.0) || !std::isfinite(beta_ood)) throw DomainError("beta_ood must be > 0");
  if (num_classes < 2) throw DomainError("target concentration needs K >= 2");
}

std::vector<DirichletParams> forward_alpha(const Model& model, const Tensor& x) {
  const Tensor a = model.alpha(x);
  std::vector<DirichletParams> out;
  out.reserve(a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto row = a.row(r);
    out.emplace_back(std::vector<double>(row.begin(), row.end()));
  }
  return out;
}

DirichletParams target_alpha(int cls, const TargetConcentration& tc, Domain domain) {
  tc.validate();
  if (cls < 0 || static_cast<std::size_t>(cls) >= tc.num_classes) {
    throw DomainError("target class " + std::to_string(cls) + " outside [0, " +
                      std::to_string(tc.num_classes) + ")");
  }
  std::vector<double> a(tc.num_classes, 1.0);
  a[static_cast<std::size_t>(cls)] += domain == Domain::kIn ? tc.beta_in : tc.beta_ood;
  return DirichletParams(std::move(a));
}

Tensor target_alpha_rows(std::span<const int> classes, double beta, std::size_t num_classes) {
  if (classes.empty()) throw ShapeError("target_alpha_rows: no classes");
  if (!(beta >= 0.0)) throw DomainError("target concentration beta must be >= 0");
  Tensor t({classes.size(), num_classes}, 1.0);
  for (std::size_t r = 0; r < classes.size(); ++r) {
    const int c = classes[r];
    if (c < 0 || static_cast<std::size_t>(c) >= num_classes) {
      throw DomainError("class " + std::to_string(c) + " out of range");
    }
    t.at(r, static_cast<std::size_t>(c)) += beta;
  }
  return t;
}

Tensor flat_alpha_rows(std::size_t n, std::size_t num_classes) {
  return Tensor({n, num_classes}, 1.0);
}

Tensor one_hot_rows(std::span<const int> labels, std::size_t num_classes) {
  if (labels.empty()) throw ShapeError("one_hot_rows: no labels");
  Tensor t({labels.size(), num_classes}, 0.0);
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const int c = labels[r];
    if (c < 0 || static_cast<std::size_t>(c) >= num_classes) {
      throw DomainError("label " + std::to_string(c) + " outside [0, " +
                        std::to_string(num_classes) + ")");
    }
    t.at(r, static_cast<std::size_t>(c)) = 1.0;
  }
  return t;
}

// ---- losses ----------------------------------------------------------------

double BoundLoss::value(const ForwardOptions& options) const {
  return model->graph().forward(bindings, {node}, options).value(node)[0];
}

LossEvaluation BoundLoss::evaluate(const ForwardOptions& options) const {
  const auto eval = model->graph().forward(bindings, {node}, options);
  return {eval.value(node)[0], model->graph().backward(eval, node)};
}

namespace {

Bindings kl_bindings(const Model& model, const Tensor& x, const Tensor& target) {
  check_features(model, x);
  if (target.shape() != Shape{x.rows(), model.num_classes()}) {
    throw ShapeError("target concentrations " + shape_string(target.shape()) +
                     " do not match batch of " + std::to_string(x.rows()) + " x " +
                     std::to_string(model.num_classes()));
  }
  for (double v : target.values()) {
    if (!(v > 0.0)) throw DomainError("target concentrations must be > 0");
  }
  Bindings b;
  b.emplace(std::string(Model::kX), x);
  b.emplace(std::string(Model::kTargetAlpha), target);
  b.emplace(std::string(Model::kRowWeight),
            Tensor({x.rows(), 1}, 1.0 / static_cast<double>(x.rows())));
  return b;
}

}  // namespace

BoundLoss loss_forward_kl(const Model& model, const Tensor& x, const Tensor& target_alpha) {
  return {&model, model.loss_node(Objective::kForwardKl), kl_bindings(model, x, target_alpha)};
}

BoundLoss loss_reverse_kl(const Model& model, const Tensor& x, const Tensor& target_alpha) {
  return {&model, model.loss_node(Objective::kReverseKl), kl_bindings(model, x, target_alpha)};
}

BoundLoss loss_nll(const Model& model, const Tensor& x, std::span<const int> labels) {
  check_features(model, x);
  if (labels.size() != x.rows()) throw ShapeError("loss_nll: label count differs from batch size");
  Bindings b;
  b.emplace(std::string(Model::kX), x);
  b.emplace(std::string(Model::kOneHot), one_hot_rows(labels, model.num_classes()));
  b.emplace(std::string(Model::kRowWeight),
            Tensor({x.rows(), 1}, 1.0 / static_cast<double>(x.rows())));
  return {&model, model.loss_node(Objective::kNll), std::move(b)};
}

BoundLoss loss_joint(const Model& model, const JointBatch& batch, const TargetConcentration& tc,
                     const LossWeights& weights, Divergence divergence) {
  tc.validate();
  if (batch.in_x.empty()) throw ShapeError("loss_joint: empty in-domain batch");
  if (!(weights.gamma >= 0.0) || !std::isfinite(weights.gamma)) {
    throw DomainError("loss_joint: gamma must be finite and >= 0");
  }
  const bool use_ood = weights.gamma > 0.0;
  if (use_ood && batch.ood_x.empty()) {
    throw ShapeError("loss_joint: gamma > 0 requires a non-empty out-of-domain batch");
  }
  const std::size_t n_in = batch.in_x.rows();
  Tensor in_target = target_alpha_rows(batch.in_labels, tc.beta_in, tc.num_classes);
  if (in_target.rows() != n_in) throw ShapeError("loss_joint: label count differs from batch size");
  Tensor row_weight({n_in, 1}, 1.0 / static_cast<double>(n_in));

  Tensor x = batch.in_x;
  Tensor target = std::move(in_target);
  if (use_ood) {
    const std::size_t n_ood = batch.ood_x.rows();
    if (batch.ood_target_alpha.rows() != n_ood) {
      throw ShapeError("loss_joint: out-of-domain targets differ from batch size");
    }
    x = concat_rows(x, batch.ood_x);
    target = concat_rows(target, batch.ood_target_alpha);
    row_weight = concat_rows(row_weight,
                             Tensor({n_ood, 1}, weights.gamma / static_cast<double>(n_ood)));
  }
  Bindings b = kl_bindings(model, x, target);
  b.find(Model::kRowWeight)->second = std::move(row_weight);
  const Objective objective =
      divergence == Divergence::kForward ? Objective::kForwardKl : Objective::kReverseKl;
  return {&model, model.loss_node(objective), std::move(b)};
}

}  // namespace dpn
