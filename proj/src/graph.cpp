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

#include "dpn/graph.hpp"

#include <algorithm>
#include <cmath>

#include "dpn/error.hpp"
#include "dpn/special_functions.hpp"

namespace dpn {

std::string_view op_name(OpKind op) {
  switch (op) {
    case OpKind::kInput: return "input";
    case OpKind::kParameter: return "parameter";
    case OpKind::kConstant: return "constant";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kScale: return "scale";
    case OpKind::kExp: return "exp";
    case OpKind::kLog: return "log";
    case OpKind::kRelu: return "relu";
    case OpKind::kLeakyRelu: return "leaky_relu";
    case OpKind::kClamp: return "clamp";
    case OpKind::kLogSumExp: return "log_sum_exp";
    case OpKind::kSoftmaxNll: return "softmax_nll";
    case OpKind::kSum: return "sum";
    case OpKind::kMean: return "mean";
    case OpKind::kRowSum: return "row_sum";
    case OpKind::kDigamma: return "digamma";
    case OpKind::kLgamma: return "lgamma";
    case OpKind::kDropout: return "dropout";
  }
  return "unknown";
}

const Tensor& Evaluation::value(NodeId id) const {
  if (!has(id)) {
    throw Error("node " + std::to_string(id.index) + " was not evaluated");
  }
  return *values_[id.index];
}

namespace {

// Row-major view of a matmul operand as (rows x cols).
struct MatDims {
  std::size_t rows;
  std::size_t cols;
};

// out[m x n] (+)= a[m x k] * b[k x n], optionally transposing a or b in place.
void gemm(const double* a, const double* b, double* out, std::size_t m, std::size_t k,
          std::size_t n, bool trans_a, bool trans_b) {
  for (std::size_t i = 0; i < m; ++i) {
    double* out_row = out + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = trans_a ? a[p * m + i] : a[i * k + p];
      if (av == 0.0) continue;
      if (trans_b) {
        for (std::size_t j = 0; j < n; ++j) out_row[j] += av * b[j * k + p];
      } else {
        const double* b_row = b + p * n;
        for (std::size_t j = 0; j < n; ++j) out_row[j] += av * b_row[j];
      }
    }
  }
}

Shape broadcast_shape(const Shape& a, const Shape& b, bool* ok) {
  const std::size_t rank = std::max(a.size(), b.size());
  Shape out(rank, 1);
  *ok = true;
  for (std::size_t i = 0; i < rank; ++i) {
    const std::size_t da = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
    const std::size_t db = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
    if (da != db && da != 1 && db != 1) *ok = false;
    out[i] = std::max(da, db);
  }
  return out;
}

// Flat index into an operand of shape `in` for every element of `out`.
std::vector<std::size_t> broadcast_index(const Shape& in, const Shape& out) {
  const std::size_t rank = out.size();
  std::vector<std::size_t> stride(rank, 0);
  std::size_t s = 1;
  for (std::size_t i = rank; i-- > 0;) {
    const std::size_t offset = rank - in.size();
    if (i >= offset) {
      const std::size_t d = in[i - offset];
      stride[i] = d == 1 ? 0 : s;
      s *= d;
    }
  }
  const std::size_t total = shape_size(out);
  std::vector<std::size_t> index(total);
  std::vector<std::size_t> counter(rank, 0);
  std::size_t flat = 0;
  for (std::size_t e = 0; e < total; ++e) {
    index[e] = flat;
    for (std::size_t i = rank; i-- > 0;) {
      ++counter[i];
      flat += stride[i];
      if (counter[i] < out[i]) break;
      flat -= stride[i] * counter[i];
      counter[i] = 0;
    }
  }
  return index;
}

Shape last_axis_reduced(const Shape& s) {
  Shape out = s;
  out.back() = 1;
  return out;
}

MatDims as_left(const Shape& s) { return s.size() == 1 ? MatDims{1, s[0]} : MatDims{s[0], s[1]}; }
MatDims as_right(const Shape& s) { return s.size() == 1 ? MatDims{s[0], 1} : MatDims{s[0], s[1]}; }

void softmax_row(std::span<const double> z, std::span<double> out) {
  const double mx = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::exp(z[i] - mx);
    total += out[i];
  }
  for (auto& v : out) v /= total;
}

double lse_row(std::span<const double> z) {
  const double mx = *std::max_element(z.begin(), z.end());
  if (!std::isfinite(mx)) return mx;
  double total = 0.0;
  for (double v : z) total += std::exp(v - mx);
  return mx + std::log(total);
}

void accumulate(std::optional<Tensor>& slot, Tensor&& g) {
  if (!slot) {
    slot = std::move(g);
    return;
  }
  auto dst = slot->data();
  auto src = g.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

// Sums a gradient of shape `out` down to operand shape `in`.
Tensor reduce_to(const Tensor& g, const Shape& in) {
  if (g.shape() == in) return g;
  Tensor r(in, 0.0);
  const auto idx = broadcast_index(in, g.shape());
  for (std::size_t e = 0; e < idx.size(); ++e) r[idx[e]] += g[e];
  return r;
}

}  // namespace

const Graph::Node& Graph::node(NodeId id) const {
  if (id.index >= nodes_.size()) {
    throw Error("unknown node id " + std::to_string(id.index));
  }
  return nodes_[id.index];
}

NodeId Graph::push(Node n) {
  for (auto in : n.inputs) node(in);
  nodes_.push_back(std::move(n));
  return NodeId{nodes_.size() - 1};
}

NodeId Graph::unary(OpKind op, NodeId a, double attr0, double attr1) {
  Node n{op, {a}, {}, attr0, attr1, {}};
  return push(std::move(n));
}

NodeId Graph::binary(OpKind op, NodeId a, NodeId b) {
  Node n{op, {a, b}, {}, 0.0, 0.0, {}};
  return push(std::move(n));
}

NodeId Graph::input(std::string name) {
  if (input_nodes_.contains(name)) throw Error("duplicate input name '" + name + "'");
  Node n{OpKind::kInput, {}, name, 0.0, 0.0, {}};
  auto id = push(std::move(n));
  input_nodes_.emplace(std::move(name), id);
  return id;
}

NodeId Graph::parameter(std::string name, Tensor init) {
  if (params_.contains(name)) throw Error("duplicate parameter name '" + name + "'");
  params_.emplace(name, std::move(init));
  Node n{OpKind::kParameter, {}, std::move(name), 0.0, 0.0, {}};
  return push(std::move(n));
}

NodeId Graph::constant(Tensor value) {
  Node n{OpKind::kConstant, {}, {}, 0.0, 0.0, std::move(value)};
  return push(std::move(n));
}

NodeId Graph::matmul(NodeId a, NodeId b) { return binary(OpKind::kMatMul, a, b); }
NodeId Graph::add(NodeId a, NodeId b) { return binary(OpKind::kAdd, a, b); }
NodeId Graph::sub(NodeId a, NodeId b) { return binary(OpKind::kSub, a, b); }
NodeId Graph::mul(NodeId a, NodeId b) { return binary(OpKind::kMul, a, b); }
NodeId Graph::softmax_nll(NodeId logits, NodeId targets) {
  return binary(OpKind::kSoftmaxNll, logits, targets);
}
NodeId Graph::scale(NodeId a, double factor) { return unary(OpKind::kScale, a, factor); }
NodeId Graph::exp(NodeId a) { return unary(OpKind::kExp, a); }
NodeId Graph::log(NodeId a) { return unary(OpKind::kLog, a); }
NodeId Graph::relu(NodeId a) { return unary(OpKind::kRelu, a); }
NodeId Graph::leaky_relu(NodeId a, double slope) { return unary(OpKind::kLeakyRelu, a, slope); }
NodeId Graph::clamp(NodeId a, double lo, double hi) {
  if (!(lo <= hi)) throw DomainError("clamp: lo must not exceed hi");
  return unary(OpKind::kClamp, a, lo, hi);
}
NodeId Graph::log_sum_exp(NodeId a) { return unary(OpKind::kLogSumExp, a); }
NodeId Graph::sum(NodeId a) { return unary(OpKind::kSum, a); }
NodeId Graph::mean(NodeId a) { return unary(OpKind::kMean, a); }
NodeId Graph::row_sum(NodeId a) { return unary(OpKind::kRowSum, a); }
NodeId Graph::digamma(NodeId a) { return unary(OpKind::kDigamma, a); }
NodeId Graph::lgamma(NodeId a) { return unary(OpKind::kLgamma, a); }
NodeId Graph::dropout(NodeId a, double keep_prob) {
  if (!(keep_prob > 0.0 && keep_prob <= 1.0)) {
    throw DomainError("dropout keep probability must lie in (0, 1]");
  }
  return unary(OpKind::kDropout, a, keep_prob);
}

bool Graph::has_parameter(std::string_view name) const { return params_.find(name) != params_.end(); }

const Tensor& Graph::parameter_value(std::string_view name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw Error("unknown parameter '" + std::string(name) + "'");
  return it->second;
}

Tensor& Graph::parameter_value(std::string_view name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw Error("unknown parameter '" + std::string(name) + "'");
  return it->second;
}

std::vector<std::string> Graph::input_names() const {
  std::vector<std::string> names;
  for (const auto& [name, id] : input_nodes_) names.push_back(name);
  return names;
}

std::string Graph::describe(std::size_t index) const {
  const auto& n = nodes_[index];
  std::string s = "node " + std::to_string(index) + " (" + std::string(op_name(n.op));
  if (!n.name.empty()) s += " '" + n.name + "'";
  return s + ")";
}

std::vector<bool> Graph::ancestors(std::span<const NodeId> outputs) const {
  std::vector<bool> needed(nodes_.size(), false);
  for (auto id : outputs) needed[id.index] = true;
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    if (!needed[i]) continue;
    for (auto in : nodes_[i].inputs) needed[in.index] = true;
  }
  return needed;
}

Evaluation Graph::forward(const Bindings& inputs, std::span<const NodeId> outputs,
                          const ForwardOptions& options) const {
  for (auto id : outputs) node(id);
  Evaluation eval;
  eval.values_.resize(nodes_.size());
  eval.masks_.resize(nodes_.size());
  eval.inputs_ = inputs;
  const auto needed = ancestors(outputs);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!needed[i]) continue;
    Tensor out = compute(i, eval, options, eval.masks_[i]);
    if (!out.all_finite()) {
      throw NumericError(describe(i) + " produced a non-finite value", i);
    }
    eval.values_[i] = std::move(out);
  }
  return eval;
}

Tensor Graph::compute(std::size_t index, const Evaluation& eval, const ForwardOptions& options,
                      std::optional<Tensor>& mask) const {
  const Node& n = nodes_[index];
  auto in = [&](std::size_t k) -> const Tensor& { return *eval.values_[n.inputs[k].index]; };
  auto shape_error = [&](const std::string& msg) {
    return ShapeError(describe(index) + ": " + msg);
  };

  switch (n.op) {
    case OpKind::kInput: {
      auto it = eval.inputs_.find(n.name);
      if (it == eval.inputs_.end()) throw Error("input '" + n.name + "' is not bound");
      return it->second;
    }
    case OpKind::kParameter:
      return params_.find(n.name)->second;
    case OpKind::kConstant:
      return n.constant;
    case OpKind::kMatMul: {
      const Tensor& a = in(0);
      const Tensor& b = in(1);
      if (a.rank() > 2 || b.rank() > 2 || (a.rank() == 1 && b.rank() == 1)) {
        throw shape_error("matmul supports matrix-matrix and matrix-vector operands, got " +
                          shape_string(a.shape()) + " x " + shape_string(b.shape()));
      }
      const MatDims da = as_left(a.shape());
      const MatDims db = as_right(b.shape());
      if (da.cols != db.rows) {
        throw shape_error("inner dimensions differ: " + shape_string(a.shape()) + " x " +
                          shape_string(b.shape()));
      }
      Shape out_shape;
      if (a.rank() == 1) {
        out_shape = {db.cols};
      } else if (b.rank() == 1) {
        out_shape = {da.rows};
      } else {
        out_shape = {da.rows, db.cols};
      }
      Tensor out(out_shape, 0.0);
      gemm(a.data().data(), b.data().data(), out.data().data(), da.rows, da.cols, db.cols, false,
           false);
      return out;
    }
    case OpKind::kAdd:
    case OpKind::kSub:
    case OpKind::kMul: {
      const Tensor& a = in(0);
      const Tensor& b = in(1);
      auto apply = [op = n.op](double x, double y) {
        return op == OpKind::kAdd ? x + y : (op == OpKind::kSub ? x - y : x * y);
      };
      if (a.shape() == b.shape()) {
        Tensor out(a.shape());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = apply(a[i], b[i]);
        return out;
      }
      bool ok = false;
      Shape out_shape = broadcast_shape(a.shape(), b.shape(), &ok);
      if (!ok) {
        throw shape_error("cannot broadcast " + shape_string(a.shape()) + " with " +
                          shape_string(b.shape()));
      }
      const auto ia = broadcast_index(a.shape(), out_shape);
      const auto ib = broadcast_index(b.shape(), out_shape);
      Tensor out(out_shape);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = apply(a[ia[i]], b[ib[i]]);
      return out;
    }
    case OpKind::kScale:
    case OpKind::kExp:
    case OpKind::kLog:
    case OpKind::kRelu:
    case OpKind::kLeakyRelu:
    case OpKind::kClamp:
    case OpKind::kDigamma:
    case OpKind::kLgamma: {
      Tensor out = in(0);
      for (auto& v : out.values()) {
        switch (n.op) {
          case OpKind::kScale: v *= n.attr0; break;
          case OpKind::kExp: v = std::exp(v); break;
          case OpKind::kLog: v = std::log(v); break;
          case OpKind::kRelu: v = v > 0.0 ? v : 0.0; break;
          case OpKind::kLeakyRelu: v = v > 0.0 ? v : n.attr0 * v; break;
          case OpKind::kClamp: v = std::clamp(v, n.attr0, n.attr1); break;
          case OpKind::kDigamma:
          case OpKind::kLgamma:
            if (!(v > 0.0)) {
              throw DomainError(describe(index) + ": argument must be > 0, got " +
                                std::to_string(v));
            }
            v = n.op == OpKind::kDigamma ? dpn::digamma(v) : dpn::log_gamma(v);
            break;
          default: break;
        }
      }
      return out;
    }
    case OpKind::kLogSumExp: {
      const Tensor& a = in(0);
      const std::size_t width = a.shape().back();
      const std::size_t rows = a.size() / width;
      Tensor out(last_axis_reduced(a.shape()));
      for (std::size_t r = 0; r < rows; ++r) {
        out[r] = lse_row(a.data().subspan(r * width, width));
      }
      return out;
    }
    case OpKind::kSoftmaxNll: {
      const Tensor& z = in(0);
      const Tensor& t = in(1);
      if (z.shape() != t.shape()) {
        throw shape_error("logits " + shape_string(z.shape()) + " vs targets " +
                          shape_string(t.shape()));
      }
      const std::size_t width = z.shape().back();
      const std::size_t rows = z.size() / width;
      Tensor out(last_axis_reduced(z.shape()));
      for (std::size_t r = 0; r < rows; ++r) {
        auto zr = z.data().subspan(r * width, width);
        auto tr = t.data().subspan(r * width, width);
        const double lse = lse_row(zr);
        double loss = 0.0;
        for (std::size_t k = 0; k < width; ++k) {
          if (tr[k] != 0.0) loss += tr[k] * (lse - zr[k]);
        }
        out[r] = loss;
      }
      return out;
    }
    case OpKind::kSum:
    case OpKind::kMean: {
      const Tensor& a = in(0);
      double total = 0.0;
      for (double v : a.values()) total += v;
      if (n.op == OpKind::kMean) total /= static_cast<double>(a.size());
      return Tensor::scalar(total);
    }
    case OpKind::kRowSum: {
      const Tensor& a = in(0);
      const std::size_t width = a.shape().back();
      const std::size_t rows = a.size() / width;
      Tensor out(last_axis_reduced(a.shape()));
      for (std::size_t r = 0; r < rows; ++r) {
        double total = 0.0;
        for (std::size_t k = 0; k < width; ++k) total += a[r * width + k];
        out[r] = total;
      }
      return out;
    }
    case OpKind::kDropout: {
      const Tensor& a = in(0);
      const double keep = n.attr0;
      if (!options.training || keep >= 1.0) return a;
      if (options.rng == nullptr) {
        throw Error(describe(index) + ": training-mode dropout needs a random generator");
      }
      std::bernoulli_distribution coin(keep);
      Tensor m(a.shape());
      for (auto& v : m.values()) v = coin(*options.rng) ? 1.0 / keep : 0.0;
      Tensor out = a;
      for (std::size_t i = 0; i < out.size(); ++i) out[i] *= m[i];
      mask = std::move(m);
      return out;
    }
  }
  throw Error("unhandled op");
}

Gradients Graph::backward(const Evaluation& eval, NodeId root) const {
  node(root);
  if (!eval.has(root)) {
    throw Error("backward: root node " + std::to_string(root.index) + " was not visited by forward");
  }
  if (eval.value(root).shape() != Shape{1}) {
    throw ShapeError("backward: root must be a scalar of shape [1], got " +
                     shape_string(eval.value(root).shape()));
  }
  std::vector<std::optional<Tensor>> grads(nodes_.size());
  grads[root.index] = Tensor::scalar(1.0);
  for (std::size_t i = root.index + 1; i-- > 0;) {
    if (!grads[i] || nodes_[i].inputs.empty()) continue;
    propagate(i, eval, *grads[i], grads);
  }

  Gradients result;
  for (const auto& [name, value] : params_) result.parameters.emplace(name, Tensor(value.shape(), 0.0));
  for (const auto& [name, value] : eval.inputs_) {
    if (input_nodes_.contains(name)) result.inputs.emplace(name, Tensor(value.shape(), 0.0));
  }
  for (std::size_t i = 0; i <= root.index; ++i) {
    if (!grads[i]) continue;
    const Node& n = nodes_[i];
    if (n.op == OpKind::kParameter) {
      result.parameters[n.name] = std::move(*grads[i]);
    } else if (n.op == OpKind::kInput) {
      result.inputs[n.name] = std::move(*grads[i]);
    }
  }
  return result;
}

void Graph::propagate(std::size_t index, const Evaluation& eval, const Tensor& g,
                      std::vector<std::optional<Tensor>>& grads) const {
  const Node& n = nodes_[index];
  auto in = [&](std::size_t k) -> const Tensor& { return *eval.values_[n.inputs[k].index]; };
  auto slot = [&](std::size_t k) -> std::optional<Tensor>& { return grads[n.inputs[k].index]; };
  const Tensor& out = *eval.values_[index];

  switch (n.op) {
    case OpKind::kInput:
    case OpKind::kParameter:
    case OpKind::kConstant:
      return;
    case OpKind::kMatMul: {
      const Tensor& a = in(0);
      const Tensor& b = in(1);
      const MatDims da = as_left(a.shape());
      const MatDims db = as_right(b.shape());
      // dA = dC * B^T, dB = A^T * dC with dC viewed as (da.rows x db.cols).
      Tensor ga(a.shape(), 0.0);
      gemm(g.data().data(), b.data().data(), ga.data().data(), da.rows, db.cols, da.cols, false,
           true);
      Tensor gb(b.shape(), 0.0);
      gemm(a.data().data(), g.data().data(), gb.data().data(), da.cols, da.rows, db.cols, true,
           false);
      accumulate(slot(0), std::move(ga));
      accumulate(slot(1), std::move(gb));
      return;
    }
    case OpKind::kAdd:
    case OpKind::kSub:
    case OpKind::kMul: {
      const Tensor& a = in(0);
      const Tensor& b = in(1);
      Tensor ga(g.shape());
      Tensor gb(g.shape());
      if (n.op == OpKind::kMul) {
        const auto ia = broadcast_index(a.shape(), g.shape());
        const auto ib = broadcast_index(b.shape(), g.shape());
        for (std::size_t i = 0; i < g.size(); ++i) {
          ga[i] = g[i] * b[ib[i]];
          gb[i] = g[i] * a[ia[i]];
        }
      } else {
        const double sign = n.op == OpKind::kSub ? -1.0 : 1.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
          ga[i] = g[i];
          gb[i] = sign * g[i];
        }
      }
      accumulate(slot(0), reduce_to(ga, a.shape()));
      accumulate(slot(1), reduce_to(gb, b.shape()));
      return;
    }
    case OpKind::kScale:
    case OpKind::kExp:
    case OpKind::kLog:
    case OpKind::kRelu:
    case OpKind::kLeakyRelu:
    case OpKind::kClamp:
    case OpKind::kDigamma:
    case OpKind::kLgamma:
    case OpKind::kDropout: {
      const Tensor& a = in(0);
      const auto* mask = eval.masks_[index] ? &*eval.masks_[index] : nullptr;
      Tensor ga(a.shape());
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = a[i];
        double d = 0.0;
        switch (n.op) {
          case OpKind::kScale: d = n.attr0; break;
          case OpKind::kExp: d = out[i]; break;
          case OpKind::kLog: d = 1.0 / x; break;
          case OpKind::kRelu: d = x > 0.0 ? 1.0 : 0.0; break;
          case OpKind::kLeakyRelu: d = x > 0.0 ? 1.0 : n.attr0; break;
          case OpKind::kClamp: d = (x < n.attr0 || x > n.attr1) ? 0.0 : 1.0; break;
          case OpKind::kDigamma: d = dpn::trigamma(x); break;
          case OpKind::kLgamma: d = dpn::digamma(x); break;
          case OpKind::kDropout: d = mask ? (*mask)[i] : 1.0; break;
          default: break;
        }
        ga[i] = g[i] * d;
      }
      accumulate(slot(0), std::move(ga));
      return;
    }
    case OpKind::kLogSumExp: {
      const Tensor& a = in(0);
      const std::size_t width = a.shape().back();
      const std::size_t rows = a.size() / width;
      Tensor ga(a.shape());
      for (std::size_t r = 0; r < rows; ++r) {
        softmax_row(a.data().subspan(r * width, width), ga.data().subspan(r * width, width));
        for (std::size_t k = 0; k < width; ++k) ga[r * width + k] *= g[r];
      }
      accumulate(slot(0), std::move(ga));
      return;
    }
    case OpKind::kSoftmaxNll: {
      const Tensor& z = in(0);
      const Tensor& t = in(1);
      const std::size_t width = z.shape().back();
      const std::size_t rows = z.size() / width;
      Tensor gz(z.shape());
      Tensor gt(t.shape());
      std::vector<double> p(width);
      for (std::size_t r = 0; r < rows; ++r) {
        auto zr = z.data().subspan(r * width, width);
        auto tr = t.data().subspan(r * width, width);
        softmax_row(zr, p);
        const double lse = lse_row(zr);
        double mass = 0.0;
        for (double v : tr) mass += v;
        for (std::size_t k = 0; k < width; ++k) {
          gz[r * width + k] = g[r] * (p[k] * mass - tr[k]);
          gt[r * width + k] = g[r] * (lse - zr[k]);
        }
      }
      accumulate(slot(0), std::move(gz));
      accumulate(slot(1), std::move(gt));
      return;
    }
    case OpKind::kSum:
    case OpKind::kMean: {
      const Tensor& a = in(0);
      const double d = n.op == OpKind::kMean ? g[0] / static_cast<double>(a.size()) : g[0];
      accumulate(slot(0), Tensor(a.shape(), d));
      return;
    }
    case OpKind::kRowSum: {
      const Tensor& a = in(0);
      const std::size_t width = a.shape().back();
      Tensor ga(a.shape());
      for (std::size_t i = 0; i < a.size(); ++i) ga[i] = g[i / width];
      accumulate(slot(0), std::move(ga));
      return;
    }
  }
}

Tensor Graph::grad_wrt_input(const Evaluation& eval, NodeId loss, std::string_view input_name) const {
  if (!input_nodes_.contains(input_name)) {
    throw Error("unknown input name '" + std::string(input_name) + "'");
  }
  auto grads = backward(eval, loss);
  auto it = grads.inputs.find(input_name);
  if (it == grads.inputs.end()) {
    throw Error("input '" + std::string(input_name) + "' is not bound in this evaluation");
  }
  return std::move(it->second);
}

double finite_diff_check(Graph& graph, const Bindings& point, NodeId root, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw DomainError("finite_diff_check: step h must be positive and finite");
  }
  const NodeId outputs[] = {root};
  const auto eval = graph.forward(point, outputs);
  const auto grads = graph.backward(eval, root);
  auto value_at = [&](const Bindings& b) { return graph.forward(b, outputs).value(root)[0]; };

  double worst = 0.0;
  auto compare = [&](double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  };

  Bindings shifted = point;
  for (const auto& [name, grad] : grads.inputs) {
    Tensor& x = shifted.find(name)->second;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double saved = x[i];
      x[i] = saved + h;
      const double up = value_at(shifted);
      x[i] = saved - h;
      const double down = value_at(shifted);
      x[i] = saved;
      compare(grad[i], (up - down) / (2.0 * h));
    }
  }
  for (const auto& [name, grad] : grads.parameters) {
    Tensor& p = graph.parameter_value(name);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double saved = p[i];
      p[i] = saved + h;
      const double up = value_at(point);
      p[i] = saved - h;
      const double down = value_at(point);
      p[i] = saved;
      compare(grad[i], (up - down) / (2.0 * h));
    }
  }
  return worst;
}

}  // namespace dpn
