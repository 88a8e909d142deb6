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

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>
#include <thread>

#include "dpn/error.hpp"
#include "dpn/model.hpp"

namespace dpn {
namespace {

Bindings bind(std::string name, Tensor value) {
  Bindings b;
  b.emplace(std::move(name), std::move(value));
  return b;
}

TEST(GraphForward, IdentityMatmul) {
  Graph g;
  const auto a = g.constant(Tensor::matrix({{1, 0}, {0, 1}}));
  const auto x = g.input("x");
  const auto y = g.matmul(a, x);
  const auto eval = g.forward(bind("x", Tensor::vector({3, 4})), {y});
  EXPECT_EQ(eval.value(y), Tensor::vector({3, 4}));
}

TEST(GraphForward, Relu) {
  Graph g;
  const auto x = g.input("x");
  const auto y = g.relu(x);
  const auto eval = g.forward(bind("x", Tensor::vector({-1, 0, 2})), {y});
  EXPECT_EQ(eval.value(y), Tensor::vector({0, 0, 2}));
}

TEST(GraphForward, LogSumExpIsShiftStable) {
  Graph g;
  const auto x = g.input("x");
  const auto y = g.log_sum_exp(x);
  const auto eval = g.forward(bind("x", Tensor::vector({1000, 1000})), {y});
  EXPECT_NEAR(eval.value(y)[0], 1000.0 + std::log(2.0), 1e-12);
  EXPECT_NEAR(eval.value(y)[0], 1000.693147, 1e-6);
}

TEST(GraphForward, LogSumExpFiniteForLargeLogits) {
  Graph g;
  const auto x = g.input("x");
  const auto y = g.log_sum_exp(x);
  for (double z : {1e4, -1e4}) {
    const auto eval = g.forward(bind("x", Tensor::vector({z, -z, 0.5 * z})), {y});
    EXPECT_TRUE(std::isfinite(eval.value(y)[0]));
  }
}

TEST(GraphForward, ShapeMismatchNamesTheNode) {
  Graph g;
  const auto a = g.input("a");
  const auto b = g.input("b");
  const auto y = g.matmul(a, b);
  Bindings in = bind("a", Tensor({2, 3}, 1.0));
  in.emplace("b", Tensor({2, 2}, 1.0));
  try {
    g.forward(in, {y});
    FAIL() << "expected a shape error";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("matmul"), std::string::npos) << e.what();
  }
}

TEST(GraphForward, NonFiniteReportsNodeId) {
  Graph g;
  const auto x = g.input("x");
  const auto y = g.log(x);
  try {
    g.forward(bind("x", Tensor::vector({-1.0})), {y});
    FAIL() << "expected a numeric error";
  } catch (const NumericError& e) {
    EXPECT_EQ(e.node(), y.index);
  }
}

TEST(GraphForward, UnboundInputIsAnError) {
  Graph g;
  const auto x = g.input("x");
  const auto y = g.exp(x);
  EXPECT_THROW(g.forward({}, {y}), Error);
}

TEST(GraphForward, DeterministicBitForBit) {
  Model m({.input_dim = 4, .num_classes = 3, .hidden = {16, 16}}, 3);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  Tensor x({8, 4});
  for (auto& v : x.values()) v = u(rng);
  EXPECT_EQ(m.logits(x), m.logits(x));
}

TEST(GraphBackward, Square) {
  Graph g;
  const auto x = g.input("x");
  const auto y = g.sum(g.mul(x, x));
  const auto eval = g.forward(bind("x", Tensor::vector({3})), {y});
  EXPECT_DOUBLE_EQ(g.backward(eval, y).inputs.at("x")[0], 6.0);
}

TEST(GraphBackward, ConstantHasZeroGradient) {
  Graph g;
  const auto x = g.input("x");
  const auto c = g.constant(Tensor::vector({5}));
  const auto y = g.sum(g.add(c, g.scale(x, 0.0)));
  const auto eval = g.forward(bind("x", Tensor::vector({1, 2})), {y});
  EXPECT_EQ(g.backward(eval, y).inputs.at("x"), Tensor::vector({0, 0}));
}

TEST(GraphBackward, RejectsNonScalarRoot) {
  Graph g;
  const auto x = g.input("x");
  const auto y = g.exp(x);
  const auto eval = g.forward(bind("x", Tensor::vector({1, 2})), {y});
  EXPECT_THROW(g.backward(eval, y), ShapeError);
}

TEST(GraphBackward, RejectsUnvisitedRoot) {
  Graph g;
  const auto x = g.input("x");
  const auto y = g.sum(x);
  const auto z = g.sum(g.exp(x));
  const auto eval = g.forward(bind("x", Tensor::vector({1, 2})), {y});
  EXPECT_THROW(g.backward(eval, z), Error);
}

TEST(GradWrtInput, LinearLoss) {
  Graph g;
  const auto x = g.input("x");
  const auto w = g.constant(Tensor::vector({1, -2}));
  const auto loss = g.sum(g.mul(w, x));
  const auto eval = g.forward(bind("x", Tensor::vector({0.3, 0.9})), {loss});
  EXPECT_EQ(g.grad_wrt_input(eval, loss, "x"), Tensor::vector({1, -2}));
}

TEST(GradWrtInput, IndependentLossGivesZeros) {
  Graph g;
  const auto x = g.input("x");
  const auto y = g.input("y");
  const auto loss = g.sum(g.exp(y));
  Bindings b = bind("x", Tensor::vector({1, 2, 3}));
  b.emplace("y", Tensor::vector({0.5}));
  const auto eval = g.forward(b, {loss});
  EXPECT_EQ(g.grad_wrt_input(eval, loss, "x"), Tensor({3}, 0.0));
  EXPECT_THROW(g.grad_wrt_input(eval, loss, "nope"), Error);
}

TEST(GradWrtInput, SoftmaxNllAtUniformLogits) {
  Graph g;
  const auto z = g.input("z");
  const auto t = g.input("t");
  const auto loss = g.sum(g.softmax_nll(z, t));
  Bindings b = bind("z", Tensor::matrix({{0.7, 0.7, 0.7}}));
  b.emplace("t", Tensor::matrix({{1, 0, 0}}));
  const auto eval = g.forward(b, {loss});
  const Tensor grad = g.grad_wrt_input(eval, loss, "z");
  EXPECT_NEAR(grad[0], -2.0 / 3.0, 1e-15);
  EXPECT_NEAR(grad[1], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(grad[2], 1.0 / 3.0, 1e-15);
  EXPECT_LT(finite_diff_check(g, b, loss, 1e-5), 1e-6);
}

TEST(FiniteDiffCheck, QuadraticBowl) {
  Graph g;
  const auto x = g.input("x");
  const auto loss = g.sum(g.mul(x, x));
  EXPECT_LT(finite_diff_check(g, bind("x", Tensor::vector({0, 0, 0})), loss, 1e-5), 1e-8);
}

TEST(FiniteDiffCheck, RandomMlp) {
  Model m({.input_dim = 3, .num_classes = 4, .hidden = {5, 5}}, 11);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  Tensor x({2, 3});
  for (auto& v : x.values()) v = u(rng);
  const std::vector<int> labels{1, 3};
  auto loss = loss_nll(m, x, labels);
  EXPECT_LT(finite_diff_check(m.graph(), loss.bindings, loss.node, 1e-5), 1e-4);
}

TEST(FiniteDiffCheck, RejectsZeroStep) {
  Graph g;
  const auto x = g.input("x");
  const auto loss = g.sum(x);
  EXPECT_THROW(finite_diff_check(g, bind("x", Tensor::vector({1})), loss, 0.0), DomainError);
}

// Builds sum(c * op(x)) for one op kind so that the root is a generic scalar.
struct OpCase {
  const char* name;
  double lo;  // input range
  double hi;
  std::function<NodeId(Graph&, NodeId)> build;
};

class OpGradient : public ::testing::TestWithParam<OpCase> {};

TEST_P(OpGradient, MatchesFiniteDifferencesOn100Seeds) {
  const OpCase& op = GetParam();
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(op.lo, op.hi);
    std::uniform_real_distribution<double> w(-1, 1);
    Graph g;
    const auto x = g.input("x");
    const auto y = op.build(g, x);
    Tensor xv({2, 3});
    for (auto& v : xv.values()) v = u(rng);
    const auto probe = g.forward(bind("x", xv), {y});
    Tensor c(probe.value(y).shape());
    for (auto& v : c.values()) v = w(rng);
    const auto root = g.sum(g.mul(g.constant(c), y));
    const double err = finite_diff_check(g, bind("x", xv), root, 1e-5);
    ASSERT_LT(err, 1e-4) << op.name << " seed " << seed;
  }
}

Tensor fixed_matrix() { return Tensor::matrix({{0.3, -1.2}, {0.8, 0.1}, {-0.5, 0.9}}); }

INSTANTIATE_TEST_SUITE_P(
    AllOps, OpGradient,
    ::testing::Values(
        OpCase{"matmul", -1, 1, [](Graph& g, NodeId x) { return g.matmul(x, g.constant(fixed_matrix())); }},
        OpCase{"matmul_param", -1, 1,
               [](Graph& g, NodeId x) { return g.matmul(x, g.parameter("w", fixed_matrix())); }},
        OpCase{"add_broadcast", -1, 1,
               [](Graph& g, NodeId x) { return g.add(x, g.parameter("b", Tensor::vector({1, 2, 3}))); }},
        OpCase{"sub", -1, 1, [](Graph& g, NodeId x) { return g.sub(g.exp(x), x); }},
        OpCase{"mul_self", -1, 1, [](Graph& g, NodeId x) { return g.mul(x, x); }},
        OpCase{"mul_broadcast_column", -1, 1,
               [](Graph& g, NodeId x) { return g.mul(x, g.row_sum(x)); }},
        OpCase{"scale", -1, 1, [](Graph& g, NodeId x) { return g.scale(x, -2.5); }},
        OpCase{"exp", -2, 2, [](Graph& g, NodeId x) { return g.exp(x); }},
        OpCase{"log", 0.1, 3, [](Graph& g, NodeId x) { return g.log(x); }},
        OpCase{"relu", 0.05, 1, [](Graph& g, NodeId x) { return g.relu(g.sub(x, g.constant(Tensor::vector({0.5, 0.0, 2.0})))); }},
        OpCase{"leaky_relu", -1, 1, [](Graph& g, NodeId x) { return g.leaky_relu(g.scale(x, 3.0), 0.1); }},
        OpCase{"clamp", -0.9, 0.9, [](Graph& g, NodeId x) { return g.clamp(g.scale(x, 3.0), -1.0, 1.0); }},
        OpCase{"log_sum_exp", -3, 3, [](Graph& g, NodeId x) { return g.log_sum_exp(x); }},
        OpCase{"softmax_nll", -3, 3,
               [](Graph& g, NodeId x) {
                 return g.softmax_nll(x, g.constant(Tensor::matrix({{0, 1, 0}, {0.2, 0.3, 0.5}})));
               }},
        OpCase{"sum", -1, 1, [](Graph& g, NodeId x) { return g.sum(g.mul(x, x)); }},
        OpCase{"mean", -1, 1, [](Graph& g, NodeId x) { return g.mean(g.exp(x)); }},
        OpCase{"row_sum", -1, 1, [](Graph& g, NodeId x) { return g.row_sum(g.mul(x, x)); }},
        OpCase{"digamma", 0.2, 20, [](Graph& g, NodeId x) { return g.digamma(x); }},
        OpCase{"lgamma", 0.2, 20, [](Graph& g, NodeId x) { return g.lgamma(x); }}),
    [](const ::testing::TestParamInfo<OpCase>& info) { return std::string(info.param.name); });

TEST(GraphBackward, GradientOfSumIsSumOfGradients) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.2, 2.0);
    Graph g;
    const auto x = g.input("x");
    const auto f = g.sum(g.lgamma(x));
    const auto h = g.sum(g.mul(g.exp(x), x));
    const auto both = g.add(f, h);
    Tensor xv({4});
    for (auto& v : xv.values()) v = u(rng);
    const auto eval = g.forward(bind("x", xv), {f, h, both});
    const Tensor gf = g.grad_wrt_input(eval, f, "x");
    const Tensor gh = g.grad_wrt_input(eval, h, "x");
    const Tensor gb = g.grad_wrt_input(eval, both, "x");
    for (std::size_t i = 0; i < xv.size(); ++i) {
      EXPECT_NEAR(gb[i], gf[i] + gh[i], 1e-12 * (1.0 + std::abs(gb[i])));
    }
  }
}

TEST(GraphDropout, IdentityAtEvaluationAndScaledWhenTraining) {
  Graph g;
  const auto x = g.input("x");
  const auto y = g.dropout(x, 0.5);
  const Tensor xv({1, 1000}, 1.0);
  EXPECT_EQ(g.forward(bind("x", xv), {y}).value(y), xv);
  std::mt19937_64 rng(3);
  const auto eval = g.forward(bind("x", xv), {y}, {.training = true, .rng = &rng});
  std::size_t kept = 0;
  for (double v : eval.value(y).values()) {
    ASSERT_TRUE(v == 0.0 || v == 2.0);
    kept += v == 2.0;
  }
  EXPECT_NEAR(static_cast<double>(kept) / 1000.0, 0.5, 0.06);
  // The backward pass reuses the forward mask.
  const auto root = g.sum(y);
  const auto e2 = g.forward(bind("x", xv), {root}, {.training = true, .rng = &rng});
  const Tensor grad = g.grad_wrt_input(e2, root, "x");
  for (std::size_t i = 0; i < grad.size(); ++i) EXPECT_EQ(grad[i], e2.value(y)[i]);
}

TEST(GraphConcurrency, ReadOnlyEvaluationFromManyThreads) {
  const Model m({.input_dim = 6, .num_classes = 4, .hidden = {32, 32}}, 5);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  Tensor x({64, 6});
  for (auto& v : x.values()) v = u(rng);
  const Tensor expected = m.alpha(x);
  std::vector<int> ok(8, 0);
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      bool all = true;
      for (int rep = 0; rep < 50; ++rep) all = all && m.alpha(x) == expected;
      auto loss = loss_nll(m, x, std::vector<int>(64, t % 4));
      all = all && std::isfinite(loss.evaluate().value);
      ok[t] = all;
    });
  }
  for (auto& t : threads) t.join();
  for (int v : ok) EXPECT_TRUE(v);
}

}  // namespace
}  // namespace dpn
