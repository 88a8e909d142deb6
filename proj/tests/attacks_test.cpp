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

#include "dpn/attacks.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "dpn/data.hpp"
#include "dpn/error.hpp"
#include "dpn/training.hpp"

namespace dpn {
namespace {

LossGradFn linear_loss(std::vector<double> w) {
  return [w](const Tensor& x) {
    LossAndGrad out;
    for (std::size_t i = 0; i < w.size(); ++i) out.value += w[i] * x[i];
    out.grad = Tensor(x.shape(), w);
    return out;
  };
}

// Trained 3-class toy models shared by the directional tests.
struct Toy {
  SyntheticData data;
  Model dnn;
  Model pn;
};

const Toy& toy() {
  static const Toy instance = [] {
    SyntheticSpec spec = SyntheticSpec::three_class_default();
    spec.points_per_class = 200;
    spec.test_per_class = 100;
    spec.seed = 3;
    Toy t{gen_synthetic(spec), Model({.input_dim = 10, .num_classes = 3, .hidden = {32, 32},
                                      .head = HeadKind::kSoftmax},
                                     1),
          Model({.input_dim = 10, .num_classes = 3, .hidden = {32, 32}}, 2)};
    TrainConfig cfg;
    cfg.epochs = 15;
    cfg.cycle_length = 10;
    cfg.eta0 = 3e-3;
    cfg.batch_size = 32;
    train_standard(t.dnn, t.data.split, cfg, TrainObjective::kDnnNll);
    train_standard(t.pn, t.data.split, cfg, TrainObjective::kPnRkl);
    return t;
  }();
  return instance;
}

// A Prior Network trained against FGSM attacks, the setting adaptive attacks
// are designed for.
const Model& adversarial_pn() {
  static const Model instance = [] {
    Model m({.input_dim = 10, .num_classes = 3, .hidden = {32, 32}}, 2);
    TrainConfig cfg;
    cfg.epochs = 40;
    cfg.cycle_length = 30;
    cfg.eta0 = 3e-3;
    cfg.batch_size = 32;
    cfg.gamma = 30.0;
    cfg.ood_source = OodSource::fgsm_adv();
    train_pn_adversarial(m, toy().data.split, cfg);
    return m;
  }();
  return instance;
}

TEST(SelectTargetClass, TwoClassesAlwaysTheOther) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(select_target_class(rng, 0, 2), 1);
  EXPECT_THROW(select_target_class(rng, 0, 1), DomainError);
  EXPECT_THROW(select_target_class(rng, 3, 3), DomainError);
}

TEST(SelectTargetClass, UniformOverOtherClasses) {
  std::mt19937_64 rng(2);
  std::map<int, int> counts;
  constexpr int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[select_target_class(rng, 3, 10)];
  EXPECT_EQ(counts.count(3), 0u);
  EXPECT_EQ(counts.size(), 9u);
  double chi2 = 0;
  for (const auto& [k, c] : counts) {
    EXPECT_NEAR(static_cast<double>(c) / n, 1.0 / 9.0, 0.01);
    const double e = n / 9.0;
    chi2 += (c - e) * (c - e) / e;
  }
  EXPECT_LT(chi2, 26.12);  // chi-square 8 dof, p = 0.001
}

TEST(SelectTargetClass, NeverTheTrueLabel) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000000; ++i) ASSERT_NE(select_target_class(rng, i % 5, 5), i % 5);
}

TEST(SampleEpsilon, HalfNormalMoments) {
  std::mt19937_64 rng(4);
  constexpr int n = 1000000;
  const double sigma = kEpsilonSigma;
  EXPECT_DOUBLE_EQ(sigma, 30.0 / 128.0);
  double sum = 0, sum2 = 0;
  for (int i = 0; i < n; ++i) {
    const double e = sample_epsilon(rng);
    ASSERT_GT(e, 0.0);
    sum += e;
    sum2 += e * e;
  }
  const double mean = sum / n;
  const double mu = sigma * std::sqrt(2.0 / std::numbers::pi);
  const double s = sigma * std::sqrt(1.0 - 2.0 / std::numbers::pi);
  EXPECT_NEAR(mean, mu, 3 * s / std::sqrt(n));
  // E[e^2] = sigma^2 with Var[e^2] = 2 sigma^4.
  EXPECT_NEAR(sum2 / n, sigma * sigma, 3 * sigma * sigma * std::sqrt(2.0 / n));
  EXPECT_THROW(sample_epsilon(rng, 0.0), DomainError);
}

TEST(Fgsm, ZeroEpsilonIsIdentity) {
  const Tensor x = Tensor::vector({0.2, 0.9});
  EXPECT_EQ(fgsm(linear_loss({1, -1}), x, 0.0).x_adv, x);
}

TEST(Fgsm, LinearLoss) {
  const auto r = fgsm(linear_loss({2, -3}), Tensor::vector({0.5, 0.5}), 0.1);
  EXPECT_DOUBLE_EQ(r.x_adv[0], 0.4);
  EXPECT_DOUBLE_EQ(r.x_adv[1], 0.6);
  EXPECT_DOUBLE_EQ(r.achieved_delta, 0.1);
}

TEST(Fgsm, SignOfZeroIsZero) {
  const auto r = fgsm(linear_loss({0, 1}), Tensor::vector({0.5, 0.5}), 0.1);
  EXPECT_EQ(r.x_adv[0], 0.5);
}

TEST(Fgsm, ClipsToDomain) {
  const auto r = fgsm(linear_loss({-1, 1}), Tensor::vector({0.95, 0.02}), 0.1);
  EXPECT_EQ(r.x_adv[0], 1.0);
  EXPECT_EQ(r.x_adv[1], 0.0);
}

TEST(Fgsm, DecreasesTargetLossOnTrainedModel) {
  const auto& t = toy();
  std::mt19937_64 rng(5);
  int decreased = 0;
  for (std::size_t i = 0; i < 100; ++i) {
    const Tensor x = t.data.split.test.x.gather_rows(std::vector<std::size_t>{i});
    const int target = select_target_class(rng, t.data.split.test.labels[i], 3);
    const auto objective = attack_objective(t.dnn, target, LossKind::kNllTarget, true, {});
    AttackConfig cfg;
    cfg.epsilon = 1e-3;
    const auto r = fgsm(t.dnn, x, target, cfg);
    decreased += objective(r.x_adv).value < objective(x).value;
  }
  EXPECT_EQ(decreased, 100);
}

TEST(Fgm, L2UnitDirection) {
  const auto r = fgm(linear_loss({3, 4}), Tensor::vector({0.5, 0.5}), 1.0, Norm::kL2);
  // 0.5 - 0.6 and 0.5 - 0.8 leave the box and are clipped.
  EXPECT_EQ(r.x_adv[0], 0.0);
  EXPECT_EQ(r.x_adv[1], 0.0);
  const auto inner = fgm(linear_loss({3, 4}), Tensor::vector({0.5, 0.5}), 0.1, Norm::kL2);
  EXPECT_NEAR(inner.x_adv[0], 0.44, 1e-15);
  EXPECT_NEAR(inner.x_adv[1], 0.42, 1e-15);
}

TEST(Fgm, InfinityNormMatchesFgsmExactly) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0, 1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> w(5), xv(5);
    for (auto& v : w) v = n(rng);
    for (auto& v : xv) v = u(rng);
    const Tensor x = Tensor::vector(xv);
    EXPECT_EQ(fgm(linear_loss(w), x, 0.05, Norm::kLinf).x_adv, fgsm(linear_loss(w), x, 0.05).x_adv);
  }
}

TEST(Fgm, AchievesEpsilonOnInteriorPoints) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0, 1);
  for (Norm p : {Norm::kL1, Norm::kL2, Norm::kLinf}) {
    for (int i = 0; i < 50; ++i) {
      std::vector<double> w(4);
      for (auto& v : w) v = n(rng);
      const Tensor x({4}, 0.5);
      const auto r = fgm(linear_loss(w), x, 0.05, p);
      EXPECT_NEAR(r.achieved_delta, 0.05, 1e-15);
    }
  }
}

TEST(Fgm, ZeroGradientIsAnError) {
  EXPECT_THROW(fgm(linear_loss({0, 0}), Tensor::vector({0.5, 0.5}), 0.1, Norm::kL2), NumericError);
}

TEST(ProjectLp, InsideBallUnchanged) {
  const Tensor x0 = Tensor::vector({0.5, 0.5});
  const Tensor x = Tensor::vector({0.52, 0.49});
  for (Norm p : {Norm::kL1, Norm::kL2, Norm::kLinf}) EXPECT_EQ(project_lp(x0, x, 0.1, p), x);
}

TEST(ProjectLp, InfinityClamp) {
  EXPECT_DOUBLE_EQ(project_lp(Tensor::vector({0.5}), Tensor::vector({0.9}), 0.1, Norm::kLinf)[0], 0.6);
}

TEST(ProjectLp, L2RadialRescale) {
  const Tensor x0 = Tensor::vector({0.5, 0.5});
  const Tensor x = Tensor::vector({0.5 + 0.12, 0.5 + 0.16});  // norm 0.2 = 2 eps
  const Tensor p = project_lp(x0, x, 0.1, Norm::kL2);
  EXPECT_NEAR(lp_distance(p, x0, Norm::kL2), 0.1, 1e-15);
  EXPECT_NEAR(p[0], 0.56, 1e-15);
  EXPECT_NEAR(p[1], 0.58, 1e-15);
}

TEST(ProjectLp, L1IsEuclideanProjection) {
  // Brute-force check: the projection is no farther from x than random
  // feasible points.
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  const Tensor x0({4}, 0.5);
  for (int t = 0; t < 50; ++t) {
    Tensor x({4});
    for (auto& v : x.values()) v = 0.5 + u(rng);
    const Tensor p = project_lp(x0, x, 0.1, Norm::kL1);
    EXPECT_LE(lp_distance(p, x0, Norm::kL1), 0.1 + 1e-12);
    const double dp = lp_distance(p, x, Norm::kL2);
    for (int s = 0; s < 200; ++s) {
      Tensor q({4});
      double l1 = 0;
      for (auto& v : q.values()) {
        v = u(rng);
        l1 += std::abs(v);
      }
      for (std::size_t i = 0; i < 4; ++i) q[i] = 0.5 + q[i] * std::min(1.0, 0.1 / l1);
      EXPECT_LE(dp, lp_distance(q, x, Norm::kL2) + 1e-12);
    }
  }
}

TEST(ProjectLp, ShapeMismatch) {
  EXPECT_THROW(project_lp(Tensor::vector({0.5}), Tensor::vector({0.5, 0.5}), 0.1, Norm::kL2),
               ShapeError);
}

TEST(IterativeAttack, OneStepEqualsFgsm) {
  const auto& t = toy();
  for (std::size_t i = 0; i < 50; ++i) {
    const Tensor x = t.data.split.test.x.gather_rows(std::vector<std::size_t>{i});
    AttackConfig cfg;
    cfg.epsilon = 0.05 + 0.01 * static_cast<double>(i % 7);
    cfg.steps = 1;
    cfg.momentum_decay = 0.0;
    cfg.step_size = cfg.epsilon;
    EXPECT_EQ(iterative_attack(t.pn, x, 1, cfg).x_adv, fgsm(t.pn, x, 1, cfg).x_adv);
  }
}

TEST(IterativeAttack, EveryIterateInsideTheBall) {
  const auto& t = toy();
  const auto fn = attack_objective(t.dnn, 2, LossKind::kNllTarget, true, {});
  const Tensor x = t.data.split.test.x.gather_rows(std::vector<std::size_t>{0});
  for (int steps = 1; steps <= 20; ++steps) {
    AttackConfig cfg;
    cfg.epsilon = 0.1;
    cfg.steps = steps;
    cfg.step_size = 0.05;
    const auto r = iterative_attack(fn, x, cfg);
    EXPECT_LE(lp_distance(r.x_adv, x, Norm::kLinf), 0.1 + 1e-12);
  }
}

TEST(IterativeAttack, MomentumBeatsSingleStep) {
  const auto& t = toy();
  std::mt19937_64 rng(9);
  int wins = 0;
  const std::size_t n = 200;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t row = i % t.data.split.test.size();
    const Tensor x = t.data.split.test.x.gather_rows(std::vector<std::size_t>{row});
    const int target = select_target_class(rng, t.data.split.test.labels[row], 3);
    const auto objective = attack_objective(t.dnn, target, LossKind::kNllTarget, true, {});
    AttackConfig cfg;
    cfg.epsilon = 0.1;
    cfg.steps = 10;
    cfg.momentum_decay = 1.0;
    const double mim = objective(iterative_attack(t.dnn, x, target, cfg).x_adv).value;
    const double one = objective(fgsm(t.dnn, x, target, cfg).x_adv).value;
    wins += mim <= one;
  }
  EXPECT_GE(wins, static_cast<int>(0.8 * n)) << wins << " of " << n;
}

TEST(IterativeAttack, StallsOnZeroGradient) {
  AttackConfig cfg;
  const auto r = iterative_attack(linear_loss({0, 0}), Tensor::vector({0.5, 0.5}), cfg);
  EXPECT_TRUE(r.stalled);
  EXPECT_EQ(r.steps_taken, 0);
}

TEST(SoftConstraintAttack, HugeWeightPinsTheInput) {
  const auto& t = toy();
  const Tensor x = t.data.split.test.x.gather_rows(std::vector<std::size_t>{3});
  AttackConfig cfg;
  cfg.soft_c = 1e6;
  cfg.steps = 100;
  cfg.step_size = 0.01;
  EXPECT_LT(soft_constraint_attack(t.dnn, x, 1, cfg).achieved_delta, 1e-3);
}

TEST(SoftConstraintAttack, ZeroWeightIsPlainLossMinimization) {
  const auto loss = linear_loss({1, -2});
  AttackConfig cfg;
  cfg.soft_c = 0.0;
  cfg.steps = 5;
  cfg.step_size = 0.01;
  const Tensor x = Tensor::vector({0.5, 0.5});
  const auto r = soft_constraint_attack(loss, x, cfg);
  // With c = 0 the objective of the returned point is the plain loss.
  EXPECT_DOUBLE_EQ(r.objective_trace.back(), loss(r.x_adv).value);
  EXPECT_NEAR(r.x_adv[0], 0.45, 1e-12);
  EXPECT_NEAR(r.x_adv[1], 0.6, 1e-12);
}

TEST(SoftConstraintAttack, ObjectiveNeverIncreases) {
  const auto& t = toy();
  const Tensor x = t.data.split.test.x.gather_rows(std::vector<std::size_t>{5});
  AttackConfig cfg;
  cfg.soft_c = 0.5;
  cfg.steps = 60;
  cfg.step_size = 0.02;
  const auto r = soft_constraint_attack(t.dnn, x, 2, cfg);
  for (std::size_t i = 1; i < r.objective_trace.size(); ++i) {
    EXPECT_LE(r.objective_trace[i], r.objective_trace[i - 1]);
  }
}

TEST(AdaptiveAttackLoss, ZeroAtTheConfidentTarget) {
  Model m({.input_dim = 2, .num_classes = 3, .hidden = {}}, 0);
  m.graph().parameter_value("layer0.weight") = Tensor({2, 3}, 0.0);
  m.graph().parameter_value("layer0.bias") = Tensor::vector({std::log(101.0), 0, 0});
  const Tensor x({1, 2}, 0.5);
  EXPECT_NEAR(adaptive_attack_loss(m, x, 0, {100.0, 1.0, 3}).value(), 0.0, 1e-12);
  // Zero weights: no input gradient, so the attack cannot move.
  const auto fn = attack_objective(m, 0, LossKind::kRklTargetDirichlet, true, {100.0, 1.0, 3});
  AttackConfig cfg;
  EXPECT_TRUE(iterative_attack(fn, x, cfg).stalled);
}

TEST(AdaptiveAttackLoss, GradientMatchesFiniteDifferences) {
  Model m({.input_dim = 4, .num_classes = 3, .hidden = {6}}, 3);
  const Tensor x({1, 4}, {0.1, 0.6, 0.3, 0.9});
  const auto loss = adaptive_attack_loss(m, x, 2, {100.0, 1.0, 3});
  EXPECT_LT(finite_diff_check(m.graph(), loss.bindings, loss.node, 1e-5), 1e-4);
}

TEST(AdaptiveAttackLoss, LowersMutualInformationMoreThanNllAttack) {
  const auto& t = toy();
  const Model& pn = adversarial_pn();
  std::mt19937_64 rng(10);
  int lower = 0;
  const std::size_t n = t.data.split.test.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Tensor x = t.data.split.test.x.gather_rows(std::vector<std::size_t>{i});
    const int target = select_target_class(rng, t.data.split.test.labels[i], 3);
    AttackConfig cfg;
    cfg.epsilon = 0.3;
    cfg.steps = 30;
    cfg.loss_kind = LossKind::kRklTargetDirichlet;
    const auto adaptive = iterative_attack(pn, x, target, cfg);
    cfg.loss_kind = LossKind::kNllTarget;
    const auto nll = iterative_attack(pn, x, target, cfg);
    const double mi_a = mutual_information(forward_alpha(pn, adaptive.x_adv)[0]);
    const double mi_n = mutual_information(forward_alpha(pn, nll.x_adv)[0]);
    lower += mi_a < mi_n;
  }
  EXPECT_GE(lower, static_cast<int>(0.7 * n)) << lower << " of " << n;
}

TEST(Attacks, DeterministicForFixedInputs) {
  const auto& t = toy();
  const Tensor x = t.data.split.test.x.gather_rows(std::vector<std::size_t>{7});
  AttackConfig cfg;
  cfg.norm = Norm::kL2;
  cfg.epsilon = 0.2;
  EXPECT_EQ(iterative_attack(t.pn, x, 0, cfg).x_adv, iterative_attack(t.pn, x, 0, cfg).x_adv);
}

TEST(AttackConfig, Validation) {
  AttackConfig cfg;
  cfg.steps = 0;
  EXPECT_THROW(cfg.validate(), DomainError);
  cfg = {};
  cfg.epsilon = -1;
  EXPECT_THROW(cfg.validate(), DomainError);
  cfg = {};
  cfg.soft_c = NAN;
  EXPECT_THROW(cfg.validate(), DomainError);
  EXPECT_EQ(parse_norm("inf"), Norm::kLinf);
  EXPECT_EQ(parse_norm("1"), Norm::kL1);
  EXPECT_THROW(parse_norm("3"), FormatError);
}

}  // namespace
}  // namespace dpn
