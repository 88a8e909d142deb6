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

#include "dpn/training.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "dpn/augment.hpp"
#include "dpn/detection.hpp"
#include "dpn/error.hpp"

namespace dpn {
namespace {

TrainConfig small_config(int epochs = 20) {
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.cycle_length = std::max(1, epochs / 2);
  cfg.eta0 = 3e-3;
  cfg.batch_size = 32;
  cfg.seed = 1;
  return cfg;
}

// Two well separated 2D Gaussian blobs in the unit square.
DatasetSplit blobs(std::size_t per_class, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.05);
  DatasetSplit d;
  d.num_classes = 2;
  d.sample_shape = {2};
  auto fill = [&](LabeledSet& set) {
    set.x = Tensor({2 * per_class, 2});
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
      const int label = static_cast<int>(i % 2);
      const double c = label == 0 ? 0.25 : 0.75;
      set.x.at(i, 0) = c + noise(rng);
      set.x.at(i, 1) = c + noise(rng);
      set.labels.push_back(label);
    }
  };
  fill(d.train);
  fill(d.valid);
  fill(d.test);
  return d;
}

const SyntheticData& toy_data() {
  static const SyntheticData data = [] {
    SyntheticSpec spec = SyntheticSpec::three_class_default();
    spec.points_per_class = 200;
    spec.valid_per_class = 50;
    spec.test_per_class = 100;
    spec.ood_points = 300;
    spec.seed = 11;
    return gen_synthetic(spec);
  }();
  return data;
}

ModelSpec toy_spec(HeadKind head) {
  return {.input_dim = 10, .num_classes = 3, .hidden = {32, 32}, .head = head};
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// ---- learning-rate schedule -------------------------------------------------

TEST(OneCycleLr, Endpoints) {
  TrainConfig cfg;
  cfg.eta0 = 1e-3;
  cfg.epochs = 20;
  cfg.cycle_length = 10;
  EXPECT_DOUBLE_EQ(one_cycle_lr(0, cfg), 1e-4);
  EXPECT_DOUBLE_EQ(one_cycle_lr(5, cfg), 1e-3);
  EXPECT_DOUBLE_EQ(one_cycle_lr(10, cfg), 1e-4);
  EXPECT_DOUBLE_EQ(one_cycle_lr(20, cfg), 1e-5);
  EXPECT_DOUBLE_EQ(one_cycle_lr(2.5, cfg), 0.55e-3);
  EXPECT_DOUBLE_EQ(one_cycle_lr(15, cfg), 0.55e-4);
}

TEST(OneCycleLr, CycleSpanningTheRun) {
  TrainConfig cfg;
  cfg.eta0 = 1e-2;
  cfg.epochs = 10;
  cfg.cycle_length = 10;
  EXPECT_DOUBLE_EQ(one_cycle_lr(5, cfg), 1e-2);
  EXPECT_NEAR(one_cycle_lr(10, cfg), 1e-4, 1e-18);
}

TEST(OneCycleLr, ContinuousAndNonNegative) {
  for (const auto& [epochs, cycle] : std::vector<std::pair<int, int>>{{20, 10}, {7, 3}, {10, 10}}) {
    TrainConfig cfg;
    cfg.eta0 = 1e-3;
    cfg.epochs = epochs;
    cfg.cycle_length = cycle;
    // Steepest segment: eta0 down to eta0 / 100 over half a cycle.
    const double h = 1e-4;
    const double max_jump = 2.0 * 0.99 * cfg.eta0 / cycle * h * (1 + 1e-9);
    double prev = one_cycle_lr(0, cfg);
    for (double t = h; t <= epochs; t += h) {
      const double lr = one_cycle_lr(t, cfg);
      ASSERT_GT(lr, 0.0);
      ASSERT_LE(std::abs(lr - prev), max_jump + 1e-18) << "at " << t;
      prev = lr;
    }
  }
}

TEST(OneCycleLr, OutOfRange) {
  TrainConfig cfg;
  EXPECT_THROW(one_cycle_lr(-0.1, cfg), DomainError);
  EXPECT_THROW(one_cycle_lr(cfg.epochs + 0.1, cfg), DomainError);
  EXPECT_THROW(one_cycle_lr(NAN, cfg), DomainError);
}

// ---- optimizer ----------------------------------------------------------------

TEST(Adam, FirstStepHasUnitScale) {
  Graph g;
  g.parameter("w", Tensor::vector({1.0, -2.0, 0.5}));
  Adam adam;
  std::map<std::string, Tensor, std::less<>> grads{{"w", Tensor::vector({4.0, -0.01, 0.0})}};
  adam.step(g, grads, 0.1);
  const Tensor& w = g.parameter_value("w");
  EXPECT_NEAR(w[0], 1.0 - 0.1, 1e-9);
  EXPECT_NEAR(w[1], -2.0 + 0.1, 1e-6);
  EXPECT_EQ(w[2], 0.5);
  EXPECT_EQ(adam.steps(), 1);
}

TEST(Adam, MinimizesAQuadratic) {
  Graph g;
  g.parameter("w", Tensor::vector({3.0}));
  Adam adam;
  for (int i = 0; i < 2000; ++i) {
    const double w = g.parameter_value("w")[0];
    adam.step(g, {{"w", Tensor::vector({2.0 * (w - 1.0)})}}, 0.01);
  }
  EXPECT_NEAR(g.parameter_value("w")[0], 1.0, 1e-3);
}

TEST(Adam, UnknownParameter) {
  Graph g;
  g.parameter("w", Tensor::vector({3.0}));
  Adam adam;
  EXPECT_THROW(adam.step(g, {{"v", Tensor::vector({1.0})}}, 0.01), Error);
}

// ---- standard training --------------------------------------------------------

TEST(TrainStandard, SeparableBlobs) {
  const auto data = blobs(100, 3);
  Model m({.input_dim = 2, .num_classes = 2, .hidden = {16}, .head = HeadKind::kSoftmax}, 4);
  auto cfg = small_config(20);
  cfg.eta0 = 1e-2;
  const auto history = train_standard(m, data, cfg, TrainObjective::kDnnNll);
  ASSERT_EQ(history.epochs.size(), 20u);
  EXPECT_GE(accuracy(m, data.train), 0.99);
  EXPECT_GE(history.epochs.back().train_acc, 0.99);
  EXPECT_LT(history.epochs.back().train_loss, history.epochs.front().train_loss);
}

TEST(TrainStandard, BitIdenticalUnderFixedSeed) {
  const auto& data = toy_data();
  auto cfg = small_config(4);
  cfg.seed = 7;
  cfg.dropout_keep = 0.8;
  cfg.gamma = 1.0;
  TrainOptions opt;
  opt.ood_x = &data.ood;
  auto run = [&] {
    Model m({.input_dim = 10, .num_classes = 3, .hidden = {32, 32}, .dropout_keep = 0.8}, 7);
    auto h = train_standard(m, data.split, cfg, TrainObjective::kPnRkl, opt);
    return std::make_pair(m.parameters(), h);
  };
  const auto [p1, h1] = run();
  const auto [p2, h2] = run();
  EXPECT_EQ(p1, p2);
  EXPECT_EQ(h1.batch_losses, h2.batch_losses);
  EXPECT_EQ(h1.to_csv(), h2.to_csv());
}

TEST(TrainStandard, DifferentSeedsDiffer) {
  const auto data = blobs(50, 3);
  auto cfg = small_config(2);
  Model a({.input_dim = 2, .num_classes = 2, .hidden = {8}}, 1);
  Model b = a;
  train_standard(a, data, cfg, TrainObjective::kPnKl);
  cfg.seed = 2;
  train_standard(b, data, cfg, TrainObjective::kPnKl);
  EXPECT_NE(a.parameters(), b.parameters());
}

// Out-of-domain points on a ring drawn independently of the training ring.
Tensor fresh_ring() {
  SyntheticSpec spec = SyntheticSpec::three_class_default();
  spec.points_per_class = 1;
  spec.ood_points = 300;
  spec.seed = 12;
  return gen_synthetic(spec).ood;
}

TEST(TrainStandard, WithoutOodDataConcentrationGrowsOffTheData) {
  // A ReLU network extrapolates its logits, so a Prior Network trained on
  // in-domain data alone is more concentrated far from the data. This is
  // the motivation for the out-of-domain term.
  const auto& data = toy_data();
  Model m(toy_spec(HeadKind::kDirichlet), 5);
  auto cfg = small_config(30);
  cfg.eta0 = 1e-2;
  train_standard(m, data.split, cfg, TrainObjective::kPnRkl);
  EXPECT_LT(auroc(uncertainty_scores(m, fresh_ring(), Measure::kAlpha0),
                  uncertainty_scores(m, data.split.test.x, Measure::kAlpha0)),
            0.5);
}

struct OodCase {
  TrainObjective objective;
  double gamma;
  double eta0;
  int epochs;
};

class TrainWithOod : public ::testing::TestWithParam<OodCase> {};

TEST_P(TrainWithOod, PriorNetworkIsMoreConcentratedInDomain) {
  const auto& data = toy_data();
  const auto& c = GetParam();
  Model m(toy_spec(HeadKind::kDirichlet), 5);
  auto cfg = small_config(c.epochs);
  cfg.beta_in = 100.0;
  cfg.gamma = c.gamma;
  cfg.eta0 = c.eta0;
  TrainOptions opt;
  opt.ood_x = &data.ood;
  const auto history = train_standard(m, data.split, cfg, c.objective, opt);
  const Tensor ring = fresh_ring();
  const auto in_scores = uncertainty_scores(m, data.split.test.x, Measure::kAlpha0);
  const auto ring_scores = uncertainty_scores(m, ring, Measure::kAlpha0);
  EXPECT_GT(history.epochs.back().mean_alpha0_in, history.epochs.back().mean_alpha0_ood);
  EXPECT_GT(-mean_of(in_scores), -mean_of(ring_scores));
  EXPECT_GE(auroc(ring_scores, in_scores), 0.95);
  EXPECT_GE(accuracy(m, data.split.test), 0.95);
}

INSTANTIATE_TEST_SUITE_P(Objectives, TrainWithOod,
                         ::testing::Values(OodCase{TrainObjective::kPnRkl, 10.0, 1e-2, 30},
                                           OodCase{TrainObjective::kPnKl, 1.0, 3e-2, 60}),
                         [](const auto& info) {
                           return std::string(objective_name(info.param.objective) == "pn_kl"
                                                  ? "ForwardKl"
                                                  : "ReverseKl");
                         });

TEST(TrainStandard, Errors) {
  const auto& data = toy_data();
  auto cfg = small_config(1);
  Model dnn(toy_spec(HeadKind::kSoftmax), 1);
  Model pn(toy_spec(HeadKind::kDirichlet), 1);
  cfg.gamma = 1.0;
  EXPECT_THROW(train_standard(dnn, data.split, cfg, TrainObjective::kDnnNll), DomainError);
  EXPECT_THROW(train_standard(pn, data.split, cfg, TrainObjective::kPnRkl), DomainError);
  cfg.gamma = 0.0;
  Model wrong({.input_dim = 3, .num_classes = 3, .hidden = {4}}, 1);
  EXPECT_THROW(train_standard(wrong, data.split, cfg, TrainObjective::kPnRkl), ShapeError);
  DatasetSplit empty = data.split;
  empty.train = {Tensor(), {}};
  EXPECT_THROW(train_standard(pn, empty, cfg, TrainObjective::kPnRkl), Error);
  cfg.cycle_length = cfg.epochs + 1;
  EXPECT_THROW(train_standard(pn, data.split, cfg, TrainObjective::kPnRkl), FormatError);
}

TEST(TrainStandard, NonFiniteLossAborts) {
  auto data = blobs(20, 1);
  data.train.x.at(5, 0) = std::numeric_limits<double>::infinity();
  Model m({.input_dim = 2, .num_classes = 2, .hidden = {8}, .head = HeadKind::kSoftmax}, 1);
  try {
    train_standard(m, data, small_config(3), TrainObjective::kDnnNll);
    FAIL() << "expected TrainingAborted";
  } catch (const TrainingAborted& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 0"), std::string::npos) << e.what();
    EXPECT_TRUE(e.history().epochs.empty());
  }
}

TEST(TrainHistory, CsvLayout) {
  TrainHistory h;
  h.epochs.push_back({0, 1e-4, 0.5, 0.75, 0.5, 10.0, NAN});
  const std::string csv = h.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "epoch,lr,train_loss,train_acc,valid_acc,mean_alpha0_in,mean_alpha0_ood");
  EXPECT_NE(csv.find("\n0,"), std::string::npos);
}

// ---- adversarial training -----------------------------------------------------

TEST(TrainDnnAdversarial, RequiresAdversarialSource) {
  const auto data = blobs(20, 1);
  Model m({.input_dim = 2, .num_classes = 2, .hidden = {8}, .head = HeadKind::kSoftmax}, 1);
  EXPECT_THROW(train_dnn_adversarial(m, data, small_config(1)), DomainError);
  EXPECT_THROW(train_pn_adversarial(m, data, small_config(1)), DomainError);
}

TEST(TrainDnnAdversarial, ZeroEpsilonMatchesStandardTraining) {
  const auto& data = toy_data();
  auto cfg = small_config(3);
  Model standard(toy_spec(HeadKind::kSoftmax), 3);
  Model adversarial = standard;
  const auto hs = train_standard(standard, data.split, cfg, TrainObjective::kDnnNll);
  cfg.ood_source = OodSource::fgsm_adv();
  TrainOptions opt;
  opt.fixed_epsilon = 0.0;
  const auto ha = train_dnn_adversarial(adversarial, data.split, cfg, opt);
  // Duplicated rows average to the same loss up to summation order.
  ASSERT_EQ(hs.batch_losses.size(), ha.batch_losses.size());
  for (std::size_t i = 0; i < hs.batch_losses.size(); ++i) {
    EXPECT_NEAR(hs.batch_losses[i], ha.batch_losses[i], 1e-9 * hs.batch_losses[i]);
  }
  for (const auto& [name, value] : standard.parameters()) {
    const Tensor& other = adversarial.parameters().at(name);
    for (std::size_t i = 0; i < value.size(); ++i) EXPECT_NEAR(value[i], other[i], 1e-6) << name;
  }
}

TEST(TrainDnnAdversarial, TargetsNeverTheTrueClass) {
  const auto& data = toy_data();
  auto cfg = small_config(2);
  cfg.ood_source = OodSource::fgsm_adv();
  std::size_t rows = 0;
  TrainOptions opt;
  opt.on_batch = [&](const AdversarialBatch& b) {
    ASSERT_EQ(b.labels.size(), b.targets.size());
    ASSERT_EQ(b.labels.size(), b.epsilons.size());
    for (std::size_t i = 0; i < b.labels.size(); ++i) {
      ASSERT_NE(b.labels[i], b.targets[i]);
      ASSERT_GT(b.epsilons[i], 0.0);
    }
    rows += b.labels.size();
  };
  Model m(toy_spec(HeadKind::kSoftmax), 3);
  train_dnn_adversarial(m, data.split, cfg, opt);
  Model pn(toy_spec(HeadKind::kDirichlet), 3);
  cfg.gamma = 1.0;
  train_pn_adversarial(pn, data.split, cfg, opt);
  EXPECT_EQ(rows, 4 * data.split.train.size());
}

double fgsm_accuracy(const Model& model, const LabeledSet& set, double eps) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Tensor x = set.x.gather_rows(std::vector<std::size_t>{i});
    AttackConfig cfg;
    cfg.epsilon = eps;
    cfg.targeted = false;
    const auto r = fgsm(model, x, set.labels[i], cfg);
    correct += model.predict(r.x_adv)[0] == set.labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(set.size());
}

TEST(TrainDnnAdversarial, ImprovesFgsmAccuracy) {
  const auto& data = toy_data();
  Model m(toy_spec(HeadKind::kSoftmax), 6);
  const double before = fgsm_accuracy(m, data.split.test, 0.1);
  auto cfg = small_config(20);
  cfg.ood_source = OodSource::fgsm_adv();
  train_dnn_adversarial(m, data.split, cfg);
  const double after = fgsm_accuracy(m, data.split.test, 0.1);
  EXPECT_GT(after, before);
  EXPECT_GE(accuracy(m, data.split.test), 0.9);
}

TEST(TrainPnAdversarial, PublishedConfigurationAccepted) {
  TrainConfig cfg = small_config(1);
  cfg.beta_in = 1e2;
  cfg.beta_adv = 1.0;
  cfg.gamma = 30.0;
  cfg.ood_source = OodSource::fgsm_adv();
  EXPECT_NO_THROW(cfg.validate());
  Model m(toy_spec(HeadKind::kDirichlet), 1);
  EXPECT_EQ(train_pn_adversarial(m, toy_data().split, cfg).epochs.size(), 1u);
}

TEST(TrainPnAdversarial, ZeroGammaIsStandardReverseKl) {
  const auto& data = toy_data();
  auto cfg = small_config(3);
  Model standard(toy_spec(HeadKind::kDirichlet), 3);
  Model adversarial = standard;
  const auto hs = train_standard(standard, data.split, cfg, TrainObjective::kPnRkl);
  cfg.ood_source = OodSource::fgsm_adv();
  const auto ha = train_pn_adversarial(adversarial, data.split, cfg);
  EXPECT_EQ(hs.batch_losses, ha.batch_losses);
  EXPECT_EQ(standard.parameters(), adversarial.parameters());
}

TEST(TrainPnAdversarial, AttacksRaiseMutualInformation) {
  const auto& data = toy_data();
  auto cfg = small_config(20);
  cfg.gamma = 30.0;
  cfg.ood_source = OodSource::fgsm_adv();
  Model m(toy_spec(HeadKind::kDirichlet), 8);
  train_pn_adversarial(m, data.split, cfg);
  std::mt19937_64 rng(9);
  const auto& test = data.split.test;
  Tensor adv(test.x.shape());
  for (std::size_t i = 0; i < test.size(); ++i) {
    const Tensor x = test.x.gather_rows(std::vector<std::size_t>{i});
    AttackConfig ac;
    ac.epsilon = sample_epsilon(rng);
    const auto r = fgsm(m, x, select_target_class(rng, test.labels[i], 3), ac);
    std::copy(r.x_adv.data().begin(), r.x_adv.data().end(), adv.row(i).begin());
  }
  const double mi_natural = mean_of(uncertainty_scores(m, test.x, Measure::kMutualInformation));
  const double mi_attack = mean_of(uncertainty_scores(m, adv, Measure::kMutualInformation));
  EXPECT_GT(mi_attack, mi_natural);
}

// ---- ensembles ----------------------------------------------------------------

Model constant_model(std::vector<double> logits) {
  const std::size_t k = logits.size();
  Model m({.input_dim = 2, .num_classes = k, .hidden = {}, .head = HeadKind::kSoftmax}, 0);
  m.graph().parameter_value("layer0.weight") = Tensor({2, k}, 0.0);
  m.graph().parameter_value("layer0.bias") = Tensor({k}, std::move(logits));
  return m;
}

TEST(Ensemble, IdenticalMembersMatchTheSingleModel) {
  const Model m(toy_spec(HeadKind::kSoftmax), 2);
  const Model* members[] = {&m, &m, &m};
  const auto& x = toy_data().split.test.x;
  const auto e = ensemble_predict(members, x);
  const Tensor p = m.probabilities(x);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(e.mean[i], p[i], 1e-15);
  for (double mi : e.mutual_information) EXPECT_NEAR(mi, 0.0, 1e-12);
  EXPECT_EQ(e.members.size(), 3u);
}

TEST(Ensemble, DisagreeingMembers) {
  const Model a = constant_model({50, -50});
  const Model b = constant_model({-50, 50});
  const Model* members[] = {&a, &b};
  const auto e = ensemble_predict(members, Tensor({1, 2}, 0.5));
  EXPECT_NEAR(e.mean[0], 0.5, 1e-15);
  EXPECT_NEAR(e.mean[1], 0.5, 1e-15);
  EXPECT_NEAR(e.mutual_information[0], std::log(2.0), 1e-12);
  EXPECT_NEAR(e.entropy_of_mean[0], std::log(2.0), 1e-15);
}

TEST(Ensemble, Errors) {
  const Model a = constant_model({1, 2});
  const Model b = constant_model({1, 2, 3});
  const Model* mixed[] = {&a, &b};
  EXPECT_THROW(ensemble_predict(mixed, Tensor({1, 2}, 0.5)), ShapeError);
  EXPECT_THROW(ensemble_predict({}, Tensor({1, 2}, 0.5)), DomainError);
}

TEST(Ensemble, AccuracyAgainstMembers) {
  // Informational: an ensemble is usually at least as accurate as its worst
  // member, but this is not guaranteed.
  const auto& data = toy_data();
  std::vector<Model> models;
  for (std::uint64_t s = 0; s < 3; ++s) {
    models.emplace_back(toy_spec(HeadKind::kSoftmax), s);
    auto cfg = small_config(5);
    cfg.seed = s;
    train_standard(models.back(), data.split, cfg, TrainObjective::kDnnNll);
  }
  std::vector<const Model*> ptrs;
  double worst = 1.0;
  for (const auto& m : models) {
    ptrs.push_back(&m);
    worst = std::min(worst, accuracy(m, data.split.test));
  }
  const auto e = ensemble_predict(ptrs, data.split.test.x);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.split.test.size(); ++i) {
    const auto r = e.mean.row(i);
    correct += std::max_element(r.begin(), r.end()) - r.begin() == data.split.test.labels[i];
  }
  RecordProperty("ensemble_accuracy",
                 std::to_string(static_cast<double>(correct) / data.split.test.size()));
  RecordProperty("worst_member_accuracy", std::to_string(worst));
}

// ---- augmentation -------------------------------------------------------------

Tensor ramp_image(std::size_t h, std::size_t w) {
  Tensor img({h, w});
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) img.at(r, c) = static_cast<double>(r * w + c) / (h * w);
  }
  return img;
}

TEST(Augment, DisabledAndIdentityAreNoOps) {
  std::mt19937_64 rng(1);
  const Tensor img = ramp_image(6, 5);
  EXPECT_EQ(augment(img, rng, false), img);
  EXPECT_EQ(augment_image(img, AugmentParams{}), img);
}

TEST(Augment, FlipAndShift) {
  const Tensor img = ramp_image(3, 4);
  const Tensor flipped = augment_image(img, {.flip = true});
  EXPECT_EQ(flipped.at(1, 0), img.at(1, 3));
  EXPECT_EQ(augment_image(flipped, {.flip = true}), img);
  const Tensor shifted = augment_image(img, {.shift_rows = 1, .shift_cols = -1});
  EXPECT_EQ(shifted.at(0, 0), 0.0);
  EXPECT_EQ(shifted.at(1, 0), img.at(0, 1));
  EXPECT_EQ(shifted.at(2, 3), 0.0);
}

TEST(Augment, RightAngleRotationOfASquare) {
  Tensor img({3, 3}, 0.0);
  img.at(0, 1) = 1.0;
  const Tensor rotated = augment_image(img, {.angle_deg = 90.0});
  double total = 0;
  for (double v : rotated.values()) total += v;
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_NEAR(rotated.at(1, 1), 0.0, 1e-12);
}

TEST(Augment, PreservesShapeAndRange) {
  std::mt19937_64 rng(2);
  const Tensor gray = ramp_image(8, 8);
  Tensor color_buf({8, 8, 3});
  for (std::size_t i = 0; i < color_buf.size(); ++i) color_buf[i] = static_cast<double>(i % 7) / 6.0;
  const Tensor color = color_buf;
  for (int i = 0; i < 1000; ++i) {
    const auto p = sample_augment(rng);
    ASSERT_LE(std::abs(p.shift_rows), kMaxShift);
    ASSERT_LE(std::abs(p.shift_cols), kMaxShift);
    ASSERT_LE(std::abs(p.angle_deg), kMaxRotationDeg);
    for (const Tensor* img : {&gray, &color}) {
      const Tensor out = augment_image(*img, p);
      ASSERT_EQ(out.shape(), img->shape());
      for (double v : out.values()) ASSERT_TRUE(v >= 0.0 && v <= 1.0);
    }
  }
}

TEST(Augment, RejectsNonImages) {
  std::mt19937_64 rng(3);
  EXPECT_THROW(augment(Tensor::vector({0.1, 0.2}), rng, true), ShapeError);
  EXPECT_THROW(augment(Tensor({2, 2, 2, 2}, 0.1), rng, true), ShapeError);
}

TEST(Augment, TabularDataCannotBeAugmented) {
  auto cfg = small_config(1);
  cfg.augment = true;
  Model m({.input_dim = 2, .num_classes = 2, .hidden = {4}}, 1);
  EXPECT_THROW(train_standard(m, blobs(10, 1), cfg, TrainObjective::kPnRkl), ShapeError);
}

}  // namespace
}  // namespace dpn
