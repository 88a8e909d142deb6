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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "dpn/attacks.hpp"
#include "dpn/augment.hpp"

namespace dpn {

double one_cycle_lr(double epoch, const TrainConfig& cfg) {
  const double epochs = cfg.epochs;
  const double cycle = cfg.cycle_length;
  if (!(epoch >= 0.0 && epoch <= epochs)) {
    throw DomainError("one_cycle_lr: epoch " + std::to_string(epoch) + " outside [0, " +
                      std::to_string(cfg.epochs) + "]");
  }
  const double hi = cfg.eta0;
  const double lo = cfg.eta0 / 10.0;
  const double floor = cfg.eta0 / 100.0;
  auto lerp = [](double a, double b, double t) { return a + (b - a) * t; };
  const double half = cycle / 2.0;
  if (epoch <= half) return lerp(lo, hi, epoch / half);
  if (cycle >= epochs) return lerp(hi, floor, (epoch - half) / (epochs - half));
  if (epoch <= cycle) return lerp(hi, lo, (epoch - half) / half);
  return lerp(lo, floor, (epoch - cycle) / (epochs - cycle));
}

Adam::Adam(double beta1, double beta2, double epsilon)
    : beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {}

void Adam::step(Graph& graph, const std::map<std::string, Tensor, std::less<>>& grads, double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (const auto& [name, g] : grads) {
    Tensor& p = graph.parameter_value(name);
    auto [mit, m_new] = m_.try_emplace(name, p.shape(), 0.0);
    auto [vit, v_new] = v_.try_emplace(name, p.shape(), 0.0);
    auto m = mit->second.data();
    auto v = vit->second.data();
    auto w = p.data();
    const auto gd = g.data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * gd[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * gd[i] * gd[i];
      w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + epsilon_);
    }
  }
}

std::string_view objective_name(TrainObjective objective) {
  switch (objective) {
    case TrainObjective::kDnnNll: return "dnn_nll";
    case TrainObjective::kPnKl: return "pn_kl";
    case TrainObjective::kPnRkl: return "pn_rkl";
  }
  return "?";
}

std::string TrainHistory::to_csv() const {
  std::ostringstream out;
  out << "epoch,lr,train_loss,train_acc,valid_acc,mean_alpha0_in,mean_alpha0_ood\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto& e : epochs) {
    out << e.epoch << ',' << num(e.lr) << ',' << num(e.train_loss) << ',' << num(e.train_acc)
        << ',' << num(e.valid_acc) << ',' << num(e.mean_alpha0_in) << ','
        << num(e.mean_alpha0_ood) << '\n';
  }
  return out.str();
}

double accuracy(const Model& model, const LabeledSet& set) {
  if (set.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto pred = model.predict(set.x);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == set.labels[i];
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Independent RNG streams so that e.g. attack sampling never perturbs the
// minibatch order.
enum Stream : std::uint64_t { kShuffle = 1, kDropout = 2, kAttack = 3, kAugment = 4 };

std::mt19937_64 stream_rng(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

double mean_alpha0(const Model& model, const Tensor& x) {
  if (x.empty()) return kNaN;
  const Tensor a = model.alpha(x);
  double total = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double a0 = 0.0;
    for (double v : a.row(r)) a0 += v;
    total += a0;
  }
  return total / static_cast<double>(a.rows());
}

struct BatchContext {
  int epoch;
  std::size_t batch;
  const Tensor& x;
  std::span<const int> labels;
  std::mt19937_64& attack_rng;
};

using BatchLossFn = std::function<BoundLoss(const BatchContext&)>;

void check_compatible(const Model& model, const DatasetSplit& data, const TrainConfig& cfg) {
  cfg.validate();
  data.validate();
  if (data.train.empty()) throw Error("training set is empty");
  if (model.spec().input_dim != data.input_dim()) {
    throw ShapeError("model input_dim " + std::to_string(model.spec().input_dim) +
                     " differs from data width " + std::to_string(data.input_dim()));
  }
  if (model.num_classes() != data.num_classes) {
    throw ShapeError("model has " + std::to_string(model.num_classes()) + " classes, data has " +
                     std::to_string(data.num_classes));
  }
  if (model.spec().dropout_keep != cfg.dropout_keep) {
    throw DomainError("model dropout_keep differs from the training config");
  }
  if (cfg.augment && data.sample_shape.size() != 2 && data.sample_shape.size() != 3) {
    throw ShapeError("augment requires image samples, got sample shape " +
                     shape_string(data.sample_shape));
  }
}

TrainHistory run_training(Model& model, const DatasetSplit& data, const TrainConfig& cfg,
                          const BatchLossFn& make_loss, const Tensor* ood_monitor) {
  auto shuffle_rng = stream_rng(cfg.seed, kShuffle);
  auto dropout_rng = stream_rng(cfg.seed, kDropout);
  auto attack_rng = stream_rng(cfg.seed, kAttack);
  auto augment_rng = stream_rng(cfg.seed, kAugment);

  const std::size_t n = data.train.size();
  const std::size_t bs = std::min(cfg.batch_size, n);
  const std::size_t batches = (n + bs - 1) / bs;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  Adam adam;
  TrainHistory history;
  ForwardOptions fwd;
  fwd.training = cfg.dropout_keep < 1.0;
  fwd.rng = &dropout_rng;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = one_cycle_lr(epoch, cfg);
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t begin = b * bs;
      const std::size_t end = std::min(n, begin + bs);
      const std::span<const std::size_t> idx(order.data() + begin, end - begin);
      LabeledSet batch = data.train.subset(idx);
      if (cfg.augment) {
        for (std::size_t r = 0; r < batch.size(); ++r) {
          auto row = batch.x.row(r);
          Tensor img(data.sample_shape, std::vector<double>(row.begin(), row.end()));
          const Tensor aug = augment(img, augment_rng, true);
          std::copy(aug.data().begin(), aug.data().end(), row.begin());
        }
      }
      const double lr =
          one_cycle_lr(epoch + static_cast<double>(b) / static_cast<double>(batches), cfg);
      LossEvaluation le;
      try {
        const BoundLoss loss = make_loss({epoch, b, batch.x, batch.labels, attack_rng});
        le = loss.evaluate(fwd);
      } catch (const NumericError& e) {
        throw TrainingAborted("training aborted at epoch " + std::to_string(epoch) + ", batch " +
                                  std::to_string(b) + ": " + e.what(),
                              history);
      }
      if (!std::isfinite(le.value)) {
        throw TrainingAborted("training aborted at epoch " + std::to_string(epoch) + ", batch " +
                                  std::to_string(b) + ": non-finite loss",
                              history);
      }
      history.batch_losses.push_back(le.value);
      loss_sum += le.value;
      adam.step(model.graph(), le.gradients.parameters, lr);
    }
    rec.train_loss = loss_sum / static_cast<double>(batches);
    try {
      rec.train_acc = accuracy(model, data.train);
      rec.valid_acc = data.valid.empty() ? kNaN : accuracy(model, data.valid);
      rec.mean_alpha0_in = mean_alpha0(model, data.train.x);
      rec.mean_alpha0_ood = ood_monitor ? mean_alpha0(model, *ood_monitor) : kNaN;
    } catch (const NumericError& e) {
      throw TrainingAborted("training aborted after epoch " + std::to_string(epoch) + ": " +
                                e.what(),
                            history);
    }
    history.epochs.push_back(rec);
  }
  return history;
}

std::vector<int> draw_targets(std::span<const int> labels, std::size_t k, std::mt19937_64& rng) {
  std::vector<int> targets(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    targets[i] = select_target_class(rng, labels[i], static_cast<int>(k));
    if (targets[i] == labels[i]) throw Error("adversarial target equals the true class");
  }
  return targets;
}

std::vector<double> draw_epsilons(std::size_t n, const TrainOptions& options, std::mt19937_64& rng) {
  std::vector<double> eps(n);
  for (auto& e : eps) e = options.fixed_epsilon ? *options.fixed_epsilon : sample_epsilon(rng);
  return eps;
}

void require_fgsm_source(const TrainConfig& cfg, const char* who) {
  if (cfg.ood_source.kind != OodSourceKind::kFgsmAdv) {
    throw DomainError(std::string(who) + " requires ood_source = fgsm_adv");
  }
}

}  // namespace

TrainHistory train_standard(Model& model, const DatasetSplit& data, const TrainConfig& cfg,
                            TrainObjective objective, const TrainOptions& options) {
  check_compatible(model, data, cfg);
  const std::size_t k = data.num_classes;
  if (objective == TrainObjective::kDnnNll && cfg.gamma > 0.0) {
    throw DomainError("gamma > 0 is only meaningful for Prior Network objectives");
  }
  const bool use_ood = objective != TrainObjective::kDnnNll && cfg.gamma > 0.0;
  if (use_ood && (options.ood_x == nullptr || options.ood_x->empty())) {
    throw DomainError("gamma > 0 requires out-of-domain training data");
  }
  if (options.ood_x && !options.ood_x->empty() && options.ood_x->dim(1) != data.input_dim()) {
    throw ShapeError("out-of-domain data width differs from the in-domain data");
  }

  const TargetConcentration tc{cfg.beta_in, cfg.beta_adv, k};
  const LossWeights weights{cfg.gamma};
  // OOD rows are visited in a fresh permutation every epoch and cycled when
  // the OOD set is smaller than the training set.
  std::vector<std::size_t> ood_order;
  std::mt19937_64 ood_rng = stream_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL, kShuffle);
  int ood_epoch = -1;
  std::size_t ood_cursor = 0;

  auto make_loss = [&](const BatchContext& ctx) -> BoundLoss {
    if (objective == TrainObjective::kDnnNll) return loss_nll(model, ctx.x, ctx.labels);
    JointBatch jb;
    jb.in_x = ctx.x;
    jb.in_labels.assign(ctx.labels.begin(), ctx.labels.end());
    if (use_ood) {
      const std::size_t n_ood = options.ood_x->rows();
      if (ood_epoch != ctx.epoch) {
        ood_order.resize(n_ood);
        std::iota(ood_order.begin(), ood_order.end(), 0);
        std::shuffle(ood_order.begin(), ood_order.end(), ood_rng);
        ood_epoch = ctx.epoch;
        ood_cursor = 0;
      }
      std::vector<std::size_t> idx(ctx.x.rows());
      for (auto& i : idx) i = ood_order[ood_cursor++ % n_ood];
      jb.ood_x = options.ood_x->gather_rows(idx);
      jb.ood_target_alpha = flat_alpha_rows(idx.size(), k);
    }
    const auto div =
        objective == TrainObjective::kPnKl ? Divergence::kForward : Divergence::kReverse;
    return loss_joint(model, jb, tc, weights, div);
  };
  return run_training(model, data, cfg, make_loss, options.ood_x);
}

TrainHistory train_dnn_adversarial(Model& model, const DatasetSplit& data, const TrainConfig& cfg,
                                   const TrainOptions& options) {
  check_compatible(model, data, cfg);
  require_fgsm_source(cfg, "train_dnn_adversarial");
  const std::size_t k = data.num_classes;
  const TargetConcentration tc{cfg.beta_in, cfg.beta_adv, k};
  auto make_loss = [&](const BatchContext& ctx) -> BoundLoss {
    const auto targets = draw_targets(ctx.labels, k, ctx.attack_rng);
    const auto eps = draw_epsilons(ctx.labels.size(), options, ctx.attack_rng);
    if (options.on_batch) options.on_batch({ctx.epoch, ctx.batch, ctx.labels, targets, eps});
    const Tensor x_adv = fgsm_batch(model, ctx.x, targets, eps, LossKind::kNllTarget, tc);
    std::vector<int> labels(ctx.labels.begin(), ctx.labels.end());
    labels.insert(labels.end(), ctx.labels.begin(), ctx.labels.end());
    return loss_nll(model, concat_rows(ctx.x, x_adv), labels);
  };
  return run_training(model, data, cfg, make_loss, options.ood_x);
}

TrainHistory train_pn_adversarial(Model& model, const DatasetSplit& data, const TrainConfig& cfg,
                                  const TrainOptions& options) {
  check_compatible(model, data, cfg);
  require_fgsm_source(cfg, "train_pn_adversarial");
  const std::size_t k = data.num_classes;
  const TargetConcentration tc{cfg.beta_in, cfg.beta_adv, k};
  const LossWeights weights{cfg.gamma};
  auto make_loss = [&](const BatchContext& ctx) -> BoundLoss {
    JointBatch jb;
    jb.in_x = ctx.x;
    jb.in_labels.assign(ctx.labels.begin(), ctx.labels.end());
    if (cfg.gamma > 0.0) {
      const auto targets = draw_targets(ctx.labels, k, ctx.attack_rng);
      const auto eps = draw_epsilons(ctx.labels.size(), options, ctx.attack_rng);
      if (options.on_batch) options.on_batch({ctx.epoch, ctx.batch, ctx.labels, targets, eps});
      // The attack aims at a confident in-domain Dirichlet on the target
      // class; training then asks for a wide Dirichlet on the true class.
      jb.ood_x = fgsm_batch(model, ctx.x, targets, eps, LossKind::kRklTargetDirichlet, tc);
      jb.ood_target_alpha = target_alpha_rows(ctx.labels, cfg.beta_adv, k);
    }
    return loss_joint(model, jb, tc, weights, Divergence::kReverse);
  };
  return run_training(model, data, cfg, make_loss, options.ood_x);
}

EnsemblePrediction ensemble_predict(std::span<const Model* const> models, const Tensor& x) {
  if (models.empty()) throw DomainError("ensemble_predict needs at least one model");
  const std::size_t k = models.front()->num_classes();
  for (const Model* m : models) {
    if (m->num_classes() != k) throw ShapeError("ensemble members disagree on the class count");
  }
  EnsemblePrediction out;
  for (const Model* m : models) out.members.push_back(m->probabilities(x));
  const std::size_t rows = x.rows();
  out.mean = Tensor({rows, k}, 0.0);
  const double inv = 1.0 / static_cast<double>(models.size());
  auto entropy = [](std::span<const double> p) {
    double h = 0.0;
    for (double v : p) {
      if (v > 0.0) h -= v * std::log(v);
    }
    return h;
  };
  for (std::size_t r = 0; r < rows; ++r) {
    double mean_h = 0.0;
    for (const auto& p : out.members) {
      const auto row = p.row(r);
      for (std::size_t c = 0; c < k; ++c) out.mean.at(r, c) += inv * row[c];
      mean_h += inv * entropy(row);
    }
    const double h_mean = entropy(out.mean.row(r));
    out.entropy_of_mean.push_back(h_mean);
    out.mean_entropy.push_back(mean_h);
    out.mutual_information.push_back(h_mean - mean_h);
  }
  return out;
}

}  // namespace dpn
