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

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpn/config.hpp"
#include "dpn/data.hpp"
#include "dpn/error.hpp"
#include "dpn/model.hpp"

namespace dpn {

/// Learning rate at a fractional epoch: linear from eta0/10 up to eta0 at
/// cycle_length/2, back down to eta0/10 at cycle_length, then linear decay to
/// eta0/100 at epochs. When the cycle spans the whole run the down-ramp ends
/// at eta0/100 directly. Throws DomainError outside [0, epochs].
double one_cycle_lr(double epoch, const TrainConfig& cfg);

/// Adaptive-moment optimizer over the parameters of one graph.
class Adam {
 public:
  explicit Adam(double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8);

  /// theta <- theta - lr * m_hat / (sqrt(v_hat) + epsilon), per parameter.
  void step(Graph& graph, const std::map<std::string, Tensor, std::less<>>& grads, double lr);
  long long steps() const { return t_; }

 private:
  double beta1_;
  double beta2_;
  double epsilon_;
  long long t_ = 0;
  std::map<std::string, Tensor, std::less<>> m_;
  std::map<std::string, Tensor, std::less<>> v_;
};

enum class TrainObjective { kDnnNll, kPnKl, kPnRkl };

std::string_view objective_name(TrainObjective objective);

struct EpochRecord {
  int epoch = 0;
  /// Learning rate at the start of the epoch.
  double lr = 0.0;
  /// Mean minibatch loss.
  double train_loss = 0.0;
  double train_acc = 0.0;
  /// NaN when the split has no validation set.
  double valid_acc = 0.0;
  double mean_alpha0_in = 0.0;
  /// NaN when no out-of-domain monitor set is available.
  double mean_alpha0_ood = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  /// Loss of every optimizer step in order.
  std::vector<double> batch_losses;

  std::string to_csv() const;
};

/// Raised when a loss or intermediate becomes non-finite; carries the
/// history up to the failure.
class TrainingAborted : public Error {
 public:
  TrainingAborted(const std::string& what, TrainHistory history)
      : Error(what), history_(std::move(history)) {}
  const TrainHistory& history() const { return history_; }

 private:
  TrainHistory history_;
};

/// Minibatch composition seen by adversarial training.
struct AdversarialBatch {
  int epoch = 0;
  std::size_t batch = 0;
  std::span<const int> labels;
  std::span<const int> targets;
  std::span<const double> epsilons;
};

struct TrainOptions {
  /// Out-of-domain features paired 1:1 with in-domain minibatches when
  /// gamma > 0 (flat Dirichlet target). Also used for mean_alpha0_ood.
  const Tensor* ood_x = nullptr;
  /// Overrides the epsilon sampler in adversarial training.
  std::optional<double> fixed_epsilon;
  /// Called after each adversarial minibatch is built.
  std::function<void(const AdversarialBatch&)> on_batch;
};

/// Minibatch training with Adam and the 1-cycle schedule. Requires ood_x when
/// gamma > 0 for the Prior Network objectives; gamma must be 0 for kDnnNll.
TrainHistory train_standard(Model& model, const DatasetSplit& data, const TrainConfig& cfg,
                            TrainObjective objective, const TrainOptions& options = {});

/// Maximum likelihood on every minibatch together with its targeted FGSM
/// counterpart (per-row epsilon and non-true target class).
TrainHistory train_dnn_adversarial(Model& model, const DatasetSplit& data, const TrainConfig& cfg,
                                   const TrainOptions& options = {});

/// Reverse-KL Prior Network training where each minibatch's FGSM attacks
/// (aimed at a confident target Dirichlet) become out-of-domain rows with a
/// beta_adv target on the true class and weight gamma.
TrainHistory train_pn_adversarial(Model& model, const DatasetSplit& data, const TrainConfig& cfg,
                                  const TrainOptions& options = {});

struct EnsemblePrediction {
  /// Mean of member softmax outputs, [B, K].
  Tensor mean;
  std::vector<Tensor> members;
  std::vector<double> entropy_of_mean;
  std::vector<double> mean_entropy;
  /// entropy_of_mean - mean_entropy.
  std::vector<double> mutual_information;
};

EnsemblePrediction ensemble_predict(std::span<const Model* const> models, const Tensor& x);

/// Fraction of rows whose prediction equals the label.
double accuracy(const Model& model, const LabeledSet& set);

}  // namespace dpn
