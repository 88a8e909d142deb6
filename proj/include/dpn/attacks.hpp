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
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dpn/model.hpp"
#include "dpn/tensor.hpp"

namespace dpn {

enum class Norm { kL1, kL2, kLinf };

std::string_view norm_name(Norm norm);
Norm parse_norm(std::string_view text);

enum class LossKind {
  /// -ln softmax(logits)[target].
  kNllTarget,
  /// KL(model || confident in-domain Dirichlet on the target class).
  kRklTargetDirichlet,
};

/// Default standard deviation of the adversarial-training epsilon sampler.
inline constexpr double kEpsilonSigma = 30.0 / 128.0;

struct AttackConfig {
  Norm norm = Norm::kLinf;
  double epsilon = 0.1;
  int steps = 10;
  /// Per-step size; 0 means epsilon / steps.
  double step_size = 0.0;
  double momentum_decay = 1.0;
  double soft_c = 0.0;
  LossKind loss_kind = LossKind::kNllTarget;
  /// Targeted attacks descend the target-class loss; untargeted ones ascend
  /// the loss of the true label passed in place of the target.
  bool targeted = true;
  double clip_min = 0.0;
  double clip_max = 1.0;

  double effective_step() const { return step_size > 0.0 ? step_size : epsilon / steps; }
  void validate() const;
};

struct AttackResult {
  Tensor x_adv;
  /// Distance between x and x_adv under the attack norm (L2 for soft attacks).
  double achieved_delta = 0.0;
  /// Target class, or the true label for untargeted attacks.
  int target_class = -1;
  bool targeted = true;
  bool success = false;
  double epsilon = 0.0;
  Norm norm = Norm::kLinf;
  int steps_taken = 0;
  /// Iterative attack stopped at a point with zero gradient.
  bool stalled = false;
  /// Soft-constraint attack: objective of every accepted iterate.
  std::vector<double> objective_trace;
};

struct LossAndGrad {
  double value = 0.0;
  Tensor grad;
};

/// Loss to be minimized by an attack and its gradient with respect to the input.
using LossGradFn = std::function<LossAndGrad(const Tensor&)>;

/// sign with sign(0) = 0.
inline double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double lp_norm(std::span<const double> v, Norm norm);
double lp_distance(const Tensor& a, const Tensor& b, Norm norm);

/// Uniform over the K - 1 classes other than true_label.
int select_target_class(std::mt19937_64& rng, int true_label, int num_classes);

/// |z| with z ~ Normal(0, sigma), redrawn on an exact zero.
double sample_epsilon(std::mt19937_64& rng, double sigma = kEpsilonSigma);

/// Euclidean projection onto {y : ||y - x0||_p <= epsilon} followed by
/// clipping into [clip_min, clip_max]. The L1 case uses the sort-based
/// simplex projection.
Tensor project_lp(const Tensor& x0, const Tensor& x, double epsilon, Norm norm,
                  double clip_min = 0.0, double clip_max = 1.0);

// ---- attacks on an arbitrary differentiable loss ---------------------------

AttackResult fgsm(const LossGradFn& loss, const Tensor& x, double epsilon,
                  double clip_min = 0.0, double clip_max = 1.0);
/// x - epsilon * g / ||g||_p; at p = inf uses sign(g) so that it matches fgsm.
AttackResult fgm(const LossGradFn& loss, const Tensor& x, double epsilon, Norm norm,
                 double clip_min = 0.0, double clip_max = 1.0);
/// Momentum iterative attack (BIM when momentum_decay == 0) with projection
/// after every step.
AttackResult iterative_attack(const LossGradFn& loss, const Tensor& x, const AttackConfig& cfg);
/// Gradient descent on loss + soft_c * ||x_adv - x||_2 keeping the best iterate.
AttackResult soft_constraint_attack(const LossGradFn& loss, const Tensor& x,
                                    const AttackConfig& cfg);

// ---- attacks on a model ----------------------------------------------------

/// Reverse KL between the model Dirichlet at x and target_alpha(target, tc, in).
BoundLoss adaptive_attack_loss(const Model& model, const Tensor& x, int target,
                               const TargetConcentration& tc);

/// Loss an attack minimizes for a single input row: the target loss when
/// targeted, the negated true-label loss otherwise.
LossGradFn attack_objective(const Model& model, int target, LossKind kind, bool targeted,
                            const TargetConcentration& tc);

AttackResult fgsm(const Model& model, const Tensor& x, int target, const AttackConfig& cfg,
                  const TargetConcentration& tc = {});
AttackResult fgm(const Model& model, const Tensor& x, int target, const AttackConfig& cfg,
                 const TargetConcentration& tc = {});
AttackResult iterative_attack(const Model& model, const Tensor& x, int target,
                              const AttackConfig& cfg, const TargetConcentration& tc = {});
AttackResult soft_constraint_attack(const Model& model, const Tensor& x, int target,
                                    const AttackConfig& cfg, const TargetConcentration& tc = {});

/// Sets success from the model prediction at x_adv.
void mark_success(const Model& model, AttackResult& result);

/// Targeted L-inf FGSM for a whole batch with a per-row epsilon and target.
Tensor fgsm_batch(const Model& model, const Tensor& x, std::span<const int> targets,
                  std::span<const double> epsilons, LossKind kind, const TargetConcentration& tc,
                  double clip_min = 0.0, double clip_max = 1.0);

}  // namespace dpn
