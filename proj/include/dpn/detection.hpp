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
#include <string_view>
#include <vector>

#include "dpn/attacks.hpp"
#include "dpn/data.hpp"
#include "dpn/model.hpp"

namespace dpn {

enum class Measure { kMaxProb, kPredictiveEntropy, kMutualInformation, kDifferentialEntropy, kAlpha0 };

std::string_view measure_name(Measure measure);
/// Accepts the names returned by measure_name; throws FormatError otherwise.
Measure parse_measure(std::string_view text);
std::vector<Measure> all_measures();

/// One score per row of xs, oriented so that larger means more anomalous
/// (max_prob and alpha0 are negated). Softmax heads support only max_prob and
/// predictive_entropy.
std::vector<double> uncertainty_scores(const Model& model, const Tensor& xs, Measure measure);

/// P(anomalous > nominal) + P(tie) / 2, computed exactly from midranks.
double auroc(std::span<const double> anomalous, std::span<const double> nominal);

/// Targeted results succeed when the model predicts target_class; untargeted
/// ones when it no longer predicts the true label.
double attack_success_rate(const Model& model, std::span<const AttackResult> results,
                           std::span<const int> true_labels);

struct DetectionReport {
  std::string measure;
  /// NaN for the report over every epsilon.
  double epsilon = 0.0;
  std::vector<double> scores_natural;
  std::vector<double> scores_attack;
  double auroc = 0.0;
  double accuracy_natural = 0.0;
  double attack_success_rate = 0.0;
  /// Value of the optional composite hook.
  std::optional<double> composite;
};

/// Optional score combining robustness and detection for one report.
using CompositeMetric = std::function<double(const DetectionReport&)>;

struct JointReport {
  /// One report per requested measure over the whole attack set.
  std::vector<DetectionReport> overall;
  /// One report per (measure, epsilon) when the attack set mixes budgets.
  std::vector<DetectionReport> per_epsilon;

  std::string to_json() const;
  /// Long format: measure,epsilon,n_natural,n_attack,auroc,accuracy_natural,attack_success_rate.
  std::string to_csv() const;
};

/// attacks[i] is the attack on natural.x row i (or any labelled row when
/// attack_labels is given).
JointReport joint_report(const Model& model, const LabeledSet& natural,
                         std::span<const AttackResult> attacks, std::span<const int> attack_labels,
                         std::span<const Measure> measures, const CompositeMetric& composite = {});

/// Stacks the x_adv rows of a result set into [N, D].
Tensor stack_adversarial(std::span<const AttackResult> results);

}  // namespace dpn
