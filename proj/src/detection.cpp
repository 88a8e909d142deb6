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

#include "dpn/detection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dpn/dirichlet.hpp"
#include "dpn/error.hpp"

namespace dpn {

std::string_view measure_name(Measure measure) {
  switch (measure) {
    case Measure::kMaxProb: return "max_prob";
    case Measure::kPredictiveEntropy: return "predictive_entropy";
    case Measure::kMutualInformation: return "mutual_information";
    case Measure::kDifferentialEntropy: return "differential_entropy";
    case Measure::kAlpha0: return "alpha0";
  }
  return "?";
}

std::vector<Measure> all_measures() {
  return {Measure::kMaxProb, Measure::kPredictiveEntropy, Measure::kMutualInformation,
          Measure::kDifferentialEntropy, Measure::kAlpha0};
}

Measure parse_measure(std::string_view text) {
  for (Measure m : all_measures()) {
    if (measure_name(m) == text) return m;
  }
  throw FormatError("unknown measure '" + std::string(text) +
                    "' (expected max_prob, predictive_entropy, mutual_information, "
                    "differential_entropy or alpha0)");
}

std::vector<double> uncertainty_scores(const Model& model, const Tensor& xs, Measure measure) {
  std::vector<double> out;
  out.reserve(xs.rows());
  if (model.spec().head == HeadKind::kSoftmax) {
    if (measure != Measure::kMaxProb && measure != Measure::kPredictiveEntropy) {
      throw DomainError(std::string(measure_name(measure)) +
                        " needs a Dirichlet head; softmax models support max_prob and "
                        "predictive_entropy");
    }
    const Tensor p = model.probabilities(xs);
    for (std::size_t r = 0; r < p.rows(); ++r) {
      const auto row = p.row(r);
      if (measure == Measure::kMaxProb) {
        out.push_back(-*std::max_element(row.begin(), row.end()));
      } else {
        double h = 0.0;
        for (double v : row) {
          if (v > 0.0) h -= v * std::log(v);
        }
        out.push_back(h);
      }
    }
    return out;
  }
  for (const auto& a : forward_alpha(model, xs)) {
    switch (measure) {
      case Measure::kMaxProb: out.push_back(-max_prob(a)); break;
      case Measure::kPredictiveEntropy: out.push_back(predictive_entropy(a)); break;
      case Measure::kMutualInformation: out.push_back(mutual_information(a)); break;
      case Measure::kDifferentialEntropy: out.push_back(differential_entropy(a)); break;
      case Measure::kAlpha0: out.push_back(-a.alpha0()); break;
    }
  }
  return out;
}

double auroc(std::span<const double> anomalous, std::span<const double> nominal) {
  if (anomalous.empty() || nominal.empty()) throw DomainError("auroc needs non-empty score sets");
  struct Item {
    double score;
    bool anomalous;
  };
  std::vector<Item> items;
  items.reserve(anomalous.size() + nominal.size());
  for (double s : anomalous) items.push_back({s, true});
  for (double s : nominal) items.push_back({s, false});
  for (const auto& it : items) {
    if (std::isnan(it.score)) throw DomainError("auroc: NaN score");
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.score < b.score; });
  // Twice the midrank of a tie group spanning 1-based ranks i..j is i + j,
  // which keeps the whole rank sum in integers.
  std::uint64_t twice_rank_sum = 0;
  for (std::size_t i = 0; i < items.size();) {
    std::size_t j = i;
    while (j + 1 < items.size() && items[j + 1].score == items[i].score) ++j;
    const std::uint64_t twice_mid = (i + 1) + (j + 1);
    for (std::size_t t = i; t <= j; ++t) {
      if (items[t].anomalous) twice_rank_sum += twice_mid;
    }
    i = j + 1;
  }
  const std::uint64_t na = anomalous.size();
  const std::uint64_t nn = nominal.size();
  // 2U = 2R - na (na + 1) counts wins twice and ties once.
  const std::uint64_t twice_u = twice_rank_sum - na * (na + 1);
  return static_cast<double>(twice_u) / static_cast<double>(2 * na * nn);
}

Tensor stack_adversarial(std::span<const AttackResult> results) {
  if (results.empty()) throw DomainError("no attack results");
  const std::size_t d = results.front().x_adv.size();
  std::vector<double> data;
  data.reserve(results.size() * d);
  for (const auto& r : results) {
    if (r.x_adv.size() != d) throw ShapeError("attack results have different input sizes");
    data.insert(data.end(), r.x_adv.data().begin(), r.x_adv.data().end());
  }
  return Tensor({results.size(), d}, std::move(data));
}

double attack_success_rate(const Model& model, std::span<const AttackResult> results,
                           std::span<const int> true_labels) {
  if (results.size() != true_labels.size()) {
    throw ShapeError("attack_success_rate: " + std::to_string(results.size()) + " results but " +
                     std::to_string(true_labels.size()) + " labels");
  }
  if (results.empty()) throw DomainError("attack_success_rate: no results");
  const auto pred = model.predict(stack_adversarial(results));
  std::size_t hits = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    hits += results[i].targeted ? pred[i] == results[i].target_class : pred[i] != true_labels[i];
  }
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

JointReport joint_report(const Model& model, const LabeledSet& natural,
                         std::span<const AttackResult> attacks, std::span<const int> attack_labels,
                         std::span<const Measure> measures, const CompositeMetric& composite) {
  if (natural.empty() || attacks.empty()) throw DomainError("joint_report needs non-empty sets");
  if (measures.empty()) throw DomainError("joint_report needs at least one measure");
  const std::vector<int> labels = attack_labels.empty()
                                      ? std::vector<int>(natural.labels.begin(),
                                                         natural.labels.begin() +
                                                             std::min(natural.size(), attacks.size()))
                                      : std::vector<int>(attack_labels.begin(), attack_labels.end());
  if (labels.size() != attacks.size()) {
    throw ShapeError("joint_report: attack labels do not align with attacks");
  }
  const Tensor x_adv = stack_adversarial(attacks);
  const auto pred = model.predict(natural.x);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == natural.labels[i];
  const double acc = static_cast<double>(correct) / static_cast<double>(pred.size());

  std::map<double, std::vector<std::size_t>> by_eps;
  for (std::size_t i = 0; i < attacks.size(); ++i) by_eps[attacks[i].epsilon].push_back(i);

  JointReport report;
  for (Measure m : measures) {
    const auto nat = uncertainty_scores(model, natural.x, m);
    const auto adv = uncertainty_scores(model, x_adv, m);
    DetectionReport r;
    r.measure = std::string(measure_name(m));
    r.epsilon = std::numeric_limits<double>::quiet_NaN();
    r.scores_natural = nat;
    r.scores_attack = adv;
    r.auroc = auroc(adv, nat);
    r.accuracy_natural = acc;
    r.attack_success_rate = attack_success_rate(model, attacks, labels);
    if (composite) r.composite = composite(r);
    report.overall.push_back(r);
    if (by_eps.size() < 2) continue;
    for (const auto& [eps, idx] : by_eps) {
      DetectionReport e;
      e.measure = r.measure;
      e.epsilon = eps;
      e.scores_natural = nat;
      std::vector<AttackResult> subset;
      std::vector<int> sub_labels;
      for (auto i : idx) {
        e.scores_attack.push_back(adv[i]);
        subset.push_back(attacks[i]);
        sub_labels.push_back(labels[i]);
      }
      e.auroc = auroc(e.scores_attack, nat);
      e.accuracy_natural = acc;
      e.attack_success_rate = attack_success_rate(model, subset, sub_labels);
      if (composite) e.composite = composite(e);
      report.per_epsilon.push_back(std::move(e));
    }
  }
  return report;
}

namespace {

nlohmann::json report_json(const DetectionReport& r) {
  nlohmann::json j;
  j["measure"] = r.measure;
  j["epsilon"] = std::isnan(r.epsilon) ? nlohmann::json("all") : nlohmann::json(r.epsilon);
  j["auroc"] = r.auroc;
  j["accuracy_natural"] = r.accuracy_natural;
  j["attack_success_rate"] = r.attack_success_rate;
  j["scores_natural"] = r.scores_natural;
  j["scores_attack"] = r.scores_attack;
  if (r.composite) j["composite"] = *r.composite;
  return j;
}

}  // namespace

std::string JointReport::to_json() const {
  nlohmann::json j;
  j["overall"] = nlohmann::json::array();
  j["per_epsilon"] = nlohmann::json::array();
  for (const auto& r : overall) j["overall"].push_back(report_json(r));
  for (const auto& r : per_epsilon) j["per_epsilon"].push_back(report_json(r));
  return j.dump(2) + "\n";
}

std::string JointReport::to_csv() const {
  std::ostringstream out;
  out << "measure,epsilon,n_natural,n_attack,auroc,accuracy_natural,attack_success_rate\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  auto row = [&](const DetectionReport& r) {
    out << r.measure << ',' << (std::isnan(r.epsilon) ? std::string("all") : num(r.epsilon)) << ','
        << r.scores_natural.size() << ',' << r.scores_attack.size() << ',' << num(r.auroc) << ','
        << num(r.accuracy_natural) << ',' << num(r.attack_success_rate) << '\n';
  };
  for (const auto& r : overall) row(r);
  for (const auto& r : per_epsilon) row(r);
  return out.str();
}

}  // namespace dpn
