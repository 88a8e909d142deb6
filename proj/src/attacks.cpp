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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dpn/error.hpp"

namespace dpn {

std::string_view norm_name(Norm norm) {
  switch (norm) {
    case Norm::kL1: return "1";
    case Norm::kL2: return "2";
    case Norm::kLinf: return "inf";
  }
  return "?";
}

Norm parse_norm(std::string_view text) {
  if (text == "1") return Norm::kL1;
  if (text == "2") return Norm::kL2;
  if (text == "inf") return Norm::kLinf;
  throw FormatError("unknown norm '" + std::string(text) + "' (expected 1, 2 or inf)");
}

void AttackConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw DomainError("attack epsilon must be > 0");
  if (steps < 1) throw DomainError("attack steps must be >= 1");
  if (!(step_size >= 0.0) || !std::isfinite(step_size)) throw DomainError("step size must be >= 0");
  if (!(momentum_decay >= 0.0) || !std::isfinite(momentum_decay)) {
    throw DomainError("momentum decay must be >= 0");
  }
  if (!(soft_c >= 0.0) || !std::isfinite(soft_c)) throw DomainError("soft_c must be >= 0");
  if (!(clip_min < clip_max)) throw DomainError("clip_min must be below clip_max");
}

double lp_norm(std::span<const double> v, Norm norm) {
  double acc = 0.0;
  switch (norm) {
    case Norm::kL1:
      for (double x : v) acc += std::abs(x);
      return acc;
    case Norm::kL2:
      for (double x : v) acc += x * x;
      return std::sqrt(acc);
    case Norm::kLinf:
      for (double x : v) acc = std::max(acc, std::abs(x));
      return acc;
  }
  return acc;
}

double lp_distance(const Tensor& a, const Tensor& b, Norm norm) {
  if (a.shape() != b.shape()) throw ShapeError("lp_distance: shapes differ");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];
  return lp_norm(d, norm);
}

int select_target_class(std::mt19937_64& rng, int true_label, int num_classes) {
  if (num_classes < 2) throw DomainError("select_target_class needs K >= 2");
  if (true_label < 0 || true_label >= num_classes) {
    throw DomainError("true label " + std::to_string(true_label) + " outside [0, K)");
  }
  std::uniform_int_distribution<int> pick(0, num_classes - 2);
  const int c = pick(rng);
  return c >= true_label ? c + 1 : c;
}

double sample_epsilon(std::mt19937_64& rng, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("epsilon sigma must be > 0");
  std::normal_distribution<double> normal(0.0, sigma);
  for (;;) {
    const double eps = std::abs(normal(rng));
    if (eps > 0.0) return eps;
  }
}

namespace {

void clip_into(Tensor& x, double lo, double hi) {
  for (auto& v : x.values()) v = std::clamp(v, lo, hi);
}

void project_l1_ball(std::vector<double>& v, double radius) {
  if (lp_norm(v, Norm::kL1) <= radius) return;
  std::vector<double> u(v.size());
  std::transform(v.begin(), v.end(), u.begin(), [](double x) { return std::abs(x); });
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double t = (cumulative - radius) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  for (auto& x : v) x = sign(x) * std::max(std::abs(x) - theta, 0.0);
}

void require_finite(const Tensor& g) {
  if (!g.all_finite()) throw NumericError("attack gradient is not finite");
}

AttackResult make_result(const Tensor& x, Tensor x_adv, double epsilon, Norm norm) {
  AttackResult r;
  r.achieved_delta = lp_distance(x, x_adv, norm);
  r.x_adv = std::move(x_adv);
  r.epsilon = epsilon;
  r.norm = norm;
  return r;
}

}  // namespace

Tensor project_lp(const Tensor& x0, const Tensor& x, double epsilon, Norm norm, double clip_min,
                  double clip_max) {
  if (x0.shape() != x.shape()) throw ShapeError("project_lp: shapes differ");
  if (!(epsilon >= 0.0)) throw DomainError("project_lp: epsilon must be >= 0");
  Tensor out = x;
  switch (norm) {
    case Norm::kLinf:
      for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::clamp(x[i], x0[i] - epsilon, x0[i] + epsilon);
      }
      break;
    case Norm::kL2: {
      std::vector<double> d(x.size());
      for (std::size_t i = 0; i < d.size(); ++i) d[i] = x[i] - x0[i];
      const double n = lp_norm(d, Norm::kL2);
      if (n > epsilon) {
        const double f = epsilon / n;
        for (std::size_t i = 0; i < d.size(); ++i) out[i] = x0[i] + d[i] * f;
      }
      break;
    }
    case Norm::kL1: {
      std::vector<double> d(x.size());
      for (std::size_t i = 0; i < d.size(); ++i) d[i] = x[i] - x0[i];
      project_l1_ball(d, epsilon);
      for (std::size_t i = 0; i < d.size(); ++i) out[i] = x0[i] + d[i];
      break;
    }
  }
  clip_into(out, clip_min, clip_max);
  return out;
}

AttackResult fgsm(const LossGradFn& loss, const Tensor& x, double epsilon, double clip_min,
                  double clip_max) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw DomainError("fgsm: epsilon must be >= 0");
  const auto lg = loss(x);
  require_finite(lg.grad);
  Tensor x_adv = x;
  for (std::size_t i = 0; i < x.size(); ++i) x_adv[i] = x[i] - epsilon * sign(lg.grad[i]);
  clip_into(x_adv, clip_min, clip_max);
  auto r = make_result(x, std::move(x_adv), epsilon, Norm::kLinf);
  r.steps_taken = 1;
  return r;
}

AttackResult fgm(const LossGradFn& loss, const Tensor& x, double epsilon, Norm norm,
                 double clip_min, double clip_max) {
  if (norm == Norm::kLinf) return fgsm(loss, x, epsilon, clip_min, clip_max);
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw DomainError("fgm: epsilon must be >= 0");
  const auto lg = loss(x);
  require_finite(lg.grad);
  const double n = lp_norm(lg.grad.values(), norm);
  if (n == 0.0) throw NumericError("fgm: zero gradient, the input is stationary");
  Tensor x_adv = x;
  for (std::size_t i = 0; i < x.size(); ++i) x_adv[i] = x[i] - epsilon * (lg.grad[i] / n);
  clip_into(x_adv, clip_min, clip_max);
  auto r = make_result(x, std::move(x_adv), epsilon, norm);
  r.steps_taken = 1;
  return r;
}

AttackResult iterative_attack(const LossGradFn& loss, const Tensor& x, const AttackConfig& cfg) {
  cfg.validate();
  const double step = cfg.effective_step();
  Tensor current = x;
  Tensor momentum(x.shape(), 0.0);
  int taken = 0;
  bool stalled = false;
  for (int t = 0; t < cfg.steps; ++t) {
    const auto lg = loss(current);
    require_finite(lg.grad);
    const double g1 = lp_norm(lg.grad.values(), Norm::kL1);
    if (g1 == 0.0) {
      stalled = true;
      break;
    }
    for (std::size_t i = 0; i < momentum.size(); ++i) {
      momentum[i] = cfg.momentum_decay * momentum[i] + lg.grad[i] / g1;
    }
    Tensor next = current;
    if (cfg.norm == Norm::kLinf) {
      for (std::size_t i = 0; i < next.size(); ++i) next[i] = current[i] - step * sign(momentum[i]);
    } else {
      const double n = lp_norm(momentum.values(), cfg.norm);
      if (n == 0.0) {
        stalled = true;
        break;
      }
      for (std::size_t i = 0; i < next.size(); ++i) next[i] = current[i] - step * (momentum[i] / n);
    }
    current = project_lp(x, next, cfg.epsilon, cfg.norm, cfg.clip_min, cfg.clip_max);
    ++taken;
  }
  auto r = make_result(x, std::move(current), cfg.epsilon, cfg.norm);
  r.steps_taken = taken;
  r.stalled = stalled;
  return r;
}

AttackResult soft_constraint_attack(const LossGradFn& loss, const Tensor& x,
                                    const AttackConfig& cfg) {
  cfg.validate();
  const double step = cfg.effective_step();
  auto objective_at = [&](const LossAndGrad& lg, const Tensor& point) {
    const double value = lg.value + cfg.soft_c * lp_distance(point, x, Norm::kL2);
    if (!std::isfinite(value)) throw NumericError("soft-constraint objective diverged");
    return value;
  };

  Tensor current = x;
  LossAndGrad lg = loss(current);
  require_finite(lg.grad);
  double best_value = objective_at(lg, current);
  Tensor best = current;
  std::vector<double> trace{best_value};
  for (int t = 0; t < cfg.steps; ++t) {
    const double dist = lp_distance(current, x, Norm::kL2);
    Tensor next = current;
    for (std::size_t i = 0; i < next.size(); ++i) {
      const double pull = dist > 0.0 ? cfg.soft_c * (current[i] - x[i]) / dist : 0.0;
      next[i] = current[i] - step * (lg.grad[i] + pull);
    }
    clip_into(next, cfg.clip_min, cfg.clip_max);
    lg = loss(next);
    require_finite(lg.grad);
    const double value = objective_at(lg, next);
    if (value < best_value) {
      best_value = value;
      best = next;
      trace.push_back(value);
    }
    current = std::move(next);
  }
  auto r = make_result(x, std::move(best), cfg.epsilon, Norm::kL2);
  r.steps_taken = cfg.steps;
  r.objective_trace = std::move(trace);
  return r;
}

// ---- model attacks ---------------------------------------------------------

BoundLoss adaptive_attack_loss(const Model& model, const Tensor& x, int target,
                               const TargetConcentration& tc) {
  TargetConcentration local = tc;
  local.num_classes = model.num_classes();
  const DirichletParams t = target_alpha(target, local, Domain::kIn);
  Tensor rows({x.rows(), model.num_classes()});
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t k = 0; k < model.num_classes(); ++k) rows.at(r, k) = t.alpha(k);
  }
  return loss_reverse_kl(model, x, rows);
}

namespace {

BoundLoss single_target_loss(const Model& model, const Tensor& x, int target, LossKind kind,
                             const TargetConcentration& tc) {
  if (kind == LossKind::kRklTargetDirichlet) return adaptive_attack_loss(model, x, target, tc);
  std::vector<int> labels(x.rows(), target);
  return loss_nll(model, x, labels);
}

Tensor as_batch(const Model& model, const Tensor& x) {
  if (x.rank() == 1 && x.size() == model.spec().input_dim) return x.reshaped({1, x.size()});
  return x;
}

}  // namespace

LossGradFn attack_objective(const Model& model, int target, LossKind kind, bool targeted,
                            const TargetConcentration& tc) {
  if (target < 0 || static_cast<std::size_t>(target) >= model.num_classes()) {
    throw DomainError("attack target " + std::to_string(target) + " out of range");
  }
  const double direction = targeted ? 1.0 : -1.0;
  return [&model, target, kind, tc, direction](const Tensor& x) {
    const Tensor batch = as_batch(model, x);
    const BoundLoss bound = single_target_loss(model, batch, target, kind, tc);
    const NodeId outputs[] = {bound.node};
    const auto eval = model.graph().forward(bound.bindings, outputs);
    Tensor grad = model.graph().grad_wrt_input(eval, bound.node, Model::kX);
    LossAndGrad out;
    out.value = direction * eval.value(bound.node)[0];
    for (auto& v : grad.values()) v *= direction;
    out.grad = grad.reshaped(x.shape());
    return out;
  };
}

void mark_success(const Model& model, AttackResult& result) {
  const int predicted = model.predict(as_batch(model, result.x_adv))[0];
  result.success =
      result.targeted ? predicted == result.target_class : predicted != result.target_class;
}

namespace {

AttackResult finish(const Model& model, AttackResult r, int target, const AttackConfig& cfg) {
  r.target_class = target;
  r.targeted = cfg.targeted;
  mark_success(model, r);
  return r;
}

}  // namespace

AttackResult fgsm(const Model& model, const Tensor& x, int target, const AttackConfig& cfg,
                  const TargetConcentration& tc) {
  const auto fn = attack_objective(model, target, cfg.loss_kind, cfg.targeted, tc);
  return finish(model, fgsm(fn, x, cfg.epsilon, cfg.clip_min, cfg.clip_max), target, cfg);
}

AttackResult fgm(const Model& model, const Tensor& x, int target, const AttackConfig& cfg,
                 const TargetConcentration& tc) {
  const auto fn = attack_objective(model, target, cfg.loss_kind, cfg.targeted, tc);
  return finish(model, fgm(fn, x, cfg.epsilon, cfg.norm, cfg.clip_min, cfg.clip_max), target, cfg);
}

AttackResult iterative_attack(const Model& model, const Tensor& x, int target,
                              const AttackConfig& cfg, const TargetConcentration& tc) {
  const auto fn = attack_objective(model, target, cfg.loss_kind, cfg.targeted, tc);
  return finish(model, iterative_attack(fn, x, cfg), target, cfg);
}

AttackResult soft_constraint_attack(const Model& model, const Tensor& x, int target,
                                    const AttackConfig& cfg, const TargetConcentration& tc) {
  const auto fn = attack_objective(model, target, cfg.loss_kind, cfg.targeted, tc);
  return finish(model, soft_constraint_attack(fn, x, cfg), target, cfg);
}

Tensor fgsm_batch(const Model& model, const Tensor& x, std::span<const int> targets,
                  std::span<const double> epsilons, LossKind kind, const TargetConcentration& tc,
                  double clip_min, double clip_max) {
  if (targets.size() != x.rows() || epsilons.size() != x.rows()) {
    throw ShapeError("fgsm_batch: targets and epsilons must match the batch size");
  }
  BoundLoss bound;
  if (kind == LossKind::kNllTarget) {
    bound = loss_nll(model, x, targets);
  } else {
    TargetConcentration local = tc;
    local.num_classes = model.num_classes();
    bound = loss_reverse_kl(model, x, target_alpha_rows(targets, local.beta_in, local.num_classes));
  }
  // Per-row gradients are independent; unit weights keep their scale.
  bound.bindings.find(Model::kRowWeight)->second = Tensor({x.rows(), 1}, 1.0);
  const NodeId outputs[] = {bound.node};
  const auto eval = model.graph().forward(bound.bindings, outputs);
  const Tensor grad = model.graph().grad_wrt_input(eval, bound.node, Model::kX);
  require_finite(grad);
  Tensor out = x;
  const std::size_t width = x.row_size();
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const std::size_t i = r * width + c;
      out[i] = std::clamp(x[i] - epsilons[r] * sign(grad[i]), clip_min, clip_max);
    }
  }
  return out;
}

}  // namespace dpn
