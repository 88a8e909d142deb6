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

#include "dpn/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <thread>

#include "dpn/attacks.hpp"
#include "dpn/detection.hpp"
#include "dpn/dirichlet.hpp"
#include "dpn/error.hpp"
#include "dpn/model.hpp"
#include "dpn/special_functions.hpp"

namespace dpn::oracle {
namespace {

#include "special_refs.inc"

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

// Welford accumulator.
struct Running {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    ++n;
    const double d = v - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (v - mean);
  }
  McEstimate estimate() const {
    const double var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
    return {mean, std::sqrt(var / static_cast<double>(n))};
  }
};

double log_normalizer(std::span<const double> alpha) {
  double a0 = 0.0;
  double out = 0.0;
  for (double a : alpha) {
    a0 += a;
    out -= std::lgamma(a);
  }
  return out + std::lgamma(a0);
}

std::mt19937_64 seeded(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

DirichletMc mc_dirichlet(std::span<const double> a, std::span<const double> b, std::size_t n,
                         std::uint64_t seed) {
  if (a.size() != b.size() || a.size() < 2) throw ShapeError("mc_dirichlet: bad dimensions");
  if (n < 2) throw DomainError("mc_dirichlet: need at least two samples");
  const std::size_t k = a.size();
  std::mt19937_64 rng = seeded(seed, 0);
  std::vector<std::gamma_distribution<double>> gammas;
  for (double v : a) gammas.emplace_back(v, 1.0);
  const double norm_a = log_normalizer(a);
  const double norm_b = log_normalizer(b);
  std::vector<double> log_pi(k);
  Running kl, ent, dent;
  for (std::size_t s = 0; s < n; ++s) {
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double g = gammas[i](rng);
      if (!(g > 0.0)) throw NumericError("mc_dirichlet: gamma draw underflowed to zero");
      log_pi[i] = std::log(g);
      total += g;
    }
    const double log_total = std::log(total);
    double lp_a = norm_a;
    double lp_b = norm_b;
    double h = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double lp = log_pi[i] - log_total;
      lp_a += (a[i] - 1.0) * lp;
      lp_b += (b[i] - 1.0) * lp;
      h -= std::exp(lp) * lp;
    }
    kl.add(lp_a - lp_b);
    ent.add(h);
    dent.add(-lp_a);
  }
  return {kl.estimate(), ent.estimate(), dent.estimate()};
}

double brute_force_auroc(std::span<const double> anomalous, std::span<const double> nominal) {
  if (anomalous.empty() || nominal.empty()) throw DomainError("brute_force_auroc: empty input");
  // Twice the pairwise score, kept integral so the division is the only rounding.
  std::uint64_t twice = 0;
  for (double x : anomalous) {
    for (double y : nominal) twice += x > y ? 2 : (x == y ? 1 : 0);
  }
  return static_cast<double>(twice) /
         static_cast<double>(2 * std::uint64_t{anomalous.size()} * nominal.size());
}

std::span<const SpecialRef> special_grid() { return kSpecialGrid; }
SpecialRef digamma_10_5() { return kDigamma10_5; }
SpecialRef log_gamma_123_4() { return kLogGamma123_4; }

CheckResult check_dirichlet_mc(std::size_t pairs, std::size_t samples, std::uint64_t seed) {
  const auto start = Clock::now();
  struct Case {
    std::vector<double> a, b;
    DirichletMc mc;
    double kl = 0, ent = 0, dent = 0;
  };
  std::vector<Case> cases(pairs);
  std::mt19937_64 rng = seeded(seed, 0);
  std::uniform_int_distribution<int> dim(2, 6);
  std::uniform_real_distribution<double> log_alpha(std::log(0.1), std::log(100.0));
  for (auto& c : cases) {
    const int k = dim(rng);
    for (int i = 0; i < k; ++i) c.a.push_back(std::exp(log_alpha(rng)));
    for (int i = 0; i < k; ++i) c.b.push_back(std::exp(log_alpha(rng)));
  }
  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < cases.size(); i += workers) {
        cases[i].mc = mc_dirichlet(cases[i].a, cases[i].b, samples, seed + 1 + i);
      }
    });
  }
  for (auto& t : pool) t.join();

  std::size_t failures = 0;
  double worst = 0.0;
  double sum_z2 = 0.0;
  std::string first_failure;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    auto& c = cases[i];
    const DirichletParams a(c.a), b(c.b);
    const struct {
      const char* name;
      double closed;
      McEstimate mc;
    } rows[] = {{"kl", dirichlet_kl(a, b), c.mc.kl},
                {"expected_entropy", expected_entropy(a), c.mc.expected_entropy},
                {"differential_entropy", differential_entropy(a), c.mc.differential_entropy}};
    for (const auto& r : rows) {
      const double z = std::abs(r.closed - r.mc.mean) / r.mc.se;
      worst = std::max(worst, z);
      sum_z2 += z * z;
      if (!(z <= 3.0)) {
        ++failures;
        if (first_failure.empty()) {
          first_failure = format(" first: pair %zu %s closed=%.10g mc=%.10g se=%.3g", i, r.name,
                                 r.closed, r.mc.mean, r.mc.se);
        }
      }
    }
  }
  CheckResult out;
  out.name = "dirichlet_mc";
  out.seconds = seconds_since(start);
  out.pass = failures == 0;
  // Calibration: mean z^2 is about 1 when the closed forms are unbiased; the
  // count of 3-SE exceedances expected from sampling noise alone is n * 0.0027.
  const double n = 3.0 * static_cast<double>(pairs);
  out.detail = format("%zu pairs x 3 quantities, %zu samples: %zu outside 3 SE (%.2f expected by "
                      "chance), worst |z| = %.3f, mean z^2 = %.3f",
                      pairs, samples, failures, n * 0.0026998, worst, sum_z2 / n) +
               first_failure;
  return out;
}

CheckResult check_special_functions() {
  const auto start = Clock::now();
  double worst_psi = 0.0;
  double worst_lg = 0.0;
  auto visit = [&](const SpecialRef& r) {
    worst_psi = std::max(worst_psi, std::abs(digamma(r.x) - r.digamma));
    worst_lg = std::max(worst_lg, std::abs(log_gamma(r.x) - r.log_gamma) / std::abs(r.log_gamma));
  };
  for (const auto& r : special_grid()) visit(r);
  visit(digamma_10_5());
  visit(log_gamma_123_4());
  CheckResult out;
  out.name = "special_functions";
  out.seconds = seconds_since(start);
  out.pass = worst_psi <= 1e-12 && worst_lg <= 1e-12;
  out.detail = format("%zu grid points + 2 spot values: max |digamma err| = %.3g, "
                      "max log_gamma rel err = %.3g (bound 1e-12)",
                      special_grid().size(), worst_psi, worst_lg);
  return out;
}

namespace {

ModelSpec random_spec(std::mt19937_64& rng, std::size_t max_dim = 5) {
  std::uniform_int_distribution<std::size_t> dim(2, max_dim);
  std::uniform_int_distribution<std::size_t> classes(2, 5);
  std::uniform_int_distribution<std::size_t> width(3, 6);
  std::uniform_int_distribution<int> depth(1, 2);
  std::bernoulli_distribution coin(0.5);
  ModelSpec spec;
  spec.input_dim = dim(rng);
  spec.num_classes = classes(rng);
  spec.hidden.clear();
  for (int i = depth(rng); i > 0; --i) spec.hidden.push_back(width(rng));
  spec.activation = coin(rng) ? Activation::kRelu : Activation::kLeakyRelu;
  spec.leaky_slope = 0.1;
  return spec;
}

Tensor random_inputs(std::mt19937_64& rng, std::size_t rows, std::size_t dim) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tensor x({rows, dim});
  for (auto& v : x.values()) v = u(rng);
  return x;
}

std::vector<int> random_labels(std::mt19937_64& rng, std::size_t rows, std::size_t k) {
  std::uniform_int_distribution<int> c(0, static_cast<int>(k) - 1);
  std::vector<int> out(rows);
  for (auto& v : out) v = c(rng);
  return out;
}

// Zero-initialized biases put rows whose previous layer is entirely dead
// exactly on a ReLU kink, where central differences are meaningless; random
// biases keep every check at a differentiable point.
void randomize_parameters(Model& model, std::mt19937_64& rng) {
  std::normal_distribution<double> bias(0.0, 0.5);
  for (const auto& [name, value] : model.parameters()) {
    if (!name.ends_with(".bias")) continue;
    for (auto& v : model.graph().parameter_value(name).values()) v = bias(rng);
  }
}

}  // namespace

CheckResult check_loss_gradients(std::size_t models, std::uint64_t seed) {
  const auto start = Clock::now();
  constexpr double kH = 1e-5;
  constexpr double kBound = 1e-4;
  std::mt19937_64 rng = seeded(seed, 0);
  std::uniform_real_distribution<double> gamma_dist(0.5, 30.0);
  std::size_t checks = 0;
  std::size_t failures = 0;
  double worst = 0.0;
  std::string worst_name;
  for (std::size_t m = 0; m < models; ++m) {
    const ModelSpec spec = random_spec(rng);
    Model model(spec, rng());
    randomize_parameters(model, rng);
    const std::size_t k = spec.num_classes;
    const Tensor x = random_inputs(rng, 3, spec.input_dim);
    const auto labels = random_labels(rng, 3, k);
    const Tensor ood = random_inputs(rng, 2, spec.input_dim);
    const auto ood_labels = random_labels(rng, 2, k);
    const TargetConcentration tc{100.0, 1.0, k};
    const Tensor in_target = target_alpha_rows(labels, tc.beta_in, k);

    JointBatch jb;
    jb.in_x = x;
    jb.in_labels = labels;
    jb.ood_x = ood;
    jb.ood_target_alpha = target_alpha_rows(ood_labels, tc.beta_ood, k);
    const LossWeights w{gamma_dist(rng)};
    int target = static_cast<int>(rng() % k);

    const std::pair<const char*, BoundLoss> losses[] = {
        {"nll", loss_nll(model, x, labels)},
        {"forward_kl", loss_forward_kl(model, x, in_target)},
        {"reverse_kl", loss_reverse_kl(model, x, in_target)},
        {"joint_forward", loss_joint(model, jb, tc, w, Divergence::kForward)},
        {"joint_reverse", loss_joint(model, jb, tc, w, Divergence::kReverse)},
        {"adaptive", adaptive_attack_loss(model, x.gather_rows(std::vector<std::size_t>{0}), target, tc)},
    };
    for (const auto& [name, loss] : losses) {
      const double err = finite_diff_check(model.graph(), loss.bindings, loss.node, kH);
      ++checks;
      if (err > worst) {
        worst = err;
        worst_name = format("%s on model %zu", name, m);
      }
      if (!(err < kBound)) ++failures;
    }
  }
  CheckResult out;
  out.name = "loss_gradients";
  out.seconds = seconds_since(start);
  out.pass = failures == 0;
  out.detail = format("%zu checks on %zu models (h = 1e-5): %zu at or above 1e-4, worst %.3g (%s)",
                      checks, models, failures, worst, worst_name.c_str());
  return out;
}

CheckResult check_attack_constraints(std::size_t invocations, std::uint64_t seed) {
  const auto start = Clock::now();
  std::mt19937_64 rng = seeded(seed, 0);
  std::vector<Model> pool;
  for (int i = 0; i < 16; ++i) {
    ModelSpec spec = random_spec(rng, 8);
    spec.hidden = {8, 8};
    pool.emplace_back(spec, rng());
  }
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::uniform_int_distribution<int> kind(0, 3);
  std::uniform_int_distribution<int> norm_dist(0, 2);
  std::uniform_int_distribution<int> steps(1, 10);
  std::uniform_real_distribution<double> log_eps(std::log(1e-3), std::log(1.0));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);

  std::size_t violations = 0;
  std::size_t stationary = 0;
  double worst_excess = -1.0;
  for (std::size_t i = 0; i < invocations; ++i) {
    const Model& model = pool[pick(rng)];
    const std::size_t k = model.num_classes();
    const Tensor x = random_inputs(rng, 1, model.spec().input_dim);
    const int target = static_cast<int>(rng() % k);
    AttackConfig cfg;
    cfg.epsilon = std::exp(log_eps(rng));
    cfg.norm = static_cast<Norm>(norm_dist(rng));
    cfg.steps = steps(rng);
    cfg.momentum_decay = coin(rng) ? 1.0 : 0.0;
    cfg.step_size = coin(rng) ? 0.0 : cfg.epsilon * unit(rng);
    cfg.loss_kind = coin(rng) ? LossKind::kNllTarget : LossKind::kRklTargetDirichlet;
    cfg.targeted = coin(rng);
    AttackResult r;
    try {
      switch (kind(rng)) {
        case 0:
          cfg.norm = Norm::kLinf;
          r = fgsm(model, x, target, cfg);
          break;
        case 1: r = fgm(model, x, target, cfg); break;
        default: r = iterative_attack(model, x, target, cfg); break;
      }
    } catch (const NumericError&) {
      ++stationary;  // documented error for a zero gradient
      continue;
    }
    const double delta = lp_distance(r.x_adv, x, cfg.norm);
    worst_excess = std::max(worst_excess, delta - cfg.epsilon);
    bool ok = delta <= cfg.epsilon + 1e-9;
    for (double v : r.x_adv.values()) ok = ok && v >= 0.0 && v <= 1.0;
    if (!ok) ++violations;
  }

  std::size_t mismatches = 0;
  constexpr std::size_t kCollapse = 1000;
  for (std::size_t i = 0; i < kCollapse; ++i) {
    const Model& model = pool[pick(rng)];
    const Tensor x = random_inputs(rng, 1, model.spec().input_dim);
    const int target = static_cast<int>(rng() % model.num_classes());
    AttackConfig cfg;
    cfg.norm = Norm::kLinf;
    cfg.epsilon = std::exp(log_eps(rng));
    cfg.steps = 1;
    cfg.momentum_decay = 0.0;
    cfg.step_size = cfg.epsilon;
    cfg.loss_kind = coin(rng) ? LossKind::kNllTarget : LossKind::kRklTargetDirichlet;
    const auto a = fgsm(model, x, target, cfg);
    const auto b = iterative_attack(model, x, target, cfg);
    if (!(a.x_adv == b.x_adv)) ++mismatches;
  }

  CheckResult out;
  out.name = "attack_constraints";
  out.seconds = seconds_since(start);
  out.pass = violations == 0 && mismatches == 0;
  out.detail = format("%zu invocations: %zu violations, %zu stationary (zero-gradient error), "
                      "max ||x_adv - x||_p - eps = %.3g; one-step BIM vs FGSM: %zu/%zu mismatches",
                      invocations, violations, stationary, worst_excess, mismatches, kCollapse);
  return out;
}

CheckResult check_degenerate_cases(std::uint64_t seed) {
  const auto start = Clock::now();
  std::mt19937_64 rng = seeded(seed, 0);
  std::size_t failures = 0;
  std::ostringstream notes;

  // gamma = 0: the joint loss ignores the out-of-domain rows entirely.
  bool joint_ok = true;
  for (int trial = 0; trial < 20; ++trial) {
    const ModelSpec spec = random_spec(rng);
    Model model(spec, rng());
    const std::size_t k = spec.num_classes;
    JointBatch jb;
    jb.in_x = random_inputs(rng, 4, spec.input_dim);
    jb.in_labels = random_labels(rng, 4, k);
    jb.ood_x = random_inputs(rng, 4, spec.input_dim);
    jb.ood_target_alpha = flat_alpha_rows(4, k);
    const TargetConcentration tc{100.0, 1.0, k};
    const Tensor target = target_alpha_rows(jb.in_labels, tc.beta_in, k);
    for (auto div : {Divergence::kForward, Divergence::kReverse}) {
      const auto joint = loss_joint(model, jb, tc, {0.0}, div).evaluate();
      const auto plain = (div == Divergence::kForward ? loss_forward_kl(model, jb.in_x, target)
                                                      : loss_reverse_kl(model, jb.in_x, target))
                             .evaluate();
      joint_ok = joint_ok && joint.value == plain.value &&
                 joint.gradients.parameters == plain.gradients.parameters;
    }
  }
  failures += !joint_ok;
  notes << "gamma=0 joint == in-domain loss: " << (joint_ok ? "yes" : "NO");

  // Soft constraint with c = 1e6.
  double worst_soft = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const ModelSpec spec = random_spec(rng);
    Model model(spec, rng());
    const Tensor x = random_inputs(rng, 1, spec.input_dim);
    AttackConfig cfg;
    cfg.soft_c = 1e6;
    cfg.steps = 50;
    cfg.step_size = 0.01;
    const auto r = soft_constraint_attack(model, x, static_cast<int>(rng() % spec.num_classes), cfg);
    worst_soft = std::max(worst_soft, lp_distance(r.x_adv, x, Norm::kL2));
  }
  const bool soft_ok = worst_soft < 1e-3;
  failures += !soft_ok;
  notes << format("; soft c=1e6 max ||x_adv - x||_2 = %.3g", worst_soft);

  // epsilon = 0 FGSM.
  bool identity_ok = true;
  for (int trial = 0; trial < 20; ++trial) {
    const ModelSpec spec = random_spec(rng);
    Model model(spec, rng());
    const Tensor x = random_inputs(rng, 1, spec.input_dim);
    AttackConfig cfg;
    cfg.epsilon = 0.0;
    identity_ok = identity_ok && fgsm(model, x, 0, cfg).x_adv == x;
  }
  failures += !identity_ok;
  notes << "; eps=0 FGSM identity: " << (identity_ok ? "yes" : "NO");

  CheckResult out;
  out.name = "degenerate_cases";
  out.seconds = seconds_since(start);
  out.pass = failures == 0;
  out.detail = notes.str();
  return out;
}

CheckResult check_auroc(std::size_t instances, std::uint64_t seed) {
  const auto start = Clock::now();
  std::mt19937_64 rng = seeded(seed, 0);
  std::uniform_int_distribution<std::size_t> size(1, 500);
  std::bernoulli_distribution tied(0.5);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> small(0, 9);
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < instances; ++i) {
    const bool ties = tied(rng);
    const double shift = normal(rng);
    auto draw = [&](double offset) {
      std::vector<double> v(size(rng));
      for (auto& s : v) s = ties ? static_cast<double>(small(rng)) : normal(rng) + offset;
      return v;
    };
    const auto anomalous = draw(shift);
    const auto nominal = draw(0.0);
    if (auroc(anomalous, nominal) != brute_force_auroc(anomalous, nominal)) ++mismatches;
  }
  CheckResult out;
  out.name = "auroc_exact";
  out.seconds = seconds_since(start);
  out.pass = mismatches == 0;
  out.detail = format("%zu instances (n <= 500, half with heavy ties): %zu inexact", instances,
                      mismatches);
  return out;
}

std::vector<CheckResult> run_suite() {
  return {check_dirichlet_mc(),       check_special_functions(), check_loss_gradients(),
          check_attack_constraints(), check_degenerate_cases(),  check_auroc()};
}

}  // namespace dpn::oracle
