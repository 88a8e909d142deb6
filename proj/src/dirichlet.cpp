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

#include "dpn/dirichlet.hpp"

#include <algorithm>
#include <cmath>

#include "dpn/error.hpp"
#include "dpn/special_functions.hpp"

namespace dpn {

DirichletParams::DirichletParams(std::vector<double> alpha) : alpha_(std::move(alpha)), alpha0_(0.0) {
  if (alpha_.size() < 2) throw DomainError("Dirichlet needs at least two classes");
  for (double a : alpha_) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw DomainError("Dirichlet concentrations must be finite and > 0, got " + std::to_string(a));
    }
    alpha0_ += a;
  }
}

std::vector<double> DirichletParams::mean() const {
  std::vector<double> m(alpha_.size());
  for (std::size_t k = 0; k < m.size(); ++k) m[k] = alpha_[k] / alpha0_;
  return m;
}

double dirichlet_kl(const DirichletParams& a, const DirichletParams& b) {
  if (a.num_classes() != b.num_classes()) {
    throw ShapeError("dirichlet_kl: class counts differ (" + std::to_string(a.num_classes()) +
                     " vs " + std::to_string(b.num_classes()) + ")");
  }
  if (a == b) return 0.0;
  const double psi_a0 = digamma(a.alpha0());
  double kl = log_gamma(a.alpha0()) - log_gamma(b.alpha0());
  for (std::size_t k = 0; k < a.num_classes(); ++k) {
    const double ak = a.alpha(k);
    const double bk = b.alpha(k);
    kl += log_gamma(bk) - log_gamma(ak) + (ak - bk) * (digamma(ak) - psi_a0);
  }
  // Rounding can leave a tiny negative residue for nearly equal arguments.
  return std::max(kl, 0.0);
}

double predictive_entropy(const DirichletParams& alpha) {
  double h = 0.0;
  for (double a : alpha.alpha()) {
    const double p = a / alpha.alpha0();
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double expected_entropy(const DirichletParams& alpha) {
  const double psi0 = digamma(alpha.alpha0() + 1.0);
  double h = 0.0;
  for (double a : alpha.alpha()) {
    h -= a / alpha.alpha0() * (digamma(a + 1.0) - psi0);
  }
  return h;
}

double mutual_information(const DirichletParams& alpha) {
  return predictive_entropy(alpha) - expected_entropy(alpha);
}

double differential_entropy(const DirichletParams& alpha) {
  const double psi0 = digamma(alpha.alpha0());
  double h = -log_gamma(alpha.alpha0());
  for (double a : alpha.alpha()) {
    h += log_gamma(a) - (a - 1.0) * (digamma(a) - psi0);
  }
  return h;
}

double max_prob(const DirichletParams& alpha) {
  return *std::max_element(alpha.alpha().begin(), alpha.alpha().end()) / alpha.alpha0();
}

double sample_gamma(double shape, std::mt19937_64& rng) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw DomainError("sample_gamma: shape must be finite and > 0");
  }
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  if (shape < 1.0) {
    const double u = uniform(rng);
    return sample_gamma(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform(rng);
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::vector<double> sample_dirichlet(const DirichletParams& alpha, std::mt19937_64& rng) {
  std::vector<double> draw(alpha.num_classes());
  for (;;) {
    double total = 0.0;
    for (std::size_t k = 0; k < draw.size(); ++k) {
      draw[k] = sample_gamma(alpha.alpha(k), rng);
      total += draw[k];
    }
    if (total > 0.0) {
      for (auto& v : draw) v /= total;
      return draw;
    }
  }
}

}  // namespace dpn
