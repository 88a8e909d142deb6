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

#include <cstddef>
#include <random>
#include <span>
#include <vector>

namespace dpn {

/// Concentration parameters of a Dirichlet over K >= 2 classes.
class DirichletParams {
 public:
  /// Throws DomainError unless K >= 2 and every entry is finite and > 0.
  explicit DirichletParams(std::vector<double> alpha);

  std::span<const double> alpha() const { return alpha_; }
  double alpha(std::size_t k) const { return alpha_[k]; }
  /// Precision: sum of the concentrations.
  double alpha0() const { return alpha0_; }
  std::size_t num_classes() const { return alpha_.size(); }
  /// Expected categorical distribution alpha / alpha0.
  std::vector<double> mean() const;

  friend bool operator==(const DirichletParams& a, const DirichletParams& b) {
    return a.alpha_ == b.alpha_;
  }

 private:
  std::vector<double> alpha_;
  double alpha0_;
};

/// KL(Dir(a) || Dir(b)). Throws ShapeError when the class counts differ.
double dirichlet_kl(const DirichletParams& a, const DirichletParams& b);

/// Entropy of the expected categorical, H[E[pi]]. Total uncertainty.
double predictive_entropy(const DirichletParams& alpha);

/// Expected entropy of the categorical, E[H[pi]]. Data uncertainty.
double expected_entropy(const DirichletParams& alpha);

/// predictive_entropy - expected_entropy. Knowledge uncertainty.
double mutual_information(const DirichletParams& alpha);

/// Differential entropy of the Dirichlet density on the simplex.
double differential_entropy(const DirichletParams& alpha);

double max_prob(const DirichletParams& alpha);

/// Gamma(shape, 1) draw: Marsaglia-Tsang for shape >= 1, with the
/// U^(1/shape) boost below 1.
double sample_gamma(double shape, std::mt19937_64& rng);

/// Dirichlet draw via normalized Gamma variates.
std::vector<double> sample_dirichlet(const DirichletParams& alpha, std::mt19937_64& rng);

}  // namespace dpn
