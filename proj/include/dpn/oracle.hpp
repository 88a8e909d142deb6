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

// Independent reference computations used to validate the library: Monte
// Carlo estimators built only on the standard library, frozen
// arbitrary-precision special-function values, a quadratic-time AUROC, and
// the suite checks that run them.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dpn::oracle {

struct McEstimate {
  double mean = 0.0;
  /// Standard error of the mean.
  double se = 0.0;
};

struct DirichletMc {
  McEstimate kl;                    // KL(Dir(a) || Dir(b))
  McEstimate expected_entropy;      // E_{pi ~ Dir(a)} H[pi]
  McEstimate differential_entropy;  // -E_{pi ~ Dir(a)} ln p_a(pi)
};

/// All three estimates from the same n draws of Dir(a), sampled as
/// normalized std::gamma_distribution variates and scored with std::lgamma.
DirichletMc mc_dirichlet(std::span<const double> a, std::span<const double> b, std::size_t n,
                         std::uint64_t seed);

/// Mean of 1[a > n] + 1[a == n] / 2 over all pairs.
double brute_force_auroc(std::span<const double> anomalous, std::span<const double> nominal);

struct SpecialRef {
  double x;
  double digamma;
  double log_gamma;
};

/// 200 log-spaced points over [1e-3, 1e6] with 50-digit reference values.
std::span<const SpecialRef> special_grid();
SpecialRef digamma_10_5();
SpecialRef log_gamma_123_4();

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

/// Closed-form KL, expected entropy and differential entropy against the MC
/// estimators, within 3 standard errors, on random pairs with entries
/// log-uniform in [0.1, 100].
CheckResult check_dirichlet_mc(std::size_t pairs = 50, std::size_t samples = 1'000'000,
                               std::uint64_t seed = 20260101);

/// digamma within 1e-12 absolute and log_gamma within 1e-12 relative on the
/// reference grid and spot values.
CheckResult check_special_functions();

/// Finite-difference checks (h = 1e-5, bound 1e-4) of every loss on random
/// small models.
CheckResult check_loss_gradients(std::size_t models = 100, std::uint64_t seed = 20260102);

/// Random hard-constraint attacks must stay inside the epsilon ball and the
/// input domain; one-step BIM must reproduce FGSM bit for bit.
CheckResult check_attack_constraints(std::size_t invocations = 10'000,
                                     std::uint64_t seed = 20260103);

/// gamma = 0 joint loss equals the in-domain loss, a huge soft-constraint
/// weight pins the input, and epsilon = 0 FGSM is the identity.
CheckResult check_degenerate_cases(std::uint64_t seed = 20260104);

/// Exact agreement of the rank-based AUROC with the pairwise count.
CheckResult check_auroc(std::size_t instances = 100, std::uint64_t seed = 20260105);

/// Every check above with default arguments.
std::vector<CheckResult> run_suite();

}  // namespace dpn::oracle
