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

namespace dpn {

/// Digamma function psi(x) = d/dx ln Gamma(x) for x > 0.
///
/// Upward recurrence psi(x) = psi(x+1) - 1/x until x >= 10, then the
/// asymptotic expansion. Absolute error below 1e-12 on [1e-3, 1e6].
/// Throws DomainError for x <= 0 or NaN.
double digamma(double x);

/// Trigamma function psi'(x) for x > 0; same scheme as digamma.
double trigamma(double x);

/// ln Gamma(x) for x > 0, relative error below 1e-12 on [1e-3, 1e6].
///
/// Arguments are shifted into [1.5, 2.5], where a Taylor series about 2 with
/// zeta(k)-1 coefficients is exact to rounding; x >= 10 uses Stirling's series.
double log_gamma(double x);

}  // namespace dpn
