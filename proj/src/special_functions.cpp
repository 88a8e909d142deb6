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

#include "dpn/special_functions.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dpn/error.hpp"

namespace dpn {
namespace {

constexpr double kAsymptoticThreshold = 10.0;

// B_2, B_4, ..., B_20.
constexpr std::array<double, 10> kBernoulli = {
    1.0 / 6.0,       -1.0 / 30.0,   1.0 / 42.0,          -1.0 / 30.0,
    5.0 / 66.0,      -691.0 / 2730.0, 7.0 / 6.0,         -3617.0 / 510.0,
    43867.0 / 798.0, -174611.0 / 330.0};

// zeta(k) - 1 for k = 2..31.
constexpr std::array<double, 30> kZetaMinusOne = {
    0.6449340668482264,    0.2020569031595943,     0.08232323371113819,
    0.03692775514336993,   0.01734306198444914,    0.008349277381922827,
    0.00407735619794434,   0.0020083928260822143,  0.0009945751278180853,
    0.0004941886041194645, 0.0002460865533080483,  0.00012271334757848915,
    6.124813505870483e-05, 3.058823630702049e-05,  1.528225940865187e-05,
    7.637197637899763e-06, 3.81729326499984e-06,   1.908212716553939e-06,
    9.539620338727962e-07, 4.769329867878064e-07,  2.38450502727733e-07,
    1.1921992596531106e-07, 5.960818905125948e-08, 2.980350351465228e-08,
    1.4901554828365043e-08, 7.45071178983543e-09,  3.725334024788457e-09,
    1.862659723513049e-09, 9.313274324196682e-10,  4.656629065033784e-10};

void require_positive(double x, const char* fn) {
  if (!(x > 0.0)) {
    throw DomainError(std::string(fn) + ": argument must be > 0, got " + std::to_string(x));
  }
}

// ln Gamma(2 + z) for |z| <= 0.5.
double log_gamma_near_two(double z) {
  double sum = 0.0;
  double power = -z;
  for (std::size_t i = 0; i < kZetaMinusOne.size(); ++i) {
    power *= -z;
    const double k = static_cast<double>(i + 2);
    sum += kZetaMinusOne[i] * power / k;
  }
  return (1.0 - std::numbers::egamma) * z + sum;
}

double log_gamma_stirling(double x) {
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = 0.0;
  double power = inv;
  for (std::size_t i = 0; i < kBernoulli.size(); ++i) {
    const double k2 = 2.0 * static_cast<double>(i + 1);
    series += kBernoulli[i] / (k2 * (k2 - 1.0)) * power;
    power *= inv2;
  }
  return (x - 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi) + series;
}

}  // namespace

double digamma(double x) {
  require_positive(x, "digamma");
  if (std::isinf(x)) return x;
  double shift = 0.0;
  while (x < kAsymptoticThreshold) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  const double inv2 = 1.0 / (x * x);
  double series = 0.0;
  double power = inv2;
  for (std::size_t i = 0; i < kBernoulli.size(); ++i) {
    const double k2 = 2.0 * static_cast<double>(i + 1);
    series += kBernoulli[i] / k2 * power;
    power *= inv2;
  }
  return std::log(x) - 0.5 / x - series + shift;
}

double trigamma(double x) {
  require_positive(x, "trigamma");
  if (std::isinf(x)) return 0.0;
  double shift = 0.0;
  while (x < kAsymptoticThreshold) {
    shift += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = 0.0;
  double power = inv2 * inv;
  for (double b : kBernoulli) {
    series += b * power;
    power *= inv2;
  }
  return inv + 0.5 * inv2 + series + shift;
}

double log_gamma(double x) {
  require_positive(x, "log_gamma");
  if (std::isinf(x)) return x;
  if (x >= kAsymptoticThreshold) return log_gamma_stirling(x);
  if (x < 0.5) {
    // ln Gamma(x) = ln Gamma(x + 1) - ln x, with x + 1 in [1, 1.5).
    return log_gamma(x + 1.0) - std::log(x);
  }
  if (x < 1.5) {
    // x + 1 lands in [1.5, 2.5); log1p keeps precision around x = 1.
    return log_gamma_near_two(x - 1.0) - std::log1p(x - 1.0);
  }
  if (x <= 2.5) return log_gamma_near_two(x - 2.0);
  double product = 1.0;
  while (x > 2.5) {
    x -= 1.0;
    product *= x;
  }
  return log_gamma_near_two(x - 2.0) + std::log(product);
}

}  // namespace dpn
