// Copyright 2026 The syntax-smc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small log-space helpers. -infinity stands for an exact zero.

#ifndef SYNTAX_SMC_LOGMATH_H_
#define SYNTAX_SMC_LOGMATH_H_

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace syntax_smc {

template <typename T>
inline constexpr T kNegInf = -std::numeric_limits<T>::infinity();

// log(exp(a) + exp(b))
template <typename T>
T log_add(T a, T b) {
  if (a == kNegInf<T>) return b;
  if (b == kNegInf<T>) return a;
  const T hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

template <typename T>
T log_sum_exp(std::span<const T> values) {
  T hi = kNegInf<T>;
  for (T v : values) hi = std::max(hi, v);
  if (hi == kNegInf<T>) return hi;
  T total = 0;
  for (T v : values) total += std::exp(v - hi);
  return hi + std::log(total);
}

inline double log_sum_exp(std::span<const double> values) {
  return log_sum_exp<double>(values);
}

// Zero maps to -infinity without a floating-point exception.
template <typename T>
T safe_log(T p) {
  return p > 0 ? std::log(p) : kNegInf<T>;
}

}  // namespace syntax_smc

#endif  // SYNTAX_SMC_LOGMATH_H_
