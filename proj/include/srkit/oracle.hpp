// Copyright 2026 The srkit Authors
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

// Exhaustive ground truth for the stochastic kernels. Everything here is
// exact rational arithmetic; no floating point is involved.

#ifndef SRKIT_ORACLE_HPP_
#define SRKIT_ORACLE_HPP_

#include <cstdint>
#include <span>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "srkit/format.hpp"
#include "srkit/kernels.hpp"
#include "srkit/working_real.hpp"

namespace srkit {

using Rational = boost::multiprecision::cpp_rational;

Rational to_rational(const WorkingReal& x);
/// "num/den", always with an explicit denominator.
std::string to_string(const Rational& v);

inline constexpr unsigned kMaxOracleRandomBits = 20;
inline constexpr unsigned kMaxEnumerationBits = 24;

struct DistributionReport {
  WorkingReal x;
  WorkingReal lo;
  WorkingReal hi;
  bool exact = false;
  Rational q;
  /// Probability of returning hi (the candidate toward +infinity).
  Rational p_up;
  Rational mean;
  /// mean - x.
  Rational bias;
  unsigned r_used = 0;
  std::string variant;

  std::string to_json(int indent = 2) const;
};

/// Exact output distribution of one rounding. Fixed-width variants are
/// enumerated over all 2^r draws through the kernels themselves (r <= 20);
/// exact SR is answered analytically with p_up = q(x). The draw range can
/// be split over `threads` workers without changing the result.
DistributionReport distribution(const FloatFormat& fmt, const WorkingReal& x,
                                const SrConfig& cfg, unsigned threads = 1);

struct ExpectedSum {
  Rational mean;
  Rational variance;
  Rational exact_sum;
  /// Number of joint draw paths covered (2^(n r), or 2^n for exact SR).
  BigInt paths = 0;
  /// Distinct final values reachable.
  std::size_t outcomes = 0;
};

/// Expected result of recursive summation s = round(a1), s = round(s + ai)
/// over every joint draw path. Paths reaching the same partial sum are
/// merged with their exact weights, which keeps the work proportional to
/// the number of distinct partial sums. Budget: n * r <= 24 (n <= 24 for
/// exact SR).
ExpectedSum expected_sum_enumeration(std::span<const WorkingReal> addends,
                                     const FloatFormat& fmt, const SrConfig& cfg);

}  // namespace srkit

#endif  // SRKIT_ORACLE_HPP_
