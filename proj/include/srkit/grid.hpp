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

#ifndef SRKIT_GRID_HPP_
#define SRKIT_GRID_HPP_

#include <cstdint>

#include "srkit/format.hpp"
#include "srkit/working_real.hpp"

namespace srkit {

/// The two format values enclosing x. lo <= x <= hi; when exact, lo = hi = x.
struct RoundingCandidates {
  WorkingReal lo;
  WorkingReal hi;
  bool exact = false;
};

/// Exact q(x) = (x - lo) / (hi - lo) as a reduced fraction in [0, 1).
/// The denominator is always a power of two.
struct QFraction {
  BigInt numerator = 0;
  BigInt denominator = 1;

  bool is_zero() const { return numerator.is_zero(); }
  bool operator==(const QFraction&) const = default;
};

// All of the following require a finite x with |x| <= max_finite(fmt) and
// throw DomainError / OverflowRangeError otherwise.

RoundingCandidates neighbors(const FloatFormat& fmt, const WorkingReal& x);
QFraction q_fraction(const FloatFormat& fmt, const WorkingReal& x);
/// Grid spacing at x.
WorkingReal ulp(const FloatFormat& fmt, const WorkingReal& x);

bool is_representable(const FloatFormat& fmt, const WorkingReal& x);

/// Standard sign | biased exponent | trailing significand packing.
/// Throws EncodingError for values not in fmt or formats without a layout.
std::uint64_t encode_bits(const FloatFormat& fmt, const WorkingReal& x);
WorkingReal decode_bits(const FloatFormat& fmt, std::uint64_t bits);

/// Nearest-even binary64 value; for reporting and statistics only.
double to_double(const WorkingReal& x);

namespace detail {

/// Exponent of the grid spacing for a nonnegative magnitude. Below the
/// normal range this is the subnormal spacing, or emin when the format
/// flushes (its only candidates there are 0 and 2^emin).
std::int64_t quantum_exponent(const FloatFormat& fmt, const WorkingReal& magnitude);

/// magnitude / 2^q split as high + frac_num / 2^frac_bits with
/// 0 <= frac_num < 2^frac_bits. frac_bits == 0 means the split is exact.
struct ScaledMagnitude {
  BigInt high;
  BigInt frac_num;
  std::int64_t frac_bits = 0;
};
ScaledMagnitude split_at(const WorkingReal& magnitude, std::int64_t q);

/// Throws unless x is finite and within the format's finite range.
void require_in_range(const FloatFormat& fmt, const WorkingReal& x);

}  // namespace detail

}  // namespace srkit

#endif  // SRKIT_GRID_HPP_
