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

#include "srkit/grid.hpp"

#include <algorithm>
#include <cmath>

#include "srkit/error.hpp"

namespace srkit {

namespace detail {

std::int64_t quantum_exponent(const FloatFormat& fmt, const WorkingReal& magnitude) {
  const std::int64_t sub_q = fmt.has_subnormals ? fmt.emin - fmt.precision + 1 : fmt.emin;
  if (magnitude.is_zero()) return sub_q;
  const std::int64_t e = magnitude.floor_log2();
  if (e < fmt.emin) return sub_q;
  return e - fmt.precision + 1;
}

ScaledMagnitude split_at(const WorkingReal& magnitude, std::int64_t q) {
  ScaledMagnitude out;
  if (magnitude.is_zero()) return out;
  const std::int64_t shift = magnitude.exponent() - q;
  const BigInt& m = magnitude.significand();
  if (shift >= 0) {
    out.high = m << static_cast<unsigned>(shift);
    return out;
  }
  const auto drop = static_cast<unsigned>(-shift);
  out.high = m >> drop;
  out.frac_num = m - (out.high << drop);
  out.frac_bits = -shift;
  return out;
}

void require_in_range(const FloatFormat& fmt, const WorkingReal& x) {
  if (!x.is_finite()) throw DomainError("value is not finite");
  if (x.abs() > fmt.max_finite()) {
    throw OverflowRangeError("|x| exceeds the largest finite " + fmt.name + " value");
  }
}

}  // namespace detail

RoundingCandidates neighbors(const FloatFormat& fmt, const WorkingReal& x) {
  detail::require_in_range(fmt, x);
  const WorkingReal mag = x.abs();
  const std::int64_t q = detail::quantum_exponent(fmt, mag);
  const auto split = detail::split_at(mag, q);
  if (split.frac_bits == 0) return {x, x, true};
  const WorkingReal lo_mag = WorkingReal::make(false, split.high, q);
  const WorkingReal hi_mag = WorkingReal::make(false, split.high + 1, q);
  if (x.negative()) return {-hi_mag, -lo_mag, false};
  return {lo_mag, hi_mag, false};
}

QFraction q_fraction(const FloatFormat& fmt, const WorkingReal& x) {
  detail::require_in_range(fmt, x);
  const WorkingReal mag = x.abs();
  const auto split = detail::split_at(mag, detail::quantum_exponent(fmt, mag));
  if (split.frac_bits == 0) return {};
  // The fraction of a canonical (odd) significand is already reduced.
  BigInt den = BigInt(1) << static_cast<unsigned>(split.frac_bits);
  BigInt num = split.frac_num;
  if (x.negative()) num = den - num;
  const auto tz = boost::multiprecision::lsb(num);
  return {num >> tz, den >> tz};
}

WorkingReal ulp(const FloatFormat& fmt, const WorkingReal& x) {
  detail::require_in_range(fmt, x);
  return WorkingReal::pow2(detail::quantum_exponent(fmt, x.abs()));
}

bool is_representable(const FloatFormat& fmt, const WorkingReal& x) {
  if (x.is_nan()) return fmt.has_nan;
  if (x.is_inf()) return fmt.has_infinity;
  if (x.abs() > fmt.max_finite()) return false;
  const WorkingReal mag = x.abs();
  return detail::split_at(mag, detail::quantum_exponent(fmt, mag)).frac_bits == 0;
}

namespace {

BitLayout require_layout(const FloatFormat& fmt) {
  auto layout = fmt.layout();
  if (!layout) throw EncodingError(fmt.name + " has no standard bit layout");
  if (layout->total_bits() > 64) throw EncodingError(fmt.name + " is wider than 64 bits");
  return *layout;
}

}  // namespace

std::uint64_t encode_bits(const FloatFormat& fmt, const WorkingReal& x) {
  const BitLayout lay = require_layout(fmt);
  const int f = lay.fraction_bits;
  const std::uint64_t exp_ones = (std::uint64_t{1} << lay.exponent_bits) - 1;
  const std::uint64_t frac_ones = (std::uint64_t{1} << f) - 1;
  const std::uint64_t sign = x.negative() && !x.is_nan()
                                 ? std::uint64_t{1} << (lay.total_bits() - 1)
                                 : 0;
  if (!is_representable(fmt, x)) {
    throw EncodingError(x.to_hex() + " is not representable in " + fmt.name);
  }
  if (x.is_nan()) {
    if (fmt.has_infinity) {
      // Quiet NaN: top fraction bit set.
      return (exp_ones << f) | (f > 0 ? std::uint64_t{1} << (f - 1) : 1);
    }
    return (exp_ones << f) | frac_ones;
  }
  if (x.is_inf()) return sign | (exp_ones << f);
  if (x.is_zero()) return sign;
  const WorkingReal mag = x.abs();
  const std::int64_t e = mag.floor_log2();
  if (e >= fmt.emin) {
    const auto split = detail::split_at(mag, e - f);
    const auto sig = static_cast<std::uint64_t>(split.high);
    return sign | (static_cast<std::uint64_t>(e + lay.bias) << f) | (sig & frac_ones);
  }
  const auto split = detail::split_at(mag, fmt.emin - f);
  return sign | static_cast<std::uint64_t>(split.high);
}

WorkingReal decode_bits(const FloatFormat& fmt, std::uint64_t bits) {
  const BitLayout lay = require_layout(fmt);
  const int total = lay.total_bits();
  if (total < 64 && bits >> total != 0) {
    throw EncodingError("bit pattern wider than " + fmt.name);
  }
  const int f = lay.fraction_bits;
  const std::uint64_t exp_ones = (std::uint64_t{1} << lay.exponent_bits) - 1;
  const std::uint64_t frac_ones = (std::uint64_t{1} << f) - 1;
  const bool negative = ((bits >> (total - 1)) & 1) != 0;
  const std::uint64_t biased = (bits >> f) & exp_ones;
  const std::uint64_t frac = bits & frac_ones;
  if (fmt.has_infinity && biased == exp_ones) {
    return frac == 0 ? WorkingReal::infinity(negative) : WorkingReal::nan();
  }
  if (fmt.has_nan && !fmt.has_infinity && biased == exp_ones && frac == frac_ones) {
    return WorkingReal::nan();
  }
  if (biased == 0) {
    if (frac == 0) return WorkingReal::zero(negative);
    if (!fmt.has_subnormals) {
      throw EncodingError("subnormal pattern in a format without subnormals");
    }
    return WorkingReal::make(negative, BigInt(frac), fmt.emin - f);
  }
  const BigInt sig = BigInt((std::uint64_t{1} << f) | frac);
  return WorkingReal::make(negative, sig, static_cast<std::int64_t>(biased) - lay.bias - f);
}

double to_double(const WorkingReal& x) {
  if (x.is_nan()) return std::nan("");
  if (x.is_inf()) return x.negative() ? -HUGE_VAL : HUGE_VAL;
  if (x.is_zero()) return x.negative() ? -0.0 : 0.0;
  const WorkingReal mag = x.abs();
  const std::int64_t q = std::max<std::int64_t>(mag.floor_log2(), -1022) - 52;
  auto split = detail::split_at(mag, q);
  if (split.frac_bits > 0) {
    const BigInt half = BigInt(1) << static_cast<unsigned>(split.frac_bits - 1);
    if (split.frac_num > half || (split.frac_num == half && (split.high & 1) != 0)) {
      split.high += 1;
    }
  }
  if (q > 2000) return x.negative() ? -HUGE_VAL : HUGE_VAL;
  const double v = std::ldexp(static_cast<double>(split.high), static_cast<int>(q));
  return x.negative() ? -v : v;
}

}  // namespace srkit
