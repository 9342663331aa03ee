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

#ifndef SRKIT_WORKING_REAL_HPP_
#define SRKIT_WORKING_REAL_HPP_

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace srkit {

using BigInt = boost::multiprecision::cpp_int;

/// Exact dyadic real sign * m * 2^e with an arbitrary-size significand.
///
/// The representation is canonical: m is zero or odd, and a zero always
/// carries e = 0. The sign of zero is kept so that signed zeros survive
/// encode/decode and sign-magnitude rounding. Infinity and NaN are carried
/// as distinct kinds so kernels can propagate them.
///
/// Sums, differences and products are exact. Exponents are bounded by
/// kMaxExponent; leaving that range raises CapacityError.
class WorkingReal {
 public:
  enum class Kind : std::uint8_t { finite, infinity, nan };

  static constexpr std::int64_t kMaxExponent = std::int64_t{1} << 60;

  WorkingReal() = default;

  /// Builds sign * m * 2^e and canonicalizes. m must be nonnegative.
  static WorkingReal make(bool negative, BigInt m, std::int64_t e);
  static WorkingReal from_int(std::int64_t v);
  static WorkingReal from_double(double v);
  static WorkingReal pow2(std::int64_t k);
  static WorkingReal zero(bool negative = false);
  static WorkingReal infinity(bool negative = false);
  static WorkingReal nan();

  Kind kind() const { return kind_; }
  bool negative() const { return negative_; }
  const BigInt& significand() const { return m_; }
  std::int64_t exponent() const { return e_; }

  bool is_finite() const { return kind_ == Kind::finite; }
  bool is_nan() const { return kind_ == Kind::nan; }
  bool is_inf() const { return kind_ == Kind::infinity; }
  bool is_zero() const { return kind_ == Kind::finite && m_.is_zero(); }

  /// floor(log2 |x|). Precondition: finite and nonzero.
  std::int64_t floor_log2() const;

  WorkingReal abs() const;
  WorkingReal operator-() const;
  WorkingReal with_sign(bool negative) const;
  /// x * 2^k, exact.
  WorkingReal ldexp(std::int64_t k) const;

  friend WorkingReal operator+(const WorkingReal& a, const WorkingReal& b);
  friend WorkingReal operator-(const WorkingReal& a, const WorkingReal& b);
  friend WorkingReal operator*(const WorkingReal& a, const WorkingReal& b);

  /// Numeric comparison: -0 == +0, NaN is unordered.
  friend std::partial_ordering operator<=>(const WorkingReal& a,
                                           const WorkingReal& b);
  friend bool operator==(const WorkingReal& a, const WorkingReal& b);

  /// Representation identity, distinguishing -0 from +0 and NaN == NaN.
  bool identical(const WorkingReal& other) const;

  /// C99-style hex-float text ("0x1.8p+0"). With frac_digits the fraction is
  /// padded to that many hex digits (widened if the value needs more).
  std::string to_hex(std::optional<int> frac_digits = std::nullopt) const;

 private:
  Kind kind_ = Kind::finite;
  bool negative_ = false;
  BigInt m_ = 0;
  std::int64_t e_ = 0;
};

/// Result of parsing a literal; inexact is set when a decimal or
/// non-dyadic literal had to be rounded to the working precision.
struct ParsedReal {
  WorkingReal value;
  bool inexact = false;
};

inline constexpr unsigned kDefaultDecimalWorkingBits = 200;

/// Parses a hex-float ("0x1.8p0"), a rational ("5/16"), a decimal
/// ("3.14", "1e-3") or a special ("inf", "-inf", "nan") literal.
/// Hex-float and dyadic rationals are exact; decimals and non-dyadic
/// rationals are rounded to nearest-even at decimal_working_bits bits.
ParsedReal parse_working_real(std::string_view text,
                              unsigned decimal_working_bits =
                                  kDefaultDecimalWorkingBits);

/// Nearest-even dyadic approximation of num/den with `bits` significant
/// bits. Returns the value and whether rounding occurred.
ParsedReal nearest_dyadic(const BigInt& num, const BigInt& den, unsigned bits);

/// Index of the most significant set bit of a positive integer.
std::int64_t bit_length_minus_one(const BigInt& v);

}  // namespace srkit

#endif  // SRKIT_WORKING_REAL_HPP_
