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

#include "srkit/working_real.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <utility>

#include "srkit/error.hpp"

namespace srkit {

namespace {

// Largest alignment shift accepted by add/sub/compare. Beyond it the
// operands would need gigabit-sized integers.
constexpr std::int64_t kMaxAlignShift = std::int64_t{1} << 26;

void check_exponent(std::int64_t e) {
  if (e > WorkingReal::kMaxExponent || e < -WorkingReal::kMaxExponent) {
    throw CapacityError("exponent outside the working range");
  }
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) {
    throw CapacityError("exponent arithmetic overflow");
  }
  check_exponent(out);
  return out;
}

BigInt aligned(const BigInt& m, std::int64_t shift) {
  if (shift > kMaxAlignShift) {
    throw CapacityError("operands too far apart to align exactly");
  }
  return m << static_cast<unsigned>(shift);
}

// Three-way comparison of |a| and |b| for finite nonzero values.
int compare_magnitude(const WorkingReal& a, const WorkingReal& b) {
  const std::int64_t la = a.floor_log2();
  const std::int64_t lb = b.floor_log2();
  if (la != lb) return la < lb ? -1 : 1;
  const std::int64_t e = std::min(a.exponent(), b.exponent());
  const BigInt ma = aligned(a.significand(), a.exponent() - e);
  const BigInt mb = aligned(b.significand(), b.exponent() - e);
  return ma < mb ? -1 : (ma > mb ? 1 : 0);
}

int sign_of(const WorkingReal& v) {
  if (v.is_zero()) return 0;
  return v.negative() ? -1 : 1;
}

}  // namespace

std::int64_t bit_length_minus_one(const BigInt& v) {
  return static_cast<std::int64_t>(boost::multiprecision::msb(v));
}

WorkingReal WorkingReal::make(bool negative, BigInt m, std::int64_t e) {
  if (m < 0) throw ContractError("WorkingReal significand must be nonnegative");
  WorkingReal out;
  out.negative_ = negative;
  if (m.is_zero()) return out;
  const auto tz = boost::multiprecision::lsb(m);
  m >>= tz;
  out.m_ = std::move(m);
  out.e_ = checked_add(e, static_cast<std::int64_t>(tz));
  return out;
}

WorkingReal WorkingReal::from_int(std::int64_t v) {
  const bool neg = v < 0;
  BigInt m = v;
  if (neg) m = -m;
  return make(neg, std::move(m), 0);
}

WorkingReal WorkingReal::from_double(double v) {
  if (std::isnan(v)) return nan();
  if (std::isinf(v)) return infinity(std::signbit(v));
  if (v == 0.0) return zero(std::signbit(v));
  int exp = 0;
  const double frac = std::frexp(std::fabs(v), &exp);
  const auto m = static_cast<std::uint64_t>(std::ldexp(frac, 53));
  return make(std::signbit(v), BigInt(m), static_cast<std::int64_t>(exp) - 53);
}

WorkingReal WorkingReal::pow2(std::int64_t k) {
  check_exponent(k);
  return make(false, BigInt(1), k);
}

WorkingReal WorkingReal::zero(bool negative) {
  WorkingReal out;
  out.negative_ = negative;
  return out;
}

WorkingReal WorkingReal::infinity(bool negative) {
  WorkingReal out;
  out.kind_ = Kind::infinity;
  out.negative_ = negative;
  return out;
}

WorkingReal WorkingReal::nan() {
  WorkingReal out;
  out.kind_ = Kind::nan;
  return out;
}

std::int64_t WorkingReal::floor_log2() const {
  if (!is_finite() || is_zero()) {
    throw ContractError("floor_log2 needs a finite nonzero value");
  }
  return bit_length_minus_one(m_) + e_;
}

WorkingReal WorkingReal::abs() const { return with_sign(false); }

WorkingReal WorkingReal::operator-() const {
  WorkingReal out = *this;
  if (!is_nan()) out.negative_ = !negative_;
  return out;
}

WorkingReal WorkingReal::with_sign(bool negative) const {
  WorkingReal out = *this;
  if (!is_nan()) out.negative_ = negative;
  return out;
}

WorkingReal WorkingReal::ldexp(std::int64_t k) const {
  if (!is_finite() || is_zero()) return *this;
  WorkingReal out = *this;
  out.e_ = checked_add(e_, k);
  return out;
}

WorkingReal operator+(const WorkingReal& a, const WorkingReal& b) {
  if (a.is_nan() || b.is_nan()) return WorkingReal::nan();
  if (a.is_inf() || b.is_inf()) {
    if (a.is_inf() && b.is_inf() && a.negative() != b.negative()) {
      return WorkingReal::nan();
    }
    return a.is_inf() ? a : b;
  }
  if (a.is_zero() && b.is_zero()) {
    return WorkingReal::zero(a.negative() && b.negative());
  }
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  const std::int64_t e = std::min(a.exponent(), b.exponent());
  BigInt sa = aligned(a.significand(), a.exponent() - e);
  BigInt sb = aligned(b.significand(), b.exponent() - e);
  if (a.negative()) sa = -sa;
  if (b.negative()) sb = -sb;
  BigInt s = sa + sb;
  const bool neg = s < 0;
  if (neg) s = -s;
  return WorkingReal::make(neg && !s.is_zero(), std::move(s), e);
}

WorkingReal operator-(const WorkingReal& a, const WorkingReal& b) {
  return a + (-b);
}

WorkingReal operator*(const WorkingReal& a, const WorkingReal& b) {
  if (a.is_nan() || b.is_nan()) return WorkingReal::nan();
  const bool neg = a.negative() != b.negative();
  if (a.is_inf() || b.is_inf()) {
    if (a.is_zero() || b.is_zero()) return WorkingReal::nan();
    return WorkingReal::infinity(neg);
  }
  if (a.is_zero() || b.is_zero()) return WorkingReal::zero(neg);
  return WorkingReal::make(neg, a.significand() * b.significand(),
                           checked_add(a.exponent(), b.exponent()));
}

std::partial_ordering operator<=>(const WorkingReal& a, const WorkingReal& b) {
  if (a.is_nan() || b.is_nan()) return std::partial_ordering::unordered;
  auto rank = [](const WorkingReal& v) {
    if (v.is_inf()) return v.negative() ? -2 : 2;
    return sign_of(v);
  };
  const int ra = rank(a);
  const int rb = rank(b);
  if (ra != rb) return ra <=> rb;
  if (ra == 0 || ra == 2 || ra == -2) return std::partial_ordering::equivalent;
  const int mag = compare_magnitude(a, b);
  const int c = ra > 0 ? mag : -mag;
  return c <=> 0;
}

bool operator==(const WorkingReal& a, const WorkingReal& b) {
  return (a <=> b) == std::partial_ordering::equivalent;
}

bool WorkingReal::identical(const WorkingReal& other) const {
  if (kind_ != other.kind_) return false;
  if (is_nan()) return true;
  return negative_ == other.negative_ && m_ == other.m_ && e_ == other.e_;
}

std::string WorkingReal::to_hex(std::optional<int> frac_digits) const {
  const std::string sign = negative_ ? "-" : "";
  if (is_nan()) return "nan";
  if (is_inf()) return sign + "inf";
  if (is_zero()) return sign + "0x0p+0";
  const std::int64_t top = bit_length_minus_one(m_);
  const std::int64_t needed = (top + 3) / 4;
  const std::int64_t digits = std::max<std::int64_t>(needed, frac_digits.value_or(0));
  std::string out = sign + "0x1";
  if (digits > 0) {
    BigInt frac = m_ - (BigInt(1) << static_cast<unsigned>(top));
    frac <<= static_cast<unsigned>(4 * digits - top);
    std::string hex;
    hex.reserve(static_cast<std::size_t>(digits));
    for (std::int64_t i = 0; i < digits; ++i) {
      const unsigned nibble = static_cast<unsigned>(frac & 0xF);
      hex.push_back("0123456789abcdef"[nibble]);
      frac >>= 4;
    }
    std::reverse(hex.begin(), hex.end());
    out += "." + hex;
  }
  const std::int64_t exp = top + e_;
  out += exp < 0 ? "p-" : "p+";
  out += std::to_string(exp < 0 ? -exp : exp);
  return out;
}

ParsedReal nearest_dyadic(const BigInt& num, const BigInt& den, unsigned bits) {
  if (den <= 0 || num < 0) throw ContractError("nearest_dyadic needs num >= 0, den > 0");
  if (bits == 0) throw ContractError("nearest_dyadic needs at least one bit");
  if (num.is_zero()) return {WorkingReal{}, false};
  const std::int64_t a = bit_length_minus_one(num);
  const std::int64_t b = bit_length_minus_one(den);
  // Scale so the quotient lands in [2^(bits-1), 2^bits).
  std::int64_t s = static_cast<std::int64_t>(bits) - 1 - (a - b);
  BigInt q;
  BigInt rem;
  BigInt scaled_den;
  for (;;) {
    BigInt scaled_num = s >= 0 ? BigInt(num << static_cast<unsigned>(s)) : num;
    scaled_den = s >= 0 ? den : BigInt(den << static_cast<unsigned>(-s));
    boost::multiprecision::divide_qr(scaled_num, scaled_den, q, rem);
    if (q < (BigInt(1) << (bits - 1))) {
      ++s;
      continue;
    }
    if (q >= (BigInt(1) << bits)) {
      --s;
      continue;
    }
    break;
  }
  const bool inexact = !rem.is_zero();
  const BigInt twice = rem << 1;
  if (twice > scaled_den || (twice == scaled_den && (q & 1) != 0)) ++q;
  return {WorkingReal::make(false, std::move(q), -s), inexact};
}

namespace {

class LiteralParser {
 public:
  LiteralParser(std::string_view text, unsigned working_bits)
      : text_(text), bits_(working_bits) {}

  ParsedReal parse() {
    if (text_.empty()) fail();
    bool negative = false;
    if (text_[pos_] == '+' || text_[pos_] == '-') {
      negative = text_[pos_] == '-';
      ++pos_;
    }
    std::string rest(text_.substr(pos_));
    std::string lower = rest;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (lower == "inf" || lower == "infinity") {
      return {WorkingReal::infinity(negative), false};
    }
    if (lower == "nan") return {WorkingReal::nan(), false};
    ParsedReal out;
    if (lower.size() > 2 && lower[0] == '0' && lower[1] == 'x') {
      pos_ += 2;
      out = parse_hex();
    } else if (rest.find('/') != std::string::npos) {
      out = parse_rational();
    } else {
      out = parse_decimal();
    }
    if (pos_ != text_.size()) fail();
    out.value = out.value.with_sign(negative);
    return out;
  }

 private:
  [[noreturn]] void fail() const {
    throw ParseError("malformed numeric literal: '" + std::string(text_) + "'");
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }

  static int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  }

  std::int64_t parse_exponent_digits() {
    bool neg = false;
    if (peek() == '+' || peek() == '-') {
      neg = peek() == '-';
      ++pos_;
    }
    if (!std::isdigit(static_cast<unsigned char>(peek()))) fail();
    std::int64_t v = 0;
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      if (v > (std::numeric_limits<std::int64_t>::max() - 9) / 10) {
        throw CapacityError("exponent literal too large");
      }
      v = v * 10 + (peek() - '0');
      ++pos_;
    }
    return neg ? -v : v;
  }

  ParsedReal parse_hex() {
    BigInt m = 0;
    std::int64_t e = 0;
    bool any = false;
    while (hex_value(peek()) >= 0) {
      m = (m << 4) + hex_value(peek());
      any = true;
      ++pos_;
    }
    if (peek() == '.') {
      ++pos_;
      while (hex_value(peek()) >= 0) {
        m = (m << 4) + hex_value(peek());
        e -= 4;
        any = true;
        ++pos_;
      }
    }
    if (!any) fail();
    if (peek() == 'p' || peek() == 'P') {
      ++pos_;
      const std::int64_t p = parse_exponent_digits();
      if (p > WorkingReal::kMaxExponent || p < -WorkingReal::kMaxExponent) {
        throw CapacityError("binary exponent outside the working range");
      }
      e += p;
    }
    return {WorkingReal::make(false, std::move(m), e), false};
  }

  BigInt parse_digits() {
    if (!std::isdigit(static_cast<unsigned char>(peek()))) fail();
    BigInt v = 0;
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      v = v * 10 + (peek() - '0');
      ++pos_;
    }
    return v;
  }

  ParsedReal parse_rational() {
    const BigInt num = parse_digits();
    if (peek() != '/') fail();
    ++pos_;
    const BigInt den = parse_digits();
    if (den.is_zero()) throw ParseError("zero denominator");
    if (num.is_zero()) return {WorkingReal{}, false};
    if ((den & (den - 1)) == 0) {
      const auto k = static_cast<std::int64_t>(boost::multiprecision::msb(den));
      return {WorkingReal::make(false, num, -k), false};
    }
    return nearest_dyadic(num, den, bits_);
  }

  ParsedReal parse_decimal() {
    BigInt digits = 0;
    std::int64_t scale = 0;
    bool any = false;
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      digits = digits * 10 + (peek() - '0');
      any = true;
      ++pos_;
    }
    if (peek() == '.') {
      ++pos_;
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        digits = digits * 10 + (peek() - '0');
        --scale;
        any = true;
        ++pos_;
      }
    }
    if (!any) fail();
    if (peek() == 'e' || peek() == 'E') {
      ++pos_;
      scale += parse_exponent_digits();
    }
    if (scale > kMaxDecimalExponent || scale < -kMaxDecimalExponent) {
      throw CapacityError("decimal exponent outside the supported range");
    }
    if (digits.is_zero()) return {WorkingReal{}, false};
    if (scale >= 0) {
      BigInt v = digits * boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(scale));
      WorkingReal exact = WorkingReal::make(false, v, 0);
      if (bit_length_minus_one(exact.significand()) < static_cast<std::int64_t>(bits_)) {
        return {exact, false};
      }
      return nearest_dyadic(v, BigInt(1), bits_);
    }
    const BigInt den = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(-scale));
    return nearest_dyadic(digits, den, bits_);
  }

  static constexpr std::int64_t kMaxDecimalExponent = 100000;

  std::string_view text_;
  unsigned bits_;
  std::size_t pos_ = 0;
};

}  // namespace

ParsedReal parse_working_real(std::string_view text, unsigned decimal_working_bits) {
  if (decimal_working_bits < 64) {
    throw ContractError("decimal working precision must be at least 64 bits");
  }
  return LiteralParser(text, decimal_working_bits).parse();
}

}  // namespace srkit
