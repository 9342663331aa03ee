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

#include "srkit/kernels.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "srkit/error.hpp"

namespace srkit {

namespace {

std::string lowered(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

void set(RoundingFlags* flags, bool RoundingFlags::*field) {
  if (flags != nullptr) flags->*field = true;
}

WorkingReal saturated(const FloatFormat& fmt, bool negative) {
  return fmt.max_finite().with_sign(negative);
}

WorkingReal overflowed(const FloatFormat& fmt, bool negative, bool to_infinity,
                       RoundingFlags* flags) {
  set(flags, &RoundingFlags::overflow);
  set(flags, &RoundingFlags::inexact);
  if (to_infinity && fmt.has_infinity) return WorkingReal::infinity(negative);
  return saturated(fmt, negative);
}

// Shared front end of the stochastic kernels. Returns a result when x is
// settled without randomness (special, zero, flushed, overflowed or
// representable); otherwise nullopt.
std::optional<WorkingReal> settle_without_draw(const FloatFormat& fmt, const WorkingReal& x,
                                               const SrConfig& cfg, RoundingFlags* flags) {
  if (x.is_nan()) {
    if (fmt.has_nan) return x;
    throw DomainError("NaN input for " + fmt.name + ", which has no NaN");
  }
  if (x.is_inf()) {
    if (fmt.has_infinity) return x;
    throw DomainError("infinite input for " + fmt.name + ", which has no infinity");
  }
  if (x.is_zero()) return x;
  const WorkingReal mag = x.abs();
  if (cfg.flush_below && mag < *cfg.flush_below) {
    set(flags, &RoundingFlags::flushed);
    set(flags, &RoundingFlags::inexact);
    return WorkingReal::zero(x.negative());
  }
  if (mag > fmt.max_finite()) {
    if (cfg.overflow == OverflowPolicy::infinity && !fmt.has_infinity) {
      throw OverflowRangeError(fmt.name + " has no infinity to round to");
    }
    return overflowed(fmt, x.negative(), cfg.overflow == OverflowPolicy::infinity, flags);
  }
  if (is_representable(fmt, x)) return x;
  set(flags, &RoundingFlags::inexact);
  return std::nullopt;
}

void check_draw(const SrConfig& cfg, RandomDraw draw) {
  if (cfg.r < 64 && draw.value >> cfg.r != 0) {
    throw ContractError("random draw " + std::to_string(draw.value) + " does not fit in " +
                        std::to_string(cfg.r) + " bits");
  }
}

WorkingReal pick(const BigInt& high, bool up, std::int64_t q, bool negative) {
  return WorkingReal::make(negative, up ? BigInt(high + 1) : high, q);
}

}  // namespace

std::string_view to_string(RoundingMode mode) {
  switch (mode) {
    case RoundingMode::rne: return "rne";
    case RoundingMode::rz: return "rz";
    case RoundingMode::ru: return "ru";
    case RoundingMode::rd: return "rd";
  }
  return "?";
}

std::string_view to_string(SrVariant variant) {
  switch (variant) {
    case SrVariant::exact: return "exact";
    case SrVariant::limited: return "limited";
    case SrVariant::p3109_a: return "a";
    case SrVariant::p3109_b: return "b";
    case SrVariant::p3109_c: return "c";
  }
  return "?";
}

std::string_view to_string(Intermediate mode) {
  return mode == Intermediate::truncate ? "rz" : "rne";
}

RoundingMode parse_rounding_mode(std::string_view text) {
  const std::string s = lowered(text);
  if (s == "rne" || s == "rn" || s == "nearest") return RoundingMode::rne;
  if (s == "rz" || s == "trunc" || s == "truncate") return RoundingMode::rz;
  if (s == "ru" || s == "up") return RoundingMode::ru;
  if (s == "rd" || s == "down") return RoundingMode::rd;
  throw ContractError("unknown rounding mode '" + std::string(text) + "'");
}

SrVariant parse_sr_variant(std::string_view text) {
  const std::string s = lowered(text);
  if (s == "exact" || s == "sr") return SrVariant::exact;
  if (s == "limited") return SrVariant::limited;
  if (s == "a" || s == "p3109a" || s == "stochastica") return SrVariant::p3109_a;
  if (s == "b" || s == "p3109b" || s == "stochasticb") return SrVariant::p3109_b;
  if (s == "c" || s == "p3109c" || s == "stochasticc") return SrVariant::p3109_c;
  throw ContractError("unknown SR variant '" + std::string(text) + "'");
}

Intermediate parse_intermediate(std::string_view text) {
  const std::string s = lowered(text);
  if (s == "rz" || s == "truncate" || s == "trunc") return Intermediate::truncate;
  if (s == "rne") return Intermediate::rne;
  throw ContractError("unknown intermediate mode '" + std::string(text) + "'");
}

SrConfig SrConfig::exact_sr() { return SrConfig{}; }

SrConfig SrConfig::limited(unsigned r, Intermediate mode) {
  SrConfig cfg;
  cfg.variant = SrVariant::limited;
  cfg.r = r;
  cfg.intermediate = mode;
  cfg.validate();
  return cfg;
}

SrConfig SrConfig::p3109(SrVariant variant, unsigned r) {
  SrConfig cfg;
  cfg.variant = variant;
  cfg.r = r;
  cfg.validate();
  return cfg;
}

void SrConfig::validate() const {
  if (variant == SrVariant::exact) {
    if (r != 0) throw ContractError("exact SR takes no random bit count");
    if (intermediate) throw ContractError("exact SR has no intermediate rounding");
  } else {
    if (r < 1 || r > kMaxRandomBits) throw ContractError("r must be in [1, 64]");
    if (variant != SrVariant::limited && intermediate) {
      throw ContractError("P3109 variants imply their intermediate rounding");
    }
  }
  if (flush_below && (!flush_below->is_finite() || flush_below->negative())) {
    throw ContractError("flush threshold must be a nonnegative finite value");
  }
}

Intermediate SrConfig::effective_intermediate() const {
  if (variant == SrVariant::p3109_c) return Intermediate::rne;
  if (variant == SrVariant::limited) return intermediate.value_or(Intermediate::truncate);
  return Intermediate::truncate;
}

std::string SrConfig::describe() const {
  switch (variant) {
    case SrVariant::exact: return "exact-sr";
    case SrVariant::limited:
      return "limited(r=" + std::to_string(r) + "," +
             std::string(to_string(effective_intermediate())) + ")";
    default:
      return "p3109" + std::string(to_string(variant)) + "(r=" + std::to_string(r) + ")";
  }
}

std::string describe(const Rounding& rounding) {
  if (const auto* mode = std::get_if<RoundingMode>(&rounding)) {
    return std::string(to_string(*mode));
  }
  return std::get<SrConfig>(rounding).describe();
}

WorkingReal round_deterministic(const FloatFormat& fmt, const WorkingReal& x,
                                RoundingMode mode, RoundingFlags* flags) {
  if (x.is_nan()) {
    if (fmt.has_nan) return x;
    throw DomainError("NaN input for " + fmt.name + ", which has no NaN");
  }
  if (x.is_inf()) {
    if (fmt.has_infinity) return x;
    throw DomainError("infinite input for " + fmt.name + ", which has no infinity");
  }
  if (x.is_zero()) return x;
  const bool negative = x.negative();
  const WorkingReal mag = x.abs();
  // Candidates on the grid extended past emax; overflow is decided after.
  const std::int64_t q = detail::quantum_exponent(fmt, mag);
  const auto split = detail::split_at(mag, q);
  bool away = false;
  if (split.frac_bits > 0) {
    set(flags, &RoundingFlags::inexact);
    switch (mode) {
      case RoundingMode::rz: away = false; break;
      case RoundingMode::ru: away = !negative; break;
      case RoundingMode::rd: away = negative; break;
      case RoundingMode::rne: {
        const BigInt half = BigInt(1) << static_cast<unsigned>(split.frac_bits - 1);
        away = split.frac_num > half ||
               (split.frac_num == half && (split.high & 1) != 0);
        break;
      }
    }
  }
  WorkingReal out = pick(split.high, away, q, negative);
  if (out.abs() > fmt.max_finite()) {
    bool to_inf = false;
    switch (mode) {
      case RoundingMode::rne: to_inf = true; break;
      case RoundingMode::rz: to_inf = false; break;
      case RoundingMode::ru: to_inf = !negative; break;
      case RoundingMode::rd: to_inf = negative; break;
    }
    return overflowed(fmt, negative, to_inf, flags);
  }
  return out;
}

WorkingReal sr_exact(const FloatFormat& fmt, const WorkingReal& x, BitSource& bits,
                     const SrConfig& cfg, RoundingFlags* flags) {
  if (auto settled = settle_without_draw(fmt, x, cfg, flags)) return *settled;
  const WorkingReal mag = x.abs();
  const std::int64_t q = detail::quantum_exponent(fmt, mag);
  const auto split = detail::split_at(mag, q);
  // q(|x|) = frac_num / 2^frac_bits; compare U = 0.u1u2... bit by bit.
  const auto trailing = static_cast<std::int64_t>(boost::multiprecision::lsb(split.frac_num));
  const std::int64_t significant = split.frac_bits - trailing;
  bool up = false;
  for (std::int64_t i = 1; i <= significant; ++i) {
    const unsigned pos = static_cast<unsigned>(split.frac_bits - i);
    const bool q_bit = boost::multiprecision::bit_test(split.frac_num, pos);
    const bool u_bit = bits.next_bit();
    if (u_bit != q_bit) {
      up = q_bit;  // u = 0 < q = 1 means U < q
      break;
    }
  }
  return pick(split.high, up, q, x.negative());
}

WorkingReal sr_limited(const FloatFormat& fmt, const WorkingReal& x, const SrConfig& cfg,
                       RandomDraw draw, RoundingFlags* flags) {
  if (cfg.variant != SrVariant::limited) throw ContractError("sr_limited needs a limited config");
  cfg.validate();
  check_draw(cfg, draw);
  if (auto settled = settle_without_draw(fmt, x, cfg, flags)) return *settled;
  const WorkingReal mag = x.abs();
  const std::int64_t q = detail::quantum_exponent(fmt, mag);
  // Extended significand: |x| in units of 2^(q - r), i.e. r bits below the ulp.
  const std::int64_t shift = mag.exponent() - (q - static_cast<std::int64_t>(cfg.r));
  const BigInt& m = mag.significand();
  BigInt extended;
  if (shift >= 0) {
    extended = m << static_cast<unsigned>(shift);
  } else {
    const auto drop = static_cast<unsigned>(-shift);
    extended = m >> drop;
    if (cfg.effective_intermediate() == Intermediate::rne) {
      const BigInt dropped = m - (extended << drop);
      const BigInt half = BigInt(1) << (drop - 1);
      if (dropped > half || (dropped == half && (extended & 1) != 0)) extended += 1;
    }
  }
  const BigInt sum = extended + BigInt(draw.value);
  const BigInt result = sum >> cfg.r;
  return WorkingReal::make(x.negative(), result, q);
}

WorkingReal p3109_round(const FloatFormat& fmt, const WorkingReal& x, const SrConfig& cfg,
                        RandomDraw draw, RoundingFlags* flags) {
  if (cfg.variant != SrVariant::p3109_a && cfg.variant != SrVariant::p3109_b &&
      cfg.variant != SrVariant::p3109_c) {
    throw ContractError("p3109_round needs a P3109 variant");
  }
  cfg.validate();
  check_draw(cfg, draw);
  if (auto settled = settle_without_draw(fmt, x, cfg, flags)) return *settled;
  const WorkingReal mag = x.abs();
  const RoundingCandidates cand = neighbors(fmt, mag);
  const QFraction qf = q_fraction(fmt, mag);
  const unsigned r = cfg.r;
  const BigInt one_r = BigInt(1) << r;
  const BigInt R = BigInt(draw.value);
  bool up = false;
  switch (cfg.variant) {
    case SrVariant::p3109_a: {
      const BigInt k = (qf.numerator << r) / qf.denominator;
      up = k + R >= one_r;
      break;
    }
    case SrVariant::p3109_b: {
      const BigInt k = (qf.numerator << (r + 1)) / qf.denominator;
      up = k + 2 * R + 1 >= (one_r << 1);
      break;
    }
    case SrVariant::p3109_c: {
      // RNE(2^r q) from r+1 bits of q (the last one the round bit) and a sticky bit.
      BigInt k2;
      BigInt rem;
      boost::multiprecision::divide_qr(BigInt(qf.numerator << (r + 1)), qf.denominator, k2, rem);
      const bool round_bit = (k2 & 1) != 0;
      const bool sticky = !rem.is_zero();
      BigInt t = k2 >> 1;
      if (round_bit && (sticky || (t & 1) != 0)) t += 1;
      up = t + R >= one_r;
      break;
    }
    default:
      break;
  }
  const WorkingReal& chosen = up ? cand.hi : cand.lo;
  return chosen.with_sign(x.negative());
}

WorkingReal apply_rounding(const FloatFormat& fmt, const WorkingReal& x,
                           const Rounding& rounding, BitSource& bits, RoundingFlags* flags) {
  if (const auto* mode = std::get_if<RoundingMode>(&rounding)) {
    return round_deterministic(fmt, x, *mode, flags);
  }
  const SrConfig& cfg = std::get<SrConfig>(rounding);
  cfg.validate();
  switch (cfg.variant) {
    case SrVariant::exact:
      return sr_exact(fmt, x, bits, cfg, flags);
    case SrVariant::limited:
      // Fixed-width variants always consume their r bits, like hardware
      // that is fed one random word per operation.
      return sr_limited(fmt, x, cfg, RandomDraw{bits.next_bits(cfg.r)}, flags);
    default:
      return p3109_round(fmt, x, cfg, RandomDraw{bits.next_bits(cfg.r)}, flags);
  }
}

ArithOp parse_arith_op(std::string_view text) {
  const std::string s = lowered(text);
  if (s == "add") return ArithOp::add;
  if (s == "sub") return ArithOp::sub;
  if (s == "mul") return ArithOp::mul;
  throw ContractError("unknown operation '" + std::string(text) + "'");
}

WorkingReal exact_op_then_round(ArithOp op, const WorkingReal& a, const WorkingReal& b,
                                const FloatFormat& fmt, const Rounding& rounding,
                                BitSource& bits, RoundingFlags* flags) {
  WorkingReal exact;
  switch (op) {
    case ArithOp::add: exact = a + b; break;
    case ArithOp::sub: exact = a - b; break;
    case ArithOp::mul: exact = a * b; break;
  }
  return apply_rounding(fmt, exact, rounding, bits, flags);
}

WorkingReal two_stage_round(const WorkingReal& x, const FloatFormat& dst,
                            const Rounding& rounding, BitSource& bits, RoundingFlags* flags) {
  const WorkingReal staged = round_deterministic(formats::binary32(), x, RoundingMode::rne, flags);
  return apply_rounding(dst, staged, rounding, bits, flags);
}

}  // namespace srkit
