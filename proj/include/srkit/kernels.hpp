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

// Rounding kernels: deterministic modes, exact stochastic rounding,
// limited-precision stochastic rounding with r random bits, and the three
// P3109 stochastic variants.
//
// Every kernel works on |x| and reattaches the sign, so a kernel that
// "rounds up" moves away from zero. Results are always one of the two
// rounding candidates of x (or x itself when representable), apart from
// the overflow and flush policies configured in SrConfig.

#ifndef SRKIT_KERNELS_HPP_
#define SRKIT_KERNELS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "srkit/entropy.hpp"
#include "srkit/format.hpp"
#include "srkit/grid.hpp"
#include "srkit/working_real.hpp"

namespace srkit {

enum class RoundingMode { rne, rz, ru, rd };

enum class SrVariant { exact, limited, p3109_a, p3109_b, p3109_c };

/// How x is first brought to p + r bits in limited-precision SR.
enum class Intermediate { truncate, rne };

enum class OverflowPolicy { saturate, infinity };

std::string_view to_string(RoundingMode mode);
std::string_view to_string(SrVariant variant);
std::string_view to_string(Intermediate mode);
RoundingMode parse_rounding_mode(std::string_view text);
SrVariant parse_sr_variant(std::string_view text);
Intermediate parse_intermediate(std::string_view text);

inline constexpr unsigned kMaxRandomBits = 64;

/// Describes one stochastic rounding variant and its range policies.
struct SrConfig {
  SrVariant variant = SrVariant::exact;
  /// Random bit count; 0 for exact SR, else 1..64.
  unsigned r = 0;
  /// Only meaningful for SrVariant::limited. P3109 variants imply their own.
  std::optional<Intermediate> intermediate;
  OverflowPolicy overflow = OverflowPolicy::saturate;
  /// |x| strictly below this magnitude becomes a signed zero.
  std::optional<WorkingReal> flush_below;

  static SrConfig exact_sr();
  static SrConfig limited(unsigned r, Intermediate mode = Intermediate::truncate);
  static SrConfig p3109(SrVariant variant, unsigned r);

  /// Throws ContractError on an inconsistent descriptor.
  void validate() const;
  bool fixed_width() const { return variant != SrVariant::exact; }
  /// Intermediate rounding actually applied (truncate for A, RNE for C).
  Intermediate effective_intermediate() const;

  /// Short label such as "limited(r=6,rz)" or "p3109c(r=3)".
  std::string describe() const;
};

/// A draw R in [0, 2^r) for fixed-width variants.
struct RandomDraw {
  std::uint64_t value = 0;
};

/// Sticky status reported by the kernels.
struct RoundingFlags {
  bool inexact = false;
  bool overflow = false;
  bool flushed = false;
};

WorkingReal round_deterministic(const FloatFormat& fmt, const WorkingReal& x,
                                RoundingMode mode, RoundingFlags* flags = nullptr);

/// Exact SR: returns the upper-magnitude candidate with probability q(|x|),
/// drawing bits of a uniform U lazily and stopping as soon as U < q is
/// decided. Representable x consumes no bits.
WorkingReal sr_exact(const FloatFormat& fmt, const WorkingReal& x, BitSource& bits,
                     const SrConfig& cfg = SrConfig::exact_sr(),
                     RoundingFlags* flags = nullptr);

/// Limited-precision SR, computed the way add-and-carry hardware does it:
/// the magnitude is aligned so that r bits sit below the destination ulp
/// (rounded there per the intermediate mode), R is added, and the carry out
/// of those r bits selects the upper candidate.
WorkingReal sr_limited(const FloatFormat& fmt, const WorkingReal& x, const SrConfig& cfg,
                       RandomDraw draw, RoundingFlags* flags = nullptr);

/// P3109 StochasticA/B/C evaluated from the exact rational q(|x|):
///   A: up iff floor(2^r q) + R >= 2^r
///   B: up iff floor(2^(r+1) q) + 2R + 1 >= 2^(r+1)
///   C: up iff RNE(2^r q) + R >= 2^r
WorkingReal p3109_round(const FloatFormat& fmt, const WorkingReal& x, const SrConfig& cfg,
                        RandomDraw draw, RoundingFlags* flags = nullptr);

/// Either a deterministic mode or a stochastic configuration.
using Rounding = std::variant<RoundingMode, SrConfig>;

std::string describe(const Rounding& rounding);

/// Applies `rounding`, drawing r bits (fixed-width variants) or a lazy
/// stream (exact SR) from `bits`. Deterministic modes draw nothing.
WorkingReal apply_rounding(const FloatFormat& fmt, const WorkingReal& x,
                           const Rounding& rounding, BitSource& bits,
                           RoundingFlags* flags = nullptr);

enum class ArithOp { add, sub, mul };

ArithOp parse_arith_op(std::string_view text);

/// Computes a op b exactly, then rounds once into fmt.
WorkingReal exact_op_then_round(ArithOp op, const WorkingReal& a, const WorkingReal& b,
                                const FloatFormat& fmt, const Rounding& rounding,
                                BitSource& bits, RoundingFlags* flags = nullptr);

/// RNE to binary32 first, then `rounding` from binary32 into dst.
/// Equivalent to rounding RNE32(x), which is not SR of x itself.
WorkingReal two_stage_round(const WorkingReal& x, const FloatFormat& dst,
                            const Rounding& rounding, BitSource& bits,
                            RoundingFlags* flags = nullptr);

}  // namespace srkit

#endif  // SRKIT_KERNELS_HPP_
