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

#ifndef SRKIT_FORMAT_HPP_
#define SRKIT_FORMAT_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "srkit/working_real.hpp"

namespace srkit {

/// Sign / exponent / trailing-significand field widths of an encodable
/// format. Exponent bias is always 1 - emin.
struct BitLayout {
  int exponent_bits = 0;
  int fraction_bits = 0;
  std::int64_t bias = 0;
  int total_bits() const { return 1 + exponent_bits + fraction_bits; }
};

/// A binary floating-point number system described by its precision and
/// normalized exponent range rather than by field widths, so that research
/// formats are expressible.
///
/// Special values follow the flags: with infinity the format uses the IEEE
/// 754 layout (all-ones exponent reserved); NaN without infinity reserves
/// only the all-ones pattern (OCP e4m3 style); neither flag means every
/// pattern is finite (OCP fp6/fp4 style).
struct FloatFormat {
  std::string name;
  int precision = 0;  ///< significand bits including the implicit bit
  std::int64_t emin = 0;
  std::int64_t emax = 0;
  bool has_subnormals = true;
  bool has_infinity = false;
  bool has_nan = false;

  /// Validates and returns a custom format. Throws ContractError.
  static FloatFormat custom(std::string name, int precision, std::int64_t emin,
                            std::int64_t emax, bool has_subnormals,
                            bool has_infinity, bool has_nan);

  void validate() const;

  /// 2^-precision.
  WorkingReal unit_roundoff() const;
  WorkingReal max_finite() const;
  WorkingReal min_normal() const;
  /// Smallest positive value: 2^(emin - p + 1) with subnormals, else min_normal.
  WorkingReal min_subnormal() const;

  /// Field layout, or nullopt when (emin, emax) do not fill a power-of-two
  /// exponent field.
  std::optional<BitLayout> layout() const;

  bool operator==(const FloatFormat&) const = default;
};

namespace formats {

const FloatFormat& binary64();
const FloatFormat& binary32();
const FloatFormat& binary16();
const FloatFormat& bfloat16();
const FloatFormat& fp8_e4m3();
const FloatFormat& fp8_e5m2();
const FloatFormat& fp6_e2m3();
const FloatFormat& fp6_e3m2();
const FloatFormat& fp4_e2m1();

/// All presets, in declaration order.
std::span<const FloatFormat> presets();

/// Preset by name ("binary16", "fp8-e4m3", ...). Throws LookupError.
const FloatFormat& by_name(std::string_view name);

}  // namespace formats

}  // namespace srkit

#endif  // SRKIT_FORMAT_HPP_
