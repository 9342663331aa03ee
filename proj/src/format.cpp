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

#include "srkit/format.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "srkit/error.hpp"

namespace srkit {

FloatFormat FloatFormat::custom(std::string name, int precision,
                                std::int64_t emin, std::int64_t emax,
                                bool has_subnormals, bool has_infinity,
                                bool has_nan) {
  FloatFormat f{std::move(name), precision, emin, emax, has_subnormals,
                has_infinity, has_nan};
  f.validate();
  return f;
}

void FloatFormat::validate() const {
  if (precision < 1 || precision > 1024) {
    throw ContractError("format precision must be in [1, 1024]");
  }
  if (emin > emax) throw ContractError("format needs emin <= emax");
  if (emin < -(std::int64_t{1} << 40) || emax > (std::int64_t{1} << 40)) {
    throw ContractError("format exponent range too wide");
  }
  if (has_infinity && !has_nan) {
    throw ContractError("formats with infinity must also encode NaN");
  }
  if (!has_infinity && has_nan && precision < 2) {
    throw ContractError("all-ones NaN needs at least one fraction bit");
  }
}

WorkingReal FloatFormat::unit_roundoff() const { return WorkingReal::pow2(-precision); }

WorkingReal FloatFormat::max_finite() const {
  // The all-ones pattern is NaN when NaN exists without infinity.
  BigInt m = (BigInt(1) << precision) - 1;
  if (has_nan && !has_infinity) m -= 1;
  return WorkingReal::make(false, std::move(m), emax - precision + 1);
}

WorkingReal FloatFormat::min_normal() const { return WorkingReal::pow2(emin); }

WorkingReal FloatFormat::min_subnormal() const {
  return has_subnormals ? WorkingReal::pow2(emin - precision + 1) : min_normal();
}

std::optional<BitLayout> FloatFormat::layout() const {
  // Number of biased exponent codes that hold normal numbers.
  const std::int64_t normal_codes = emax - emin + 1;
  const std::int64_t reserved = has_infinity ? 1 : 0;
  for (int w = 1; w <= 20; ++w) {
    const std::int64_t codes = (std::int64_t{1} << w) - 1 - reserved;
    if (codes == normal_codes) {
      return BitLayout{w, precision - 1, 1 - emin};
    }
    if (codes > normal_codes) break;
  }
  return std::nullopt;
}

namespace formats {

namespace {

const std::array<FloatFormat, 9>& table() {
  static const std::array<FloatFormat, 9> kPresets = {{
      {"binary64", 53, -1022, 1023, true, true, true},
      {"binary32", 24, -126, 127, true, true, true},
      {"binary16", 11, -14, 15, true, true, true},
      {"bfloat16", 8, -126, 127, true, true, true},
      {"fp8-e4m3", 4, -6, 8, true, false, true},
      {"fp8-e5m2", 3, -14, 15, true, true, true},
      {"fp6-e2m3", 4, 0, 2, true, false, false},
      {"fp6-e3m2", 3, -2, 4, true, false, false},
      {"fp4-e2m1", 2, 0, 2, true, false, false},
  }};
  return kPresets;
}

}  // namespace

const FloatFormat& binary64() { return table()[0]; }
const FloatFormat& binary32() { return table()[1]; }
const FloatFormat& binary16() { return table()[2]; }
const FloatFormat& bfloat16() { return table()[3]; }
const FloatFormat& fp8_e4m3() { return table()[4]; }
const FloatFormat& fp8_e5m2() { return table()[5]; }
const FloatFormat& fp6_e2m3() { return table()[6]; }
const FloatFormat& fp6_e3m2() { return table()[7]; }
const FloatFormat& fp4_e2m1() { return table()[8]; }

std::span<const FloatFormat> presets() { return table(); }

const FloatFormat& by_name(std::string_view name) {
  std::string key(name);
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  std::replace(key.begin(), key.end(), '_', '-');
  if (key == "fp16" || key == "half") key = "binary16";
  if (key == "fp32" || key == "single") key = "binary32";
  if (key == "fp64" || key == "double") key = "binary64";
  if (key == "bf16") key = "bfloat16";
  if (key == "e4m3") key = "fp8-e4m3";
  if (key == "e5m2") key = "fp8-e5m2";
  if (key == "e2m3") key = "fp6-e2m3";
  if (key == "e3m2") key = "fp6-e3m2";
  if (key == "e2m1") key = "fp4-e2m1";
  for (const auto& f : table()) {
    if (f.name == key) return f;
  }
  throw LookupError("unknown format '" + std::string(name) + "'");
}

}  // namespace formats

}  // namespace srkit
