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

#include "srkit/block.hpp"

#include <algorithm>
#include <cctype>

#include "srkit/entropy.hpp"
#include "srkit/error.hpp"
#include "srkit/grid.hpp"

namespace srkit {

namespace {

constexpr std::int64_t kE8m0MinExp = -127;
constexpr std::int64_t kE8m0MaxExp = 127;
constexpr unsigned kQuotientBits = 200;

// Smallest k with amax <= limit * 2^k.
std::int64_t ceil_log2_ratio(const WorkingReal& amax, const WorkingReal& limit) {
  std::int64_t k = amax.floor_log2() - limit.floor_log2();
  while (amax > limit.ldexp(k)) ++k;
  while (amax <= limit.ldexp(k - 1)) --k;
  return k;
}

// Positive finite e4m3 values in increasing order, with their encodings.
const std::vector<std::pair<WorkingReal, std::uint64_t>>& e4m3_positive_grid() {
  static const auto kGrid = [] {
    std::vector<std::pair<WorkingReal, std::uint64_t>> g;
    const FloatFormat& f = formats::fp8_e4m3();
    for (std::uint64_t bits = 1; bits < 0x80; ++bits) {
      const WorkingReal v = decode_bits(f, bits);
      if (v.is_finite()) g.emplace_back(v, bits);
    }
    return g;
  }();
  return kGrid;
}

struct Scale {
  WorkingReal value;
  std::uint64_t bits = 0;
};

Scale choose_e8m0(const WorkingReal& amax, const WorkingReal& limit) {
  std::int64_t k = kE8m0MinExp;
  if (!amax.is_zero()) {
    k = std::clamp(ceil_log2_ratio(amax, limit), kE8m0MinExp, kE8m0MaxExp);
  }
  return {WorkingReal::pow2(k), static_cast<std::uint64_t>(k - kE8m0MinExp)};
}

Scale choose_e4m3(const WorkingReal& amax, const WorkingReal& limit) {
  const auto& grid = e4m3_positive_grid();
  if (amax.is_zero()) return {grid.front().first, grid.front().second};
  // lo: last index with limit * v <= amax.
  std::size_t hi_idx = 0;
  while (hi_idx < grid.size() && limit * grid[hi_idx].first <= amax) ++hi_idx;
  if (hi_idx == 0) return {grid.front().first, grid.front().second};
  if (hi_idx == grid.size()) return {grid.back().first, grid.back().second};
  const std::size_t lo_idx = hi_idx - 1;
  // Nearest to amax / limit, compared after multiplying through by limit.
  const WorkingReal d_lo = amax - limit * grid[lo_idx].first;
  const WorkingReal d_hi = limit * grid[hi_idx].first - amax;
  std::size_t pick = lo_idx;
  if (d_hi < d_lo || (d_hi == d_lo && (grid[hi_idx].second & 1) == 0)) pick = hi_idx;
  // The element range must hold max|v| / s.
  if (limit * grid[pick].first < amax && pick + 1 < grid.size()) ++pick;
  return {grid[pick].first, grid[pick].second};
}

}  // namespace

BlockFormatSpec BlockFormatSpec::mxfp4() {
  return {"mxfp4", 32, formats::fp4_e2m1(), ScaleFormat::e8m0};
}

BlockFormatSpec BlockFormatSpec::nvfp4() {
  return {"nvfp4", 16, formats::fp4_e2m1(), ScaleFormat::e4m3};
}

BlockFormatSpec BlockFormatSpec::by_name(std::string_view name) {
  std::string key(name);
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (key == "mxfp4") return mxfp4();
  if (key == "nvfp4") return nvfp4();
  throw LookupError("unknown block format '" + std::string(name) + "'");
}

std::vector<WorkingReal> QuantizedBlocks::dequantize(unsigned group_size) const {
  std::vector<WorkingReal> out;
  out.reserve(original_length);
  for (std::size_t i = 0; i < original_length; ++i) {
    out.push_back(scales[i / group_size] * elements[i]);
  }
  return out;
}

QuantizedBlocks block_quantize(std::span<const WorkingReal> values, const BlockFormatSpec& spec,
                               const Rounding& rounding, std::uint64_t seed) {
  if (spec.group_size == 0) throw ContractError("block group size must be positive");
  for (const auto& v : values) {
    if (!v.is_finite()) throw DomainError("block quantization input is not finite");
  }
  QuantizedBlocks out;
  out.original_length = values.size();
  const std::size_t groups = (values.size() + spec.group_size - 1) / spec.group_size;
  out.padded = groups * spec.group_size != values.size();
  const WorkingReal limit = spec.element.max_finite();

  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t begin = g * spec.group_size;
    const std::size_t end = std::min(values.size(), begin + spec.group_size);
    WorkingReal amax;
    for (std::size_t i = begin; i < end; ++i) {
      if (values[i].abs() > amax) amax = values[i].abs();
    }

    const Scale scale = spec.scale == ScaleFormat::e8m0 ? choose_e8m0(amax, limit)
                                                        : choose_e4m3(amax, limit);
    out.scales.push_back(scale.value);
    out.scale_bits.push_back(scale.bits);

    const BigInt& scale_sig = scale.value.significand();
    const std::int64_t scale_exp = scale.value.exponent();
    const bool pow2_scale = scale_sig == 1;
    Xoroshiro128Plus stream = derive_stream(seed, g);

    for (std::size_t i = begin; i < begin + spec.group_size; ++i) {
      const WorkingReal v = i < end ? values[i] : WorkingReal{};
      WorkingReal quotient;
      if (v.is_zero()) {
        quotient = v;
      } else if (pow2_scale) {
        quotient = v.ldexp(-scale_exp);
      } else {
        const ParsedReal approx = nearest_dyadic(v.significand(), scale_sig, kQuotientBits);
        out.inexact_quotient = out.inexact_quotient || approx.inexact;
        quotient = approx.value.ldexp(v.exponent() - scale_exp).with_sign(v.negative());
      }
      const WorkingReal e = apply_rounding(spec.element, quotient, rounding, stream);
      if (i < end) {
        out.element_bits.push_back(encode_bits(spec.element, e));
        out.elements.push_back(e);
      }
    }
  }
  return out;
}

}  // namespace srkit
