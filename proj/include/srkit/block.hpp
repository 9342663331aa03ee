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

#ifndef SRKIT_BLOCK_HPP_
#define SRKIT_BLOCK_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "srkit/format.hpp"
#include "srkit/kernels.hpp"
#include "srkit/working_real.hpp"

namespace srkit {

enum class ScaleFormat { e8m0, e4m3 };

/// Microscaling block encoding: group_size elements share one scale.
struct BlockFormatSpec {
  std::string name;
  unsigned group_size = 0;
  FloatFormat element;
  ScaleFormat scale = ScaleFormat::e8m0;

  /// 32 x fp4-e2m1 with a power-of-two (e8m0) scale.
  static BlockFormatSpec mxfp4();
  /// 16 x fp4-e2m1 with an fp8-e4m3 scale.
  static BlockFormatSpec nvfp4();
  /// "mxfp4" or "nvfp4"; throws LookupError.
  static BlockFormatSpec by_name(std::string_view name);
};

struct QuantizedBlocks {
  std::vector<WorkingReal> scales;
  /// Scale encodings: biased exponent byte for e8m0, e4m3 pattern otherwise.
  std::vector<std::uint64_t> scale_bits;
  std::vector<WorkingReal> elements;
  std::vector<std::uint64_t> element_bits;
  std::size_t original_length = 0;
  /// The input was zero-padded to a whole number of groups.
  bool padded = false;
  /// Some element quotient v / s was not dyadic and was first rounded to
  /// 200 bits (only possible with e4m3 scales).
  bool inexact_quotient = false;

  /// scale * element for each original position.
  std::vector<WorkingReal> dequantize(unsigned group_size) const;
};

/// Quantizes values group by group. Each group gets the smallest scale s
/// with max|v| / s <= max_finite(element): for e8m0
/// s = 2^ceil(log2(max|v| / max_finite)); for e4m3 s = RNE_e4m3(max|v| /
/// max_finite), moved one e4m3 step up if that would overflow the element
/// range. v / s is then rounded per `rounding`, with the stochastic
/// stream of group g being derive_stream(seed, g).
///
/// All-zero groups get the smallest scale and zero elements. NaN or
/// infinite inputs throw DomainError.
QuantizedBlocks block_quantize(std::span<const WorkingReal> values, const BlockFormatSpec& spec,
                               const Rounding& rounding, std::uint64_t seed);

}  // namespace srkit

#endif  // SRKIT_BLOCK_HPP_
