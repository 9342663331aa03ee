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

// Vendor stochastic-rounding conversion profiles.
//
// Each ConversionRule describes one hardware conversion: how many random
// bits it adds below the destination ulp, whether the input is first
// rounded to binary32, how subnormal destinations are handled and which
// tiny inputs are flushed. Rules are matched by significand width
// (source p -> destination p), the way the published survey tabulates them.

#ifndef SRKIT_PROFILES_HPP_
#define SRKIT_PROFILES_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "srkit/entropy.hpp"
#include "srkit/format.hpp"
#include "srkit/kernels.hpp"
#include "srkit/working_real.hpp"

namespace srkit {

/// Random bit count of a rule: a fixed width, a variable range, or an
/// "up to" bound (used at its maximum).
struct RBits {
  enum class Kind { fixed, range, up_to };
  Kind kind = Kind::fixed;
  unsigned min = 0;
  unsigned max = 0;

  static RBits fixed(unsigned r) { return {Kind::fixed, r, r}; }
  static RBits range(unsigned lo, unsigned hi) { return {Kind::range, lo, hi}; }
  static RBits up_to(unsigned hi) { return {Kind::up_to, hi, hi}; }

  /// Bits used for a normal-range destination.
  unsigned base() const { return kind == Kind::range ? min : max; }
  /// Table cell text: "13", "13-24" or "up to 16".
  std::string cell() const;

  bool operator==(const RBits&) const = default;
};

enum class SubnormalRule { fixed_r, extend_to_cover_subnormal };

/// Where R comes from: an external stream/word, or the low bits of the
/// input significand.
enum class EntropyInput { external, input_lsb };

struct ConversionRule {
  std::string src_fmt;
  std::string dst_fmt;
  RBits r_bits;
  /// Round to binary32 with RNE before the stochastic step.
  bool two_stage = false;
  SubnormalRule subnormal_rule = SubnormalRule::fixed_r;
  std::optional<WorkingReal> flush_threshold;
  /// Width of the random operand the instruction takes; 0 when fed from a
  /// generator stream.
  unsigned random_word_width = 32;
  EntropyInput entropy = EntropyInput::external;
  std::string note;

  const FloatFormat& src() const { return formats::by_name(src_fmt); }
  const FloatFormat& dst() const { return formats::by_name(dst_fmt); }

  /// Random bits used for x (already staged). With
  /// extend_to_cover_subnormal, the base count grows by the number of
  /// leading zeros x has in the destination's subnormal range, capped at
  /// r_bits.max.
  unsigned effective_r(const WorkingReal& staged) const;

  bool operator==(const ConversionRule&) const = default;
};

struct VendorProfile {
  std::string name;
  std::vector<ConversionRule> rules;
  std::vector<std::string> notes;

  bool operator==(const VendorProfile&) const = default;
};

class ProfileRegistry {
 public:
  ProfileRegistry() = default;
  explicit ProfileRegistry(std::vector<VendorProfile> vendors) : vendors_(std::move(vendors)) {}

  /// The surveyed vendors: graphcore, nvidia-blackwell, amd-mi300,
  /// intel-patent, huawei.
  static const ProfileRegistry& builtin();
  /// Parses the JSON registry document. Throws ParseError.
  static ProfileRegistry from_json_text(std::string_view text);
  static ProfileRegistry load(const std::string& path);

  std::string to_json_text(int indent = 2) const;

  std::span<const VendorProfile> vendors() const { return vendors_; }
  /// Case-insensitive; throws LookupError for unknown vendors.
  const VendorProfile& vendor(std::string_view name) const;

  /// The rule converting between formats of these significand widths, or
  /// nullopt where the vendor specifies none. The returned rule names the
  /// requested formats; a Graphcore-style flush threshold follows the
  /// destination (half its smallest subnormal).
  std::optional<ConversionRule> lookup(std::string_view vendor, const FloatFormat& src,
                                       const FloatFormat& dst) const;

 private:
  std::vector<VendorProfile> vendors_;
};

/// Runs a conversion drawing R from `bits` (or from the input significand
/// for input_lsb rules).
WorkingReal convert(const ConversionRule& rule, const WorkingReal& x, BitSource& bits,
                    RoundingFlags* flags = nullptr);

/// Runs a conversion with an explicit random operand; R is its low r bits.
WorkingReal convert(const ConversionRule& rule, const WorkingReal& x, std::uint64_t random_word,
                    RoundingFlags* flags = nullptr);

/// Two conversions sharing one 32-bit random word: x1 takes the low half,
/// x2 the high half, each reduced to its low r bits.
std::pair<WorkingReal, WorkingReal> convert_packed_pair(const ConversionRule& rule,
                                                        const WorkingReal& x1,
                                                        const WorkingReal& x2,
                                                        std::uint32_t random_word,
                                                        RoundingFlags* flags = nullptr);

}  // namespace srkit

#endif  // SRKIT_PROFILES_HPP_
