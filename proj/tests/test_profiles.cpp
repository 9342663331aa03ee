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

#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "reference.hpp"
#include "srkit/block.hpp"
#include "srkit/error.hpp"
#include "srkit/grid.hpp"
#include "srkit/profiles.hpp"

namespace {

using srkit::ProfileRegistry;
using srkit::WorkingReal;
using ref::Rational;
namespace formats = srkit::formats;

WorkingReal W(const char* text) { return srkit::parse_working_real(text).value; }

const srkit::FloatFormat& by_precision(int p) {
  switch (p) {
    case 24: return formats::binary32();
    case 11: return formats::binary16();
    case 8: return formats::bfloat16();
    case 4: return formats::fp8_e4m3();
    case 3: return formats::fp8_e5m2();
  }
  throw std::invalid_argument("no format for precision");
}

std::vector<std::vector<std::string>> read_tsv(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, '\t')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

srkit::ConversionRule rule(const char* vendor, const srkit::FloatFormat& src,
                           const srkit::FloatFormat& dst) {
  auto r = ProfileRegistry::builtin().lookup(vendor, src, dst);
  if (!r) throw std::logic_error("missing rule");
  return *r;
}

TEST(RegistryTest, MatchesCheckedInTable) {
  const auto rows = read_tsv(std::string(SRKIT_SOURCE_DIR) + "/tests/data/table1.tsv");
  ASSERT_EQ(rows.size(), 5u);
  const auto& header = rows[0];
  ASSERT_EQ(header.size(), 7u);
  const auto& reg = ProfileRegistry::builtin();
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    ASSERT_EQ(row.size(), 7u);
    std::size_t populated = 0;
    for (std::size_t c = 1; c < row.size(); ++c) {
      const auto arrow = header[c].find("->");
      const int sp = std::stoi(header[c].substr(0, arrow));
      const int dp = std::stoi(header[c].substr(arrow + 2));
      const auto got = reg.lookup(row[0], by_precision(sp), by_precision(dp));
      if (row[c] == "--") {
        EXPECT_FALSE(got.has_value()) << row[0] << ' ' << header[c];
      } else {
        ++populated;
        ASSERT_TRUE(got.has_value()) << row[0] << ' ' << header[c];
        EXPECT_EQ(got->r_bits.cell(), row[c]) << row[0] << ' ' << header[c];
      }
    }
    // Exactly one rule per populated cell.
    EXPECT_EQ(reg.vendor(row[0]).rules.size(), populated) << row[0];
  }
}

TEST(RegistryTest, LookupExamples) {
  const auto& reg = ProfileRegistry::builtin();
  const auto g = rule("graphcore", formats::binary32(), formats::binary16());
  EXPECT_EQ(g.r_bits, srkit::RBits::range(13, 24));
  EXPECT_EQ(g.subnormal_rule, srkit::SubnormalRule::extend_to_cover_subnormal);
  EXPECT_TRUE(g.two_stage);
  EXPECT_EQ(rule("amd-mi300", formats::binary32(), formats::fp8_e4m3()).r_bits,
            srkit::RBits::fixed(20));
  EXPECT_FALSE(reg.lookup("nvidia-blackwell", formats::binary16(), formats::fp8_e4m3()));
  EXPECT_EQ(rule("NVIDIA-Blackwell", formats::binary32(), formats::fp8_e5m2()).r_bits.base(), 16u);
  EXPECT_THROW(reg.lookup("google-ironwood", formats::binary32(), formats::binary16()),
               srkit::LookupError);
  EXPECT_THROW(reg.vendor("nobody"), srkit::LookupError);
  const auto h = rule("huawei", formats::binary32(), formats::fp8_e5m2());
  EXPECT_EQ(h.r_bits, srkit::RBits::fixed(14));
  EXPECT_EQ(h.entropy, srkit::EntropyInput::input_lsb);
}

TEST(RegistryTest, LookupNamesRequestedFormats) {
  // fp6-e2m3 shares its significand width with fp8-e4m3.
  const auto r = rule("amd-mi300", formats::binary32(), formats::fp6_e2m3());
  EXPECT_EQ(r.dst_fmt, "fp6-e2m3");
  EXPECT_EQ(r.r_bits, srkit::RBits::fixed(20));
  const auto g = rule("graphcore", formats::binary16(), formats::fp8_e4m3());
  EXPECT_EQ(ref::rat(*g.flush_threshold), ref::pow2(-10));
  const auto g6 = rule("graphcore", formats::binary16(), formats::fp6_e2m3());
  // fp6-e2m3 smallest subnormal is 2^-3.
  EXPECT_EQ(ref::rat(*g6.flush_threshold), ref::pow2(-4));
}

TEST(RegistryTest, ShippedJsonEqualsBuiltin) {
  const auto loaded = ProfileRegistry::load(std::string(SRKIT_SOURCE_DIR) + "/data/profiles.json");
  ASSERT_EQ(loaded.vendors().size(), ProfileRegistry::builtin().vendors().size());
  for (std::size_t i = 0; i < loaded.vendors().size(); ++i) {
    EXPECT_EQ(loaded.vendors()[i], ProfileRegistry::builtin().vendors()[i]);
  }
  const auto again = ProfileRegistry::from_json_text(loaded.to_json_text(0));
  EXPECT_EQ(again.to_json_text(2), loaded.to_json_text(2));
}

TEST(RegistryTest, BadDocumentsAreParseErrors) {
  EXPECT_THROW(ProfileRegistry::from_json_text("{"), srkit::ParseError);
  EXPECT_THROW(ProfileRegistry::from_json_text(R"({"schema":"other","vendors":[]})"),
               srkit::ParseError);
  EXPECT_THROW(ProfileRegistry::load("/nonexistent/profiles.json"), srkit::LookupError);
}

TEST(ConvertTest, GraphcoreFlush) {
  const auto g = rule("graphcore", formats::binary32(), formats::binary16());
  srkit::Xoroshiro128Plus bits(1, 2);
  srkit::RoundingFlags fl;
  const auto pos = srkit::convert(g, W("0x1p-26"), bits, &fl);
  EXPECT_TRUE(pos.identical(WorkingReal::zero(false)));
  EXPECT_TRUE(fl.flushed);
  EXPECT_TRUE(srkit::convert(g, W("-0x1p-26"), bits).identical(WorkingReal::zero(true)));
  // 2^-25 sits exactly between 0 and the smallest subnormal: not flushed.
  int up = 0;
  for (int i = 0; i < 200; ++i) {
    const auto y = srkit::convert(g, W("0x1p-25"), bits);
    ASSERT_TRUE(y.is_zero() || y == W("0x1p-24"));
    if (!y.is_zero()) ++up;
  }
  EXPECT_GT(up, 0);
  EXPECT_LT(up, 200);
}

TEST(ConvertTest, GraphcoreBitsFollowSubnormalDepth) {
  const auto g = rule("graphcore", formats::binary32(), formats::binary16());
  // Across the whole destination subnormal range (and just above it).
  for (int e = -25; e <= -10; ++e) {
    const WorkingReal x = W("0x1.234p0").ldexp(e);
    srkit::Xoroshiro128Plus bits(3, 4);
    srkit::convert(g, x, bits);
    const int deficit = std::max(0, -14 - e);
    EXPECT_EQ(bits.bits_consumed(), static_cast<std::uint64_t>(std::min(24, 13 + deficit)))
        << "exponent " << e;
  }
}

TEST(ConvertTest, TwoStageAcceptsWideInputs) {
  const auto g = rule("graphcore", formats::binary32(), formats::binary16());
  srkit::Xoroshiro128Plus bits(5, 6);
  const auto y = srkit::convert(g, WorkingReal::from_double(0.1), bits);
  EXPECT_TRUE(y == W("0x1.998p-4") || y == W("0x1.99cp-4"));
  // Without two-stage the input must already be a source value.
  const auto a = rule("amd-mi300", formats::binary32(), formats::fp8_e4m3());
  EXPECT_THROW(srkit::convert(a, WorkingReal::from_double(0.1), bits), srkit::DomainError);
}

// With r reduced to 6 the AMD rule's distribution is checked against the
// floor(2^r q) / 2^r law over all 64 words.
TEST(ConvertTest, AmdReducedWidthMatchesTruncatingLaw) {
  auto a = rule("amd-mi300", formats::binary32(), formats::fp8_e4m3());
  a.r_bits = srkit::RBits::fixed(6);
  std::mt19937_64 rng(11);
  const auto g = ref::grid(formats::fp8_e4m3());
  for (int i = 0; i < 200; ++i) {
    const WorkingReal x = ref::random_dyadic(rng, -8, 7, 24, false);
    const Rational xr = ref::rat(x);
    if (xr > g.back()) continue;
    const auto c = ref::neighbors(g, xr);
    const Rational q = ref::q_of(c, xr);
    int up = 0;
    for (std::uint32_t w = 0; w < 64; ++w) {
      const auto y = srkit::convert(a, x, std::uint64_t{w} | 0xABCD00u);
      ASSERT_TRUE(ref::rat(y) == c.lo || ref::rat(y) == c.hi);
      if (!c.exact && ref::rat(y) == c.hi) ++up;
    }
    ASSERT_EQ(Rational(up, 64), ref::floor_rat(q * 64) / 64) << x.to_hex();
  }
}

TEST(ConvertTest, RawWordIsDeterministic) {
  const auto n = rule("nvidia-blackwell", formats::binary32(), formats::bfloat16());
  const WorkingReal x = W("0x1.23456p3");
  EXPECT_TRUE(srkit::convert(n, x, 0x1234u).identical(srkit::convert(n, x, 0x1234u)));
  // Only the low r bits of the word matter.
  EXPECT_TRUE(srkit::convert(n, x, 0x1234u).identical(srkit::convert(n, x, 0xFFFF1234u)));
}

TEST(ConvertTest, HuaweiUsesInputSignificandBits) {
  const auto h = rule("huawei", formats::binary32(), formats::fp8_e5m2());
  // 1 + 2^-3 + 2^-10: the 14 low significand bits hold 2^13 (the 2^-10 bit).
  const WorkingReal x = W("0x1.204p0");
  srkit::Xoroshiro128Plus bits(1, 2);
  const auto y1 = srkit::convert(h, x, bits);
  const auto y2 = srkit::convert(h, x, bits);
  EXPECT_TRUE(y1.identical(y2));
  EXPECT_EQ(bits.bits_consumed(), 0u);
  // q = 0x204 / 0x800 in units of the e5m2 ulp 2^-2: t = floor(2^14 q) and
  // R = 2^13, so up iff t + R >= 2^14.
  const Rational q = (ref::rat(x) - 1) / ref::pow2(-2);
  const bool up = ref::floor_rat(q * ref::pow2(14)) + ref::pow2(13) >= ref::pow2(14);
  EXPECT_EQ(y1, up ? W("1.25") : W("1"));
}

TEST(PackedPairTest, HalvesGoToTheDocumentedOperands) {
  const auto n = rule("nvidia-blackwell", formats::binary32(), formats::binary16());
  const WorkingReal x = W("0x1.002p0");  // q = 1/2
  const auto [y1, y2] = srkit::convert_packed_pair(n, x, x, 0xFFFF0000u);
  EXPECT_EQ(y1, W("1"));
  EXPECT_EQ(y2, W("0x1.004p0"));
  const auto [z1, z2] = srkit::convert_packed_pair(n, x, x, 0x12341234u);
  EXPECT_TRUE(z1.identical(z2));
}

TEST(PackedPairTest, EachSlotMatchesSingleConvert) {
  const auto n = rule("nvidia-blackwell", formats::binary32(), formats::bfloat16());
  const WorkingReal a = W("0x1.0123p0");
  const WorkingReal b = W("-0x1.fedcp5");
  for (std::uint32_t lo = 0; lo < 65536; lo += 97) {
    const std::uint32_t hi = (lo * 2654435761u) & 0xFFFF;
    const auto [y1, y2] = srkit::convert_packed_pair(n, a, b, (hi << 16) | lo);
    ASSERT_TRUE(y1.identical(srkit::convert(n, a, lo)));
    ASSERT_TRUE(y2.identical(srkit::convert(n, b, hi)));
  }
}

TEST(PackedPairTest, NeedsThirtyTwoBitWord) {
  const auto g = rule("graphcore", formats::binary32(), formats::binary16());
  EXPECT_THROW(srkit::convert_packed_pair(g, W("1"), W("1"), 0), srkit::ContractError);
}

// ---- Block quantization ----

std::vector<WorkingReal> values_of(std::initializer_list<double> xs) {
  std::vector<WorkingReal> v;
  for (double x : xs) v.push_back(WorkingReal::from_double(x));
  return v;
}

TEST(BlockTest, Presets) {
  const auto mx = srkit::BlockFormatSpec::mxfp4();
  EXPECT_EQ(mx.group_size, 32u);
  EXPECT_EQ(mx.element, formats::fp4_e2m1());
  EXPECT_EQ(mx.scale, srkit::ScaleFormat::e8m0);
  const auto nv = srkit::BlockFormatSpec::by_name("NVFP4");
  EXPECT_EQ(nv.group_size, 16u);
  EXPECT_EQ(nv.scale, srkit::ScaleFormat::e4m3);
  EXPECT_THROW(srkit::BlockFormatSpec::by_name("fp4"), srkit::LookupError);
}

TEST(BlockTest, ZeroGroup) {
  std::vector<WorkingReal> zeros(16);
  const auto q = srkit::block_quantize(zeros, srkit::BlockFormatSpec::nvfp4(),
                                       srkit::SrConfig::limited(8), 1);
  ASSERT_EQ(q.elements.size(), 16u);
  for (const auto& e : q.elements) EXPECT_TRUE(e.identical(WorkingReal::zero()));
  EXPECT_EQ(q.scales[0], formats::fp8_e4m3().min_subnormal());
  for (const auto& d : q.dequantize(16)) EXPECT_TRUE(d.is_zero());
}

TEST(BlockTest, OnesGroup) {
  std::vector<WorkingReal> ones(32, W("1"));
  const auto q = srkit::block_quantize(ones, srkit::BlockFormatSpec::mxfp4(),
                                       srkit::RoundingMode::rne, 1);
  // amax / 6 = 1/6 rounds up to the power of two 1/4; 1 / (1/4) = 4 is on the grid.
  EXPECT_EQ(q.scales[0], W("0.25"));
  EXPECT_EQ(q.scale_bits[0], 125u);
  for (const auto& d : q.dequantize(32)) EXPECT_EQ(d, W("1"));
}

TEST(BlockTest, RepresentableGroupIsExactUnderSr) {
  const auto v = values_of({6, -4, 3, 2, 1.5, -1, 0.5, 0, -6, 4, -3, 2, 1.5, 1, -0.5, 0});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto q = srkit::block_quantize(v, srkit::BlockFormatSpec::nvfp4(),
                                         srkit::SrConfig::exact_sr(), seed);
    EXPECT_EQ(q.scales[0], W("1"));
    const auto d = q.dequantize(16);
    for (std::size_t i = 0; i < v.size(); ++i) ASSERT_EQ(d[i], v[i]);
  }
}

TEST(BlockTest, ScaleCoversGroupMaximum) {
  std::mt19937_64 rng(17);
  for (const auto& spec : {srkit::BlockFormatSpec::mxfp4(), srkit::BlockFormatSpec::nvfp4()}) {
    for (int t = 0; t < 50; ++t) {
      std::vector<WorkingReal> v;
      for (unsigned i = 0; i < spec.group_size; ++i) v.push_back(ref::random_dyadic(rng, -6, 6, 20));
      const auto q = srkit::block_quantize(v, spec, srkit::SrConfig::limited(8), t);
      Rational amax = 0;
      for (const auto& x : v) amax = std::max(amax, Rational(abs(ref::rat(x))));
      ASSERT_LE(amax / ref::rat(q.scales[0]), 6);
      // Dequantized values stay within one element ulp-span of the input.
      const auto d = q.dequantize(spec.group_size);
      for (std::size_t i = 0; i < v.size(); ++i) {
        ASSERT_LE(Rational(abs(ref::rat(d[i]) - ref::rat(v[i]))), 2 * ref::rat(q.scales[0]));
      }
    }
  }
}

TEST(BlockTest, NvScaleIsE4m3RoundedThenBumped) {
  // amax = 7: 7/6 rounds (RNE on e4m3) to 1.125, which cannot hold 7; the
  // next e4m3 value 1.25 can.
  const auto v = values_of({7, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0});
  const auto q = srkit::block_quantize(v, srkit::BlockFormatSpec::nvfp4(),
                                       srkit::RoundingMode::rne, 1);
  EXPECT_EQ(q.scales[0], W("1.25"));
  EXPECT_EQ(q.scale_bits[0], srkit::encode_bits(formats::fp8_e4m3(), W("1.25")));
  EXPECT_TRUE(q.inexact_quotient);  // 1 / 1.25 is not dyadic
}

TEST(BlockTest, E8m0ScalingInvariance) {
  std::mt19937_64 rng(5);
  std::vector<WorkingReal> v;
  for (int i = 0; i < 32; ++i) v.push_back(ref::random_dyadic(rng, -4, 4, 16));
  const auto spec = srkit::BlockFormatSpec::mxfp4();
  const auto base = srkit::block_quantize(v, spec, srkit::SrConfig::limited(6), 99);
  for (int k : {-20, -3, 1, 7, 30}) {
    std::vector<WorkingReal> s;
    for (const auto& x : v) s.push_back(x.ldexp(k));
    const auto q = srkit::block_quantize(s, spec, srkit::SrConfig::limited(6), 99);
    EXPECT_EQ(q.scales[0], base.scales[0].ldexp(k));
    EXPECT_EQ(q.element_bits, base.element_bits);
  }
}

TEST(BlockTest, PaddingAndErrors) {
  const auto v = values_of({1, 2, 3});
  const auto q = srkit::block_quantize(v, srkit::BlockFormatSpec::nvfp4(),
                                       srkit::RoundingMode::rne, 0);
  EXPECT_TRUE(q.padded);
  EXPECT_EQ(q.elements.size(), 3u);
  EXPECT_EQ(q.dequantize(16).size(), 3u);
  std::vector<WorkingReal> bad = {W("1"), WorkingReal::nan()};
  EXPECT_THROW(srkit::block_quantize(bad, srkit::BlockFormatSpec::nvfp4(), srkit::RoundingMode::rne,
                                     0),
               srkit::DomainError);
}

}  // namespace
