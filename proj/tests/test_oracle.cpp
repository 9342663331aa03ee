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

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "reference.hpp"
#include "srkit/entropy.hpp"
#include "srkit/error.hpp"
#include "srkit/grid.hpp"
#include "srkit/oracle.hpp"

namespace {

using srkit::SrConfig;
using srkit::SrVariant;
using srkit::WorkingReal;
using ref::Rational;
namespace formats = srkit::formats;

WorkingReal W(const char* text) { return srkit::parse_working_real(text).value; }

WorkingReal at_q(const Rational& q) { return ref::from_rational_dyadic(1 + q * ref::pow2(-10)); }

const Rational kUlp = ref::pow2(-10);

TEST(DistributionTest, ExactSrIsUnbiased) {
  const auto d = srkit::distribution(formats::binary16(), at_q(Rational(23, 32)),
                                     SrConfig::exact_sr());
  EXPECT_EQ(d.p_up, Rational(23, 32));
  EXPECT_EQ(d.bias, 0);
  EXPECT_EQ(d.mean, ref::rat(d.x));
  EXPECT_EQ(d.r_used, 0u);
}

TEST(DistributionTest, LimitedExamples) {
  const auto a = srkit::distribution(formats::binary16(), at_q(Rational(1, 8)), SrConfig::limited(3));
  EXPECT_EQ(a.p_up, Rational(1, 8));
  EXPECT_EQ(a.bias, 0);
  const auto b = srkit::distribution(formats::binary16(), at_q(Rational(23, 32)), SrConfig::limited(3));
  EXPECT_EQ(b.p_up, Rational(5, 8));
  EXPECT_EQ(b.bias, Rational(-3, 32) * kUlp);
  EXPECT_EQ(b.q, Rational(23, 32));
  EXPECT_EQ(b.r_used, 3u);
}

TEST(DistributionTest, P3109Examples) {
  const auto c = srkit::distribution(formats::binary16(), at_q(Rational(23, 32)),
                                     SrConfig::p3109(SrVariant::p3109_c, 3));
  EXPECT_EQ(c.p_up, Rational(6, 8));
  const auto a = srkit::distribution(formats::binary16(), at_q(Rational(5, 16)),
                                     SrConfig::p3109(SrVariant::p3109_a, 3));
  EXPECT_EQ(a.p_up, Rational(1, 4));
}

TEST(DistributionTest, ExactInputAndNegativeSide) {
  const auto e = srkit::distribution(formats::binary16(), W("1.5"), SrConfig::limited(5));
  EXPECT_TRUE(e.exact);
  EXPECT_EQ(e.p_up, 0);
  EXPECT_EQ(e.bias, 0);
  // For x < 0 the kernel rounds the magnitude; toward +inf is toward zero.
  const auto n = srkit::distribution(formats::binary16(), -at_q(Rational(23, 32)), SrConfig::limited(3));
  EXPECT_EQ(n.p_up, Rational(3, 8));
  EXPECT_EQ(n.bias, Rational(3, 32) * kUlp);
}

TEST(DistributionTest, ThreadCountDoesNotMatter) {
  const WorkingReal x = W("0x1.0123456p0");
  const auto cfg = SrConfig::p3109(SrVariant::p3109_b, 12);
  const auto one = srkit::distribution(formats::binary16(), x, cfg, 1);
  for (unsigned t : {2u, 3u, 7u}) {
    const auto many = srkit::distribution(formats::binary16(), x, cfg, t);
    EXPECT_EQ(many.p_up, one.p_up);
    EXPECT_EQ(many.mean, one.mean);
  }
}

TEST(DistributionTest, BudgetAndValidation) {
  EXPECT_THROW(srkit::distribution(formats::binary16(), W("1"), SrConfig::limited(21)),
               srkit::BudgetError);
  EXPECT_NO_THROW(srkit::distribution(formats::binary16(), W("0x1.0001p0"), SrConfig::limited(20)));
  EXPECT_THROW(srkit::distribution(formats::binary16(), W("nan"), SrConfig::limited(3)),
               srkit::DomainError);
}

// floor(2^r q) / 2^r for truncation and A; monotone in q for every variant;
// mean identity; bias zero iff 2^r q is an integer (truncation).
TEST(DistributionTest, LawsOverRandomInputs) {
  std::mt19937_64 rng(77);
  for (const auto* f : {&formats::binary16(), &formats::fp8_e5m2(), &formats::fp6_e3m2()}) {
    const auto g = ref::grid(*f);
    for (int i = 0; i < 150; ++i) {
      const WorkingReal x = ref::random_dyadic(rng, f->emin - f->precision, f->emax - 1, 24);
      const Rational xr = ref::rat(x);
      if (xr < g.front() || xr > g.back()) continue;
      const auto c = ref::neighbors(g, xr);
      const Rational mag = xr < 0 ? Rational(-xr) : xr;
      const Rational q_mag = ref::q_of(ref::neighbors(g, mag), mag);
      for (unsigned r = 1; r <= 8; ++r) {
        const Rational scale = ref::pow2(r);
        const Rational law = ref::floor_rat(q_mag * scale) / scale;
        for (auto v : {SrVariant::limited, SrVariant::p3109_a}) {
          const auto cfg = v == SrVariant::limited ? SrConfig::limited(r) : SrConfig::p3109(v, r);
          const auto d = srkit::distribution(*f, x, cfg);
          const Rational p_away = xr < 0 ? Rational(1 - d.p_up) : d.p_up;
          if (c.exact) {
            ASSERT_EQ(d.bias, 0);
            continue;
          }
          ASSERT_EQ(p_away, law) << f->name << ' ' << x.to_hex() << " r=" << r;
          ASSERT_EQ(d.mean, d.p_up * c.hi + (1 - d.p_up) * c.lo);
          ASSERT_EQ(d.bias == 0, ref::floor_rat(q_mag * scale) == q_mag * scale);
          ASSERT_LE(abs(d.bias), (c.hi - c.lo) / scale);
        }
      }
    }
  }
}

TEST(DistributionTest, MonotoneInQ) {
  for (auto v : {SrVariant::limited, SrVariant::p3109_a, SrVariant::p3109_b, SrVariant::p3109_c}) {
    for (unsigned r = 1; r <= 5; ++r) {
      const auto cfg = v == SrVariant::limited ? SrConfig::limited(r) : SrConfig::p3109(v, r);
      Rational prev = 0;
      for (int k = 0; k < 1024; ++k) {
        const auto d = srkit::distribution(formats::binary16(), at_q(Rational(k, 1024)), cfg);
        ASSERT_GE(d.p_up, prev) << srkit::to_string(v) << " r=" << r << " k=" << k;
        prev = d.p_up;
      }
    }
  }
}

TEST(DistributionTest, JsonUsesRationalStrings) {
  const auto d = srkit::distribution(formats::binary16(), at_q(Rational(23, 32)), SrConfig::limited(3));
  const auto j = nlohmann::json::parse(d.to_json());
  EXPECT_EQ(j.at("p_up"), "5/8");
  EXPECT_EQ(j.at("q"), "23/32");
  EXPECT_EQ(j.at("bias"), "-3/32768");
  EXPECT_EQ(srkit::to_string(Rational(4, 2)), "2/1");
}

TEST(ExpectedSumTest, SingleAddendMatchesDistribution) {
  const std::vector<WorkingReal> one = {at_q(Rational(23, 32))};
  const auto cfg = SrConfig::limited(3);
  const auto s = srkit::expected_sum_enumeration(one, formats::binary16(), cfg);
  EXPECT_EQ(s.mean, srkit::distribution(formats::binary16(), one[0], cfg).mean);
  EXPECT_EQ(s.paths, 8);
}

TEST(ExpectedSumTest, UnbiasedWhenPartialSumsFitRBitsBelow) {
  // Every partial sum is a multiple of 2^-13, three bits below the binary16
  // ulp at 1, so four random bits see the whole remainder.
  const std::vector<WorkingReal> v = {W("1"), W("0x1p-12"), W("0x1.8p-12")};
  const auto s = srkit::expected_sum_enumeration(v, formats::binary16(), SrConfig::limited(4));
  EXPECT_EQ(s.mean, s.exact_sum);
  EXPECT_EQ(s.exact_sum, 1 + Rational(5, 2) * ref::pow2(-12));
  EXPECT_EQ(s.paths, 4096);
  EXPECT_GT(s.variance, 0);
}

TEST(ExpectedSumTest, TruncationBiasShowsUp) {
  const std::vector<WorkingReal> v = {W("1"), W("0x1p-15"), W("0x1p-15")};
  const auto s = srkit::expected_sum_enumeration(v, formats::binary16(), SrConfig::limited(4));
  EXPECT_LT(s.mean, s.exact_sum);
  const auto e = srkit::expected_sum_enumeration(v, formats::binary16(), SrConfig::exact_sr());
  EXPECT_EQ(e.mean, e.exact_sum);
}

TEST(ExpectedSumTest, MonteCarloAgrees) {
  const std::vector<WorkingReal> v = {W("1"), W("0x1.4p-11"), W("0x1.cp-12")};
  const auto cfg = SrConfig::limited(4);
  const auto s = srkit::expected_sum_enumeration(v, formats::binary16(), cfg);
  constexpr int kTrials = 100000;
  auto bits = srkit::derive_stream(2026, 3);
  Rational total = 0;
  for (int t = 0; t < kTrials; ++t) {
    WorkingReal acc = srkit::apply_rounding(formats::binary16(), v[0], cfg, bits);
    for (std::size_t i = 1; i < v.size(); ++i) {
      acc = srkit::exact_op_then_round(srkit::ArithOp::add, acc, v[i], formats::binary16(), cfg, bits);
    }
    total += ref::rat(acc);
  }
  const double mc = static_cast<double>(total / kTrials);
  const double sd = std::sqrt(static_cast<double>(s.variance) / kTrials);
  EXPECT_LE(std::abs(mc - static_cast<double>(s.mean)), 4 * sd);
}

TEST(ExpectedSumTest, Budget) {
  std::vector<WorkingReal> v(7, W("1"));
  EXPECT_THROW(srkit::expected_sum_enumeration(v, formats::binary16(), SrConfig::limited(4)),
               srkit::BudgetError);
  std::vector<WorkingReal> many(25, W("1"));
  EXPECT_THROW(srkit::expected_sum_enumeration(many, formats::binary16(), SrConfig::exact_sr()),
               srkit::BudgetError);
}

}  // namespace
