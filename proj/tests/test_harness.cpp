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

#include <algorithm>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "reference.hpp"
#include "srkit/error.hpp"
#include "srkit/harness.hpp"

namespace {

using srkit::ExperimentKind;
using srkit::ExperimentSpec;
using srkit::WorkingReal;
using ref::Rational;

WorkingReal W(const char* text) { return srkit::parse_working_real(text).value; }

TEST(ModeTest, Parse) {
  EXPECT_TRUE(std::holds_alternative<srkit::RoundingMode>(srkit::parse_mode("rne").rounding));
  EXPECT_TRUE(std::holds_alternative<srkit::NoRounding>(srkit::parse_mode("none").rounding));
  const auto sr = srkit::parse_mode("sr");
  EXPECT_EQ(std::get<srkit::SrConfig>(sr.rounding).variant, srkit::SrVariant::exact);
  const auto lim = std::get<srkit::SrConfig>(srkit::parse_mode("limited:6:rne").rounding);
  EXPECT_EQ(lim.r, 6u);
  EXPECT_EQ(lim.intermediate, srkit::Intermediate::rne);
  const auto b = std::get<srkit::SrConfig>(srkit::parse_mode("b:3").rounding);
  EXPECT_EQ(b.variant, srkit::SrVariant::p3109_b);
  EXPECT_THROW(srkit::parse_mode("limited"), srkit::ParseError);
  EXPECT_THROW(srkit::parse_mode("limited:0"), srkit::ParseError);
  EXPECT_THROW(srkit::parse_mode("q:3"), srkit::ParseError);
  EXPECT_EQ(srkit::parse_experiment_kind("sum-growth"), ExperimentKind::sum_growth);
  EXPECT_THROW(srkit::parse_experiment_kind("train"), srkit::ParseError);
}

TEST(SpecTest, Validation) {
  auto s = srkit::default_spec(ExperimentKind::sum_growth);
  s.trials = 0;
  EXPECT_THROW(s.validate(), srkit::ContractError);
  s = srkit::default_spec(ExperimentKind::stagnation);
  s.n = 0;
  EXPECT_THROW(s.validate(), srkit::ContractError);
  EXPECT_THROW(srkit::run_experiment(srkit::default_spec(ExperimentKind::pi_demo)),
               srkit::ContractError);
}

TEST(StagnationTest, RneStaysPutAndSrTracksExact) {
  auto s = srkit::default_spec(ExperimentKind::stagnation);
  s.n = 4096;
  s.trials = 100;
  s.seed = 1;
  const auto res = srkit::run_stagnation(s);
  const auto* rne = res.cell("rne", 4096, 0);
  ASSERT_NE(rne, nullptr);
  EXPECT_EQ(rne->median_abs_err, 0.5);
  for (const auto& row : res.rows) {
    EXPECT_EQ(row.exact, W("1.5"));
    if (row.mode == "rne") {
      EXPECT_EQ(row.final_value, W("1"));
    }
  }
  const auto* sr = res.cell("sr", 4096, 0);
  ASSERT_NE(sr, nullptr);
  EXPECT_EQ(sr->trials, 100u);
  EXPECT_GE(sr->mean_final, 1.45);
  EXPECT_LE(sr->mean_final, 1.55);
}

TEST(StagnationTest, RneConstantForHalfUlpOverDeltaSteps) {
  // acc0 = 2 has ulp 2^-9 in binary16; delta = 2^-11 is below the half ulp
  // 2^-10, so the trajectory holds for at least ulp / (2 delta) = 2 steps
  // (indeed forever).
  auto s = srkit::default_spec(ExperimentKind::stagnation);
  s.acc0 = W("2");
  s.delta = W("0x1p-11");
  s.n = 64;
  s.trials = 1;
  s.modes = {srkit::parse_mode("rne")};
  const auto res = srkit::run_stagnation(s);
  ASSERT_EQ(res.rows.size(), 1u);
  EXPECT_EQ(res.rows[0].final_value, W("2"));
  EXPECT_EQ(res.rows[0].exact, W("2") + W("0x1p-11") * W("64"));
}

TEST(SumGrowthTest, SingleAddendHasNoError) {
  auto s = srkit::default_spec(ExperimentKind::sum_growth);
  s.n_grid = {1};
  s.trials = 5;
  s.modes = {srkit::parse_mode("rne"), srkit::parse_mode("sr"), srkit::parse_mode("limited:4")};
  const auto res = srkit::run_sum_growth(s);
  ASSERT_EQ(res.rows.size(), 15u);
  for (const auto& row : res.rows) {
    EXPECT_EQ(row.abs_err, 0.0);
    EXPECT_EQ(row.final_value, row.exact);
  }
}

TEST(SumGrowthTest, RowsStayWithinEnvelope) {
  auto s = srkit::default_spec(ExperimentKind::sum_growth);
  s.n_grid = {16, 64, 256};
  s.trials = 4;
  s.seed = 3;
  const auto res = srkit::run_sum_growth(s);
  for (const auto& row : res.rows) {
    // Each pre-rounded addend lies in [0, 1], so every partial sum does too.
    EXPECT_GE(row.final_value, WorkingReal::zero());
    EXPECT_LE(row.final_value, WorkingReal::from_int(static_cast<std::int64_t>(row.n)));
    EXPECT_GE(row.exact, WorkingReal::zero());
  }
  // Rows are grouped by cell and sorted by trial within each cell.
  for (std::size_t i = 1; i < res.rows.size(); ++i) {
    const auto& a = res.rows[i - 1];
    const auto& b = res.rows[i];
    if (a.mode == b.mode && a.n == b.n && a.r == b.r) {
      EXPECT_EQ(a.trial + 1, b.trial);
    }
  }
}

TEST(SumGrowthTest, ConstantAddendMatchesStagnation) {
  auto s = srkit::default_spec(ExperimentKind::sum_growth);
  s.n_grid = {4096};
  s.trials = 1;
  s.constant_addend = W("0x1p-13");
  s.modes = {srkit::parse_mode("rne")};
  const auto res = srkit::run_sum_growth(s);
  // The first addend starts the sum, so RNE sticks at 2^-13 * 2048 = 0.25 once
  // the addend falls below half an ulp of the accumulator.
  ASSERT_EQ(res.rows.size(), 1u);
  EXPECT_EQ(res.rows[0].exact, W("0.5"));
  EXPECT_LT(res.rows[0].final_value, W("0.5"));
}

TEST(ThreadsTest, CsvIndependentOfThreadCount) {
  for (auto kind : {ExperimentKind::sum_growth, ExperimentKind::r_sweep, ExperimentKind::dot,
                    ExperimentKind::horner, ExperimentKind::pairwise, ExperimentKind::gd,
                    ExperimentKind::stagnation}) {
    auto s = srkit::default_spec(kind);
    s.trials = 3;
    s.seed = 99;
    if (kind == ExperimentKind::sum_growth) s.n_grid = {32, 64, 128};
    if (kind == ExperimentKind::r_sweep) {
      s.n = 256;
      s.r_grid = {0, 2, 6};
    }
    if (kind == ExperimentKind::dot || kind == ExperimentKind::pairwise) s.n_grid = {16, 64};
    if (kind == ExperimentKind::horner) s.n_grid = {8, 16};
    if (kind == ExperimentKind::gd) s.iterations = 50;
    if (kind == ExperimentKind::stagnation) s.n = 512;
    s.threads = 1;
    const std::string one = srkit::run_experiment(s).to_csv();
    s.threads = 4;
    const std::string four = srkit::run_experiment(s).to_csv();
    EXPECT_EQ(one, four) << srkit::to_string(kind);
    EXPECT_EQ(one.substr(0, one.find('\n')), "mode,n,r,trial,final,exact,abs_err,rel_err");
  }
}

TEST(RSweepTest, HeuristicAndDegenerateR) {
  auto s = srkit::default_spec(ExperimentKind::r_sweep);
  s.n = 4096;
  s.r_grid = {0, 6, 24};
  s.trials = 3;
  s.seed = 5;
  const auto res = srkit::run_r_sweep(s);
  ASSERT_TRUE(res.heuristic_r.has_value());
  EXPECT_EQ(*res.heuristic_r, 6u);
  ASSERT_TRUE(res.knee_r.has_value());
  // r = 0 is plain truncation: rows equal an RZ sum over the same data.
  auto s2 = s;
  s2.r_grid = {0};
  s2.modes = {};
  const auto r0 = srkit::run_r_sweep(s2);
  auto rz = srkit::default_spec(ExperimentKind::sum_growth);
  rz.n_grid = {4096};
  rz.trials = 3;
  rz.seed = 5;
  rz.modes = {srkit::parse_mode("rz")};
  const auto det = srkit::run_sum_growth(rz);
  ASSERT_EQ(r0.rows.size(), det.rows.size());
  for (std::size_t i = 0; i < det.rows.size(); ++i) {
    EXPECT_EQ(r0.rows[i].final_value, det.rows[i].final_value);
  }
}

TEST(KernelExperimentTest, PairwiseOnesIsExact) {
  auto s = srkit::default_spec(ExperimentKind::pairwise);
  s.n_grid = {2, 64, 2048};
  s.constant_addend = W("1");
  s.trials = 2;
  const auto res = srkit::run_kernel_experiment(s);
  for (const auto& row : res.rows) {
    EXPECT_EQ(row.abs_err, 0.0) << row.mode << ' ' << row.n;
    EXPECT_EQ(row.final_value, WorkingReal::from_int(static_cast<std::int64_t>(row.n)));
  }
}

TEST(KernelExperimentTest, DotAndHornerProduceFiniteErrors) {
  auto d = srkit::default_spec(ExperimentKind::dot);
  d.n_grid = {64, 256};
  d.trials = 4;
  const auto dr = srkit::run_kernel_experiment(d);
  EXPECT_EQ(dr.rows.size(), 2u * 2u * 4u);
  for (const auto& row : dr.rows) {
    EXPECT_GE(row.rel_err, 0.0);
    EXPECT_LT(row.rel_err, 1.0);
  }
  auto h = srkit::default_spec(ExperimentKind::horner);
  h.n_grid = {64};
  h.trials = 4;
  const auto hr = srkit::run_kernel_experiment(h);
  EXPECT_EQ(hr.rows.size(), 2u * 4u);
  EXPECT_NE(hr.cell("rne", 64, 0), nullptr);
}

TEST(GdTest, ZeroStepNeverMoves) {
  auto s = srkit::default_spec(ExperimentKind::gd);
  s.step = WorkingReal::zero();
  s.iterations = 20;
  s.trials = 3;
  const auto res = srkit::run_gd(s);
  const auto* none = res.cell("none", 16, 0);
  const auto* sr = res.cell("sr", 16, 0);
  ASSERT_NE(none, nullptr);
  ASSERT_NE(sr, nullptr);
  // Identical starting point and w* per trial, so every mode reports the
  // same untouched distance.
  for (const auto& row : res.rows) {
    const auto& first = *std::find_if(res.rows.begin(), res.rows.end(), [&](const auto& r) {
      return r.trial == row.trial && r.mode == "none";
    });
    EXPECT_EQ(row.final_value, first.final_value);
  }
}

TEST(GdTest, UnroundedRunConverges) {
  auto s = srkit::default_spec(ExperimentKind::gd);
  s.trials = 3;
  s.modes = {srkit::parse_mode("none")};
  const auto res = srkit::run_gd(s);
  for (const auto& row : res.rows) {
    EXPECT_LT(row.abs_err, 1e-6);
    EXPECT_FALSE(row.diverged);
  }
}

TEST(GdTest, LargeStepDivergesWithoutFailing) {
  auto s = srkit::default_spec(ExperimentKind::gd);
  s.step = W("3");
  s.iterations = 200;
  s.trials = 1;
  s.modes = {srkit::parse_mode("none")};
  const auto res = srkit::run_gd(s);
  ASSERT_EQ(res.rows.size(), 1u);
  EXPECT_TRUE(res.rows[0].diverged);
}

TEST(SlopeTest, SrGrowsLikeSqrtN) {
  auto s = srkit::default_spec(ExperimentKind::sum_growth);
  s.n_grid = {256, 512, 1024, 2048, 4096, 8192};
  s.trials = 20;
  s.seed = 42;
  s.modes = {srkit::parse_mode("sr")};
  const auto res = srkit::run_sum_growth(s);
  ASSERT_TRUE(res.slopes.count("sr"));
  EXPECT_GT(res.slopes.at("sr"), 0.2);
  EXPECT_LT(res.slopes.at("sr"), 0.8);
  const auto j = nlohmann::json::parse(res.summary_json());
  EXPECT_TRUE(j.contains("slopes"));
}

TEST(PiDemoTest, ExactDecimalValues) {
  const auto p = srkit::run_pi_demo();
  EXPECT_EQ(p.lo, "3.141");
  EXPECT_EQ(p.hi, "3.142");
  EXPECT_EQ(p.q_numerator, "59265358979323846");
  EXPECT_EQ(p.q_denominator, "100000000000000000");
  EXPECT_EQ(p.q_decimal, "0.59265358979323846");
  EXPECT_EQ(p.up_error, "0.00040734641020676154");
  EXPECT_EQ(p.down_error, "-0.00059265358979323846");
  EXPECT_EQ(p.expected_sr, p.x);
  EXPECT_EQ(p.random_digits, 17u);
  EXPECT_NE(p.text().find("P(round up)  = 0.59265358979323846"), std::string::npos);
  const auto j = nlohmann::json::parse(p.to_json());
  EXPECT_EQ(j.at("q_decimal"), "0.59265358979323846");
}

}  // namespace
