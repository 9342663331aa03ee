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

#include "srkit/oracle.hpp"

#include <algorithm>
#include <map>
#include <thread>
#include <vector>

#include <json.hpp>

#include "srkit/error.hpp"
#include "srkit/grid.hpp"

namespace srkit {

namespace {

struct ValueLess {
  bool operator()(const WorkingReal& a, const WorkingReal& b) const { return a < b; }
};

using WeightedOutcomes = std::map<WorkingReal, Rational, ValueLess>;

WorkingReal run_fixed_width(const FloatFormat& fmt, const WorkingReal& x, const SrConfig& cfg,
                            std::uint64_t draw) {
  if (cfg.variant == SrVariant::limited) return sr_limited(fmt, x, cfg, RandomDraw{draw});
  return p3109_round(fmt, x, cfg, RandomDraw{draw});
}

// Every outcome of rounding x once, with its exact probability.
WeightedOutcomes outcomes_of(const FloatFormat& fmt, const WorkingReal& x, const SrConfig& cfg) {
  WeightedOutcomes out;
  if (cfg.variant == SrVariant::exact) {
    const RoundingCandidates c = neighbors(fmt, x);
    if (c.exact) {
      out[x] = 1;
      return out;
    }
    const QFraction q = q_fraction(fmt, x);
    const Rational p(q.numerator, q.denominator);
    out[c.hi] += p;
    out[c.lo] += 1 - p;
    return out;
  }
  const std::uint64_t draws = std::uint64_t{1} << cfg.r;
  const Rational w(1, BigInt(draws));
  for (std::uint64_t d = 0; d < draws; ++d) out[run_fixed_width(fmt, x, cfg, d)] += w;
  return out;
}

}  // namespace

Rational to_rational(const WorkingReal& x) {
  if (!x.is_finite()) throw DomainError("only finite values have a rational value");
  if (x.is_zero()) return Rational(0);
  BigInt num = x.significand();
  BigInt den = 1;
  if (x.exponent() >= 0) {
    num <<= static_cast<unsigned>(x.exponent());
  } else {
    den <<= static_cast<unsigned>(-x.exponent());
  }
  if (x.negative()) num = -num;
  return Rational(num, den);
}

std::string to_string(const Rational& v) {
  return boost::multiprecision::numerator(v).str() + "/" +
         boost::multiprecision::denominator(v).str();
}

std::string DistributionReport::to_json(int indent) const {
  nlohmann::ordered_json j;
  j["x"] = x.to_hex();
  j["lo"] = lo.to_hex();
  j["hi"] = hi.to_hex();
  j["exact"] = exact;
  j["q"] = to_string(q);
  j["p_up"] = to_string(p_up);
  j["mean"] = to_string(mean);
  j["bias"] = to_string(bias);
  j["r_used"] = r_used;
  j["variant"] = variant;
  return j.dump(indent);
}

DistributionReport distribution(const FloatFormat& fmt, const WorkingReal& x,
                                const SrConfig& cfg, unsigned threads) {
  cfg.validate();
  if (cfg.fixed_width() && cfg.r > kMaxOracleRandomBits) {
    throw BudgetError("oracle enumeration is limited to r <= " +
                      std::to_string(kMaxOracleRandomBits));
  }
  const RoundingCandidates c = neighbors(fmt, x);
  const QFraction q = q_fraction(fmt, x);
  DistributionReport rep;
  rep.x = x;
  rep.lo = c.lo;
  rep.hi = c.hi;
  rep.exact = c.exact;
  rep.q = Rational(q.numerator, q.denominator);
  rep.r_used = cfg.r;
  rep.variant = cfg.describe();
  const Rational xr = to_rational(x);

  if (!cfg.fixed_width()) {
    rep.p_up = c.exact ? Rational(0) : rep.q;
    rep.mean = xr;
    rep.bias = 0;
    return rep;
  }

  const std::uint64_t draws = std::uint64_t{1} << cfg.r;
  const unsigned workers =
      static_cast<unsigned>(std::clamp<std::uint64_t>(threads, 1, draws));
  std::vector<std::uint64_t> ups(workers, 0);
  std::vector<WorkingReal> sums(workers);
  auto work = [&](unsigned w) {
    const std::uint64_t begin = draws * w / workers;
    const std::uint64_t end = draws * (w + 1) / workers;
    for (std::uint64_t d = begin; d < end; ++d) {
      const WorkingReal out = run_fixed_width(fmt, x, cfg, d);
      if (!c.exact && out == c.hi) ++ups[w];
      sums[w] = sums[w] + out;
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  std::uint64_t up_total = 0;
  WorkingReal sum_total;
  for (unsigned w = 0; w < workers; ++w) {
    up_total += ups[w];
    sum_total = sum_total + sums[w];
  }
  rep.p_up = Rational(BigInt(up_total), BigInt(draws));
  rep.mean = to_rational(sum_total) / Rational(BigInt(draws));
  rep.bias = rep.mean - xr;
  return rep;
}

ExpectedSum expected_sum_enumeration(std::span<const WorkingReal> addends,
                                     const FloatFormat& fmt, const SrConfig& cfg) {
  cfg.validate();
  if (addends.empty()) throw ContractError("expected_sum_enumeration needs addends");
  const std::uint64_t n = addends.size();
  const std::uint64_t bits_per_step = cfg.fixed_width() ? cfg.r : 1;
  if (n * bits_per_step > kMaxEnumerationBits) {
    throw BudgetError("enumeration needs 2^" + std::to_string(n * bits_per_step) +
                      " paths; the budget is 2^" + std::to_string(kMaxEnumerationBits));
  }
  ExpectedSum out;
  WorkingReal exact;
  for (const auto& a : addends) exact = exact + a;
  out.exact_sum = to_rational(exact);
  out.paths = BigInt(1) << static_cast<unsigned>(n * bits_per_step);

  WeightedOutcomes state = outcomes_of(fmt, addends[0], cfg);
  for (std::size_t i = 1; i < addends.size(); ++i) {
    WeightedOutcomes next;
    for (const auto& [value, weight] : state) {
      for (const auto& [v, w] : outcomes_of(fmt, value + addends[i], cfg)) {
        next[v] += weight * w;
      }
    }
    state = std::move(next);
  }
  Rational second;
  for (const auto& [value, weight] : state) {
    const Rational v = to_rational(value);
    out.mean += weight * v;
    second += weight * v * v;
  }
  out.variance = second - out.mean * out.mean;
  out.outcomes = state.size();
  return out;
}

}  // namespace srkit
