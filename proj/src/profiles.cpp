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

#include "srkit/profiles.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "srkit/error.hpp"
#include "srkit/grid.hpp"

namespace srkit {

namespace {

using nlohmann::json;

constexpr std::string_view kSchema = "srkit-profiles/1";

std::string lowered(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string_view to_string(RBits::Kind kind) {
  switch (kind) {
    case RBits::Kind::fixed: return "fixed";
    case RBits::Kind::range: return "range";
    case RBits::Kind::up_to: return "up_to";
  }
  return "?";
}

RBits::Kind parse_rbits_kind(const std::string& s) {
  if (s == "fixed") return RBits::Kind::fixed;
  if (s == "range") return RBits::Kind::range;
  if (s == "up_to") return RBits::Kind::up_to;
  throw ParseError("unknown r_bits kind '" + s + "'");
}

ConversionRule rule(std::string src, std::string dst, RBits r, std::string note) {
  ConversionRule out;
  out.src_fmt = std::move(src);
  out.dst_fmt = std::move(dst);
  out.r_bits = r;
  out.note = std::move(note);
  return out;
}

ConversionRule graphcore_rule(std::string src, std::string dst, RBits r, std::string note) {
  ConversionRule out = rule(std::move(src), std::move(dst), r, std::move(note));
  out.subnormal_rule = SubnormalRule::extend_to_cover_subnormal;
  // Half the destination's smallest subnormal.
  out.flush_threshold = out.dst().min_subnormal().ldexp(-1);
  out.random_word_width = 0;
  return out;
}

std::vector<VendorProfile> builtin_vendors() {
  std::vector<VendorProfile> v;

  VendorProfile graphcore{"graphcore", {}, {}};
  {
    ConversionRule r32 = graphcore_rule("binary32", "binary16", RBits::range(13, 24),
                                        "arithmetic result rounded to binary32 first; "
                                        "random bits grow with destination subnormal depth");
    r32.two_stage = true;
    graphcore.rules.push_back(r32);
    graphcore.rules.push_back(graphcore_rule("binary16", "fp8-e4m3", RBits::range(7, 11),
                                             "16- to 8-bit conversion"));
    graphcore.rules.push_back(graphcore_rule("binary16", "fp8-e5m2", RBits::range(8, 11),
                                             "16- to 8-bit conversion"));
    graphcore.notes = {"random bits from an xoroshiro128+ stream",
                       "inputs below half the smallest destination subnormal flush to zero"};
  }
  v.push_back(graphcore);

  VendorProfile nvidia{"nvidia-blackwell", {}, {}};
  nvidia.rules.push_back(rule("binary32", "binary16", RBits::fixed(13), "cvt.rs"));
  nvidia.rules.push_back(rule("binary32", "bfloat16", RBits::fixed(16), "cvt.rs"));
  nvidia.rules.push_back(rule("binary32", "fp8-e4m3", RBits::up_to(16),
                              "cvt.rs; bound used as exact width; packed pairs share a word"));
  nvidia.rules.push_back(rule("binary32", "fp8-e5m2", RBits::up_to(16),
                              "cvt.rs; bound used as exact width; packed pairs share a word"));
  nvidia.notes = {"32-bit random operand per instruction",
                  "split of the random word across packed pairs is unspecified by the ISA"};
  v.push_back(nvidia);

  VendorProfile amd{"amd-mi300", {}, {}};
  amd.rules.push_back(rule("binary32", "fp8-e4m3", RBits::fixed(20), "CVT_SR_FP8_F32"));
  amd.rules.push_back(rule("binary32", "fp8-e5m2", RBits::fixed(21), "CVT_SR_BF8_F32"));
  amd.notes = {"32-bit random operand added to the trailing binary32 bits"};
  v.push_back(amd);

  VendorProfile intel{"intel-patent", {}, {}};
  intel.rules.push_back(rule("binary32", "binary16", RBits::fixed(13), "conversion instruction"));
  intel.rules.push_back(rule("binary32", "bfloat16", RBits::fixed(16), "conversion instruction"));
  intel.rules.push_back(rule("binary32", "fp8-e5m2", RBits::fixed(21), "conversion instruction"));
  intel.rules.push_back(rule("binary16", "fp8-e5m2", RBits::fixed(8), "conversion instruction"));
  intel.notes = {"modeled as limited-precision SR with the random bits as an operand"};
  v.push_back(intel);

  VendorProfile huawei{"huawei", {}, {}};
  for (const char* src : {"binary32", "binary16", "bfloat16"}) {
    const bool wide = std::string_view(src) == "binary32";
    ConversionRule r = rule(src, "fp8-e5m2", RBits::fixed(wide ? 14 : 2),
                            "random bits are the low bits of the input significand");
    r.entropy = EntropyInput::input_lsb;
    r.random_word_width = 0;
    huawei.rules.push_back(r);
  }
  huawei.notes = {"proposal; not part of the surveyed conversion table"};
  v.push_back(huawei);

  return v;
}

json rule_to_json(const ConversionRule& r) {
  json j;
  j["src_fmt"] = r.src_fmt;
  j["dst_fmt"] = r.dst_fmt;
  j["src_precision"] = r.src().precision;
  j["dst_precision"] = r.dst().precision;
  j["r_bits"] = {{"kind", std::string(to_string(r.r_bits.kind))},
                 {"min", r.r_bits.min},
                 {"max", r.r_bits.max}};
  j["two_stage"] = r.two_stage;
  j["subnormal_rule"] = r.subnormal_rule == SubnormalRule::fixed_r
                            ? "fixed_r"
                            : "extend_to_cover_subnormal";
  j["flush_threshold"] = r.flush_threshold ? json(r.flush_threshold->to_hex()) : json(nullptr);
  j["random_word_width"] = r.random_word_width;
  j["entropy"] = r.entropy == EntropyInput::external ? "external" : "input_lsb";
  j["note"] = r.note;
  return j;
}

ConversionRule rule_from_json(const json& j) {
  ConversionRule r;
  r.src_fmt = j.at("src_fmt").get<std::string>();
  r.dst_fmt = j.at("dst_fmt").get<std::string>();
  // Validates the names.
  formats::by_name(r.src_fmt);
  formats::by_name(r.dst_fmt);
  const json& rb = j.at("r_bits");
  r.r_bits = {parse_rbits_kind(rb.at("kind").get<std::string>()), rb.at("min").get<unsigned>(),
              rb.at("max").get<unsigned>()};
  if (r.r_bits.min < 1 || r.r_bits.max > kMaxRandomBits || r.r_bits.min > r.r_bits.max) {
    throw ParseError("r_bits out of range");
  }
  r.two_stage = j.value("two_stage", false);
  const std::string sub = j.value("subnormal_rule", std::string("fixed_r"));
  if (sub == "fixed_r") {
    r.subnormal_rule = SubnormalRule::fixed_r;
  } else if (sub == "extend_to_cover_subnormal") {
    r.subnormal_rule = SubnormalRule::extend_to_cover_subnormal;
  } else {
    throw ParseError("unknown subnormal_rule '" + sub + "'");
  }
  if (j.contains("flush_threshold") && !j.at("flush_threshold").is_null()) {
    r.flush_threshold = parse_working_real(j.at("flush_threshold").get<std::string>()).value;
  }
  r.random_word_width = j.value("random_word_width", 32u);
  const std::string ent = j.value("entropy", std::string("external"));
  if (ent == "external") {
    r.entropy = EntropyInput::external;
  } else if (ent == "input_lsb") {
    r.entropy = EntropyInput::input_lsb;
  } else {
    throw ParseError("unknown entropy input '" + ent + "'");
  }
  r.note = j.value("note", std::string());
  return r;
}

struct Staged {
  std::optional<WorkingReal> settled;
  WorkingReal value;
  unsigned r = 0;
};

Staged stage(const ConversionRule& rule, const WorkingReal& x, RoundingFlags* flags) {
  const FloatFormat& dst = rule.dst();
  Staged out;
  if (x.is_nan() || x.is_inf()) {
    if ((x.is_nan() && dst.has_nan) || (x.is_inf() && dst.has_infinity)) {
      out.settled = x;
      return out;
    }
    throw DomainError("special value not representable in " + dst.name);
  }
  WorkingReal y = x;
  if (rule.two_stage) {
    y = round_deterministic(formats::binary32(), x, RoundingMode::rne, flags);
  } else if (!is_representable(rule.src(), x)) {
    throw DomainError(x.to_hex() + " is not a " + rule.src_fmt + " value");
  }
  if (rule.flush_threshold && !y.is_zero() && y.abs() < *rule.flush_threshold) {
    if (flags != nullptr) {
      flags->flushed = true;
      flags->inexact = true;
    }
    out.settled = WorkingReal::zero(y.negative());
    return out;
  }
  out.value = y;
  out.r = rule.effective_r(y);
  return out;
}

WorkingReal finish(const ConversionRule& rule, const Staged& s, std::uint64_t draw,
                   RoundingFlags* flags) {
  return sr_limited(rule.dst(), s.value, SrConfig::limited(s.r, Intermediate::truncate),
                    RandomDraw{draw}, flags);
}

std::uint64_t significand_lsb_draw(const ConversionRule& rule, const Staged& s) {
  const FloatFormat& src = rule.src();
  const WorkingReal mag = s.value.abs();
  const auto split = detail::split_at(mag, detail::quantum_exponent(src, mag));
  const auto sig = static_cast<std::uint64_t>(split.high);
  return data_entropy(sig, static_cast<unsigned>(src.precision), s.r, DataScheme::lsb);
}

bool is_preset(const std::string& name) {
  try {
    return formats::by_name(name).name == name;
  } catch (const LookupError&) {
    return false;
  }
}

std::uint64_t low_bits(std::uint64_t word, unsigned r) {
  return r >= 64 ? word : word & ((std::uint64_t{1} << r) - 1);
}

}  // namespace

std::string RBits::cell() const {
  switch (kind) {
    case Kind::fixed: return std::to_string(max);
    case Kind::range: return std::to_string(min) + "-" + std::to_string(max);
    case Kind::up_to: return "up to " + std::to_string(max);
  }
  return "?";
}

unsigned ConversionRule::effective_r(const WorkingReal& staged) const {
  const unsigned base = r_bits.base();
  if (subnormal_rule != SubnormalRule::extend_to_cover_subnormal || staged.is_zero() ||
      !staged.is_finite()) {
    return base;
  }
  const std::int64_t deficit = std::max<std::int64_t>(0, dst().emin - staged.floor_log2());
  const std::int64_t total = std::min<std::int64_t>(r_bits.max, base + deficit);
  return static_cast<unsigned>(total);
}

const ProfileRegistry& ProfileRegistry::builtin() {
  static const ProfileRegistry kRegistry(builtin_vendors());
  return kRegistry;
}

ProfileRegistry ProfileRegistry::from_json_text(std::string_view text) {
  try {
    const json doc = json::parse(text);
    if (doc.value("schema", std::string()) != kSchema) {
      throw ParseError("profile registry schema must be '" + std::string(kSchema) + "'");
    }
    std::vector<VendorProfile> vendors;
    for (const json& jv : doc.at("vendors")) {
      VendorProfile p;
      p.name = lowered(jv.at("name").get<std::string>());
      for (const json& jr : jv.at("rules")) p.rules.push_back(rule_from_json(jr));
      if (jv.contains("notes")) p.notes = jv.at("notes").get<std::vector<std::string>>();
      vendors.push_back(std::move(p));
    }
    return ProfileRegistry(std::move(vendors));
  } catch (const json::exception& e) {
    throw ParseError(std::string("profile registry: ") + e.what());
  } catch (const LookupError& e) {
    throw ParseError(std::string("profile registry: ") + e.what());
  }
}

ProfileRegistry ProfileRegistry::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LookupError("cannot open profile registry '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string ProfileRegistry::to_json_text(int indent) const {
  json doc;
  doc["schema"] = kSchema;
  json vendors = json::array();
  for (const auto& p : vendors_) {
    json jv;
    jv["name"] = p.name;
    jv["notes"] = p.notes;
    json rules = json::array();
    for (const auto& r : p.rules) rules.push_back(rule_to_json(r));
    jv["rules"] = rules;
    vendors.push_back(jv);
  }
  doc["vendors"] = vendors;
  return doc.dump(indent);
}

const VendorProfile& ProfileRegistry::vendor(std::string_view name) const {
  const std::string key = lowered(name);
  for (const auto& p : vendors_) {
    if (p.name == key) return p;
  }
  throw LookupError("unknown vendor '" + std::string(name) + "'");
}

std::optional<ConversionRule> ProfileRegistry::lookup(std::string_view vendor_name,
                                                      const FloatFormat& src,
                                                      const FloatFormat& dst) const {
  const VendorProfile& p = vendor(vendor_name);
  for (const auto& r : p.rules) {
    if (r.src().precision != src.precision || r.dst().precision != dst.precision) continue;
    // Table columns are significand widths, so another preset of the same
    // width (fp6-e2m3 for fp8-e4m3, say) shares the rule.
    ConversionRule out = r;
    if (is_preset(src.name)) out.src_fmt = src.name;
    if (is_preset(dst.name) && out.dst_fmt != dst.name) {
      out.dst_fmt = dst.name;
      if (out.flush_threshold) out.flush_threshold = dst.min_subnormal().ldexp(-1);
    }
    return out;
  }
  return std::nullopt;
}

WorkingReal convert(const ConversionRule& rule, const WorkingReal& x, BitSource& bits,
                    RoundingFlags* flags) {
  const Staged s = stage(rule, x, flags);
  if (s.settled) return *s.settled;
  const std::uint64_t draw = rule.entropy == EntropyInput::input_lsb
                                 ? significand_lsb_draw(rule, s)
                                 : bits.next_bits(s.r);
  return finish(rule, s, draw, flags);
}

WorkingReal convert(const ConversionRule& rule, const WorkingReal& x, std::uint64_t random_word,
                    RoundingFlags* flags) {
  const Staged s = stage(rule, x, flags);
  if (s.settled) return *s.settled;
  if (rule.entropy == EntropyInput::input_lsb) {
    return finish(rule, s, significand_lsb_draw(rule, s), flags);
  }
  if (rule.random_word_width != 0 && s.r > rule.random_word_width) {
    throw ContractError("rule needs " + std::to_string(s.r) + " random bits but its word has " +
                        std::to_string(rule.random_word_width));
  }
  return finish(rule, s, low_bits(random_word, s.r), flags);
}

std::pair<WorkingReal, WorkingReal> convert_packed_pair(const ConversionRule& rule,
                                                        const WorkingReal& x1,
                                                        const WorkingReal& x2,
                                                        std::uint32_t random_word,
                                                        RoundingFlags* flags) {
  if (rule.random_word_width != 32) {
    throw ContractError("packed-pair conversion needs a rule with a 32-bit random word");
  }
  auto one = [&](const WorkingReal& x, std::uint32_t half) {
    const Staged s = stage(rule, x, flags);
    if (s.settled) return *s.settled;
    if (s.r > 16) {
      throw ContractError("packed-pair conversion gives each value 16 random bits, rule needs " +
                          std::to_string(s.r));
    }
    return finish(rule, s, low_bits(half, s.r), flags);
  };
  WorkingReal first = one(x1, random_word & 0xFFFFu);
  WorkingReal second = one(x2, random_word >> 16);
  return {std::move(first), std::move(second)};
}

}  // namespace srkit
