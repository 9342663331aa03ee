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

#include "srkit/entropy.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <string>

#include "srkit/error.hpp"

namespace srkit {

namespace {

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t low_mask(unsigned k) {
  return k >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1;
}

}  // namespace

std::string_view to_string(BitSourceKind kind) {
  switch (kind) {
    case BitSourceKind::xoroshiro128plus: return "xoroshiro128plus";
    case BitSourceKind::lfsr: return "lfsr";
    case BitSourceKind::data_derived: return "data_derived";
    case BitSourceKind::counter_derived: return "counter_derived";
    case BitSourceKind::replay: return "replay";
  }
  return "unknown";
}

std::uint64_t BitSource::next_bits(unsigned k) {
  if (k == 0 || k > 64) throw ContractError("next_bits needs 1 <= k <= 64");
  while (buffered_ < k) {
    const Chunk c = refill();
    buffer_ = (buffer_ << c.width) | c.bits;
    buffered_ += c.width;
  }
  buffered_ -= k;
  const auto out = static_cast<std::uint64_t>(buffer_ >> buffered_) & low_mask(k);
  buffer_ &= (static_cast<unsigned __int128>(1) << buffered_) - 1;
  consumed_ += k;
  return out;
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Xoroshiro128Plus::Xoroshiro128Plus(std::uint64_t s0, std::uint64_t s1) : s0_(s0), s1_(s1) {
  if (s0 == 0 && s1 == 0) throw ContractError("xoroshiro128+ state must not be all zero");
}

Xoroshiro128Plus Xoroshiro128Plus::from_seed(std::uint64_t seed) {
  const std::uint64_t a = mix64(seed + kGoldenGamma);
  const std::uint64_t b = mix64(seed + 2 * kGoldenGamma);
  return Xoroshiro128Plus(a, (a | b) == 0 ? 1 : b);
}

std::uint64_t Xoroshiro128Plus::next_word() {
  const std::uint64_t s0 = s0_;
  std::uint64_t s1 = s1_;
  const std::uint64_t result = s0 + s1;
  s1 ^= s0;
  s0_ = std::rotl(s0, 24) ^ s1 ^ (s1 << 16);
  s1_ = std::rotl(s1, 37);
  return result;
}

Lfsr::Lfsr(unsigned width, std::vector<unsigned> taps, std::uint64_t seed)
    : width_(width), taps_(std::move(taps)), state_(seed) {
  if (width < 2 || width > 64) throw ContractError("LFSR width must be in [2, 64]");
  if (taps_.empty()) throw ContractError("LFSR needs at least one tap");
  for (unsigned t : taps_) {
    if (t < 1 || t > width) throw ContractError("LFSR tap outside [1, width]");
  }
  if (std::find(taps_.begin(), taps_.end(), width) == taps_.end()) {
    throw ContractError("LFSR taps must include the output stage");
  }
  if ((state_ & low_mask(width)) != state_ || state_ == 0) {
    throw ContractError("LFSR seed must be nonzero and fit the register");
  }
}

std::vector<unsigned> Lfsr::default_taps(unsigned width) {
  // Primitive trinomials/pentanomials, one per width.
  static const std::array<std::vector<unsigned>, 33> kTaps = {{
      {}, {}, {2, 1}, {3, 2}, {4, 3}, {5, 3}, {6, 5}, {7, 6},
      {8, 6, 5, 4}, {9, 5}, {10, 7}, {11, 9}, {12, 6, 4, 1}, {13, 4, 3, 1},
      {14, 5, 3, 1}, {15, 14}, {16, 15, 13, 4}, {17, 14}, {18, 11},
      {19, 6, 2, 1}, {20, 17}, {21, 19}, {22, 21}, {23, 18}, {24, 23, 22, 17},
      {25, 22}, {26, 6, 2, 1}, {27, 5, 2, 1}, {28, 25}, {29, 27},
      {30, 6, 4, 1}, {31, 28}, {32, 22, 2, 1},
  }};
  if (width < 2 || width > 32) throw ContractError("no default LFSR taps for this width");
  return kTaps[width];
}

Lfsr Lfsr::with_default_taps(unsigned width, std::uint64_t seed) {
  return Lfsr(width, default_taps(width), seed);
}

bool Lfsr::step() {
  const bool out = (state_ & 1) != 0;
  std::uint64_t feedback = 0;
  for (unsigned t : taps_) feedback ^= (state_ >> (width_ - t)) & 1;
  state_ = (state_ >> 1) | (feedback << (width_ - 1));
  return out;
}

BitSource::Chunk CounterSource::refill() {
  state_ += kGoldenGamma;
  return {mix64(state_), 64};
}

DataDerivedSource::DataDerivedSource(std::uint64_t datum, unsigned width)
    : datum_(datum & low_mask(width)), width_(width) {
  if (width == 0 || width > 64) throw ContractError("datum width must be in [1, 64]");
}

BitSource::Chunk DataDerivedSource::refill() {
  if (spent_) throw EntropyError("data-derived bits exhausted");
  spent_ = true;
  return {datum_, width_};
}

ReplaySource ReplaySource::from_value(std::uint64_t value, unsigned width) {
  std::vector<std::uint8_t> bits(width);
  for (unsigned i = 0; i < width; ++i) {
    bits[i] = static_cast<std::uint8_t>((value >> (width - 1 - i)) & 1);
  }
  return ReplaySource(std::move(bits));
}

BitSource::Chunk ReplaySource::refill() {
  if (pos_ >= bits_.size()) throw EntropyError("replayed bit sequence exhausted");
  return {static_cast<std::uint64_t>(bits_[pos_++] & 1), 1};
}

std::uint64_t data_entropy(std::uint64_t datum, unsigned datum_width, unsigned k,
                           DataScheme scheme) {
  if (k == 0 || k > 64) throw ContractError("data_entropy needs 1 <= k <= 64");
  if (datum_width == 0 || datum_width > 64) {
    throw ContractError("datum width must be in [1, 64]");
  }
  datum &= low_mask(datum_width);
  switch (scheme) {
    case DataScheme::lsb:
      if (k > datum_width) {
        throw ContractError("lsb scheme asks for " + std::to_string(k) +
                            " bits from a " + std::to_string(datum_width) + "-bit datum");
      }
      return datum & low_mask(k);
    case DataScheme::xor_fold: {
      std::uint64_t acc = 0;
      for (unsigned pos = 0; pos < datum_width; pos += k) {
        acc ^= (datum >> pos) & low_mask(k);
      }
      return acc;
    }
  }
  throw ContractError("unknown data scheme");
}

Xoroshiro128Plus derive_stream(std::uint64_t global_seed, std::uint64_t stream_id) {
  return Xoroshiro128Plus::from_seed(global_seed ^ mix64(stream_id + kGoldenGamma));
}

WorkingReal uniform_open01(BitSource& src) {
  const std::uint64_t k = src.next_bits(53);
  return WorkingReal::make(false, BigInt(2 * k + 1), -54);
}

}  // namespace srkit
