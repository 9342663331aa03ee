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

#ifndef SRKIT_ENTROPY_HPP_
#define SRKIT_ENTROPY_HPP_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "srkit/working_real.hpp"

namespace srkit {

enum class BitSourceKind { xoroshiro128plus, lfsr, data_derived, counter_derived, replay };

std::string_view to_string(BitSourceKind kind);

/// A stream of uniform-contract random bits.
///
/// Generators produce chunks (a 64-bit word, a single LFSR bit, ...);
/// next_bits hands them out high-bits-first, so next_bits(64) on a word
/// generator returns the word unchanged and two next_bits(32) calls return
/// its high then low half. A source is single-owner and not thread safe.
class BitSource {
 public:
  virtual ~BitSource() = default;

  /// Next k bits, 1 <= k <= 64, the first bit drawn being the MSB.
  std::uint64_t next_bits(unsigned k);
  bool next_bit() { return next_bits(1) != 0; }

  /// Total bits handed out so far.
  std::uint64_t bits_consumed() const { return consumed_; }

  virtual BitSourceKind kind() const = 0;

 protected:
  BitSource() = default;
  BitSource(const BitSource&) = default;
  BitSource& operator=(const BitSource&) = default;

  struct Chunk {
    std::uint64_t bits = 0;
    unsigned width = 0;  // 1..64
  };
  virtual Chunk refill() = 0;

 private:
  unsigned __int128 buffer_ = 0;
  unsigned buffered_ = 0;
  std::uint64_t consumed_ = 0;
};

/// SplitMix64 finalizer (a bijection on 64-bit words).
std::uint64_t mix64(std::uint64_t z);

/// xoroshiro128+ 1.0 (rotation constants 24, 16, 37). Each refill is one
/// 64-bit output word s0 + s1.
class Xoroshiro128Plus final : public BitSource {
 public:
  /// Raw state; (0, 0) is rejected.
  Xoroshiro128Plus(std::uint64_t s0, std::uint64_t s1);
  /// State filled from a SplitMix64 stream seeded with `seed`.
  static Xoroshiro128Plus from_seed(std::uint64_t seed);

  std::uint64_t next_word();
  BitSourceKind kind() const override { return BitSourceKind::xoroshiro128plus; }

 protected:
  Chunk refill() override { return {next_word(), 64}; }

 private:
  std::uint64_t s0_;
  std::uint64_t s1_;
};

/// Fibonacci LFSR. Stage k (1-based, as in tap lists) is state bit
/// width - k; stage `width` is the output. Each step emits the output bit,
/// shifts right and feeds the XOR of the tapped stages into stage 1.
class Lfsr final : public BitSource {
 public:
  Lfsr(unsigned width, std::vector<unsigned> taps, std::uint64_t seed);
  /// Maximal-length taps for `width`.
  static Lfsr with_default_taps(unsigned width, std::uint64_t seed);
  /// Maximal-length tap set for 2 <= width <= 32.
  static std::vector<unsigned> default_taps(unsigned width);

  bool step();
  std::uint64_t state() const { return state_; }
  unsigned width() const { return width_; }
  const std::vector<unsigned>& taps() const { return taps_; }
  BitSourceKind kind() const override { return BitSourceKind::lfsr; }

 protected:
  Chunk refill() override { return {step() ? 1u : 0u, 1}; }

 private:
  unsigned width_;
  std::vector<unsigned> taps_;
  std::uint64_t state_;
};

/// SplitMix64 used as a counter-based stream: word i is mix64(seed + (i+1)*gamma).
class CounterSource final : public BitSource {
 public:
  explicit CounterSource(std::uint64_t seed) : state_(seed) {}
  BitSourceKind kind() const override { return BitSourceKind::counter_derived; }

 protected:
  Chunk refill() override;

 private:
  std::uint64_t state_;
};

/// Finite supply of bits taken from a datum; exhaustion raises EntropyError.
class DataDerivedSource final : public BitSource {
 public:
  DataDerivedSource(std::uint64_t datum, unsigned width);
  BitSourceKind kind() const override { return BitSourceKind::data_derived; }

 protected:
  Chunk refill() override;

 private:
  std::uint64_t datum_;
  unsigned width_;
  bool spent_ = false;
};

/// Replays an explicit bit sequence (0/1 values), then raises EntropyError.
class ReplaySource final : public BitSource {
 public:
  explicit ReplaySource(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {}
  /// Bits of `value`, MSB first, `width` of them.
  static ReplaySource from_value(std::uint64_t value, unsigned width);
  BitSourceKind kind() const override { return BitSourceKind::replay; }

 protected:
  Chunk refill() override;

 private:
  std::vector<std::uint8_t> bits_;
  std::size_t pos_ = 0;
};

enum class DataScheme { lsb, xor_fold };

/// Random-looking bits computed from a datum (typically a significand field
/// of `datum_width` bits). lsb takes the k low bits; xor_fold XORs the
/// k-bit groups of the zero-padded datum. Stateless.
std::uint64_t data_entropy(std::uint64_t datum, unsigned datum_width, unsigned k,
                           DataScheme scheme);

/// Fresh xoroshiro128+ stream for (global_seed, stream_id). Pure and
/// avalanche-mixed, so per-task streams are independent of scheduling.
Xoroshiro128Plus derive_stream(std::uint64_t global_seed, std::uint64_t stream_id);

/// Uniform value in the open interval (0, 1): (2k + 1) * 2^-54 for a 53-bit k.
WorkingReal uniform_open01(BitSource& src);

}  // namespace srkit

#endif  // SRKIT_ENTROPY_HPP_
