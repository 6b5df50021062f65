#pragma once

// Primitives shared by tags, readers and the adversary: the authentication
// hash, a replayable PRNG, the EPC-style CRC-16 and 16-bit cover-coding.

#include <compare>
#include <cstdint>
#include <span>
#include <utility>

namespace paplab {

struct Digest {
  std::uint64_t value = 0;

  friend constexpr auto operator<=>(const Digest&, const Digest&) = default;
};

struct Keystream16 {
  std::uint16_t value = 0;

  friend constexpr auto operator<=>(const Keystream16&, const Keystream16&) = default;
};

struct RngState {
  std::uint64_t state = 0;
  std::uint64_t counter = 0;

  static constexpr RngState from_seed(std::uint64_t seed) { return RngState{seed, 0}; }

  friend constexpr auto operator<=>(const RngState&, const RngState&) = default;
};

/// Signature of a pluggable authentication hash. Tags and readers carry one
/// of these; both ends of a session must agree on it.
using HashFn = Digest (*)(std::uint64_t nonce, std::uint64_t key);

/// Reference authentication hash: FNV-1a-64 over the 16 big-endian bytes of
/// nonce followed by key.
Digest auth_hash(std::uint64_t nonce, std::uint64_t key) noexcept;

/// FNV-1a-64 over an arbitrary byte string.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) noexcept;

/// SplitMix64 step. Returns the drawn value and the advanced state.
std::pair<std::uint64_t, RngState> next_nonce(RngState state) noexcept;

/// In-place convenience over next_nonce.
std::uint64_t draw(RngState& state) noexcept;

/// One RN16 word: the high 16 bits of the next SplitMix64 output.
std::pair<Keystream16, RngState> next_rn16(RngState state) noexcept;

/// CRC-16/CCITT-FALSE (poly 0x1021, init 0xFFFF, no reflection, no xorout).
std::uint16_t crc16(std::span<const std::uint8_t> payload) noexcept;

constexpr std::uint16_t cover_code(std::uint16_t word, Keystream16 keystream) noexcept {
  return static_cast<std::uint16_t>(word ^ keystream.value);
}

}  // namespace paplab
