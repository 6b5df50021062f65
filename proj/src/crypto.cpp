#include "paplab/crypto.hpp"

#include <array>

namespace paplab {
namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::array<std::uint16_t, 256> make_crc_table() {
  std::array<std::uint16_t, 256> table{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint16_t crc = static_cast<std::uint16_t>(i << 8);
    for (int bit = 0; bit < 8; ++bit) {
      crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021)
                           : static_cast<std::uint16_t>(crc << 1);
    }
    table[i] = crc;
  }
  return table;
}

constexpr auto kCrcTable = make_crc_table();

}  // namespace

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) noexcept {
  std::uint64_t hash = kFnvOffset;
  for (std::uint8_t b : bytes) {
    hash ^= b;
    hash *= kFnvPrime;
  }
  return hash;
}

Digest auth_hash(std::uint64_t nonce, std::uint64_t key) noexcept {
  std::array<std::uint8_t, 16> buf{};
  for (int i = 0; i < 8; ++i) {
    buf[i] = static_cast<std::uint8_t>(nonce >> (56 - 8 * i));
    buf[8 + i] = static_cast<std::uint8_t>(key >> (56 - 8 * i));
  }
  return Digest{fnv1a64(buf)};
}

std::pair<std::uint64_t, RngState> next_nonce(RngState state) noexcept {
  state.state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state.state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  ++state.counter;
  return {z, state};
}

std::uint64_t draw(RngState& state) noexcept {
  auto [value, next] = next_nonce(state);
  state = next;
  return value;
}

std::pair<Keystream16, RngState> next_rn16(RngState state) noexcept {
  auto [value, next] = next_nonce(state);
  return {Keystream16{static_cast<std::uint16_t>(value >> 48)}, next};
}

std::uint16_t crc16(std::span<const std::uint8_t> payload) noexcept {
  std::uint16_t crc = 0xffff;
  for (std::uint8_t b : payload) {
    crc = static_cast<std::uint16_t>((crc << 8) ^ kCrcTable[((crc >> 8) ^ b) & 0xff]);
  }
  return crc;
}

}  // namespace paplab
