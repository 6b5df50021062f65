#include "paplab/crypto.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>
#include <unordered_map>

#include "oracles.hpp"

namespace paplab {
namespace {

TEST(AuthHashTest, ZeroInputsMatchFrozenOracleValue) {
  // FNV-1a-64 of sixteen zero bytes, computed by the bytewise oracle.
  EXPECT_EQ(oracle::auth_hash(0, 0), 0x88201FB960FF6465ULL);
  EXPECT_EQ(auth_hash(0, 0).value, 0x88201FB960FF6465ULL);
}

TEST(AuthHashTest, AgreesWithOracleOnRandomInputs) {
  std::mt19937_64 gen(7);
  for (int i = 0; i < 1000; ++i) {
    const auto nonce = gen();
    const auto key = gen();
    ASSERT_EQ(auth_hash(nonce, key).value, oracle::auth_hash(nonce, key));
  }
  EXPECT_EQ(auth_hash(0x0123456789abcdefULL, 0xfedcba9876543210ULL).value,
            0x933ef53e4fbdae75ULL);
}

TEST(AuthHashTest, IsDeterministic) {
  EXPECT_EQ(auth_hash(12345, 678), auth_hash(12345, 678));
}

TEST(AuthHashTest, DistinctKeysUnderFixedNonceGiveDistinctDigests) {
  std::mt19937_64 gen(11);
  const std::uint64_t c = 0xc0ffee;
  int collisions = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto k1 = gen();
    auto k2 = gen();
    if (k1 == k2) ++k2;
    if (auth_hash(c, k1) == auth_hash(c, k2)) ++collisions;
  }
  EXPECT_EQ(collisions, 0);
}

TEST(AuthHashTest, NoCollisionsOverHundredThousandRandomInputs) {
  std::mt19937_64 gen(2024);
  std::unordered_map<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>> seen;
  int collisions = 0;
  for (int i = 0; i < 100000; ++i) {
    const auto input = std::make_pair(gen(), gen());
    const auto d = auth_hash(input.first, input.second).value;
    auto [it, fresh] = seen.emplace(d, input);
    if (!fresh && it->second != input) ++collisions;
  }
  EXPECT_EQ(collisions, 0);
}

TEST(NextNonceTest, MatchesSplitMix64Reference) {
  oracle::SplitMix64 ref{0};
  RngState s = RngState::from_seed(0);
  EXPECT_EQ(draw(s), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(ref.next(), 0xe220a8397b1dcdafULL);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(draw(s), ref.next());
}

TEST(NextNonceTest, ReplayFromSeedGivesIdenticalSequence) {
  const RngState seed = RngState::from_seed(99);
  RngState a = seed;
  RngState b = seed;
  for (int i = 0; i < 3; ++i) EXPECT_EQ(draw(a), draw(b));
  EXPECT_EQ(a, b);
}

TEST(NextNonceTest, CounterTracksDraws) {
  RngState s = RngState::from_seed(5);
  for (int i = 0; i < 17; ++i) draw(s);
  EXPECT_EQ(s.counter, 17u);
  auto [value, next] = next_nonce(s);
  (void)value;
  EXPECT_EQ(next.counter, 18u);
  EXPECT_EQ(s.counter, 17u);
}

TEST(NextNonceTest, DifferentSeedsGiveDifferentFirstDraws) {
  std::mt19937_64 gen(3);
  int equal = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto s1 = gen();
    auto s2 = gen();
    if (s1 == s2) ++s2;
    if (next_nonce(RngState::from_seed(s1)).first == next_nonce(RngState::from_seed(s2)).first) {
      ++equal;
    }
  }
  EXPECT_EQ(equal, 0);
}

TEST(NextRn16Test, IsTopSixteenBitsOfTheNonceStream) {
  RngState s = RngState::from_seed(42);
  const auto [word, after] = next_rn16(s);
  EXPECT_EQ(word.value, static_cast<std::uint16_t>(next_nonce(s).first >> 48));
  EXPECT_EQ(after.counter, 1u);
}

TEST(Crc16Test, EmptyPayloadIsInitValue) { EXPECT_EQ(crc16({}), 0xFFFF); }

TEST(Crc16Test, CheckValue) {
  const auto bytes = oracle::ascii("123456789");
  EXPECT_EQ(oracle::crc16_bitwise(bytes), 0x29B1);
  EXPECT_EQ(crc16(bytes), 0x29B1);
}

TEST(Crc16Test, AgreesWithBitwiseOracle) {
  std::mt19937 gen(1);
  for (int n = 0; n < 64; ++n) {
    std::vector<std::uint8_t> bytes(n);
    for (auto& b : bytes) b = static_cast<std::uint8_t>(gen());
    ASSERT_EQ(crc16(bytes), oracle::crc16_bitwise(bytes)) << "length " << n;
  }
}

TEST(Crc16Test, EverySingleBitFlipChangesChecksum) {
  const std::vector<std::uint8_t> payload{0xde, 0xad, 0xbe, 0xef};
  const auto base = crc16(payload);
  for (std::size_t bit = 0; bit < payload.size() * 8; ++bit) {
    auto flipped = payload;
    flipped[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    EXPECT_NE(crc16(flipped), base) << "bit " << bit;
  }
}

TEST(CoverCodeTest, XorExamples) {
  EXPECT_EQ(cover_code(0xFFFF, Keystream16{0x0F0F}), 0xF0F0);
  EXPECT_EQ(cover_code(0x1234, Keystream16{0x0000}), 0x1234);
}

TEST(CoverCodeTest, IsAnInvolution) {
  RngState rng = RngState::from_seed(8);
  std::vector<Keystream16> streams{Keystream16{0xA5C3}};
  for (int i = 0; i < 100; ++i) {
    auto [ks, next] = next_rn16(rng);
    rng = next;
    streams.push_back(ks);
  }
  for (std::size_t i = 0; i < streams.size(); ++i) {
    const auto s = streams[i];
    // Exhaustive over all words for the fixed stream, sampled for the rest.
    const std::uint32_t step = i == 0 ? 1 : 251;
    for (std::uint32_t w = 0; w <= 0xFFFF; w += step) {
      ASSERT_EQ(cover_code(cover_code(static_cast<std::uint16_t>(w), s), s), w);
    }
  }
}

TEST(CoverCodeTest, MaskIsRecoverableFromOnePlaintextPair) {
  // An eavesdropper who learns one (word, covered) pair recovers the mask.
  const Keystream16 mask{0x5a5a};
  const std::uint16_t covered = cover_code(0x0042, mask);
  EXPECT_EQ(static_cast<std::uint16_t>(covered ^ 0x0042), mask.value);
}

}  // namespace
}  // namespace paplab
