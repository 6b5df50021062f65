#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "paplab/crypto.hpp"

namespace paplab {

namespace detail {
struct TagMutator;
}

/// 96-bit static tag identifier (EPC-sized).
struct TagId {
  std::uint32_t high = 0;
  std::uint64_t low = 0;

  static constexpr TagId from_u64(std::uint64_t v) { return TagId{0, v}; }

  friend constexpr auto operator<=>(const TagId&, const TagId&) = default;
};

/// 32-bit generic name (product type). Not unique across tags.
struct GenericName {
  std::uint32_t value = 0;

  friend constexpr auto operator<=>(const GenericName&, const GenericName&) = default;
};

using IdOrName = std::variant<TagId, GenericName>;

std::string to_string(const IdOrName& ident);

enum class PrivacyBit : std::uint8_t { kSecure = 0, kInsecure = 1 };

constexpr int to_int(PrivacyBit bit) { return static_cast<int>(bit); }

class TagState {
 public:
  TagState(TagId id, GenericName name, std::uint64_t key, RngState rng,
           PrivacyBit privacy_bit = PrivacyBit::kSecure, HashFn hash = &auth_hash)
      : id_(id), name_(name), key_(key), privacy_bit_(privacy_bit), rng_(rng), hash_(hash) {}

  const TagId& id() const noexcept { return id_; }
  const GenericName& name() const noexcept { return name_; }
  PrivacyBit privacy_bit() const noexcept { return privacy_bit_; }
  const RngState& rng() const noexcept { return rng_; }
  HashFn hash() const noexcept { return hash_; }
  std::optional<std::uint64_t> outstanding_nonce() const noexcept { return outstanding_nonce_; }

  /// The shared secret. Every call is visible to the key-read audit.
  std::uint64_t key() const noexcept;

  /// Identifier the tag puts on the air for its current privacy bit.
  IdOrName wire_ident() const;

 private:
  friend struct detail::TagMutator;

  TagId id_;
  GenericName name_;
  std::uint64_t key_;
  PrivacyBit privacy_bit_;
  RngState rng_;
  HashFn hash_;
  std::optional<std::uint64_t> outstanding_nonce_;
};

class KeyDatabase {
 public:
  /// Throws DuplicateId or NameKeyConflict; the database is unchanged on error.
  void register_tag(const TagState& tag);

  /// Throws UnknownIdentifier.
  std::uint64_t lookup(const IdOrName& ident) const;

  bool contains(const IdOrName& ident) const;
  std::size_t size() const noexcept { return by_id_.size(); }

 private:
  std::map<TagId, std::uint64_t> by_id_;
  std::map<GenericName, std::uint64_t> by_name_;
};

enum class ReaderKind { kInventory, kCheckout, kReturn };

std::string_view to_string(ReaderKind kind);

struct PendingAuth {
  Digest expected_digest;
  std::uint64_t nonce_sent = 0;
};

class ReaderState {
 public:
  /// Inventory readers must not carry a database (PreconditionViolation).
  ReaderState(ReaderKind kind, std::shared_ptr<const KeyDatabase> db, RngState rng,
              HashFn hash = &auth_hash);

  ReaderKind kind() const noexcept { return kind_; }
  const KeyDatabase* db() const noexcept { return db_.get(); }
  HashFn hash() const noexcept { return hash_; }
  const RngState& rng() const noexcept { return rng_; }
  const std::optional<PendingAuth>& pending() const noexcept { return pending_; }

  RngState& mutable_rng() noexcept { return rng_; }
  void set_pending(PendingAuth pending) { pending_ = pending; }
  void clear_pending() noexcept { pending_.reset(); }

 private:
  ReaderKind kind_;
  std::shared_ptr<const KeyDatabase> db_;
  RngState rng_;
  HashFn hash_;
  std::optional<PendingAuth> pending_;
};

struct Query {
  friend constexpr bool operator==(const Query&, const Query&) = default;
};

struct TagReply {
  IdOrName ident;
  std::uint64_t n_t = 0;

  friend bool operator==(const TagReply&, const TagReply&) = default;
};

struct ReaderAuth {
  Digest h1;
  std::uint64_t n_r = 0;

  friend constexpr bool operator==(const ReaderAuth&, const ReaderAuth&) = default;
};

struct TagAuth {
  Digest h2;

  friend constexpr bool operator==(const TagAuth&, const TagAuth&) = default;
};

using Message = std::variant<Query, TagReply, ReaderAuth, TagAuth>;

std::string_view message_type_name(const Message& msg);

/// Message fields without the type byte and CRC, in wire order.
std::vector<std::uint8_t> encode_fields(const Message& msg);

/// Full frame: [type][fields][crc16 big-endian].
std::vector<std::uint8_t> encode_message(const Message& msg);

/// Throws TruncatedFrame, BadCrc or UnknownMessageTag.
Message decode_message(std::span<const std::uint8_t> frame);

struct AdversaryCapabilities {
  bool eavesdrop_forward = false;
  bool eavesdrop_backward = false;
  bool intercept = false;
  bool act_as_reader = false;

  static constexpr AdversaryCapabilities all() { return {true, true, true, true}; }
  static constexpr AdversaryCapabilities passive() { return {true, true, false, false}; }
  static constexpr AdversaryCapabilities none() { return {}; }

  /// intercept requires both eavesdrop flags.
  constexpr bool valid() const { return !intercept || (eavesdrop_forward && eavesdrop_backward); }

  /// Throws InvalidCapabilityCombo.
  void validate() const;

  friend constexpr bool operator==(const AdversaryCapabilities&,
                                   const AdversaryCapabilities&) = default;
};

std::string to_hex(std::span<const std::uint8_t> bytes);

}  // namespace paplab
