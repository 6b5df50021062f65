#include "paplab/model.hpp"

#include <fmt/format.h>

#include "paplab/audit.hpp"
#include "paplab/error.hpp"

namespace paplab {
namespace {

constexpr std::uint8_t kQueryTag = 0x01;
constexpr std::uint8_t kTagReplyTag = 0x02;
constexpr std::uint8_t kReaderAuthTag = 0x03;
constexpr std::uint8_t kTagAuthTag = 0x04;

constexpr std::uint8_t kIdentId = 0x00;
constexpr std::uint8_t kIdentName = 0x01;

void put_be(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int i = bytes - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_be(std::span<const std::uint8_t> in, std::size_t offset, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v = (v << 8) | in[offset + i];
  return v;
}

std::size_t expected_frame_size(std::uint8_t type, std::span<const std::uint8_t> frame) {
  switch (type) {
    case kQueryTag: return 1 + 2;
    case kTagReplyTag: {
      if (frame.size() < 2 + 2) return 4;
      std::uint8_t ident = frame[1];
      if (ident == kIdentId) return 1 + 1 + 12 + 8 + 2;
      if (ident == kIdentName) return 1 + 1 + 4 + 8 + 2;
      throw Error(ErrorCode::kUnknownMessageTag, fmt::format("ident tag 0x{:02x}", ident));
    }
    case kReaderAuthTag: return 1 + 8 + 8 + 2;
    case kTagAuthTag: return 1 + 8 + 2;
    default:
      throw Error(ErrorCode::kUnknownMessageTag, fmt::format("message tag 0x{:02x}", type));
  }
}

}  // namespace

std::string to_string(const IdOrName& ident) {
  if (const auto* id = std::get_if<TagId>(&ident)) {
    return fmt::format("Id({:08x}{:016x})", id->high, id->low);
  }
  return fmt::format("Name({:08x})", std::get<GenericName>(ident).value);
}

std::uint64_t TagState::key() const noexcept {
  audit::note_key_read();
  return key_;
}

IdOrName TagState::wire_ident() const {
  if (privacy_bit_ == PrivacyBit::kSecure) return id_;
  return name_;
}

void KeyDatabase::register_tag(const TagState& tag) {
  if (by_id_.contains(tag.id())) {
    throw Error(ErrorCode::kDuplicateId, to_string(IdOrName{tag.id()}));
  }
  const std::uint64_t key = tag.key();
  auto named = by_name_.find(tag.name());
  if (named != by_name_.end() && named->second != key) {
    throw Error(ErrorCode::kNameKeyConflict, to_string(IdOrName{tag.name()}));
  }
  by_id_.emplace(tag.id(), key);
  if (named == by_name_.end()) by_name_.emplace(tag.name(), key);
}

std::uint64_t KeyDatabase::lookup(const IdOrName& ident) const {
  audit::note_key_read();
  if (const auto* id = std::get_if<TagId>(&ident)) {
    if (auto it = by_id_.find(*id); it != by_id_.end()) return it->second;
  } else if (auto it = by_name_.find(std::get<GenericName>(ident)); it != by_name_.end()) {
    return it->second;
  }
  throw Error(ErrorCode::kUnknownIdentifier, to_string(ident));
}

bool KeyDatabase::contains(const IdOrName& ident) const {
  if (const auto* id = std::get_if<TagId>(&ident)) return by_id_.contains(*id);
  return by_name_.contains(std::get<GenericName>(ident));
}

std::string_view to_string(ReaderKind kind) {
  switch (kind) {
    case ReaderKind::kInventory: return "inventory";
    case ReaderKind::kCheckout: return "checkout";
    case ReaderKind::kReturn: return "return";
  }
  return "unknown";
}

ReaderState::ReaderState(ReaderKind kind, std::shared_ptr<const KeyDatabase> db, RngState rng,
                         HashFn hash)
    : kind_(kind), db_(std::move(db)), rng_(rng), hash_(hash) {
  if (kind_ == ReaderKind::kInventory && db_) {
    throw Error(ErrorCode::kPreconditionViolation, "inventory reader cannot hold a database");
  }
}

std::string_view message_type_name(const Message& msg) {
  struct Visitor {
    std::string_view operator()(const Query&) const { return "Query"; }
    std::string_view operator()(const TagReply&) const { return "TagReply"; }
    std::string_view operator()(const ReaderAuth&) const { return "ReaderAuth"; }
    std::string_view operator()(const TagAuth&) const { return "TagAuth"; }
  };
  return std::visit(Visitor{}, msg);
}

std::vector<std::uint8_t> encode_fields(const Message& msg) {
  std::vector<std::uint8_t> out;
  if (const auto* reply = std::get_if<TagReply>(&msg)) {
    if (const auto* id = std::get_if<TagId>(&reply->ident)) {
      out.push_back(kIdentId);
      put_be(out, id->high, 4);
      put_be(out, id->low, 8);
    } else {
      out.push_back(kIdentName);
      put_be(out, std::get<GenericName>(reply->ident).value, 4);
    }
    put_be(out, reply->n_t, 8);
  } else if (const auto* auth = std::get_if<ReaderAuth>(&msg)) {
    put_be(out, auth->h1.value, 8);
    put_be(out, auth->n_r, 8);
  } else if (const auto* tag_auth = std::get_if<TagAuth>(&msg)) {
    put_be(out, tag_auth->h2.value, 8);
  }
  return out;
}

std::vector<std::uint8_t> encode_message(const Message& msg) {
  static constexpr std::uint8_t kTypeBytes[] = {kQueryTag, kTagReplyTag, kReaderAuthTag,
                                                kTagAuthTag};
  std::vector<std::uint8_t> frame;
  frame.push_back(kTypeBytes[msg.index()]);
  auto fields = encode_fields(msg);
  frame.insert(frame.end(), fields.begin(), fields.end());
  put_be(frame, crc16(frame), 2);
  return frame;
}

Message decode_message(std::span<const std::uint8_t> frame) {
  if (frame.size() < 3) {
    throw Error(ErrorCode::kTruncatedFrame, fmt::format("{} bytes", frame.size()));
  }
  const auto body = frame.first(frame.size() - 2);
  const auto carried = static_cast<std::uint16_t>(get_be(frame, frame.size() - 2, 2));
  if (crc16(body) != carried) {
    throw Error(ErrorCode::kBadCrc, fmt::format("carried 0x{:04x}, computed 0x{:04x}", carried,
                                                crc16(body)));
  }
  const std::uint8_t type = frame[0];
  if (const auto want = expected_frame_size(type, frame); frame.size() != want) {
    throw Error(ErrorCode::kTruncatedFrame,
                fmt::format("type 0x{:02x}: {} bytes, expected {}", type, frame.size(), want));
  }
  switch (type) {
    case kQueryTag: return Query{};
    case kTagReplyTag: {
      if (frame[1] == kIdentId) {
        TagId id{static_cast<std::uint32_t>(get_be(frame, 2, 4)), get_be(frame, 6, 8)};
        return TagReply{id, get_be(frame, 14, 8)};
      }
      GenericName name{static_cast<std::uint32_t>(get_be(frame, 2, 4))};
      return TagReply{name, get_be(frame, 6, 8)};
    }
    case kReaderAuthTag: return ReaderAuth{Digest{get_be(frame, 1, 8)}, get_be(frame, 9, 8)};
    default: return TagAuth{Digest{get_be(frame, 1, 8)}};
  }
}

void AdversaryCapabilities::validate() const {
  if (!valid()) {
    throw Error(ErrorCode::kInvalidCapabilityCombo, "intercept requires both eavesdrop flags");
  }
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) fmt::format_to(std::back_inserter(out), "{:02x}", b);
  return out;
}

}  // namespace paplab
