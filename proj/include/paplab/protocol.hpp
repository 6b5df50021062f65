#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "paplab/channel.hpp"
#include "paplab/error.hpp"
#include "paplab/model.hpp"

namespace paplab {

enum class SubProtocol { kInStore, kCheckout, kOutStore, kReturn };

std::string_view to_string(SubProtocol sp);

/// InStore and OutStore stop after the tag's reply.
constexpr bool authenticates(SubProtocol sp) {
  return sp == SubProtocol::kCheckout || sp == SubProtocol::kReturn;
}

/// Privacy bit the tag must hold when the sub-protocol starts.
constexpr PrivacyBit required_privacy_bit(SubProtocol sp) {
  return (sp == SubProtocol::kInStore || sp == SubProtocol::kCheckout) ? PrivacyBit::kSecure
                                                                       : PrivacyBit::kInsecure;
}

/// Sub-protocol a tag in its current location would run against an
/// authenticating reader.
constexpr SubProtocol authenticating_subprotocol(PrivacyBit bit) {
  return bit == PrivacyBit::kSecure ? SubProtocol::kCheckout : SubProtocol::kReturn;
}

constexpr SubProtocol read_only_subprotocol(PrivacyBit bit) {
  return bit == PrivacyBit::kSecure ? SubProtocol::kInStore : SubProtocol::kOutStore;
}

struct SessionVerdict {
  SubProtocol subprotocol = SubProtocol::kInStore;
  bool reader_accepted_tag = false;
  bool tag_accepted_reader = false;
  PrivacyBit privacy_bit_before = PrivacyBit::kSecure;
  PrivacyBit privacy_bit_after = PrivacyBit::kSecure;
  bool reader_auth_sent = false;
  std::optional<ErrorCode> aborted;
  std::string abort_detail;

  friend bool operator==(const SessionVerdict&, const SessionVerdict&) = default;
};

/// Draws a fresh n_t (discarding any previous one) and answers with the
/// identifier matching the privacy bit.
TagReply tag_respond_query(TagState& tag);

/// Throws NoDatabase or UnknownIdentifier. On success the reader holds a
/// pending expectation of hash(n_r, k).
ReaderAuth reader_auth_step(ReaderState& reader, const TagReply& reply);

struct TagAnswer {
  std::optional<TagAuth> reply;
  bool accepted = false;
};

/// Accepts iff h1 == hash(expected_n_t, k). Acceptance toggles the privacy
/// bit (checkout 0 -> 1, return 1 -> 0) and yields TagAuth{hash(n_r, k)};
/// rejection leaves the tag silent and unchanged.
TagAnswer tag_verify_and_answer(TagState& tag, const ReaderAuth& msg,
                                std::uint64_t expected_n_t);

/// Throws NoPendingSession. Clears the pending expectation either way.
bool reader_verify(ReaderState& reader, const TagAuth& msg);

struct Endpoints {
  std::string tag = "tag";
  std::string reader = "reader";
};

/// Drives one sub-protocol over the channel. Precondition, lookup and codec
/// failures are reported through SessionVerdict::aborted, never thrown.
SessionVerdict run_session(SubProtocol sp, TagState& tag, ReaderState& reader, Channel& channel,
                           const Endpoints& endpoints = {});

}  // namespace paplab
