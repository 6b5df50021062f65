#include "paplab/protocol.hpp"

#include <fmt/format.h>

namespace paplab {

namespace detail {

struct TagMutator {
  static RngState& rng(TagState& tag) { return tag.rng_; }
  static void set_nonce(TagState& tag, std::optional<std::uint64_t> n) {
    tag.outstanding_nonce_ = n;
  }
  static void toggle_privacy_bit(TagState& tag) {
    tag.privacy_bit_ = tag.privacy_bit_ == PrivacyBit::kSecure ? PrivacyBit::kInsecure
                                                               : PrivacyBit::kSecure;
  }
};

}  // namespace detail

namespace {

bool reader_allowed(SubProtocol sp, ReaderKind kind) {
  switch (sp) {
    case SubProtocol::kInStore:
    case SubProtocol::kOutStore: return true;
    case SubProtocol::kCheckout: return kind == ReaderKind::kCheckout;
    case SubProtocol::kReturn: return kind == ReaderKind::kReturn;
  }
  return false;
}

template <typename T>
const T* expect(const std::optional<Message>& delivered) {
  return delivered ? std::get_if<T>(&*delivered) : nullptr;
}

}  // namespace

std::string_view to_string(SubProtocol sp) {
  switch (sp) {
    case SubProtocol::kInStore: return "in_store";
    case SubProtocol::kCheckout: return "checkout";
    case SubProtocol::kOutStore: return "out_store";
    case SubProtocol::kReturn: return "return";
  }
  return "unknown";
}

TagReply tag_respond_query(TagState& tag) {
  const std::uint64_t n_t = draw(detail::TagMutator::rng(tag));
  detail::TagMutator::set_nonce(tag, n_t);
  return TagReply{tag.wire_ident(), n_t};
}

ReaderAuth reader_auth_step(ReaderState& reader, const TagReply& reply) {
  if (reader.kind() == ReaderKind::kInventory || reader.db() == nullptr) {
    throw Error(ErrorCode::kNoDatabase, std::string(to_string(reader.kind())) + " reader");
  }
  const std::uint64_t key = reader.db()->lookup(reply.ident);
  const Digest h1 = reader.hash()(reply.n_t, key);
  const std::uint64_t n_r = draw(reader.mutable_rng());
  reader.set_pending(PendingAuth{reader.hash()(n_r, key), n_r});
  return ReaderAuth{h1, n_r};
}

TagAnswer tag_verify_and_answer(TagState& tag, const ReaderAuth& msg,
                                std::uint64_t expected_n_t) {
  const std::uint64_t key = tag.key();
  if (msg.h1 != tag.hash()(expected_n_t, key)) return TagAnswer{};
  detail::TagMutator::toggle_privacy_bit(tag);
  detail::TagMutator::set_nonce(tag, std::nullopt);
  return TagAnswer{TagAuth{tag.hash()(msg.n_r, key)}, true};
}

bool reader_verify(ReaderState& reader, const TagAuth& msg) {
  if (!reader.pending()) throw Error(ErrorCode::kNoPendingSession, "reader_verify");
  const bool accepted = msg.h2 == reader.pending()->expected_digest;
  reader.clear_pending();
  return accepted;
}

SessionVerdict run_session(SubProtocol sp, TagState& tag, ReaderState& reader, Channel& channel,
                           const Endpoints& endpoints) {
  SessionVerdict verdict;
  verdict.subprotocol = sp;
  verdict.privacy_bit_before = tag.privacy_bit();
  verdict.privacy_bit_after = tag.privacy_bit();

  auto abort = [&](ErrorCode code, std::string detail) {
    verdict.aborted = code;
    verdict.abort_detail = std::move(detail);
    verdict.privacy_bit_after = tag.privacy_bit();
    // A reader left waiting for TagAuth times out.
    reader.clear_pending();
    return verdict;
  };

  if (tag.privacy_bit() != required_privacy_bit(sp)) {
    return abort(ErrorCode::kPreconditionViolation,
                 fmt::format("{} requires privacy bit {}", to_string(sp),
                             to_int(required_privacy_bit(sp))));
  }
  if (!reader_allowed(sp, reader.kind())) {
    return abort(ErrorCode::kPreconditionViolation,
                 fmt::format("{} cannot be run by a {} reader", to_string(sp),
                             to_string(reader.kind())));
  }

  const std::string& tag_label = endpoints.tag;
  const std::string& reader_label = endpoints.reader;
  try {
    auto at_tag = channel.transmit(Direction::kForward, reader_label, tag_label, Query{});
    if (!at_tag) return abort(ErrorCode::kUnexpectedMessage, "query dropped");
    if (!std::holds_alternative<Query>(*at_tag)) {
      return abort(ErrorCode::kUnexpectedMessage, "tag expected Query");
    }

    auto at_reader = channel.transmit(Direction::kBackward, tag_label, reader_label, tag_respond_query(tag));
    if (!authenticates(sp)) {
      if (!at_reader) return abort(ErrorCode::kUnexpectedMessage, "tag reply dropped");
      if (!expect<TagReply>(at_reader)) {
        return abort(ErrorCode::kUnexpectedMessage, "reader expected TagReply");
      }
      return verdict;
    }
    const auto* reply = expect<TagReply>(at_reader);
    if (!reply) return abort(ErrorCode::kUnexpectedMessage, "reader expected TagReply");

    const ReaderAuth auth = reader_auth_step(reader, *reply);
    verdict.reader_auth_sent = true;
    at_tag = channel.transmit(Direction::kForward, reader_label, tag_label, auth);
    const auto* auth_at_tag = expect<ReaderAuth>(at_tag);
    if (!auth_at_tag || !tag.outstanding_nonce()) {
      return abort(ErrorCode::kUnexpectedMessage, "tag expected ReaderAuth");
    }

    const TagAnswer answer = tag_verify_and_answer(tag, *auth_at_tag, *tag.outstanding_nonce());
    verdict.tag_accepted_reader = answer.accepted;
    verdict.privacy_bit_after = tag.privacy_bit();
    channel.record_verdict(tag_label, reader_label, VerifierRole::kTag, answer.accepted);
    if (!answer.reply) {
      reader.clear_pending();
      return verdict;
    }

    at_reader = channel.transmit(Direction::kBackward, tag_label, reader_label, *answer.reply);
    const auto* tag_auth = expect<TagAuth>(at_reader);
    if (!tag_auth) return abort(ErrorCode::kUnexpectedMessage, "reader expected TagAuth");
    verdict.reader_accepted_tag = reader_verify(reader, *tag_auth);
    channel.record_verdict(reader_label, tag_label, VerifierRole::kReader,
                           verdict.reader_accepted_tag);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kCapabilityViolation) throw;
    return abort(e.code(), e.what());
  }
  return verdict;
}

}  // namespace paplab
