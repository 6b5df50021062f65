#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "paplab/model.hpp"

namespace paplab {

/// Forward is reader-to-tag, Backward is tag-to-reader.
enum class Direction { kForward, kBackward };

std::string_view to_string(Direction direction);

struct TranscriptEvent {
  std::uint64_t seq = 0;
  Direction direction = Direction::kForward;
  std::string from;
  std::string to;
  Message original;
  Message delivered;
  bool intercepted = false;
  bool dropped = false;
};

/// Which side performed a verification.
enum class VerifierRole : std::uint8_t { kTag = 0, kReader = 1 };

/// Outcome of a verification step taken by one endpoint.
struct VerdictRecord {
  std::uint64_t seq = 0;
  std::string entity;
  std::string peer;
  VerifierRole role = VerifierRole::kReader;
  bool accepted = false;
};

struct Transcript {
  std::vector<TranscriptEvent> events;
  std::vector<VerdictRecord> verdicts;

  /// Appends another transcript, renumbering its records to follow ours.
  void append(const Transcript& other);

  std::uint64_t next_seq() const noexcept;
};

struct ObservedMessage {
  Direction direction;
  Message message;
};

using EavesdropLog = std::vector<ObservedMessage>;

struct Pass {};
struct Replace {
  Message message;
};
struct Drop {};

using InterceptAction = std::variant<Pass, Replace, Drop>;

struct Interceptor {
  std::string label;
  AdversaryCapabilities capabilities;
  std::function<InterceptAction(const Message&, Direction)> transform;
};

// Lossless, instantaneous radio link for one session. Frames are encoded on
// send and decoded on receipt, so every interceptor rewrite is re-framed
// with a fresh CRC.
class Channel {
 public:
  /// Throws InvalidCapabilityCombo for an inconsistent capability set.
  void attach(Interceptor interceptor);

  /// Sends msg, applying interceptors in attachment order. Returns the
  /// delivered message, or nullopt if an interceptor dropped it. Throws
  /// CapabilityViolation when an interceptor rewrites or drops without the
  /// intercept capability, and UnexpectedMessage when an honest endpoint
  /// sends a message type that does not belong on this direction.
  std::optional<Message> transmit(Direction direction, std::string_view from,
                                  std::string_view to, const Message& msg);

  void record_verdict(std::string_view entity, std::string_view peer, VerifierRole role,
                      bool accepted);

  const Transcript& transcript() const noexcept { return transcript_; }

  /// Secret-key reads made by interceptor code on this channel.
  std::size_t adversary_key_reads() const noexcept { return adversary_key_reads_; }

 private:
  std::vector<Interceptor> interceptors_;
  Transcript transcript_;
  std::uint64_t seq_ = 0;
  std::size_t adversary_key_reads_ = 0;
};

/// What an eavesdropper with the given capabilities saw: delivered messages
/// on the directions it can listen to, excluding dropped frames.
EavesdropLog eavesdrop_log(const Transcript& transcript, const AdversaryCapabilities& caps);

/// One JSON object per line, events and verdicts interleaved by seq.
/// Verdict lines use direction "local", msg_type "Verdict" and fields_hex
/// [role][accepted].
std::string transcript_to_jsonl(const Transcript& transcript);

}  // namespace paplab
