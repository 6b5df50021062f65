#include "paplab/channel.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "paplab/audit.hpp"
#include "paplab/error.hpp"

namespace paplab {
namespace {

bool belongs_on(Direction direction, const Message& msg) {
  if (direction == Direction::kForward) {
    return std::holds_alternative<Query>(msg) || std::holds_alternative<ReaderAuth>(msg);
  }
  return std::holds_alternative<TagReply>(msg) || std::holds_alternative<TagAuth>(msg);
}

bool observes(const AdversaryCapabilities& caps, Direction direction) {
  return direction == Direction::kForward ? caps.eavesdrop_forward : caps.eavesdrop_backward;
}

}  // namespace

std::string_view to_string(Direction direction) {
  return direction == Direction::kForward ? "forward" : "backward";
}

std::uint64_t Transcript::next_seq() const noexcept {
  std::uint64_t next = 0;
  if (!events.empty()) next = std::max(next, events.back().seq + 1);
  if (!verdicts.empty()) next = std::max(next, verdicts.back().seq + 1);
  return next;
}

void Transcript::append(const Transcript& other) {
  const std::uint64_t base = next_seq();
  for (auto event : other.events) {
    event.seq += base;
    events.push_back(std::move(event));
  }
  for (auto verdict : other.verdicts) {
    verdict.seq += base;
    verdicts.push_back(std::move(verdict));
  }
}

void Channel::attach(Interceptor interceptor) {
  interceptor.capabilities.validate();
  interceptors_.push_back(std::move(interceptor));
}

std::optional<Message> Channel::transmit(Direction direction, std::string_view from,
                                         std::string_view to, const Message& msg) {
  if (!belongs_on(direction, msg)) {
    throw Error(ErrorCode::kUnexpectedMessage,
                std::string(message_type_name(msg)) + " on " + std::string(to_string(direction)));
  }

  TranscriptEvent event;
  event.seq = seq_++;
  event.direction = direction;
  event.from = std::string(from);
  event.to = std::string(to);
  event.original = msg;

  auto frame = encode_message(msg);
  for (const auto& interceptor : interceptors_) {
    if (!observes(interceptor.capabilities, direction)) continue;
    const Message on_air = decode_message(frame);
    InterceptAction action;
    {
      audit::AdversaryScope scope;
      action = interceptor.transform(on_air, direction);
      adversary_key_reads_ += scope.key_reads();
    }
    if (std::holds_alternative<Pass>(action)) continue;
    if (!interceptor.capabilities.intercept) {
      throw Error(ErrorCode::kCapabilityViolation,
                  interceptor.label + " modified traffic without intercept capability");
    }
    event.intercepted = true;
    if (std::holds_alternative<Drop>(action)) {
      event.dropped = true;
      break;
    }
    frame = encode_message(std::get<Replace>(action).message);
  }

  event.delivered = event.dropped ? event.original : decode_message(frame);
  std::optional<Message> delivered;
  if (!event.dropped) delivered = event.delivered;
  transcript_.events.push_back(std::move(event));
  return delivered;
}

void Channel::record_verdict(std::string_view entity, std::string_view peer, VerifierRole role,
                             bool accepted) {
  transcript_.verdicts.push_back(
      VerdictRecord{seq_++, std::string(entity), std::string(peer), role, accepted});
}

EavesdropLog eavesdrop_log(const Transcript& transcript, const AdversaryCapabilities& caps) {
  EavesdropLog log;
  for (const auto& event : transcript.events) {
    if (event.dropped || !observes(caps, event.direction)) continue;
    log.push_back(ObservedMessage{event.direction, event.delivered});
  }
  return log;
}

std::string transcript_to_jsonl(const Transcript& transcript) {
  using nlohmann::ordered_json;
  std::vector<std::pair<std::uint64_t, ordered_json>> lines;
  lines.reserve(transcript.events.size() + transcript.verdicts.size());

  for (const auto& event : transcript.events) {
    ordered_json line;
    line["seq"] = event.seq;
    line["direction"] = to_string(event.direction);
    line["from"] = event.from;
    line["to"] = event.to;
    line["msg_type"] = message_type_name(event.delivered);
    line["fields_hex"] = to_hex(encode_fields(event.delivered));
    line["intercepted"] = event.intercepted;
    line["dropped"] = event.dropped;
    lines.emplace_back(event.seq, std::move(line));
  }
  for (const auto& verdict : transcript.verdicts) {
    ordered_json line;
    line["seq"] = verdict.seq;
    line["direction"] = "local";
    line["from"] = verdict.entity;
    line["to"] = verdict.peer;
    line["msg_type"] = "Verdict";
    const std::uint8_t fields[] = {static_cast<std::uint8_t>(verdict.role),
                                   static_cast<std::uint8_t>(verdict.accepted ? 1 : 0)};
    line["fields_hex"] = to_hex(fields);
    line["intercepted"] = false;
    line["dropped"] = false;
    lines.emplace_back(verdict.seq, std::move(line));
  }
  std::stable_sort(lines.begin(), lines.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  std::string out;
  for (const auto& [seq, line] : lines) {
    out += line.dump();
    out += '\n';
  }
  return out;
}

}  // namespace paplab
