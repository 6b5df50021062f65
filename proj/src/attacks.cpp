#include "paplab/attacks.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "paplab/audit.hpp"

namespace paplab {
namespace {

enum class TraceMode { kForward, kBackward };

void require_active(const AdversaryCapabilities& caps, std::string_view attack) {
  if (!(caps.eavesdrop_forward && caps.eavesdrop_backward && caps.intercept)) {
    throw Error(ErrorCode::kCapabilityMissing,
                fmt::format("{} needs eavesdrop_forward, eavesdrop_backward and intercept",
                            attack));
  }
}

struct TraceObservation {
  std::optional<Digest> token;
  bool reached_reader_auth = false;
  Transcript transcript;
  std::size_t key_reads = 0;
};

Interceptor constant_rewriter(TraceMode mode, ConstantC c, const AdversaryCapabilities& caps) {
  Interceptor interceptor;
  interceptor.capabilities = caps;
  if (mode == TraceMode::kForward) {
    interceptor.label = "fix-n_t";
    interceptor.transform = [c](const Message& msg, Direction direction) -> InterceptAction {
      const auto* reply = std::get_if<TagReply>(&msg);
      if (direction != Direction::kBackward || reply == nullptr) return Pass{};
      return Replace{TagReply{reply->ident, c.value}};
    };
  } else {
    interceptor.label = "fix-n_r";
    interceptor.transform = [c](const Message& msg, Direction direction) -> InterceptAction {
      const auto* auth = std::get_if<ReaderAuth>(&msg);
      if (direction != Direction::kForward || auth == nullptr) return Pass{};
      return Replace{ReaderAuth{auth->h1, c.value}};
    };
  }
  return interceptor;
}

// One intercepted session. The adversary keeps only what its eavesdrop log
// shows: the reader's H1 (forward) or the tag's H2 (backward).
TraceObservation trace_once(const SessionRunner& target, TraceMode mode, ConstantC c,
                            const AdversaryCapabilities& caps) {
  audit::AdversaryScope scope;
  TraceObservation obs;
  Channel channel;
  channel.attach(constant_rewriter(mode, c, caps));
  SessionVerdict verdict;
  {
    audit::HonestScope honest;
    verdict = target(channel);
  }
  obs.reached_reader_auth = verdict.reader_auth_sent;
  for (const auto& seen : eavesdrop_log(channel.transcript(), caps)) {
    if (mode == TraceMode::kForward) {
      if (const auto* auth = std::get_if<ReaderAuth>(&seen.message)) obs.token = auth->h1;
    } else if (const auto* tag_auth = std::get_if<TagAuth>(&seen.message)) {
      obs.token = tag_auth->h2;
    }
  }
  obs.transcript = channel.transcript();
  obs.key_reads = scope.key_reads();
  return obs;
}

AttackReport run_trace(const SessionRunner& target, TraceMode mode, ConstantC c,
                       const AdversaryCapabilities& caps, int runs) {
  const AttackKind kind =
      mode == TraceMode::kForward ? AttackKind::kForwardTrace : AttackKind::kBackwardTrace;
  require_active(caps, to_string(kind));

  AttackReport report;
  report.attack = kind;
  bool all_reached = true;
  for (int run = 0; run < runs; ++run) {
    TraceObservation obs = trace_once(target, mode, c, caps);
    report.adversary_key_reads += obs.key_reads;
    report.sessions.push_back(std::move(obs.transcript));
    all_reached = all_reached && obs.reached_reader_auth;
    if (!obs.token) {
      if (mode == TraceMode::kBackward && obs.reached_reader_auth) {
        throw Error(ErrorCode::kNoTagAuth, fmt::format("run {}: tag rejected H1", run));
      }
      all_reached = false;
      continue;
    }
    report.observed_tokens.push_back(*obs.token);
  }

  if (runs < 2) {
    report.insufficient_runs = true;
    report.detail = "linking needs at least two runs";
    return report;
  }
  report.success = all_reached && report.observed_tokens.size() == static_cast<std::size_t>(runs);
  if (report.success) {
    const Digest first = report.observed_tokens.front();
    report.linked = std::all_of(report.observed_tokens.begin(), report.observed_tokens.end(),
                                [first](Digest d) { return d == first; });
  }
  return report;
}

std::optional<IdOrName> first_tag_reply_ident(const EavesdropLog& log) {
  for (const auto& seen : log) {
    if (const auto* reply = std::get_if<TagReply>(&seen.message)) return reply->ident;
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::kConstantIdLink: return "ConstantIdLink";
    case AttackKind::kConstellationLink: return "ConstellationLink";
    case AttackKind::kForwardTrace: return "ForwardTrace";
    case AttackKind::kBackwardTrace: return "BackwardTrace";
    case AttackKind::kImpersonation: return "Impersonation";
  }
  return "Unknown";
}

std::string_view to_string(GameStrategy strategy) {
  switch (strategy) {
    case GameStrategy::kForwardTrace: return "ForwardTrace";
    case GameStrategy::kBackwardTrace: return "BackwardTrace";
    case GameStrategy::kConstantIdLink: return "ConstantIdLink";
    case GameStrategy::kBlindGuess: return "BlindGuess";
  }
  return "Unknown";
}

SessionRunner make_authenticating_runner(TagState& tag, ReaderState& checkout_reader,
                                         ReaderState& return_reader, Endpoints endpoints) {
  return [&tag, &checkout_reader, &return_reader, endpoints](Channel& channel) {
    const SubProtocol sp = authenticating_subprotocol(tag.privacy_bit());
    ReaderState& reader = sp == SubProtocol::kCheckout ? checkout_reader : return_reader;
    return run_session(sp, tag, reader, channel, endpoints);
  };
}

SessionRunner make_read_only_runner(TagState& tag, ReaderState& reader, Endpoints endpoints) {
  return [&tag, &reader, endpoints](Channel& channel) {
    return run_session(read_only_subprotocol(tag.privacy_bit()), tag, reader, channel, endpoints);
  };
}

bool link_by_constant_id(const EavesdropLog& first, const EavesdropLog& second) {
  const auto a = first_tag_reply_ident(first);
  const auto b = first_tag_reply_ident(second);
  if (!a || !b) throw Error(ErrorCode::kMalformedLog, "log without TagReply");
  return *a == *b;
}

bool link_by_constellation(std::span<const GenericName> first,
                           std::span<const GenericName> second) {
  if (first.empty() || second.empty()) {
    throw Error(ErrorCode::kPreconditionViolation, "empty constellation");
  }
  std::vector<GenericName> a(first.begin(), first.end());
  std::vector<GenericName> b(second.begin(), second.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

std::vector<GenericName> observe_constellation(std::span<TagState* const> holder,
                                               ReaderState& reader,
                                               const AdversaryCapabilities& caps,
                                               std::vector<Transcript>* sessions) {
  if (!caps.eavesdrop_backward) {
    throw Error(ErrorCode::kCapabilityMissing, "constellation needs eavesdrop_backward");
  }
  std::vector<GenericName> names;
  for (TagState* tag : holder) {
    Channel channel;
    make_read_only_runner(*tag, reader)(channel);
    audit::AdversaryScope scope;
    if (auto ident = first_tag_reply_ident(eavesdrop_log(channel.transcript(), caps))) {
      if (const auto* name = std::get_if<GenericName>(&*ident)) names.push_back(*name);
    }
    if (sessions) sessions->push_back(channel.transcript());
  }
  return names;
}

AttackReport forward_trace(const SessionRunner& target, ConstantC c,
                           const AdversaryCapabilities& caps, int runs) {
  return run_trace(target, TraceMode::kForward, c, caps, runs);
}

AttackReport backward_trace(const SessionRunner& target, ConstantC c,
                            const AdversaryCapabilities& caps, int runs) {
  return run_trace(target, TraceMode::kBackward, c, caps, runs);
}

AttackReport impersonate(ReaderState& reader1, ReaderState& reader2, const IdOrName& target_ident,
                         const AdversaryCapabilities& caps, RngState& adversary_rng) {
  if (!caps.act_as_reader) {
    throw Error(ErrorCode::kCapabilityMissing, "impersonation needs act_as_reader");
  }
  constexpr std::string_view kAdversary = "adversary";
  AttackReport report;
  report.attack = AttackKind::kImpersonation;

  audit::AdversaryScope scope;
  Channel with_reader1;
  Channel with_reader2;
  auto finish = [&] {
    report.sessions = {with_reader1.transcript(), with_reader2.transcript()};
    report.adversary_key_reads = scope.key_reads();
    return report;
  };

  try {
    with_reader1.transmit(Direction::kForward, "reader1", kAdversary, Query{});

    // Any n_t will do; reader1 hashes it but the adversary never needs H1.
    const TagReply opening{target_ident, draw(adversary_rng)};
    const auto to_reader1 = with_reader1.transmit(Direction::kBackward, kAdversary, "reader1",
                                                  opening);
    ReaderAuth challenge;
    {
      audit::HonestScope honest;
      challenge = reader_auth_step(reader1, std::get<TagReply>(*to_reader1));
    }
    const auto received = with_reader1.transmit(Direction::kForward, "reader1", kAdversary,
                                                challenge);
    const std::uint64_t n_r = std::get<ReaderAuth>(*received).n_r;

    // Pose as the tag towards reader2 with reader1's nonce as n_t.
    const auto to_reader2 = with_reader2.transmit(Direction::kBackward, kAdversary, "reader2",
                                                  TagReply{target_ident, n_r});
    ReaderAuth relayed;
    {
      audit::HonestScope honest;
      relayed = reader_auth_step(reader2, std::get<TagReply>(*to_reader2));
    }
    const auto h1_star = with_reader2.transmit(Direction::kForward, "reader2", kAdversary,
                                               relayed);
    {
      audit::HonestScope honest;
      // reader2 never receives a TagAuth and times out.
      reader2.clear_pending();
    }
    const TagAuth forged{std::get<ReaderAuth>(*h1_star).h1};
    const auto at_reader1 = with_reader1.transmit(Direction::kBackward, kAdversary, "reader1",
                                                  forged);
    bool accepted = false;
    {
      audit::HonestScope honest;
      accepted = reader_verify(reader1, std::get<TagAuth>(*at_reader1));
    }
    with_reader1.record_verdict("reader1", kAdversary, VerifierRole::kReader, accepted);
    report.success = accepted;
    report.observed_tokens.push_back(forged.h2);
  } catch (const Error& e) {
    {
      audit::HonestScope honest;
      reader1.clear_pending();
      reader2.clear_pending();
    }
    report.error = e.code();
    report.detail = e.what();
    report.success = false;
  }
  return finish();
}

PrivacyGameResult privacy_game(TagState& tag_a, TagState& tag_b, GameReaders readers,
                               GameStrategy strategy, std::size_t trials, RngState& rng,
                               const AdversaryCapabilities& caps) {
  switch (strategy) {
    case GameStrategy::kForwardTrace:
    case GameStrategy::kBackwardTrace:
      if (tag_a.key() == tag_b.key()) {
        throw Error(ErrorCode::kDegenerateGame, "tags share a key");
      }
      break;
    case GameStrategy::kConstantIdLink:
      if (tag_a.id() == tag_b.id() || tag_a.name() == tag_b.name()) {
        throw Error(ErrorCode::kDegenerateGame, "tags share an identifier or name");
      }
      break;
    case GameStrategy::kBlindGuess: break;
  }

  const Endpoints ends_a{"tag_a", "reader"};
  const Endpoints ends_b{"tag_b", "reader"};
  const SessionRunner auth_a =
      make_authenticating_runner(tag_a, readers.checkout, readers.returns, ends_a);
  const SessionRunner auth_b =
      make_authenticating_runner(tag_b, readers.checkout, readers.returns, ends_b);
  const SessionRunner read_a = make_read_only_runner(tag_a, readers.inventory, ends_a);
  const SessionRunner read_b = make_read_only_runner(tag_b, readers.inventory, ends_b);

  PrivacyGameResult result;
  try {
    for (std::size_t trial = 0; trial < trials; ++trial) {
      const bool challenge_is_b = (draw(rng) & 1) != 0;
      bool guess_same = false;

      switch (strategy) {
        case GameStrategy::kForwardTrace:
        case GameStrategy::kBackwardTrace: {
          const TraceMode mode = strategy == GameStrategy::kForwardTrace ? TraceMode::kForward
                                                                         : TraceMode::kBackward;
          require_active(caps, to_string(strategy));
          const ConstantC c{draw(rng)};
          auto first = trace_once(auth_a, mode, c, caps);
          auto second = trace_once(challenge_is_b ? auth_b : auth_a, mode, c, caps);
          result.adversary_key_reads += first.key_reads + second.key_reads;
          result.sessions.push_back(std::move(first.transcript));
          result.sessions.push_back(std::move(second.transcript));
          if (!first.token || !second.token) {
            throw Error(ErrorCode::kNoTagAuth, fmt::format("trial {} produced no token", trial));
          }
          audit::AdversaryScope scope;
          guess_same = *first.token == *second.token;
          result.adversary_key_reads += scope.key_reads();
          break;
        }
        case GameStrategy::kConstantIdLink: {
          if (!caps.eavesdrop_backward) {
            throw Error(ErrorCode::kCapabilityMissing, "ConstantIdLink needs eavesdrop_backward");
          }
          Channel first;
          Channel second;
          read_a(first);
          (challenge_is_b ? read_b : read_a)(second);
          result.sessions.push_back(first.transcript());
          result.sessions.push_back(second.transcript());
          audit::AdversaryScope scope;
          guess_same = link_by_constant_id(eavesdrop_log(first.transcript(), caps),
                                           eavesdrop_log(second.transcript(), caps));
          result.adversary_key_reads += scope.key_reads();
          break;
        }
        case GameStrategy::kBlindGuess: guess_same = (draw(rng) & 1) != 0; break;
      }

      ++result.trials;
      if (guess_same == !challenge_is_b) ++result.correct;
    }
  } catch (const Error& e) {
    result.aborted = e.code();
    return result;
  }

  if (result.trials > 0) {
    const double p = static_cast<double>(result.correct) / static_cast<double>(result.trials);
    result.advantage = std::abs(2.0 * p - 1.0);
  }
  return result;
}

}  // namespace paplab
