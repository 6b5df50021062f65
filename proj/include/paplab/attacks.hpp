#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "paplab/channel.hpp"
#include "paplab/error.hpp"
#include "paplab/model.hpp"
#include "paplab/protocol.hpp"

namespace paplab {

enum class AttackKind {
  kConstantIdLink,
  kConstellationLink,
  kForwardTrace,
  kBackwardTrace,
  kImpersonation,
};

std::string_view to_string(AttackKind kind);

struct AttackReport {
  AttackKind attack = AttackKind::kForwardTrace;
  bool success = false;
  std::optional<bool> linked;
  /// One transcript per session the attack drove or observed.
  std::vector<Transcript> sessions;
  /// Secret-key reads performed by adversary code. Always zero for the
  /// attacks in this module.
  std::size_t adversary_key_reads = 0;
  /// Tokens the adversary compared (H1 for forward, H2 for backward).
  std::vector<Digest> observed_tokens;
  bool insufficient_runs = false;
  std::optional<ErrorCode> error;
  std::string detail;
};

/// Constant the adversary substitutes for n_t or n_r during one campaign.
struct ConstantC {
  std::uint64_t value = 0;
};

/// Runs one honest session of the target over the supplied channel. The
/// adversary only ever holds this callable, never the tag itself.
using SessionRunner = std::function<SessionVerdict(Channel&)>;

/// Runner that picks checkout or return from the tag's current privacy bit,
/// so repeated campaigns keep working after the tag flips its bit.
SessionRunner make_authenticating_runner(TagState& tag, ReaderState& checkout_reader,
                                         ReaderState& return_reader, Endpoints endpoints = {});

/// Runner for in-store / out-store reads by any reader.
SessionRunner make_read_only_runner(TagState& tag, ReaderState& reader, Endpoints endpoints = {});

/// Throws MalformedLog if either log lacks a TagReply.
bool link_by_constant_id(const EavesdropLog& first, const EavesdropLog& second);

/// Multiset equality of the names seen on two holders. Throws
/// PreconditionViolation on an empty multiset.
bool link_by_constellation(std::span<const GenericName> first,
                           std::span<const GenericName> second);

/// Names a passive eavesdropper collects from one read of each tag a holder
/// carries. Requires eavesdrop_backward.
std::vector<GenericName> observe_constellation(std::span<TagState* const> holder,
                                               ReaderState& reader,
                                               const AdversaryCapabilities& caps,
                                               std::vector<Transcript>* sessions = nullptr);

/// Rewrites TagReply.n_t := c on the backward channel and links runs by
/// equality of the reader's H1. Throws CapabilityMissing.
AttackReport forward_trace(const SessionRunner& target, ConstantC c,
                           const AdversaryCapabilities& caps, int runs = 2);

/// Rewrites ReaderAuth.n_r := c on the forward channel and links runs by
/// equality of the tag's H2. Throws CapabilityMissing, or NoTagAuth when
/// the tag stayed silent.
AttackReport backward_trace(const SessionRunner& target, ConstantC c,
                            const AdversaryCapabilities& caps, int runs = 2);

/// Relays reader1's n_r to reader2 posing as the target tag, then hands
/// reader2's H1* back to reader1 as H2. Throws CapabilityMissing;
/// lookup failures yield success=false.
AttackReport impersonate(ReaderState& reader1, ReaderState& reader2, const IdOrName& target_ident,
                         const AdversaryCapabilities& caps, RngState& adversary_rng);

enum class GameStrategy { kForwardTrace, kBackwardTrace, kConstantIdLink, kBlindGuess };

std::string_view to_string(GameStrategy strategy);

struct GameReaders {
  ReaderState& inventory;
  ReaderState& checkout;
  ReaderState& returns;
};

struct PrivacyGameResult {
  /// |2 Pr[correct] - 1|; absent when trials aborted.
  std::optional<double> advantage;
  std::size_t trials = 0;
  std::size_t correct = 0;
  std::optional<ErrorCode> aborted;
  std::size_t adversary_key_reads = 0;
  std::vector<Transcript> sessions;
};

/// First observation is always tag_a; a hidden coin picks tag_a or tag_b for
/// the second. The strategy's link verdict is the guess "same tag".
/// Throws DegenerateGame when the tags cannot be told apart by construction.
PrivacyGameResult privacy_game(TagState& tag_a, TagState& tag_b, GameReaders readers,
                               GameStrategy strategy, std::size_t trials, RngState& rng,
                               const AdversaryCapabilities& caps);

}  // namespace paplab
