#pragma once

// Batch scenario runner behind the pap-lab CLI. A scenario is a JSON
// document declaring tags, readers, adversary capabilities and an ordered
// program of sessions and attacks; the seed determines every random draw.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "paplab/attacks.hpp"
#include "paplab/model.hpp"
#include "paplab/protocol.hpp"
#include "paplab/summary.hpp"

namespace paplab {

struct TagSpec {
  std::string label;
  // nullopt means "random", drawn from the scenario seed.
  std::optional<TagId> id;
  std::optional<std::uint32_t> name;
  std::optional<std::uint64_t> key;
  PrivacyBit privacy_bit = PrivacyBit::kSecure;
  bool registered = true;
};

struct ReaderSpec {
  std::string label;
  ReaderKind kind = ReaderKind::kInventory;
};

struct SessionStep {
  SubProtocol subprotocol = SubProtocol::kInStore;
  std::size_t tag = 0;
  std::size_t reader = 0;
};

struct TraceStep {
  AttackKind attack = AttackKind::kForwardTrace;
  std::size_t tag = 0;
  std::size_t checkout_reader = 0;
  std::size_t return_reader = 0;
  std::optional<std::uint64_t> c;
  int runs = 2;
};

struct ImpersonateStep {
  std::size_t reader1 = 0;
  std::size_t reader2 = 0;
  /// A declared tag (its current wire identifier is used) or a literal one.
  std::variant<std::size_t, IdOrName> target;
};

struct PrivacyGameStep {
  std::size_t tag_a = 0;
  std::size_t tag_b = 0;
  GameStrategy strategy = GameStrategy::kForwardTrace;
  std::size_t trials = 0;
  std::size_t inventory_reader = 0;
  std::size_t checkout_reader = 0;
  std::size_t return_reader = 0;
};

struct ConstantIdStep {
  std::size_t tag_a = 0;
  std::size_t tag_b = 0;
  std::size_t reader = 0;
};

struct ConstellationStep {
  std::vector<std::size_t> holder_a;
  std::vector<std::size_t> holder_b;
  std::size_t reader = 0;
};

using Step = std::variant<SessionStep, TraceStep, ImpersonateStep, PrivacyGameStep, ConstantIdStep,
                          ConstellationStep>;

struct Scenario {
  std::uint64_t seed = 0;
  std::vector<TagSpec> tags;
  std::vector<ReaderSpec> readers;
  AdversaryCapabilities adversary = AdversaryCapabilities::all();
  std::vector<Step> program;
  /// Default trial count for privacy_game steps.
  std::size_t trials = 1000;
  bool halt_on_error = false;
};

/// Throws ParseError (with line or field path), UnknownEntityRef or
/// InvalidCapabilityCombo.
Scenario parse_scenario(std::string_view text);

struct StepResult {
  std::size_t index = 0;
  std::string label;
  std::string transcript_file;
  nlohmann::ordered_json detail;
  bool errored = false;
};

struct RunReport {
  std::uint64_t seed = 0;
  std::vector<StepResult> steps;
  /// Recomputed from the transcript files.
  Summary totals;
  std::size_t attacks_run = 0;
  std::size_t attacks_succeeded = 0;
  std::size_t steps_errored = 0;
  /// Final privacy bit per declared tag, in declaration order.
  std::vector<std::pair<std::string, PrivacyBit>> final_tags;
  /// File name -> JSONL contents, one per executed step.
  std::vector<std::pair<std::string, std::string>> transcripts;

  nlohmann::ordered_json to_json() const;
  std::string to_text() const;
};

/// Executes the program in order; entity state carries across steps.
/// Throws DuplicateId / NameKeyConflict if the declared tags cannot be
/// registered.
RunReport run_scenario(const Scenario& scenario);

/// Writes every transcript plus report.json into dir (created if needed).
void write_run(const RunReport& report, const std::filesystem::path& dir);

}  // namespace paplab
