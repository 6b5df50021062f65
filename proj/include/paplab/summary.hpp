#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace paplab {

// Aggregate statistics over transcript JSONL files. A pure function of the
// lines fed in; the run report embeds one of these for cross-checking.
struct Summary {
  /// Keyed "<direction>/<msg_type>", e.g. "forward/Query".
  std::map<std::string, std::size_t> messages;
  std::size_t total_messages = 0;
  std::size_t intercepted = 0;
  std::size_t dropped = 0;
  /// Sessions opened by a reader Query.
  std::size_t sessions = 0;
  std::size_t reader_verdicts = 0;
  std::size_t reader_accepted = 0;
  std::size_t tag_verdicts = 0;
  std::size_t tag_accepted = 0;

  double reader_acceptance_rate() const;
  double tag_acceptance_rate() const;

  /// Throws SchemaError for a line that does not follow the transcript schema.
  void add_line(std::string_view line);
  void add_jsonl(std::string_view text);

  nlohmann::ordered_json to_json() const;
  std::string to_text() const;

  friend bool operator==(const Summary&, const Summary&) = default;
};

Summary summarize(std::span<const std::filesystem::path> paths);

/// Every *.jsonl file directly under dir, in lexicographic order.
Summary summarize_directory(const std::filesystem::path& dir);

}  // namespace paplab
