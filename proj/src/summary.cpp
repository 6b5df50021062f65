#include "paplab/summary.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "paplab/error.hpp"

namespace paplab {
namespace {

// Field bytes per message type; TagReply depends on its ident variant.
bool fields_width_ok(std::string_view type, std::string_view hex) {
  const std::size_t bytes = hex.size() / 2;
  if (type == "Query") return bytes == 0;
  if (type == "TagReply") return bytes == 1 + 12 + 8 || bytes == 1 + 4 + 8;
  if (type == "ReaderAuth") return bytes == 16;
  if (type == "TagAuth") return bytes == 8;
  if (type == "Verdict") return bytes == 2;
  return false;
}

bool is_lower_hex(std::string_view s) {
  return s.size() % 2 == 0 && std::all_of(s.begin(), s.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

double rate(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

double Summary::reader_acceptance_rate() const { return rate(reader_accepted, reader_verdicts); }

double Summary::tag_acceptance_rate() const { return rate(tag_accepted, tag_verdicts); }

void Summary::add_line(std::string_view line) {
  auto fail = [&](std::string_view why) {
    throw Error(ErrorCode::kSchemaError, fmt::format("{}: {}", why, line));
  };
  const auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) fail("not a JSON object");
  static constexpr std::string_view kKeys[] = {"seq",        "direction",   "from",   "to",
                                               "msg_type",   "fields_hex",  "intercepted",
                                               "dropped"};
  if (j.size() != std::size(kKeys)) fail("unexpected field set");
  for (auto key : kKeys) {
    if (!j.contains(key)) fail(fmt::format("missing {}", key));
  }
  if (!j["seq"].is_number_unsigned()) fail("seq must be unsigned");
  if (!j["from"].is_string() || !j["to"].is_string()) fail("from/to must be strings");
  if (!j["intercepted"].is_boolean() || !j["dropped"].is_boolean()) fail("flags must be bool");
  if (!j["direction"].is_string() || !j["msg_type"].is_string() || !j["fields_hex"].is_string()) {
    fail("direction/msg_type/fields_hex must be strings");
  }
  const auto direction = j["direction"].get<std::string>();
  const auto type = j["msg_type"].get<std::string>();
  const auto hex = j["fields_hex"].get<std::string>();
  if (!is_lower_hex(hex) || !fields_width_ok(type, hex)) fail("bad fields_hex");

  if (direction == "local") {
    if (type != "Verdict") fail("local line must be a Verdict");
    const bool reader_side = hex.substr(0, 2) == "01";
    const bool accepted = hex.substr(2, 2) == "01";
    if (reader_side) {
      ++reader_verdicts;
      reader_accepted += accepted ? 1 : 0;
    } else {
      ++tag_verdicts;
      tag_accepted += accepted ? 1 : 0;
    }
    return;
  }
  if (direction != "forward" && direction != "backward") fail("bad direction");
  if (type == "Verdict") fail("Verdict must be local");
  ++messages[direction + "/" + type];
  ++total_messages;
  if (j["intercepted"].get<bool>()) ++intercepted;
  if (j["dropped"].get<bool>()) ++dropped;
  if (type == "Query") ++sessions;
}

void Summary::add_jsonl(std::string_view text) {
  while (!text.empty()) {
    const auto end = text.find('\n');
    const auto line = text.substr(0, end);
    if (!line.empty()) add_line(line);
    if (end == std::string_view::npos) break;
    text.remove_prefix(end + 1);
  }
}

nlohmann::ordered_json Summary::to_json() const {
  nlohmann::ordered_json j;
  j["messages"] = nlohmann::ordered_json::object();
  for (const auto& [key, count] : messages) j["messages"][key] = count;
  j["total_messages"] = total_messages;
  j["intercepted"] = intercepted;
  j["dropped"] = dropped;
  j["sessions"] = sessions;
  j["reader_verdicts"] = reader_verdicts;
  j["reader_accepted"] = reader_accepted;
  j["tag_verdicts"] = tag_verdicts;
  j["tag_accepted"] = tag_accepted;
  j["reader_acceptance_rate"] = reader_acceptance_rate();
  j["tag_acceptance_rate"] = tag_acceptance_rate();
  return j;
}

std::string Summary::to_text() const {
  std::string out;
  auto line = [&](std::string_view k, auto v) { out += fmt::format("{:<24}{}\n", k, v); };
  for (const auto& [key, count] : messages) line(key, count);
  line("total_messages", total_messages);
  line("intercepted", intercepted);
  line("dropped", dropped);
  line("sessions", sessions);
  line("reader_accepted", fmt::format("{}/{}", reader_accepted, reader_verdicts));
  line("tag_accepted", fmt::format("{}/{}", tag_accepted, tag_verdicts));
  return out;
}

Summary summarize(std::span<const std::filesystem::path> paths) {
  Summary summary;
  for (const auto& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    summary.add_jsonl(buf.str());
  }
  return summary;
}

Summary summarize_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorCode::kIoError, "not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
      paths.push_back(entry.path());
    }
  }
  std::sort(paths.begin(), paths.end());
  return summarize(paths);
}

}  // namespace paplab
