#include "paplab/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "paplab/error.hpp"

namespace paplab {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void parse_fail(std::string_view path, std::string_view why) {
  throw Error(ErrorCode::kParseError, fmt::format("{}: {}", path, why));
}

std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
}

// Unsigned value given as a JSON number or a "0x..." / decimal string.
// Returns nullopt for "random" when allowed.
struct Wide {
  std::uint32_t high = 0;
  std::uint64_t low = 0;
};

std::optional<Wide> parse_wide(const json& v, std::string_view path, int max_bits,
                               bool allow_random) {
  if (v.is_number_unsigned()) {
    const auto n = v.get<std::uint64_t>();
    if (max_bits < 64 && n >> max_bits) parse_fail(path, "value too wide");
    return Wide{0, n};
  }
  if (v.is_number_integer()) parse_fail(path, "must be non-negative");
  if (!v.is_string()) parse_fail(path, "expected number or string");
  const auto s = v.get<std::string>();
  if (s == "random") {
    if (!allow_random) parse_fail(path, "\"random\" not allowed here");
    return std::nullopt;
  }
  Wide out;
  if (s.size() > 2 && (s.starts_with("0x") || s.starts_with("0X"))) {
    const std::string_view digits = std::string_view(s).substr(2);
    for (char ch : digits) {
      int d;
      if (ch >= '0' && ch <= '9') d = ch - '0';
      else if (ch >= 'a' && ch <= 'f') d = ch - 'a' + 10;
      else if (ch >= 'A' && ch <= 'F') d = ch - 'A' + 10;
      else parse_fail(path, "bad hex digit");
      if (out.high >> 28) parse_fail(path, "value too wide");
      out.high = (out.high << 4) | static_cast<std::uint32_t>(out.low >> 60);
      out.low = (out.low << 4) | static_cast<std::uint64_t>(d);
    }
  } else {
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) {
      parse_fail(path, "expected number, hex string or \"random\"");
    }
    for (char ch : s) {
      const std::uint64_t d = static_cast<std::uint64_t>(ch - '0');
      if (out.low > (std::numeric_limits<std::uint64_t>::max() - d) / 10) {
        parse_fail(path, "decimal strings are limited to 64 bits");
      }
      out.low = out.low * 10 + d;
    }
  }
  const bool fits = max_bits == 96 || (out.high == 0 && (max_bits == 64 || out.low >> max_bits == 0));
  if (!fits) parse_fail(path, "value too wide");
  return out;
}

std::optional<std::uint64_t> parse_u64(const json& v, std::string_view path, bool allow_random) {
  auto w = parse_wide(v, path, 64, allow_random);
  if (!w) return std::nullopt;
  return w->low;
}

std::optional<std::uint32_t> parse_u32(const json& v, std::string_view path, bool allow_random) {
  auto w = parse_wide(v, path, 32, allow_random);
  if (!w) return std::nullopt;
  return static_cast<std::uint32_t>(w->low);
}

const json& require(const json& obj, std::string_view key, std::string_view path) {
  if (!obj.is_object()) parse_fail(path, "expected object");
  auto it = obj.find(key);
  if (it == obj.end()) parse_fail(fmt::format("{}.{}", path, key), "missing field");
  return *it;
}

bool get_bool(const json& obj, std::string_view key, std::string_view path, bool fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) parse_fail(fmt::format("{}.{}", path, key), "expected bool");
  return it->get<bool>();
}

std::string get_string(const json& v, std::string_view path) {
  if (!v.is_string()) parse_fail(path, "expected string");
  return v.get<std::string>();
}

class Labels {
 public:
  void add(const std::string& label, std::string_view path) {
    if (!index_.emplace(label, index_.size()).second) parse_fail(path, "duplicate label " + label);
  }
  std::size_t resolve(const json& v, std::string_view path) const {
    const auto label = get_string(v, path);
    auto it = index_.find(label);
    if (it == index_.end()) {
      throw Error(ErrorCode::kUnknownEntityRef, fmt::format("{}: {}", path, label));
    }
    return it->second;
  }

 private:
  std::map<std::string, std::size_t> index_;
};

ReaderKind parse_reader_kind(const json& v, std::string_view path) {
  const auto s = get_string(v, path);
  if (s == "inventory") return ReaderKind::kInventory;
  if (s == "checkout") return ReaderKind::kCheckout;
  if (s == "return") return ReaderKind::kReturn;
  parse_fail(path, "unknown reader kind " + s);
}

SubProtocol parse_subprotocol(const json& v, std::string_view path) {
  const auto s = get_string(v, path);
  if (s == "in_store") return SubProtocol::kInStore;
  if (s == "checkout") return SubProtocol::kCheckout;
  if (s == "out_store") return SubProtocol::kOutStore;
  if (s == "return") return SubProtocol::kReturn;
  parse_fail(path, "unknown subprotocol " + s);
}

GameStrategy parse_strategy(const json& v, std::string_view path) {
  const auto s = get_string(v, path);
  for (auto g : {GameStrategy::kForwardTrace, GameStrategy::kBackwardTrace,
                 GameStrategy::kConstantIdLink, GameStrategy::kBlindGuess}) {
    if (s == to_string(g)) return g;
  }
  parse_fail(path, "unknown strategy " + s);
}

struct ParseContext {
  Labels tags;
  Labels readers;
  const Scenario* scenario = nullptr;

  std::size_t first_reader(ReaderKind kind, std::string_view path) const {
    for (std::size_t i = 0; i < scenario->readers.size(); ++i) {
      if (scenario->readers[i].kind == kind) return i;
    }
    throw Error(ErrorCode::kUnknownEntityRef,
                fmt::format("{}: no {} reader declared", path, to_string(kind)));
  }

  std::size_t reader_or_default(const json& params, std::string_view key, ReaderKind kind,
                                std::string_view path) const {
    const auto field = fmt::format("{}.{}", path, key);
    if (params.contains(key)) return readers.resolve(params[std::string(key)], field);
    return first_reader(kind, field);
  }
};

Step parse_attack(const json& attack, std::string_view path, const ParseContext& ctx) {
  const auto name = get_string(require(attack, "name", path), fmt::format("{}.name", path));
  const json empty = json::object();
  const json& params = attack.contains("params") ? attack["params"] : empty;
  const auto ppath = fmt::format("{}.params", path);
  if (!params.is_object()) parse_fail(ppath, "expected object");
  auto tag_ref = [&](std::string_view key) {
    return ctx.tags.resolve(require(params, key, ppath), fmt::format("{}.{}", ppath, key));
  };

  if (name == "forward_trace" || name == "backward_trace") {
    TraceStep step;
    step.attack = name == "forward_trace" ? AttackKind::kForwardTrace : AttackKind::kBackwardTrace;
    step.tag = tag_ref("tag");
    step.checkout_reader =
        ctx.reader_or_default(params, "checkout_reader", ReaderKind::kCheckout, ppath);
    step.return_reader = ctx.reader_or_default(params, "return_reader", ReaderKind::kReturn, ppath);
    if (params.contains("c")) step.c = parse_u64(params["c"], ppath + ".c", true);
    if (params.contains("runs")) {
      const auto& runs = params["runs"];
      if (!runs.is_number_unsigned() || runs.get<std::uint64_t>() > 1'000'000) {
        parse_fail(ppath + ".runs", "expected a small unsigned count");
      }
      step.runs = runs.get<int>();
    }
    return step;
  }
  if (name == "impersonate") {
    ImpersonateStep step;
    step.reader1 = ctx.readers.resolve(require(params, "reader1", ppath), ppath + ".reader1");
    step.reader2 = ctx.readers.resolve(require(params, "reader2", ppath), ppath + ".reader2");
    if (params.contains("target")) {
      step.target = tag_ref("target");
    } else if (params.contains("target_id")) {
      auto w = *parse_wide(params["target_id"], ppath + ".target_id", 96, false);
      step.target = IdOrName{TagId{w.high, w.low}};
    } else if (params.contains("target_name")) {
      step.target = IdOrName{GenericName{*parse_u32(params["target_name"], ppath + ".target_name",
                                                    false)}};
    } else {
      parse_fail(ppath, "one of target, target_id, target_name is required");
    }
    return step;
  }
  if (name == "privacy_game") {
    PrivacyGameStep step;
    step.tag_a = tag_ref("tag_a");
    step.tag_b = tag_ref("tag_b");
    step.strategy = parse_strategy(require(params, "strategy", ppath), ppath + ".strategy");
    step.trials = ctx.scenario->trials;
    if (params.contains("trials")) {
      if (!params["trials"].is_number_unsigned()) parse_fail(ppath + ".trials", "expected count");
      step.trials = params["trials"].get<std::size_t>();
    }
    step.inventory_reader =
        ctx.reader_or_default(params, "inventory_reader", ReaderKind::kInventory, ppath);
    step.checkout_reader =
        ctx.reader_or_default(params, "checkout_reader", ReaderKind::kCheckout, ppath);
    step.return_reader = ctx.reader_or_default(params, "return_reader", ReaderKind::kReturn, ppath);
    return step;
  }
  if (name == "link_by_constant_id") {
    ConstantIdStep step;
    step.tag_a = tag_ref("tag_a");
    step.tag_b = tag_ref("tag_b");
    step.reader = ctx.reader_or_default(params, "reader", ReaderKind::kInventory, ppath);
    return step;
  }
  if (name == "link_by_constellation") {
    ConstellationStep step;
    for (auto key : {"holder_a", "holder_b"}) {
      const auto hpath = fmt::format("{}.{}", ppath, key);
      const json& holder = require(params, key, ppath);
      if (!holder.is_array() || holder.empty()) parse_fail(hpath, "expected non-empty array");
      auto& out = std::string_view(key) == "holder_a" ? step.holder_a : step.holder_b;
      for (std::size_t i = 0; i < holder.size(); ++i) {
        out.push_back(ctx.tags.resolve(holder[i], fmt::format("{}[{}]", hpath, i)));
      }
    }
    step.reader = ctx.reader_or_default(params, "reader", ReaderKind::kInventory, ppath);
    return step;
  }
  parse_fail(fmt::format("{}.name", path), "unknown attack " + name);
}

std::string step_label(const Step& step) {
  struct Visitor {
    std::string operator()(const SessionStep& s) const { return std::string(to_string(s.subprotocol)); }
    std::string operator()(const TraceStep& s) const {
      return s.attack == AttackKind::kForwardTrace ? "forward_trace" : "backward_trace";
    }
    std::string operator()(const ImpersonateStep&) const { return "impersonate"; }
    std::string operator()(const PrivacyGameStep&) const { return "privacy_game"; }
    std::string operator()(const ConstantIdStep&) const { return "link_by_constant_id"; }
    std::string operator()(const ConstellationStep&) const { return "link_by_constellation"; }
  };
  return std::visit(Visitor{}, step);
}

std::string digest_hex(Digest d) { return fmt::format("{:016x}", d.value); }

ordered_json optional_bool(const std::optional<bool>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json optional_error(const std::optional<ErrorCode>& e) {
  return e ? ordered_json(std::string(to_string(*e))) : ordered_json(nullptr);
}

ordered_json attack_json(const AttackReport& report, const std::string& transcript_file) {
  ordered_json j;
  j["attack"] = to_string(report.attack);
  j["success"] = report.success;
  j["linked"] = optional_bool(report.linked);
  j["adversary_key_reads"] = report.adversary_key_reads;
  j["session_transcript_paths"] = ordered_json::array({transcript_file});
  return j;
}

// Live entities built from the declarations.
struct World {
  std::vector<TagState> tags;
  std::vector<ReaderState> readers;
  RngState master;
  RngState adversary_rng;
};

World build_world(const Scenario& scenario) {
  World world;
  world.master = RngState::from_seed(scenario.seed);
  auto db = std::make_shared<KeyDatabase>();
  for (const auto& spec : scenario.tags) {
    const std::uint64_t key = spec.key ? *spec.key : draw(world.master);
    TagId id;
    if (spec.id) {
      id = *spec.id;
    } else {
      id.high = static_cast<std::uint32_t>(draw(world.master));
      id.low = draw(world.master);
    }
    const GenericName name{spec.name ? *spec.name
                                     : static_cast<std::uint32_t>(draw(world.master))};
    world.tags.emplace_back(id, name, key, RngState::from_seed(draw(world.master)),
                            spec.privacy_bit);
    if (spec.registered) db->register_tag(world.tags.back());
  }
  for (const auto& spec : scenario.readers) {
    std::shared_ptr<const KeyDatabase> reader_db;
    if (spec.kind != ReaderKind::kInventory) reader_db = db;
    world.readers.emplace_back(spec.kind, reader_db, RngState::from_seed(draw(world.master)));
  }
  world.adversary_rng = RngState::from_seed(draw(world.master));
  return world;
}

ordered_json verdict_json(const SessionVerdict& v) {
  ordered_json j;
  j["reader_accepted_tag"] = v.reader_accepted_tag;
  j["tag_accepted_reader"] = v.tag_accepted_reader;
  j["privacy_bit_before"] = to_int(v.privacy_bit_before);
  j["privacy_bit_after"] = to_int(v.privacy_bit_after);
  j["aborted"] = optional_error(v.aborted);
  if (v.aborted) j["abort_detail"] = v.abort_detail;
  return j;
}

class StepRunner {
 public:
  StepRunner(const Scenario& scenario, World& world, RunReport& report)
      : scenario_(scenario), world_(world), report_(report) {}

  // Fills result.detail and returns the step's transcript.
  Transcript run(const Step& step, StepResult& result) {
    return std::visit([&](const auto& s) { return exec(s, result); }, step);
  }

 private:
  const std::string& tag_label(std::size_t i) const { return scenario_.tags[i].label; }
  const std::string& reader_label(std::size_t i) const { return scenario_.readers[i].label; }

  Transcript exec(const SessionStep& s, StepResult& result) {
    Channel channel;
    const auto verdict = run_session(s.subprotocol, world_.tags[s.tag], world_.readers[s.reader],
                                     channel, Endpoints{tag_label(s.tag), reader_label(s.reader)});
    result.detail["kind"] = "session";
    result.detail["subprotocol"] = to_string(s.subprotocol);
    result.detail["tag"] = tag_label(s.tag);
    result.detail["reader"] = reader_label(s.reader);
    result.detail["verdict"] = verdict_json(verdict);
    result.errored = verdict.aborted.has_value();
    return channel.transcript();
  }

  Transcript exec(const TraceStep& s, StepResult& result) {
    const ConstantC c{s.c ? *s.c : draw(world_.master)};
    auto target = make_authenticating_runner(
        world_.tags[s.tag], world_.readers[s.checkout_reader], world_.readers[s.return_reader],
        Endpoints{tag_label(s.tag), "reader"});
    AttackReport report = s.attack == AttackKind::kForwardTrace
                              ? forward_trace(target, c, scenario_.adversary, s.runs)
                              : backward_trace(target, c, scenario_.adversary, s.runs);
    result.detail = attack_detail(report, result.transcript_file);
    result.detail["c"] = fmt::format("{:016x}", c.value);
    result.detail["observed_tokens"] = ordered_json::array();
    for (Digest d : report.observed_tokens) result.detail["observed_tokens"].push_back(digest_hex(d));
    result.detail["insufficient_runs"] = report.insufficient_runs;
    result.errored = report.insufficient_runs;
    return merge(report.sessions);
  }

  Transcript exec(const ImpersonateStep& s, StepResult& result) {
    IdOrName ident;
    if (const auto* tag = std::get_if<std::size_t>(&s.target)) {
      ident = world_.tags[*tag].wire_ident();
    } else {
      ident = std::get<IdOrName>(s.target);
    }
    const AttackReport report =
        impersonate(world_.readers[s.reader1], world_.readers[s.reader2], ident,
                    scenario_.adversary, world_.adversary_rng);
    result.detail = attack_detail(report, result.transcript_file);
    result.detail["target"] = to_string(ident);
    if (report.error) {
      result.detail["error"] = to_string(*report.error);
      result.detail["error_detail"] = report.detail;
    }
    return merge(report.sessions);
  }

  Transcript exec(const PrivacyGameStep& s, StepResult& result) {
    RngState game_rng = RngState::from_seed(draw(world_.master));
    GameReaders readers{world_.readers[s.inventory_reader], world_.readers[s.checkout_reader],
                        world_.readers[s.return_reader]};
    const auto game = privacy_game(world_.tags[s.tag_a], world_.tags[s.tag_b], readers,
                                   s.strategy, s.trials, game_rng, scenario_.adversary);
    result.detail["kind"] = "privacy_game";
    result.detail["strategy"] = to_string(s.strategy);
    result.detail["tag_a"] = tag_label(s.tag_a);
    result.detail["tag_b"] = tag_label(s.tag_b);
    result.detail["trials"] = game.trials;
    result.detail["correct"] = game.correct;
    result.detail["advantage"] = game.advantage ? ordered_json(*game.advantage) : ordered_json(nullptr);
    result.detail["aborted"] = optional_error(game.aborted);
    result.detail["adversary_key_reads"] = game.adversary_key_reads;
    result.detail["session_transcript_paths"] = ordered_json::array({result.transcript_file});
    result.errored = game.aborted.has_value();
    return merge(game.sessions);
  }

  Transcript exec(const ConstantIdStep& s, StepResult& result) {
    if (!scenario_.adversary.eavesdrop_backward) {
      throw Error(ErrorCode::kCapabilityMissing, "link_by_constant_id needs eavesdrop_backward");
    }
    ReaderState& reader = world_.readers[s.reader];
    Channel first;
    Channel second;
    make_read_only_runner(world_.tags[s.tag_a], reader, Endpoints{tag_label(s.tag_a), reader_label(s.reader)})(first);
    make_read_only_runner(world_.tags[s.tag_b], reader, Endpoints{tag_label(s.tag_b), reader_label(s.reader)})(second);
    AttackReport report;
    report.attack = AttackKind::kConstantIdLink;
    report.linked = link_by_constant_id(eavesdrop_log(first.transcript(), scenario_.adversary),
                                        eavesdrop_log(second.transcript(), scenario_.adversary));
    report.success = true;
    report.sessions = {first.transcript(), second.transcript()};
    result.detail = attack_detail(report, result.transcript_file);
    return merge(report.sessions);
  }

  Transcript exec(const ConstellationStep& s, StepResult& result) {
    auto holder = [&](const std::vector<std::size_t>& indices) {
      std::vector<TagState*> tags;
      for (auto i : indices) tags.push_back(&world_.tags[i]);
      return tags;
    };
    AttackReport report;
    report.attack = AttackKind::kConstellationLink;
    const auto a = observe_constellation(holder(s.holder_a), world_.readers[s.reader],
                                         scenario_.adversary, &report.sessions);
    const auto b = observe_constellation(holder(s.holder_b), world_.readers[s.reader],
                                         scenario_.adversary, &report.sessions);
    if (!a.empty() && !b.empty()) {
      report.linked = link_by_constellation(a, b);
      report.success = true;
    } else {
      report.detail = "holder exposed no generic names";
    }
    result.detail = attack_detail(report, result.transcript_file);
    return merge(report.sessions);
  }

  ordered_json attack_detail(const AttackReport& report, const std::string& file) {
    ++report_.attacks_run;
    if (report.success) ++report_.attacks_succeeded;
    ordered_json j;
    j["kind"] = "attack";
    j["report"] = attack_json(report, file);
    return j;
  }

  static Transcript merge(const std::vector<Transcript>& sessions) {
    Transcript out;
    for (const auto& t : sessions) out.append(t);
    return out;
  }

  const Scenario& scenario_;
  World& world_;
  RunReport& report_;
};

}  // namespace

Scenario parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError,
                fmt::format("line {}: {}", line_of(text, e.byte == 0 ? 0 : e.byte - 1), e.what()));
  }
  if (!doc.is_object()) parse_fail("$", "scenario must be a JSON object");

  Scenario scenario;
  ParseContext ctx;
  ctx.scenario = &scenario;

  scenario.seed = *parse_u64(require(doc, "seed", "$"), "$.seed", false);
  scenario.halt_on_error = get_bool(doc, "halt_on_error", "$", false);
  if (doc.contains("trials")) {
    if (!doc["trials"].is_number_unsigned()) parse_fail("$.trials", "expected count");
    scenario.trials = doc["trials"].get<std::size_t>();
  }

  const json& tags = require(doc, "tags", "$");
  if (!tags.is_array()) parse_fail("$.tags", "expected array");
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const auto path = fmt::format("$.tags[{}]", i);
    const json& t = tags[i];
    if (!t.is_object()) parse_fail(path, "expected object");
    TagSpec spec;
    spec.label = t.contains("label") ? get_string(t["label"], path + ".label") : fmt::format("t{}", i);
    if (auto w = parse_wide(require(t, "id", path), path + ".id", 96, true)) {
      spec.id = TagId{w->high, w->low};
    }
    spec.name = parse_u32(require(t, "name", path), path + ".name", true);
    spec.key = parse_u64(require(t, "key", path), path + ".key", true);
    if (t.contains("privacy_bit")) {
      const auto& bit = t["privacy_bit"];
      if (!bit.is_number_unsigned() || bit.get<std::uint64_t>() > 1) {
        parse_fail(path + ".privacy_bit", "expected 0 or 1");
      }
      spec.privacy_bit = bit.get<int>() == 0 ? PrivacyBit::kSecure : PrivacyBit::kInsecure;
    }
    spec.registered = get_bool(t, "registered", path, true);
    ctx.tags.add(spec.label, path);
    scenario.tags.push_back(std::move(spec));
  }

  const json& readers = require(doc, "readers", "$");
  if (!readers.is_array()) parse_fail("$.readers", "expected array");
  for (std::size_t i = 0; i < readers.size(); ++i) {
    const auto path = fmt::format("$.readers[{}]", i);
    const json& r = readers[i];
    ReaderSpec spec;
    spec.kind = parse_reader_kind(require(r, "kind", path), path + ".kind");
    spec.label = r.contains("label") ? get_string(r["label"], path + ".label") : fmt::format("r{}", i);
    ctx.readers.add(spec.label, path);
    scenario.readers.push_back(std::move(spec));
  }

  if (doc.contains("adversary")) {
    const json& a = doc["adversary"];
    if (!a.is_object()) parse_fail("$.adversary", "expected object");
    scenario.adversary.eavesdrop_forward = get_bool(a, "eavesdrop_forward", "$.adversary", false);
    scenario.adversary.eavesdrop_backward = get_bool(a, "eavesdrop_backward", "$.adversary", false);
    scenario.adversary.intercept = get_bool(a, "intercept", "$.adversary", false);
    scenario.adversary.act_as_reader = get_bool(a, "act_as_reader", "$.adversary", false);
    scenario.adversary.validate();
  }

  const json& program = require(doc, "program", "$");
  if (!program.is_array()) parse_fail("$.program", "expected array");
  for (std::size_t i = 0; i < program.size(); ++i) {
    const auto path = fmt::format("$.program[{}]", i);
    const json& step = program[i];
    if (!step.is_object() || step.size() != 1) {
      parse_fail(path, "expected exactly one of session or attack");
    }
    if (step.contains("session")) {
      const auto spath = path + ".session";
      const json& s = step["session"];
      SessionStep out;
      out.subprotocol = parse_subprotocol(require(s, "subprotocol", spath), spath + ".subprotocol");
      out.tag = ctx.tags.resolve(require(s, "tag", spath), spath + ".tag");
      out.reader = ctx.readers.resolve(require(s, "reader", spath), spath + ".reader");
      scenario.program.emplace_back(out);
    } else if (step.contains("attack")) {
      scenario.program.push_back(parse_attack(step["attack"], path + ".attack", ctx));
    } else {
      parse_fail(path, "expected exactly one of session or attack");
    }
  }
  return scenario;
}

RunReport run_scenario(const Scenario& scenario) {
  RunReport report;
  report.seed = scenario.seed;
  World world = build_world(scenario);
  StepRunner runner(scenario, world, report);

  for (std::size_t i = 0; i < scenario.program.size(); ++i) {
    StepResult result;
    result.index = i;
    result.label = step_label(scenario.program[i]);
    result.transcript_file = fmt::format("step-{}-{}.jsonl", i, result.label);
    Transcript transcript;
    try {
      transcript = runner.run(scenario.program[i], result);
    } catch (const Error& e) {
      result.errored = true;
      result.detail["kind"] = "error";
      result.detail["error"] = to_string(e.code());
      result.detail["detail"] = e.what();
    }
    auto jsonl = transcript_to_jsonl(transcript);
    report.totals.add_jsonl(jsonl);
    report.transcripts.emplace_back(result.transcript_file, std::move(jsonl));
    if (result.errored) ++report.steps_errored;
    const bool halt = result.errored && scenario.halt_on_error;
    report.steps.push_back(std::move(result));
    if (halt) break;
  }
  for (std::size_t i = 0; i < world.tags.size(); ++i) {
    report.final_tags.emplace_back(scenario.tags[i].label, world.tags[i].privacy_bit());
  }
  return report;
}

ordered_json RunReport::to_json() const {
  ordered_json j;
  j["seed"] = seed;
  j["steps"] = ordered_json::array();
  for (const auto& step : steps) {
    ordered_json s;
    s["index"] = step.index;
    s["label"] = step.label;
    s["transcript"] = step.transcript_file;
    s["errored"] = step.errored;
    s["result"] = step.detail;
    j["steps"].push_back(std::move(s));
  }
  j["attacks_run"] = attacks_run;
  j["attacks_succeeded"] = attacks_succeeded;
  j["steps_errored"] = steps_errored;
  j["totals"] = totals.to_json();
  j["final_tags"] = ordered_json::array();
  for (const auto& [label, bit] : final_tags) {
    j["final_tags"].push_back(ordered_json{{"label", label}, {"privacy_bit", to_int(bit)}});
  }
  return j;
}

std::string RunReport::to_text() const {
  std::string out = fmt::format("seed {}\n", seed);
  for (const auto& step : steps) {
    std::string outcome;
    if (step.detail.contains("report")) {
      const auto& r = step.detail["report"];
      outcome = fmt::format("success={} linked={}", r["success"].dump(), r["linked"].dump());
    } else if (step.detail.contains("verdict")) {
      const auto& v = step.detail["verdict"];
      outcome = fmt::format("reader_accepted={} tag_accepted={} bit {}->{}",
                            v["reader_accepted_tag"].dump(), v["tag_accepted_reader"].dump(),
                            v["privacy_bit_before"].dump(), v["privacy_bit_after"].dump());
    } else if (step.detail.contains("advantage")) {
      outcome = fmt::format("advantage={} ({}/{} correct)", step.detail["advantage"].dump(),
                            step.detail["correct"].dump(), step.detail["trials"].dump());
    }
    out += fmt::format("[{}] {:<22} {}{}\n", step.index, step.label, step.errored ? "ERROR " : "",
                       outcome);
  }
  out += fmt::format("attacks {}/{} succeeded, {} step(s) errored\n", attacks_succeeded,
                     attacks_run, steps_errored);
  out += totals.to_text();
  return out;
}

void write_run(const RunReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& contents) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + (dir / name).string());
    out << contents;
  };
  for (const auto& [name, contents] : report.transcripts) write(name, contents);
  write("report.json", report.to_json().dump(2) + "\n");
}

}  // namespace paplab
