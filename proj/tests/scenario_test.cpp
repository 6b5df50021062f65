#include "paplab/scenario.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "paplab/error.hpp"

namespace paplab {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string data(const char* name) { return slurp(fs::path(PAPLAB_TEST_DATA_DIR) / name); }

ErrorCode parse_error(std::string_view text) {
  try {
    parse_scenario(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "parsed: " << text;
  return ErrorCode::kIoError;
}

class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(fs::temp_directory_path() / ("paplab-" + name + "-" + std::to_string(::getpid()))) {
    fs::remove_all(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

constexpr std::string_view kTwoStep = R"({
  "seed": 3,
  "tags": [{"id": 1, "name": 7, "key": 5}],
  "readers": [{"kind": "checkout"}, {"kind": "inventory"}],
  "program": [
    {"session": {"subprotocol": "checkout", "tag": "t0", "reader": "r0"}},
    {"session": {"subprotocol": "out_store", "tag": "t0", "reader": "r1"}}
  ]
})";

TEST(ParseScenarioTest, MinimalScenario) {
  const auto s = parse_scenario(data("minimal.json"));
  EXPECT_EQ(s.seed, 1u);
  ASSERT_EQ(s.tags.size(), 1u);
  EXPECT_EQ(s.tags[0].id, TagId::from_u64(1));
  EXPECT_EQ(s.tags[0].key, 0xabu);
  ASSERT_EQ(s.program.size(), 1u);
  EXPECT_EQ(std::get<SessionStep>(s.program[0]).subprotocol, SubProtocol::kCheckout);
  EXPECT_EQ(s.adversary, AdversaryCapabilities::all());
}

TEST(ParseScenarioTest, UndeclaredTagReference) {
  EXPECT_EQ(parse_error(R"({"seed":1,"tags":[{"id":1,"name":1,"key":1}],"readers":[{"kind":"checkout"}],
    "program":[{"session":{"subprotocol":"checkout","tag":"t9","reader":"r0"}}]})"),
            ErrorCode::kUnknownEntityRef);
}

TEST(ParseScenarioTest, InterceptWithoutEavesdrop) {
  EXPECT_EQ(parse_error(R"({"seed":1,"tags":[],"readers":[],"program":[],
    "adversary":{"intercept":true,"eavesdrop_forward":false,"eavesdrop_backward":true}})"),
            ErrorCode::kInvalidCapabilityCombo);
}

TEST(ParseScenarioTest, SyntaxErrorReportsLine) {
  try {
    parse_scenario("{\n  \"seed\": 1,\n  \"tags\": [,]\n}");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(ParseScenarioTest, FieldErrorsNameThePath) {
  try {
    parse_scenario(R"({"seed":1,"tags":[{"id":1,"name":"0x1ffffffff","key":1}],"readers":[],"program":[]})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
    EXPECT_NE(std::string(e.what()).find("$.tags[0].name"), std::string::npos) << e.what();
  }
  EXPECT_EQ(parse_error(R"({"tags":[],"readers":[],"program":[]})"), ErrorCode::kParseError);
  EXPECT_EQ(parse_error(R"({"seed":-1,"tags":[],"readers":[],"program":[]})"),
            ErrorCode::kParseError);
  EXPECT_EQ(parse_error(R"({"seed":1,"tags":[],"readers":[{"kind":"gate"}],"program":[]})"),
            ErrorCode::kParseError);
  EXPECT_EQ(parse_error(R"({"seed":1,"tags":[{"id":1,"name":1,"key":1}],"readers":[],
    "program":[{"attack":{"name":"forward_trace","params":{"tag":"t0"}}}]})"),
            ErrorCode::kUnknownEntityRef);
}

TEST(ParseScenarioTest, WideIdentifiers) {
  const auto s = parse_scenario(R"({"seed":"0xffffffffffffffff","tags":[
    {"id":"0xfedcba98765432100123abcd","name":"random","key":"random"}],"readers":[],"program":[]})");
  EXPECT_EQ(s.seed, ~0ULL);
  EXPECT_EQ(s.tags[0].id, (TagId{0xfedcba98, 0x765432100123abcdULL}));
  EXPECT_FALSE(s.tags[0].name);
  EXPECT_FALSE(s.tags[0].key);
  EXPECT_EQ(parse_error(R"({"seed":1,"tags":[{"id":"0x1fedcba98765432100123abcd","name":1,"key":1}],
    "readers":[],"program":[]})"),
            ErrorCode::kParseError);
}

TEST(RunScenarioTest, CheckoutFlipsBitForLaterOutStore) {
  const auto report = run_scenario(parse_scenario(kTwoStep));
  ASSERT_EQ(report.steps.size(), 2u);
  EXPECT_EQ(report.steps_errored, 0u);
  const auto& jsonl = report.transcripts.at(1).second;
  // TagReply with the Name variant: ident tag byte 01 then the 4-byte name.
  EXPECT_NE(jsonl.find(R"("msg_type":"TagReply","fields_hex":"0100000007)"), std::string::npos)
      << jsonl;
  EXPECT_EQ(report.final_tags.at(0).second, PrivacyBit::kInsecure);
  EXPECT_EQ(report.transcripts.at(0).first, "step-0-checkout.jsonl");
}

TEST(RunScenarioTest, DeterministicForEqualSeeds) {
  auto s = parse_scenario(data("walkthrough.json"));
  const auto a = run_scenario(s);
  const auto b = run_scenario(s);
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
  EXPECT_EQ(a.transcripts, b.transcripts);

  s.seed += 1;
  const auto c = run_scenario(s);
  EXPECT_NE(a.transcripts, c.transcripts);
}

TEST(RunScenarioTest, WalkthroughOutcomes) {
  const auto report = run_scenario(parse_scenario(data("walkthrough.json")));
  EXPECT_EQ(report.steps_errored, 0u) << report.to_json().dump(2);
  auto result_of = [&](std::size_t i) { return report.steps.at(i).detail; };
  EXPECT_EQ(result_of(1)["report"]["linked"], false);
  EXPECT_EQ(result_of(2)["report"]["linked"], true);
  EXPECT_EQ(result_of(7)["report"]["linked"], true);
  EXPECT_EQ(result_of(8)["report"]["linked"], true);
  EXPECT_EQ(result_of(9)["report"]["success"], true);
  EXPECT_EQ(result_of(9)["report"]["adversary_key_reads"], 0);
  EXPECT_EQ(result_of(10)["advantage"], 1.0);
  EXPECT_EQ(result_of(11)["verdict"]["privacy_bit_after"], 0);
}

TEST(RunScenarioTest, ImpersonationOfUnregisteredTagFailsWithoutErroring) {
  const auto report = run_scenario(parse_scenario(R"({"seed":1,
    "tags":[{"id":1,"name":1,"key":1},{"id":2,"name":2,"key":2,"registered":false}],
    "readers":[{"kind":"checkout"},{"kind":"checkout"}],
    "program":[{"attack":{"name":"impersonate","params":{"reader1":"r0","reader2":"r1","target":"t1"}}},
               {"attack":{"name":"impersonate","params":{"reader1":"r0","reader2":"r1","target_id":1}}}]})"));
  EXPECT_EQ(report.steps.at(0).detail["report"]["success"], false);
  EXPECT_EQ(report.steps.at(0).detail["error"], "UnknownIdentifier");
  EXPECT_EQ(report.steps.at(1).detail["report"]["success"], true);
  EXPECT_EQ(report.steps_errored, 0u);
  EXPECT_EQ(report.attacks_succeeded, 1u);
}

TEST(RunScenarioTest, FailedStepsAreRecordedAndCanHalt) {
  constexpr std::string_view kBad = R"({"seed":1,%s
    "tags":[{"id":1,"name":1,"key":1,"privacy_bit":1}],
    "readers":[{"kind":"checkout"}],
    "adversary":{"eavesdrop_forward":true,"eavesdrop_backward":true},
    "program":[{"session":{"subprotocol":"checkout","tag":"t0","reader":"r0"}},
               {"attack":{"name":"forward_trace","params":{"tag":"t0","return_reader":"r0"}}}]})";
  std::string text(kBad);
  const auto at = text.find("%s");
  auto run_with = [&](std::string_view insert) {
    std::string t = text;
    t.replace(at, 2, insert);
    return run_scenario(parse_scenario(t));
  };
  const auto keep_going = run_with("");
  ASSERT_EQ(keep_going.steps.size(), 2u);
  EXPECT_EQ(keep_going.steps_errored, 2u);
  EXPECT_EQ(keep_going.steps[0].detail["verdict"]["aborted"], "PreconditionViolation");
  EXPECT_EQ(keep_going.steps[1].detail["error"], "CapabilityMissing");

  const auto halted = run_with(R"("halt_on_error":true,)");
  EXPECT_EQ(halted.steps.size(), 1u);
}

TEST(SummaryTest, HonestCheckoutTranscript) {
  const auto report = run_scenario(parse_scenario(data("minimal.json")));
  Summary s;
  s.add_jsonl(report.transcripts.at(0).second);
  EXPECT_EQ(s.total_messages, 4u);
  EXPECT_EQ(s.intercepted, 0u);
  EXPECT_EQ(s.sessions, 1u);
  EXPECT_EQ(s.reader_acceptance_rate(), 1.0);
  EXPECT_EQ(s.tag_acceptance_rate(), 1.0);
  EXPECT_EQ(s.messages.at("backward/TagAuth"), 1u);
}

TEST(SummaryTest, ForwardTraceCampaignHasTwoInterceptions) {
  const auto report = run_scenario(parse_scenario(R"({"seed":1,"tags":[{"id":1,"name":1,"key":1}],
    "readers":[{"kind":"checkout"},{"kind":"return"}],
    "program":[{"attack":{"name":"forward_trace","params":{"tag":"t0"}}}]})"));
  Summary s;
  s.add_jsonl(report.transcripts.at(0).second);
  EXPECT_EQ(s.intercepted, 2u);
  EXPECT_EQ(s.sessions, 2u);
  EXPECT_EQ(s.tag_acceptance_rate(), 0.0);
}

TEST(SummaryTest, EmptyInputIsAllZero) {
  const Summary s = summarize(std::span<const fs::path>{});
  EXPECT_EQ(s, Summary{});
  EXPECT_EQ(s.to_json()["total_messages"], 0);
  EXPECT_EQ(s.to_json()["reader_acceptance_rate"], 0.0);
}

TEST(SummaryTest, MalformedLinesAreSchemaErrors) {
  for (std::string_view line :
       {R"(not json)",
        R"({"seq":0,"direction":"forward","from":"r","to":"t","msg_type":"Query","fields_hex":"","intercepted":false})",
        R"({"seq":0,"direction":"sideways","from":"r","to":"t","msg_type":"Query","fields_hex":"","intercepted":false,"dropped":false})",
        R"({"seq":0,"direction":"forward","from":"r","to":"t","msg_type":"TagAuth","fields_hex":"00","intercepted":false,"dropped":false})",
        R"({"seq":0,"direction":"forward","from":"r","to":"t","msg_type":"TagAuth","fields_hex":"ABCDEF0123456789","intercepted":false,"dropped":false})"}) {
    Summary s;
    try {
      s.add_line(line);
      ADD_FAILURE() << line;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kSchemaError);
    }
  }
}

TEST(WriteRunTest, ReportCountersMatchTranscriptFiles) {
  TempDir dir("consistency");
  const auto report = run_scenario(parse_scenario(data("walkthrough.json")));
  write_run(report, dir.path());
  EXPECT_EQ(summarize_directory(dir.path()), report.totals);
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(dir.path())) {
    if (entry.path().extension() == ".jsonl") ++files;
  }
  EXPECT_EQ(files, report.steps.size());
  const auto reloaded = nlohmann::json::parse(slurp(dir.path() / "report.json"));
  EXPECT_EQ(reloaded["totals"]["total_messages"], report.totals.total_messages);
  EXPECT_EQ(reloaded["steps"][2]["result"]["report"]["session_transcript_paths"][0],
            "step-2-forward_trace.jsonl");
}

}  // namespace
}  // namespace paplab
