#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "privlocker/cli/cli.hpp"
#include "privlocker/cli/scenario.hpp"
#include "privlocker/locker/store_file.hpp"
#include "privlocker/random.hpp"

using namespace privlocker;
using namespace privlocker::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    SystemRandom rng;
    path = fs::temp_directory_path() / ("privlocker-cli-" + to_hex(rng.bytes(8)));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

struct Result {
  int status;
  std::string out;
  std::string err;
  Fields fields() const { return parse_fields(out); }
  std::string field(std::string_view key) const {
    for (const auto& [k, v] : fields()) {
      if (k == key) return v;
    }
    return "<missing>";
  }
};

Result run(const fs::path& store, std::vector<std::string> args, std::optional<std::uint64_t> seed = std::nullopt) {
  std::vector<std::string> full = {"--store", store.string()};
  if (seed) {
    full.push_back("--seed");
    full.push_back(std::to_string(*seed));
  }
  full.insert(full.end(), args.begin(), args.end());
  std::ostringstream out;
  std::ostringstream err;
  const int status = run_cli(full, out, err);
  auto text = out.str();
  while (!text.empty() && text.back() == '\n') text.pop_back();
  return {status, text, err.str()};
}

const fs::path kScenarios = PRIVLOCKER_SCENARIO_DIR;

}  // namespace

TEST_CASE("field lines round-trip through quoting") {
  Fields f{{"a", "1"}, {"policy", "(X/a AND Y/b)"}, {"q", "say \"hi\" \\ bye"}, {"empty", ""}};
  const auto line = format_fields(f);
  CHECK(line == R"x(a=1 policy="(X/a AND Y/b)" q="say \"hi\" \\ bye" empty=)x");
  CHECK(parse_fields(line) == f);
  CHECK(split_words(R"(  issue-doc --p "A/x OR B/y"  z )") ==
        std::vector<std::string>{"issue-doc", "--p", "A/x OR B/y", "z"});
  CHECK_THROWS_AS(split_words("\"open"), Error);
  CHECK_THROWS_AS(parse_fields("novalue"), Error);
}

TEST_CASE("scenario parsing") {
  const auto steps = parse_scenario(
      "# header comment\n"
      "\n"
      "setup   # expect: ok status=initialized\n"
      "push-attrs a \"X/y\"   # a plain comment\n"
      "fetch-doc r U::PRIV::1 --out f  # expect: policy_not_satisfied\n");
  REQUIRE(steps.size() == 3);
  CHECK(steps[0].line == 3);
  CHECK(steps[0].words == std::vector<std::string>{"setup"});
  CHECK_FALSE(steps[0].expected_error.has_value());
  CHECK(steps[0].expected_fields == Fields{{"status", "initialized"}});
  CHECK(steps[1].words.back() == "X/y");
  CHECK(steps[1].expected_fields.empty());
  CHECK(steps[2].expected_error == ErrorCode::policy_not_satisfied);
  CHECK_THROWS_AS(parse_scenario("setup # expect: no_such_code\n"), Error);
}

TEST_CASE("usage and uninitialized-store errors map to stable exit codes") {
  TempDir dir;
  std::ostringstream out;
  std::ostringstream err;
  std::vector<std::string> no_store = {"setup"};
  CHECK(run_cli(no_store, out, err) == exit_code_for(ErrorCode::invalid_argument));
  CHECK(out.str() == "error=invalid_argument\n");

  auto r = run(dir.path / "s", {"register-issuer", "CBSE"});
  CHECK(r.status == exit_code_for(ErrorCode::not_initialized));
  CHECK(r.out == "error=not_initialized");
  CHECK(r.err.find("not_initialized") != std::string::npos);

  CHECK(run(dir.path / "s", {"setup"}).status == 0);
  CHECK(run(dir.path / "s", {"setup"}).status == exit_code_for(ErrorCode::already_initialized));
  CHECK(run(dir.path / "s", {"--format", "json", "pull-attrs", "x"}).status ==
        exit_code_for(ErrorCode::invalid_argument));
  CHECK(run(dir.path / "s", {"push-attrs", "a", "not-a-label"}).status == exit_code_for(ErrorCode::invalid_argument));
  CHECK(run(dir.path / "s", {"inspect", (dir.path / "missing").string()}).status == exit_code_for(ErrorCode::io_error));
}

TEST_CASE("command surface end to end") {
  TempDir dir;
  const auto s = dir.path / "store";
  const auto doc = dir.path / "doc.bin";
  locker::write_file(doc, as_bytes(std::string_view("binary\0payload\xff", 15)));
  REQUIRE(run(s, {"setup"}).status == 0);
  REQUIRE(run(s, {"register-issuer", "GOV"}).status == 0);
  REQUIRE(run(s, {"register-issuer", "BANK", "--catalog", "kyc,loan"}).status == 0);
  CHECK(run(s, {"push-attrs", "sub", "GOV/citizen"}).field("attrs") == "GOV/citizen");
  CHECK(run(s, {"push-attrs", "req", "GOV/officer", "BANK/kyc"}).field("attrs") == "BANK/kyc,GOV/officer");
  CHECK(run(s, {"push-attrs", "req", "BANK/mortgage"}).status == exit_code_for(ErrorCode::unknown_attribute));
  CHECK(run(s, {"register-identity", "empty"}).field("created") == "yes");
  CHECK(run(s, {"pull-attrs", "empty"}).field("attrs").empty());

  const std::vector<std::string> policies = {"--issuer", "BANK", "--subscriber", "sub", "--issuer-policy",
                                             "BANK/kyc", "--subscriber-policy", "(GOV/officer OR GOV/judge)"};
  auto tok_args = policies;
  tok_args.insert(tok_args.end(), {"--out", (dir.path / "tok.bin").string()});
  auto tok = run(s, {"gen-token"});
  CHECK(tok.status == exit_code_for(ErrorCode::invalid_argument));
  tok_args.insert(tok_args.begin(), "gen-token");
  tok = run(s, tok_args);
  REQUIRE(tok.status == 0);
  CHECK(tok.field("token_cache") == "miss");
  CHECK(tok.field("policy") == "JOINT((GOV/officer OR GOV/judge), BANK/kyc)");
  auto tok_info = run(s, {"inspect", (dir.path / "tok.bin").string()});
  CHECK(tok_info.field("type") == "combined_token");
  CHECK(tok_info.field("leaves") == "3");

  auto issue_args = policies;
  issue_args.insert(issue_args.begin(), "issue-doc");
  issue_args.insert(issue_args.end(), {"--in", doc.string(), "--ciphertext-out", (dir.path / "ct.bin").string()});
  auto issued = run(s, issue_args);
  REQUIRE(issued.status == 0);
  CHECK(issued.field("token_cache") == "hit");
  CHECK(issued.field("doctype") == "PRIV");
  const auto uri = issued.field("uri");

  auto info = run(s, {"inspect", (dir.path / "ct.bin").string()});
  CHECK(info.field("type") == "ciphertext");
  CHECK(info.field("group") == "bls12-381");
  CHECK(info.field("policy") == "JOINT((GOV/officer OR GOV/judge), BANK/kyc)");
  CHECK(info.field("c1") == "576");
  CHECK(info.field("c2") == "144");
  CHECK(info.field("c3") == "144");
  CHECK(info.field("c4") == "144");
  CHECK(info.field("c5") == std::to_string(24 + 15 + 16));

  auto key = run(s, {"gen-key", "req", "GOV", "BANK", "--out", (dir.path / "key.bin").string()});
  CHECK(key.field("key") == "req:BANK,GOV");
  auto key_info = run(s, {"inspect", (dir.path / "key.bin").string()});
  CHECK(key_info.field("type") == "attribute_key");
  CHECK(key_info.field("attributes") == "BANK/kyc,GOV/officer");
  CHECK(run(s, {"list-keys", "req"}).field("count") == "1");

  auto fetched = run(s, {"fetch-doc", "req", uri, "--out", (dir.path / "out.bin").string()});
  REQUIRE(fetched.status == 0);
  CHECK(fetched.field("bytes") == "15");
  CHECK(locker::read_file(dir.path / "out.bin") == locker::read_file(doc));

  REQUIRE(run(s, {"push-attrs", "other", "GOV/judge"}).status == 0);
  REQUIRE(run(s, {"gen-key", "other", "GOV"}).status == 0);
  CHECK(run(s, {"fetch-doc", "other", uri, "--out", (dir.path / "x").string()}).status ==
        exit_code_for(ErrorCode::no_covering_key));
  REQUIRE(run(s, {"push-attrs", "other", "BANK/loan"}).status == 0);
  REQUIRE(run(s, {"gen-key", "other", "GOV", "BANK"}).status == 0);
  auto denied = run(s, {"fetch-doc", "other", uri, "--out", (dir.path / "x").string()});
  CHECK(denied.status == exit_code_for(ErrorCode::policy_not_satisfied));
  CHECK(denied.out == "error=policy_not_satisfied");
  CHECK_FALSE(fs::exists(dir.path / "x"));

  CHECK(run(s, {"inspect", (s / "documents.bin").string()}).field("store") == "documents.bin");
}

TEST_CASE("the demo scenario passes") {
  TempDir dir;
  std::ostringstream log;
  auto report = run_scenario(kScenarios / "demo.txt", dir.path / "store", {"--store", (dir.path / "store").string()},
                             log);
  INFO(log.str());
  CHECK(report.steps > 20);
  CHECK(report.ok());
}

TEST_CASE("a failing expectation fails the scenario") {
  TempDir dir;
  const auto script = dir.path / "bad.txt";
  locker::write_file(script, as_bytes("setup\nregister-issuer A  # expect: duplicate_issuer\npull-attrs nobody\n"));
  auto r = run(dir.path / "store", {"run-scenario", script.string()});
  CHECK(r.status == exit_code_for(ErrorCode::expectation_failed));
  CHECK(r.field("steps") == "3");
  CHECK(r.field("passed") == "1");
  CHECK(r.err.find("[FAIL] bad.txt:2") != std::string::npos);
  CHECK(r.err.find("[FAIL] bad.txt:3") != std::string::npos);
}

TEST_CASE("a fixed seed reproduces byte-identical artifacts") {
  TempDir a;
  TempDir b;
  TempDir c;
  const auto script = kScenarios / "demo.txt";
  REQUIRE(run(a.path, {"run-scenario", script.string()}, 42).status == 0);
  REQUIRE(run(b.path, {"run-scenario", script.string()}, 42).status == 0);
  REQUIRE(run(c.path, {"run-scenario", script.string()}, 43).status == 0);
  for (auto name : {"authority.bin", "issuers.bin", "attributes.bin", "tokens.bin", "documents.bin", "keys.bin",
                    "transcript.ct"}) {
    CAPTURE(name);
    CHECK(locker::read_file(a.path / name) == locker::read_file(b.path / name));
  }
  CHECK_FALSE(locker::read_file(a.path / "transcript.ct") == locker::read_file(c.path / "transcript.ct"));
  CHECK_FALSE(locker::read_file(a.path / "authority.bin") == locker::read_file(c.path / "authority.bin"));
}
