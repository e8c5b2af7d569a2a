#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <thread>

#include "privlocker/abe/codec.hpp"
#include "privlocker/locker/service.hpp"
#include "privlocker/locker/store_file.hpp"

using namespace privlocker;
using namespace privlocker::locker;
using policy::parse_policy;

namespace fs = std::filesystem;

namespace {

AttributeLabel L(std::string_view s) { return AttributeLabel::parse(s); }
Bytes msg(std::string_view s) { return Bytes(s.begin(), s.end()); }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::not_implemented;
}

struct TempDir {
  fs::path path;
  TempDir() {
    SystemRandom rng;
    path = fs::temp_directory_path() / ("privlocker-test-" + to_hex(rng.bytes(8)));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

// Two issuers, one subscriber, a qualifying and a non-qualifying requester.
struct World {
  LockerService svc{std::make_shared<SeededRandom>(7, "locker-world")};
  World() {
    svc.setup();
    svc.register_issuer("CBSE", {"student", "class12", "alumnus"});
    svc.register_issuer("UNIV");
    svc.push_attrs("alice", {L("CBSE/student")});
    svc.push_attrs("recruiter", {L("CBSE/class12"), L("UNIV/hr")});
    svc.push_attrs("snoop", {L("CBSE/class12")});
  }
  IssueResult issue(std::string_view doc = "transcript") {
    return svc.issue_priv_document("CBSE", "alice", parse_policy("CBSE/class12"), parse_policy("UNIV/hr"), msg(doc));
  }
};

}  // namespace

TEST_CASE("document uri render and parse") {
  DocumentUri u{"CBSE", "PRIV", "00ff"};
  CHECK(u.render() == "CBSE::PRIV::00ff");
  CHECK(DocumentUri::parse("CBSE::PRIV::00ff") == u);
  CHECK(DocumentUri::parse("in.gov.cbse::MSTN::2024:A1").doc_id == "2024:A1");
  CHECK(u.is_private());
  CHECK_FALSE(DocumentUri::parse("A::MSTN::1").is_private());
  for (auto bad : {"", "A::B", "::B::C", "A::::C", "A::B::", "A::B::C::D", "A:::B::C", "A::B::C:"}) {
    CAPTURE(bad);
    CHECK(code_of([&] { (void)DocumentUri::parse(bad); }) == ErrorCode::parse_error);
  }
  CHECK(code_of([&] { (void)DocumentUri{"A", "B::x", "C"}.render(); }) == ErrorCode::invalid_argument);
}

TEST_CASE("property: rendered uris parse back to themselves") {
  SeededRandom rng(99, "uri-property");
  const std::string alphabet = "ab:.-_Z9";
  auto component = [&] {
    for (;;) {
      std::string s;
      const std::size_t len = 1 + rng.bytes(1)[0] % 6;
      for (std::size_t i = 0; i < len; ++i) s += alphabet[rng.bytes(1)[0] % alphabet.size()];
      if (s.find("::") == std::string::npos && s.front() != ':' && s.back() != ':') return s;
    }
  };
  for (int i = 0; i < 500; ++i) {
    DocumentUri u{component(), component(), component()};
    CHECK(DocumentUri::parse(u.render()) == u);
  }
}

TEST_CASE("setup and issuer registration") {
  LockerService svc;
  CHECK_FALSE(svc.initialized());
  CHECK(code_of([&] { svc.register_issuer("CBSE"); }) == ErrorCode::not_initialized);
  svc.setup();
  CHECK(code_of([&] { svc.setup(); }) == ErrorCode::already_initialized);
  auto rec = svc.register_issuer("CBSE", {"student"});
  CHECK(rec.id == "CBSE");
  CHECK(code_of([&] { svc.register_issuer("CBSE"); }) == ErrorCode::duplicate_issuer);
  CHECK(code_of([&] { svc.register_issuer(""); }) == ErrorCode::invalid_argument);
  CHECK(code_of([&] { svc.register_issuer("A/B"); }) == ErrorCode::invalid_argument);
  CHECK(code_of([&] { svc.register_issuer("UNIV", {"bad name"}); }) == ErrorCode::invalid_argument);
  CHECK(svc.issuers().size() == 1);
}

TEST_CASE("attribute registry push and pull") {
  World w;
  CHECK(w.svc.push_attrs("alice", {L("CBSE/alumnus")}) == AttributeSet{L("CBSE/student"), L("CBSE/alumnus")});
  CHECK(w.svc.pull_attrs("alice") == AttributeSet{L("CBSE/student"), L("CBSE/alumnus")});

  const auto before = w.svc.attribute_entries("alice").at(L("CBSE/student")).updated_at;
  w.svc.push_attrs("alice", {L("CBSE/student")});
  const auto after = w.svc.attribute_entries("alice").at(L("CBSE/student"));
  CHECK(after.updated_at > before);
  CHECK(after.source_issuer == "CBSE");
  CHECK(w.svc.pull_attrs("alice").size() == 2);

  CHECK(code_of([&] { w.svc.push_attrs("alice", {L("NIOS/student")}); }) == ErrorCode::unknown_issuer);
  CHECK(code_of([&] { w.svc.push_attrs("alice", {L("CBSE/dean")}); }) == ErrorCode::unknown_attribute);
  CHECK(w.svc.pull_attrs("alice").size() == 2);
  CHECK(code_of([&] { (void)w.svc.pull_attrs("nobody"); }) == ErrorCode::unknown_identity);

  CHECK(w.svc.register_identity("bob"));
  CHECK_FALSE(w.svc.register_identity("bob"));
  CHECK(w.svc.pull_attrs("bob").empty());
}

TEST_CASE("issuing private documents and the token cache") {
  World w;
  auto first = w.issue();
  CHECK(first.uri.issuer_id == "CBSE");
  CHECK(first.uri.doc_type == "PRIV");
  CHECK(first.uri.doc_id.size() == 32);
  CHECK_FALSE(first.token_cache_hit);
  CHECK(w.svc.counters() == Counters{1, 0});

  for (int i = 0; i < 4; ++i) CHECK(w.issue().token_cache_hit);
  CHECK(w.svc.counters() == Counters{1, 4});
  CHECK(w.svc.documents().size() == 5);

  // A different policy pair is a different handshake.
  w.svc.issue_priv_document("CBSE", "alice", parse_policy("CBSE/student"), parse_policy("UNIV/hr"), msg("x"));
  CHECK(w.svc.counters().token_handshakes == 2);

  auto doc = w.svc.document(first.uri);
  CHECK(doc.owner == "alice");
  CHECK(doc.issuer_signature == msg(NoopAuthenticator::kTag));
  CHECK(doc.ciphertext.tree == parse_policy("JOINT(UNIV/hr, CBSE/class12)"));

  CHECK(code_of([&] { w.issue(""); }) == ErrorCode::invalid_argument);
  CHECK(code_of([&] {
          w.svc.issue_priv_document("NIOS", "alice", parse_policy("CBSE/class12"), parse_policy("UNIV/hr"), msg("x"));
        }) == ErrorCode::unknown_issuer);
  CHECK(code_of([&] {
          w.svc.issue_priv_document("CBSE", "mallory", parse_policy("CBSE/class12"), parse_policy("UNIV/hr"),
                                    msg("x"));
        }) == ErrorCode::unknown_identity);
  CHECK(code_of([&] {
          w.svc.issue_priv_document("CBSE", "alice", parse_policy("NIOS/x"), parse_policy("UNIV/hr"), msg("x"));
        }) == ErrorCode::unknown_issuer);
}

TEST_CASE("key generation and the redundancy rule") {
  World w;
  auto k1 = w.svc.gen_ab_pvt_key("recruiter", {"CBSE"});
  CHECK(k1.evicted.empty());
  CHECK(w.svc.export_key(k1.handle).attributes() == AttributeSet{L("CBSE/class12")});

  auto k2 = w.svc.gen_ab_pvt_key("recruiter", {"CBSE", "UNIV"});
  REQUIRE(k2.evicted.size() == 1);
  CHECK(k2.evicted[0] == k1.handle);
  CHECK(w.svc.keys("recruiter") == std::vector<KeyHandle>{k2.handle});
  CHECK(k2.handle.render() == "recruiter:CBSE,UNIV");

  auto k3 = w.svc.gen_ab_pvt_key("recruiter", {"UNIV"});
  CHECK(k3.reused_dominating);
  CHECK(k3.handle == k2.handle);
  CHECK(w.svc.keys("recruiter").size() == 1);

  const auto old_d = abe::encode(w.svc.export_key(k2.handle));
  auto k4 = w.svc.gen_ab_pvt_key("recruiter", {"CBSE", "UNIV"});
  CHECK(k4.handle == k2.handle);
  CHECK_FALSE(abe::encode(w.svc.export_key(k4.handle)) == old_d);

  CHECK(code_of([&] { w.svc.gen_ab_pvt_key("snoop", {"UNIV"}); }) == ErrorCode::missing_issuer_attributes);
  CHECK(code_of([&] { w.svc.gen_ab_pvt_key("snoop", {"NIOS"}); }) == ErrorCode::unknown_issuer);
  CHECK(code_of([&] { w.svc.gen_ab_pvt_key("ghost", {"CBSE"}); }) == ErrorCode::unknown_identity);
  CHECK(code_of([&] { w.svc.gen_ab_pvt_key("snoop", {}); }) == ErrorCode::invalid_argument);
}

TEST_CASE("property: no stored key set is a proper subset of another") {
  LockerService svc(std::make_shared<SeededRandom>(11, "redundancy"));
  svc.setup();
  const std::vector<std::string> ids = {"A", "B", "C", "D"};
  AttributeSet attrs;
  for (const auto& id : ids) {
    svc.register_issuer(id);
    attrs.insert(AttributeLabel{id, "x"});
  }
  svc.push_attrs("u", attrs);
  SeededRandom pick(12, "redundancy-pick");
  for (int step = 0; step < 40; ++step) {
    IssuerSet req;
    const auto mask = 1 + pick.bytes(1)[0] % 15;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (mask & (1u << i)) req.insert(ids[i]);
    }
    auto res = svc.gen_ab_pvt_key("u", req);
    CHECK(std::includes(res.handle.issuer_set.begin(), res.handle.issuer_set.end(), req.begin(), req.end()));
    const auto held = svc.keys("u");
    for (const auto& a : held) {
      for (const auto& b : held) {
        const bool proper =
            a.issuer_set != b.issuer_set &&
            std::includes(b.issuer_set.begin(), b.issuer_set.end(), a.issuer_set.begin(), a.issuer_set.end());
        CHECK_FALSE(proper);
      }
    }
  }
}

TEST_CASE("fetching private documents") {
  World w;
  const auto uri = w.issue("marks: 97").uri;
  w.svc.gen_ab_pvt_key("recruiter", {"CBSE", "UNIV"});
  CHECK(w.svc.fetch_priv_doc("recruiter", uri) == msg("marks: 97"));

  CHECK(code_of([&] { (void)w.svc.fetch_priv_doc("snoop", uri); }) == ErrorCode::no_covering_key);
  w.svc.push_attrs("snoop", {L("UNIV/intern")});
  w.svc.gen_ab_pvt_key("snoop", {"CBSE", "UNIV"});
  CHECK(code_of([&] { (void)w.svc.fetch_priv_doc("snoop", uri); }) == ErrorCode::policy_not_satisfied);

  DocumentUri mstn = uri;
  mstn.doc_type = "MSTN";
  CHECK(code_of([&] { (void)w.svc.fetch_priv_doc("recruiter", mstn); }) == ErrorCode::wrong_doctype);
  DocumentUri missing = uri;
  missing.doc_id = "beef";
  CHECK(code_of([&] { (void)w.svc.fetch_priv_doc("recruiter", missing); }) == ErrorCode::unknown_uri);
  CHECK(code_of([&] { (void)w.svc.pull_doc(uri); }) == ErrorCode::not_implemented);
  CHECK(code_of([&] { (void)w.svc.pull_uri("alice"); }) == ErrorCode::not_implemented);

  // Client-side decryption with the exported key gives the same bytes.
  const auto handle = *w.svc.select_key("recruiter", {"CBSE", "UNIV"});
  CHECK(abe::decrypt(w.svc.document(uri).ciphertext, w.svc.export_key(handle)) == msg("marks: 97"));
}

TEST_CASE("key selection prefers the smallest covering set") {
  LockerService svc(std::make_shared<SeededRandom>(3, "select"));
  svc.setup();
  for (auto id : {"A", "B", "C", "D"}) svc.register_issuer(id);
  svc.push_attrs("u", {L("A/x"), L("B/x"), L("C/x"), L("D/x")});
  svc.gen_ab_pvt_key("u", {"A", "B", "C"});
  svc.gen_ab_pvt_key("u", {"A", "D"});
  svc.gen_ab_pvt_key("u", {"B", "D"});
  CHECK(svc.select_key("u", {"A"})->issuer_set == IssuerSet{"A", "D"});
  CHECK(svc.select_key("u", {"B"})->issuer_set == IssuerSet{"B", "D"});
  CHECK(svc.select_key("u", {"D"})->issuer_set == IssuerSet{"A", "D"});
  CHECK(svc.select_key("u", {"B", "C"})->issuer_set == IssuerSet{"A", "B", "C"});
  CHECK_FALSE(svc.select_key("u", {"C", "D"}).has_value());
  CHECK_FALSE(svc.select_key("v", {"A"}).has_value());
}

namespace {
struct RejectingAuthenticator final : Authenticator {
  Bytes sign(std::string_view, ByteView) override { return msg("sig"); }
  bool verify(std::string_view, ByteView, ByteView) override { return false; }
};
}  // namespace

TEST_CASE("authenticator rejection blocks retrieval") {
  LockerService svc(std::make_shared<SystemRandom>(), std::make_shared<RejectingAuthenticator>());
  svc.setup();
  svc.register_issuer("I");
  svc.push_attrs("s", {L("I/a")});
  auto uri = svc.issue_priv_document("I", "s", parse_policy("I/a"), parse_policy("I/a"), msg("m")).uri;
  CHECK(svc.document(uri).issuer_signature == msg("sig"));
  svc.gen_ab_pvt_key("s", {"I"});
  CHECK(code_of([&] { (void)svc.fetch_priv_doc("s", uri); }) == ErrorCode::authentication_failed);
}

TEST_CASE("persistence round trip") {
  TempDir dir;
  World w;
  const auto uri = w.issue("persist me").uri;
  w.issue("again");
  w.svc.gen_ab_pvt_key("recruiter", {"CBSE", "UNIV"});
  w.svc.save(dir.path);
  CHECK(LockerService::store_exists(dir.path));

  LockerService other;
  other.load(dir.path);
  CHECK(other.initialized());
  CHECK(other.clock() == w.svc.clock());
  CHECK(other.counters() == w.svc.counters());
  CHECK(other.issuers().size() == 2);
  CHECK(other.issuers()[0].catalog == std::set<std::string>{"alumnus", "class12", "student"});
  for (auto id : {"alice", "recruiter", "snoop"}) CHECK(other.attribute_entries(id) == w.svc.attribute_entries(id));
  CHECK(other.documents() == w.svc.documents());
  CHECK(other.keys("recruiter") == w.svc.keys("recruiter"));
  CHECK(abe::encode(other.document(uri).ciphertext) == abe::encode(w.svc.document(uri).ciphertext));
  CHECK(other.fetch_priv_doc("recruiter", uri) == msg("persist me"));
  CHECK(abe::encode(other.public_key()) == abe::encode(w.svc.public_key()));

  // Cached token survives the reload.
  other.issue_priv_document("CBSE", "alice", parse_policy("CBSE/class12"), parse_policy("UNIV/hr"), msg("3"));
  CHECK(other.counters() == Counters{1, 2});

  TempDir dir2;
  other.save(dir2.path);
  LockerService third;
  third.load(dir2.path);
  CHECK(third.documents().size() == 3);
}

TEST_CASE("corrupt stores fail atomically") {
  TempDir dir;
  World w;
  const auto uri = w.issue("keep").uri;
  w.svc.gen_ab_pvt_key("recruiter", {"CBSE", "UNIV"});
  w.svc.save(dir.path);

  LockerService target;
  target.load(dir.path);
  const auto clock = target.clock();

  auto corrupt = [&](StoreTag tag, auto&& mutate) {
    TempDir copy;
    fs::copy(dir.path, copy.path, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
    const auto path = copy.path / store_file_name(tag);
    auto bytes = read_file(path);
    mutate(bytes);
    write_file(path, bytes);
    const auto code = code_of([&] { target.load(copy.path); });
    CHECK(target.clock() == clock);
    CHECK(target.fetch_priv_doc("recruiter", uri) == msg("keep"));
    return code;
  };

  for (const auto tag : {StoreTag::authority, StoreTag::issuers, StoreTag::attributes, StoreTag::tokens,
                         StoreTag::documents, StoreTag::keys}) {
    CAPTURE(store_file_name(tag));
    CHECK(corrupt(tag, [](Bytes& b) { b.resize(b.size() / 2); }) == ErrorCode::checksum_mismatch);
    CHECK(corrupt(tag, [](Bytes& b) { b[5] = kStoreVersion + 1; }) == ErrorCode::version_mismatch);
    CHECK(corrupt(tag, [](Bytes& b) { b[b.size() / 2] ^= 0x40; }) == ErrorCode::checksum_mismatch);
    CHECK(corrupt(tag, [](Bytes& b) { b[0] = 'X'; }) == ErrorCode::malformed_encoding);
    CHECK(corrupt(tag, [](Bytes& b) { b.resize(3); }) == ErrorCode::malformed_encoding);
  }

  TempDir partial;
  fs::copy(dir.path, partial.path, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
  fs::remove(partial.path / "keys.bin");
  CHECK(code_of([&] { target.load(partial.path); }) == ErrorCode::io_error);
  CHECK(target.keys("recruiter").size() == 1);
}

TEST_CASE("store envelope rejects a valid file under the wrong tag") {
  auto file = wrap_store_file(StoreTag::issuers, msg("payload"));
  CHECK(unwrap_store_file(StoreTag::issuers, file) == msg("payload"));
  CHECK(code_of([&] { (void)unwrap_store_file(StoreTag::keys, file); }) == ErrorCode::malformed_encoding);
}

TEST_CASE("concurrent issuance is serialized") {
  World w;
  w.svc.set_random(std::make_shared<SystemRandom>());
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&w] {
      for (int i = 0; i < 3; ++i) w.issue("concurrent");
    });
  }
  for (auto& t : threads) t.join();
  CHECK(w.svc.documents().size() == 12);
  CHECK(w.svc.counters() == Counters{1, 11});
}
