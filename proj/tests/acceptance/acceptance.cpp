// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

#include "privlocker/abe/scheme.hpp"
#include "privlocker/cli/cli.hpp"
#include "privlocker/group/bls12.hpp"
#include "privlocker/group/toy.hpp"
#include "privlocker/locker/service.hpp"
#include "privlocker/locker/store_file.hpp"
#include "privlocker/policy/sharing.hpp"

using namespace privlocker;
using group::Bls12;
using group::ToyGroup;
using policy::AccessTree;
using policy::AttributeLabel;
using policy::AttributeSet;
using policy::NodeId;
using policy::NodeKind;

namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

AttributeLabel L(std::string_view s) { return AttributeLabel::parse(s); }
Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

const std::vector<std::string> kLetters = {"a", "b", "c", "d", "e"};

AccessTree leaf(const std::string& x) { return AccessTree::leaf(AttributeLabel{"u", x}); }
AccessTree and_of(std::vector<AccessTree> c) { return AccessTree::all_of(std::move(c)); }
AccessTree or_of(std::vector<AccessTree> c) { return AccessTree::any_of(std::move(c)); }
AccessTree th2(std::vector<AccessTree> c) { return AccessTree::threshold(2, std::move(c)); }

template <class T>
std::vector<std::vector<T>> combinations(const std::vector<T>& items, std::size_t k) {
  std::vector<std::vector<T>> out;
  std::vector<bool> mask(items.size(), false);
  std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(k), true);
  do {
    std::vector<T> pick;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (mask[i]) pick.push_back(items[i]);
    }
    out.push_back(std::move(pick));
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return out;
}

// 5 single leaves, 50 two-level trees and 50 three-level trees over u/a..u/e.
std::vector<AccessTree> policy_corpus() {
  std::vector<AccessTree> corpus;
  for (const auto& x : kLetters) corpus.push_back(leaf(x));

  auto leaves_of = [](const std::vector<std::string>& xs) {
    std::vector<AccessTree> out;
    for (const auto& x : xs) out.push_back(leaf(x));
    return out;
  };
  for (const auto& pair : combinations(kLetters, 2)) {
    corpus.push_back(and_of(leaves_of(pair)));
    corpus.push_back(or_of(leaves_of(pair)));
  }
  for (const auto& triple : combinations(kLetters, 3)) {
    corpus.push_back(and_of(leaves_of(triple)));
    corpus.push_back(or_of(leaves_of(triple)));
    corpus.push_back(th2(leaves_of(triple)));
  }

  const std::vector<AccessTree> parts = {
      leaf("a"),
      leaf("e"),
      and_of({leaf("b"), leaf("c")}),
      or_of({leaf("c"), leaf("d")}),
      th2({leaf("a"), leaf("b"), leaf("d")}),
      or_of({leaf("d"), leaf("e")}),
  };
  for (const auto& pair : combinations(parts, 2)) {
    corpus.push_back(and_of(pair));
    corpus.push_back(or_of(pair));
  }
  for (const auto& triple : combinations(parts, 3)) corpus.push_back(th2(triple));
  return corpus;
}

AttributeSet subset_from_mask(unsigned mask, const std::vector<AttributeLabel>& universe) {
  AttributeSet out;
  for (std::size_t i = 0; i < universe.size(); ++i) {
    if (mask & (1u << i)) out.insert(universe[i]);
  }
  return out;
}

// Independent evaluation: count satisfied children against the threshold.
bool oracle_satisfied(const AccessTree& t, NodeId id, const AttributeSet& attrs) {
  const auto& n = t.node(id);
  if (n.is_leaf()) return attrs.contains(n.attribute);
  std::uint32_t ok = 0;
  for (auto c : n.children) ok += oracle_satisfied(t, c, attrs) ? 1 : 0;
  return ok >= n.threshold;
}

// e(g,g)^{q_x(0)} rebuilt bottom-up from the leaf shares the subset holds.
std::optional<ToyGroup::Target> reconstruct(const AccessTree& t, NodeId id, const AttributeSet& attrs,
                                            const policy::ShareAssignment<ToyGroup::Scalar>& shares) {
  const auto& n = t.node(id);
  if (n.is_leaf()) {
    if (!attrs.contains(n.attribute)) return std::nullopt;
    return ToyGroup::pair_generator().pow(shares[id]);
  }
  std::vector<bool> ok;
  std::vector<std::optional<ToyGroup::Target>> values;
  for (auto c : n.children) {
    values.push_back(reconstruct(t, c, attrs, shares));
    ok.push_back(values.back().has_value());
  }
  const auto chosen = policy::select_satisfying_children(n, ok);
  if (!chosen) return std::nullopt;
  const auto coeffs = policy::recombination_coefficients<ToyGroup::Scalar>(n, *chosen);
  auto acc = ToyGroup::Target::identity();
  for (std::size_t i = 0; i < chosen->size(); ++i) acc = acc * values[(*chosen)[i] - 1]->pow(coeffs[i]);
  return acc;
}

Verdict pairing_algebra() {
  SeededRandom rng(1001, "acceptance/pairing");
  const auto g = Bls12::generator();
  const auto egg = Bls12::pair_generator();
  int passed = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = Bls12::random_scalar(rng);
    const auto y = Bls12::random_scalar(rng);
    const auto a = Bls12::random_scalar(rng);
    const auto b = Bls12::random_scalar(rng);
    const auto p = g.pow(x);
    const auto q = g.pow(y);
    const auto e_pq = Bls12::pair(p, q);
    const bool bilinear = Bls12::pair(p.pow(a), q.pow(b)) == e_pq.pow(a * b) &&
                          Bls12::pair(p * q, g) == Bls12::pair(p, g) * Bls12::pair(q, g);
    const bool symmetric = e_pq == Bls12::pair(q, p) && e_pq == egg.pow(x * y);
    const bool non_degenerate = !egg.is_identity() && !e_pq.is_identity();
    if (bilinear && symmetric && non_degenerate) ++passed;
  }
  return {passed == 100, std::to_string(passed) + "/100 randomized checks"};
}

Verdict secret_sharing_oracle() {
  SeededRandom rng(1002, "acceptance/sharing");
  const auto corpus = policy_corpus();
  std::vector<AttributeLabel> universe;
  for (const auto& x : kLetters) universe.push_back(AttributeLabel{"u", x});
  std::size_t cases = 0;
  std::size_t mismatches = 0;
  std::size_t satisfied = 0;
  for (const auto& tree : corpus) {
    const auto secret = ToyGroup::random_scalar(rng);
    const auto shares = policy::assign_shares<ToyGroup>(tree, secret, rng);
    const auto target = ToyGroup::pair_generator().pow(secret);
    for (unsigned mask = 0; mask < 32; ++mask) {
      const auto attrs = subset_from_mask(mask, universe);
      const bool sat = policy::satisfies(tree, attrs);
      const auto value = reconstruct(tree, 0, attrs, shares);
      const bool recovered = value.has_value() && *value == target;
      ++cases;
      satisfied += sat ? 1 : 0;
      if (sat != oracle_satisfied(tree, 0, attrs) || recovered != sat || (!sat && value.has_value())) ++mismatches;
    }
  }
  return {mismatches == 0 && corpus.size() == 105,
          std::to_string(corpus.size()) + " trees, " + std::to_string(cases) + " subsets (" +
              std::to_string(satisfied) + " satisfying), " + std::to_string(mismatches) + " mismatches"};
}

// Split an AND root's children between the two parties; any other root goes
// whole to one party while the other contributes a single w/x leaf.
std::pair<AccessTree, AccessTree> split_policy(const AccessTree& tree, RandomSource& rng) {
  const auto& root = tree.node(0);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng.bytes(1)[0]) % n; };
  if (root.kind == NodeKind::threshold && root.children.size() >= 2 && root.threshold == root.children.size()) {
    const auto cut = 1 + pick(root.children.size() - 1);
    std::vector<AccessTree> left;
    std::vector<AccessTree> right;
    for (std::size_t i = 0; i < root.children.size(); ++i) {
      (i < cut ? left : right).push_back(tree.subtree(root.children[i]));
    }
    auto wrap = [](std::vector<AccessTree> v) { return v.size() == 1 ? v.front() : and_of(std::move(v)); };
    return {wrap(std::move(left)), wrap(std::move(right))};
  }
  const auto gate = AccessTree::leaf(L("w/x"));
  if (pick(2) == 0) return {tree, gate};
  return {gate, tree};
}

Verdict end_to_end() {
  SeededRandom rng(1003, "acceptance/e2e");
  const auto keys = abe::setup<Bls12>(rng);
  std::vector<AttributeLabel> universe;
  for (const auto& x : kLetters) universe.push_back(AttributeLabel{"u", x});
  universe.push_back(L("w/x"));

  std::map<unsigned, abe::AttributeKey<Bls12>> key_cache;
  auto key_for = [&](unsigned mask) -> const abe::AttributeKey<Bls12>& {
    auto it = key_cache.find(mask);
    if (it == key_cache.end()) {
      it = key_cache.emplace(mask, abe::keygen<Bls12>(keys.secret, keys.public_key, "req",
                                                      subset_from_mask(mask, universe), rng))
               .first;
    }
    return it->second;
  };

  std::size_t cases = 0;
  std::size_t failures = 0;
  std::size_t decrypted = 0;
  for (const auto& tree : policy_corpus()) {
    const auto [t_s, t_i] = split_policy(tree, rng);
    const auto sub = abe::gen_partial_token<Bls12>(keys.public_key, t_s, rng);
    const auto iss = abe::gen_partial_token<Bls12>(keys.public_key, t_i, rng);
    const auto token = abe::combine_tokens(sub, iss);
    const auto message = rng.bytes(64 + rng.bytes(1)[0]);
    const auto ct = abe::encrypt_with_token<Bls12>(keys.public_key, token, message, rng);

    std::vector<unsigned> masks = {63};
    while (masks.size() < 8) masks.push_back(1 + rng.bytes(1)[0] % 63);
    for (const auto mask : masks) {
      const auto& key = key_for(mask);
      const bool expect = policy::satisfies(token.tree, key.attributes());
      bool ok = false;
      try {
        ok = abe::decrypt(ct, key) == message;
        if (!ok) ++failures;
      } catch (const Error& e) {
        if (expect || e.code() != ErrorCode::policy_not_satisfied) ++failures;
      }
      if (ok != expect) ++failures;
      decrypted += ok ? 1 : 0;
      ++cases;
    }
  }
  return {cases >= 500 && failures == 0,
          std::to_string(cases) + " cases (" + std::to_string(decrypted) + " decrypting), " +
              std::to_string(failures) + " failures"};
}

Verdict cancellation_identities() {
  using S = ToyGroup::Scalar;
  SeededRandom rng(1004, "acceptance/cancellation");
  const auto keys = abe::setup<ToyGroup>(rng);
  const auto alpha = keys.secret.g_alpha.log();
  const auto beta = keys.secret.beta;

  const auto t_s = policy::parse_policy("(s/a AND (s/b OR s/c))");
  const auto t_i = policy::parse_policy("THRESHOLD(2; i/d, i/e, i/f)");
  const auto sub = abe::gen_partial_token<ToyGroup>(keys.public_key, t_s, rng);
  const auto iss = abe::gen_partial_token<ToyGroup>(keys.public_key, t_i, rng);
  const auto r_s = sub.c2.log() * beta.inverse();
  const auto r_i = iss.c2.log() * beta.inverse();
  const auto token = abe::combine_tokens(sub, iss);
  const auto r_ie = S::from_u64(0x5eed5eed);
  const auto ct = abe::testing::encrypt_with_exponent<ToyGroup>(keys.public_key, token, as_bytes("identity check"),
                                                                r_ie, rng);
  const auto key = abe::keygen<ToyGroup>(keys.secret, keys.public_key, "req",
                                         {L("s/a"), L("s/b"), L("s/c"), L("i/d"), L("i/f")}, rng);
  const auto r = key.d.log() * beta - alpha;

  int checks = 0;
  int exact = 0;
  const auto leaves = ct.tree.leaves();
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    const auto value = abe::decrypt_node(ct, key, leaves[i]);
    const bool held = key.per_attr.contains(ct.tree.node(leaves[i]).attribute);
    ++checks;
    if (held ? (value && value->log() == r * r_ie * token.leaves[i].c3.log()) : !value.has_value()) ++exact;
  }
  const auto a = abe::decrypt_node(ct, key, 0);
  ++checks;
  if (a && a->log() == r * r_ie * (r_s + r_i)) ++exact;
  ++checks;
  if (a && (ToyGroup::pair(ct.c2, key.d) / *a).log() == alpha * (r_s + r_i) * r_ie) ++exact;
  ++checks;
  if (abe::decrypt(ct, key) == to_bytes("identity check")) ++exact;
  return {exact == checks, std::to_string(exact) + "/" + std::to_string(checks) + " identities exact"};
}

Verdict collusion() {
  SystemRandom rng;
  int resisted = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto keys = abe::setup<Bls12>(rng);
    const auto sub = abe::gen_partial_token<Bls12>(keys.public_key, policy::parse_policy("u/a"), rng);
    const auto iss = abe::gen_partial_token<Bls12>(keys.public_key, policy::parse_policy("u/b"), rng);
    const auto ct =
        abe::encrypt_with_token<Bls12>(keys.public_key, abe::combine_tokens(sub, iss), as_bytes("secret"), rng);
    const auto k_a = abe::keygen<Bls12>(keys.secret, keys.public_key, "alice", {L("u/a")}, rng);
    const auto k_b = abe::keygen<Bls12>(keys.secret, keys.public_key, "bob", {L("u/b")}, rng);
    auto mixed = k_a;
    mixed.per_attr.insert(*k_b.per_attr.begin());
    try {
      (void)abe::decrypt(ct, mixed);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::authentication_failed) ++resisted;
    }
  }
  return {resisted == 100, std::to_string(resisted) + "/100 mix-and-match attempts rejected"};
}

Verdict token_reuse() {
  locker::LockerService svc(std::make_shared<SeededRandom>(1006, "acceptance/reuse"));
  svc.setup();
  svc.register_issuer("CBSE");
  svc.register_issuer("UNIV");
  svc.push_attrs("alice", {L("CBSE/student")});
  svc.push_attrs("recruiter", {L("CBSE/class12"), L("UNIV/hr")});
  const auto t_i = policy::parse_policy("CBSE/class12");
  const auto t_s = policy::parse_policy("UNIV/hr");

  std::vector<locker::DocumentUri> uris;
  std::vector<Bytes> docs;
  for (int i = 0; i < 10; ++i) {
    docs.push_back(to_bytes("document #" + std::to_string(i)));
    uris.push_back(svc.issue_priv_document("CBSE", "alice", t_i, t_s, docs.back()).uri);
  }
  const auto handle = svc.gen_ab_pvt_key("recruiter", {"CBSE", "UNIV"}).handle;
  const auto key = svc.export_key(handle);

  int decryptable = 0;
  std::set<Bytes> wrapped;
  for (int i = 0; i < 10; ++i) {
    if (svc.fetch_priv_doc("recruiter", uris[i]) == docs[i]) ++decryptable;
    const auto ct = svc.document(uris[i]).ciphertext;
    const auto a = abe::decrypt_node(ct, key, 0);
    if (a) wrapped.insert((ct.c1 / (Bls12::pair(ct.c2, key.d) / *a)).to_bytes());
  }
  const auto c = svc.counters();
  return {c.token_handshakes == 1 && decryptable == 10 && wrapped.size() == 10,
          std::to_string(c.token_handshakes) + " handshake, " + std::to_string(c.token_cache_hits) + " cache hits, " +
              std::to_string(decryptable) + "/10 decryptable, " + std::to_string(wrapped.size()) +
              " distinct wrapped keys"};
}

Verdict performance() {
  SystemRandom rng;
  const auto keys = abe::setup<Bls12>(rng);
  const auto sub = abe::gen_partial_token<Bls12>(keys.public_key, policy::parse_policy("(s/a AND s/b AND s/c)"), rng);
  const auto iss =
      abe::gen_partial_token<Bls12>(keys.public_key, policy::parse_policy("THRESHOLD(2; i/d, i/e, i/f)"), rng);
  const auto token = abe::combine_tokens(sub, iss);
  const auto document = rng.bytes(1 << 20);
  const auto key =
      abe::keygen<Bls12>(keys.secret, keys.public_key, "req", {L("s/a"), L("s/b"), L("s/c"), L("i/d"), L("i/f")}, rng);

  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const auto ct = abe::encrypt_with_token<Bls12>(keys.public_key, token, document, rng);
  const auto t1 = clock::now();
  const auto plain = abe::decrypt(ct, key);
  const auto t2 = clock::now();
  const auto enc_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  const auto dec_ms = std::chrono::duration<double, std::milli>(t2 - t1).count();
  std::ostringstream detail;
  detail.precision(1);
  detail << std::fixed << "1 MiB, " << token.leaves.size() << " leaves: encrypt " << enc_ms << " ms, decrypt "
         << dec_ms << " ms";
  return {token.leaves.size() == 6 && plain == document && enc_ms < 1000.0 && dec_ms < 1000.0, detail.str()};
}

Verdict service_lifecycle() {
  SystemRandom rng;
  const auto dir = fs::temp_directory_path() / ("privlocker-acceptance-" + to_hex(rng.bytes(8)));
  const fs::path scenario = PRIVLOCKER_SCENARIO_DIR;
  const std::vector<std::string> args = {"--store", dir.string(), "run-scenario", (scenario / "demo.txt").string()};
  std::ostringstream out;
  std::ostringstream log;
  const int status = cli::run_cli(args, out, log);
  const auto original = locker::read_file(scenario / "demo_document.txt");
  bool exact = false;
  try {
    exact = locker::read_file(dir / "recruiter.txt") == original && locker::read_file(dir / "second.txt") == original;
  } catch (const Error&) {
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  auto summary = out.str();
  while (!summary.empty() && summary.back() == '\n') summary.pop_back();
  if (status != 0) std::cerr << log.str();
  return {status == 0 && exact, "exit " + std::to_string(status) + ", " + summary +
                                    (exact ? ", document recovered byte-exact" : ", document mismatch")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"pairing algebra", pairing_algebra},
      {"secret-sharing oracle", secret_sharing_oracle},
      {"end-to-end correctness", end_to_end},
      {"cancellation identities", cancellation_identities},
      {"collusion resistance", collusion},
      {"token reuse", token_reuse},
      {"performance", performance},
      {"service lifecycle", service_lifecycle},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& [name, check] = criteria[i];
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!v.pass) ++failed;
    std::ostringstream line;
    line.precision(2);
    line << std::fixed << (v.pass ? "PASS" : "FAIL") << "  [" << (i + 1) << "] " << name << ": " << v.detail << " ("
         << secs << " s)";
    std::cout << line.str() << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
