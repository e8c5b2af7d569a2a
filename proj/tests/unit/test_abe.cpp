#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "privlocker/abe/codec.hpp"
#include "privlocker/abe/scheme.hpp"
#include "privlocker/abe/symmetric.hpp"
#include "privlocker/group/bls12.hpp"
#include "privlocker/group/toy.hpp"
#include "privlocker/policy/sharing.hpp"

using namespace privlocker;
using namespace privlocker::abe;
using group::Bls12;
using group::ToyGroup;
using group::ToyScalar;
using policy::parse_policy;

namespace {

AttributeLabel L(std::string_view s) { return AttributeLabel::parse(s); }

Bytes msg(std::string_view s) { return Bytes(s.begin(), s.end()); }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::not_implemented;  // sentinel: nothing thrown
}

struct ToyWorld {
  SeededRandom rng{2024, "toy-world"};
  MasterKeyPair<ToyGroup> keys = setup<ToyGroup>(rng);

  ToyScalar alpha() const { return keys.secret.g_alpha.log(); }
  ToyScalar beta() const { return keys.secret.beta; }
  // Hidden token secret recovered from c2 = g^{beta s}.
  template <class Token>
  ToyScalar token_secret(const Token& t) const {
    return t.c2.log() * beta().inverse();
  }
  // Key randomness recovered from d = g^{(alpha + r)/beta}.
  ToyScalar key_secret(const AttributeKey<ToyGroup>& k) const { return k.d.log() * beta() - alpha(); }
};

}  // namespace

TEST_CASE_TEMPLATE("setup keys are consistent", G, Bls12, ToyGroup) {
  SystemRandom rng;
  auto keys = setup<G>(rng);
  CHECK(G::pair(keys.secret.g_alpha, G::generator()) == keys.public_key.egg_alpha);
  CHECK(G::generator().pow(keys.secret.beta) == keys.public_key.g_beta);
  auto other = setup<G>(rng);
  CHECK_FALSE(other.public_key.egg_alpha == keys.public_key.egg_alpha);
}

TEST_CASE("toy: partial token exponents") {
  ToyWorld w;
  auto single = gen_partial_token<ToyGroup>(w.keys.public_key, parse_policy("s/a"), w.rng);
  const auto r_part = w.token_secret(single);
  CHECK(single.c1.log() == w.alpha() * r_part);
  REQUIRE(single.leaves.size() == 1);
  CHECK(single.leaves[0].c3.log() == r_part);
  CHECK(single.leaves[0].c4 == ToyGroup::hash_to_group(as_bytes("s/a")).pow(r_part));

  auto or_tok = gen_partial_token<ToyGroup>(w.keys.public_key, parse_policy("(s/a OR s/b)"), w.rng);
  CHECK(or_tok.leaves[0].c3 == or_tok.leaves[1].c3);
}

TEST_CASE("toy: combined token exponents") {
  ToyWorld w;
  auto sub = gen_partial_token<ToyGroup>(w.keys.public_key, parse_policy("(s/a AND s/b)"), w.rng);
  auto iss = gen_partial_token<ToyGroup>(w.keys.public_key, parse_policy("i/c"), w.rng);
  auto tok = combine_tokens(sub, iss);
  CHECK(tok.c1 == sub.c1 * iss.c1);
  CHECK(tok.c2.log() == w.beta() * (w.token_secret(sub) + w.token_secret(iss)));
  CHECK(tok.leaves.size() == 3);
  CHECK(tok.tree == parse_policy("JOINT((s/a AND s/b), i/c)"));
  CHECK(code_of([&] { (void)combine_tokens(sub, sub); }) == ErrorCode::overlapping_tokens);

  auto zero = testing::gen_partial_token_with_secret<ToyGroup>(w.keys.public_key, parse_policy("i/z"),
                                                               ToyScalar::zero(), w.rng);
  CHECK(combine_tokens(sub, zero).c1 == sub.c1);
}

TEST_CASE("toy: encryption exponents and r_ie hook") {
  ToyWorld w;
  auto sub = gen_partial_token<ToyGroup>(w.keys.public_key, parse_policy("s/a"), w.rng);
  auto iss = gen_partial_token<ToyGroup>(w.keys.public_key, parse_policy("i/b"), w.rng);
  auto tok = combine_tokens(sub, iss);

  auto ct1 = testing::encrypt_with_exponent<ToyGroup>(w.keys.public_key, tok, msg("doc"), ToyScalar::one(), w.rng);
  CHECK(ct1.c2 == tok.c2);
  CHECK(ct1.leaves == tok.leaves);

  const auto r_ie = ToyScalar::from_u64(987654321);
  auto ct = testing::encrypt_with_exponent<ToyGroup>(w.keys.public_key, tok, msg("doc"), r_ie, w.rng);
  const auto s = w.token_secret(sub) + w.token_secret(iss);
  CHECK(ct.c2.log() == w.beta() * s * r_ie);
  // Whatever remains in c1 after removing e(g,g)^{alpha s r_ie} must be the wrapped key.
  const auto key_element = group::ToyTarget::from_log(ct.c1.log() - w.alpha() * s * r_ie);
  CHECK(open_payload(ct, key_element) == msg("doc"));
  for (std::size_t i = 0; i < ct.leaves.size(); ++i) {
    CHECK(ct.leaves[i].c3.log() == tok.leaves[i].c3.log() * r_ie);
    CHECK(ct.leaves[i].c4.log() == tok.leaves[i].c4.log() * r_ie);
  }
}

TEST_CASE("toy: key components share one r") {
  ToyWorld w;
  auto key = keygen<ToyGroup>(w.keys.secret, w.keys.public_key, "alice", {L("s/a"), L("i/b"), L("i/c")}, w.rng);
  const auto r = w.key_secret(key);
  CHECK(ToyGroup::pair(key.d, ToyGroup::generator().pow(w.beta())).log() == w.alpha() + r);
  for (const auto& [label, comp] : key.per_attr) {
    auto h = ToyGroup::hash_to_group(as_bytes(label.canonical()));
    CHECK((ToyGroup::pair(comp.d_j, ToyGroup::generator()) / ToyGroup::pair(h, comp.d_j_prime)).log() == r);
  }
  CHECK(key.issuer_set == std::set<std::string>{"i", "s"});
  CHECK(key.attributes() == AttributeSet{L("s/a"), L("i/b"), L("i/c")});
  auto again = keygen<ToyGroup>(w.keys.secret, w.keys.public_key, "alice", {L("s/a")}, w.rng);
  CHECK_FALSE(w.key_secret(again) == r);
  CHECK(code_of([&] { (void)keygen<ToyGroup>(w.keys.secret, w.keys.public_key, "x", {}, w.rng); }) ==
        ErrorCode::empty_attribute_set);
}

TEST_CASE("toy: decrypt_node leaf and AND-gate exponents") {
  ToyWorld w;
  auto sub = gen_partial_token<ToyGroup>(w.keys.public_key, parse_policy("(s/a AND s/b)"), w.rng);
  auto iss = gen_partial_token<ToyGroup>(w.keys.public_key, parse_policy("i/c"), w.rng);
  auto tok = combine_tokens(sub, iss);
  const auto r_ie = ToyScalar::from_u64(31337);
  auto ct = testing::encrypt_with_exponent<ToyGroup>(w.keys.public_key, tok, msg("m"), r_ie, w.rng);
  auto key = keygen<ToyGroup>(w.keys.secret, w.keys.public_key, "bob", {L("s/a"), L("s/b"), L("i/c")}, w.rng);
  const auto r = w.key_secret(key);

  // Preorder of JOINT((s/a AND s/b), i/c): 0 joint, 1 AND, 2 s/a, 3 s/b, 4 i/c.
  const auto q_a = tok.leaves[0].c3.log();
  const auto q_b = tok.leaves[1].c3.log();
  auto leaf = decrypt_node(ct, key, 2);
  REQUIRE(leaf.has_value());
  CHECK(leaf->log() == r * r_ie * q_a);

  // Oracle: parent share from the two child shares, q(0) = 2 q(1) - q(2).
  const auto q_gate = ToyScalar::from_u64(2) * q_a - q_b;
  auto gate = decrypt_node(ct, key, 1);
  REQUIRE(gate.has_value());
  CHECK(gate->log() == r * r_ie * q_gate);

  auto partial_key = keygen<ToyGroup>(w.keys.secret, w.keys.public_key, "eve", {L("s/a")}, w.rng);
  CHECK_FALSE(decrypt_node(ct, partial_key, 3).has_value());
  CHECK_FALSE(decrypt_node(ct, partial_key, 1).has_value());
}

TEST_CASE("toy: combined token matches single-party encryption with r_s + r_i") {
  ToyWorld w;
  auto t_s = parse_policy("(s/a OR s/b)");
  auto t_i = parse_policy("THRESHOLD(2; i/c, i/d, i/e)");
  auto sub = gen_partial_token<ToyGroup>(w.keys.public_key, t_s, w.rng);
  auto iss = gen_partial_token<ToyGroup>(w.keys.public_key, t_i, w.rng);
  auto combined = combine_tokens(sub, iss);
  const auto s = w.token_secret(sub) + w.token_secret(iss);
  auto single = testing::gen_partial_token_with_secret<ToyGroup>(w.keys.public_key, combined.tree, s, w.rng);
  CHECK(single.c1 == combined.c1);
  CHECK(single.c2 == combined.c2);
  CHECK(single.tree == combined.tree);

  const auto r_ie = ToyScalar::from_u64(5);
  CombinedToken<ToyGroup> as_combined{single.tree, single.c1, single.c2, single.leaves};
  auto ct_a = testing::encrypt_with_exponent<ToyGroup>(w.keys.public_key, combined, msg("x"), r_ie, w.rng);
  auto ct_b = testing::encrypt_with_exponent<ToyGroup>(w.keys.public_key, as_combined, msg("x"), r_ie, w.rng);
  auto key = keygen<ToyGroup>(w.keys.secret, w.keys.public_key, "k", {L("s/b"), L("i/c"), L("i/e")}, w.rng);
  auto a = decrypt_node(ct_a, key, 0);
  auto b = decrypt_node(ct_b, key, 0);
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  CHECK(*a == *b);
  CHECK(a->log() == w.key_secret(key) * r_ie * s);
  CHECK(decrypt(ct_a, key) == msg("x"));
  CHECK(decrypt(ct_b, key) == msg("x"));
}

TEST_CASE("bls12: full pipeline, unsatisfied key, tampered payload") {
  SystemRandom rng;
  auto keys = setup<Bls12>(rng);
  auto sub = gen_partial_token<Bls12>(keys.public_key, parse_policy("s/a"), rng);
  auto iss = gen_partial_token<Bls12>(keys.public_key, parse_policy("i/b"), rng);
  auto tok = combine_tokens(sub, iss);
  const auto m = msg("mark sheet 2024");
  auto ct = encrypt_with_token<Bls12>(keys.public_key, tok, m, rng);

  auto good = keygen<Bls12>(keys.secret, keys.public_key, "req", {L("s/a"), L("i/b")}, rng);
  CHECK(decrypt(ct, good) == m);

  auto half = keygen<Bls12>(keys.secret, keys.public_key, "req2", {L("s/a")}, rng);
  CHECK(code_of([&] { (void)decrypt(ct, half); }) == ErrorCode::policy_not_satisfied);

  auto tampered = ct;
  tampered.c5[tampered.c5.size() / 2] ^= 0x01;
  CHECK(code_of([&] { (void)decrypt(tampered, good); }) == ErrorCode::authentication_failed);

  auto ct2 = encrypt_with_token<Bls12>(keys.public_key, tok, m, rng);
  CHECK_FALSE(ct2.c1 == ct.c1);
  CHECK_FALSE(ct2.c5 == ct.c5);
  CHECK(code_of([&] { (void)encrypt_with_token<Bls12>(keys.public_key, tok, {}, rng); }) ==
        ErrorCode::invalid_argument);
}

TEST_CASE("bls12: mixing two keys' components does not decrypt") {
  SystemRandom rng;
  auto keys = setup<Bls12>(rng);
  auto sub = gen_partial_token<Bls12>(keys.public_key, parse_policy("s/a"), rng);
  auto iss = gen_partial_token<Bls12>(keys.public_key, parse_policy("s/b"), rng);
  auto ct = encrypt_with_token<Bls12>(keys.public_key, combine_tokens(sub, iss), msg("secret"), rng);
  auto k1 = keygen<Bls12>(keys.secret, keys.public_key, "u1", {L("s/a")}, rng);
  auto k2 = keygen<Bls12>(keys.secret, keys.public_key, "u2", {L("s/b")}, rng);
  CHECK(code_of([&] { (void)decrypt(ct, k1); }) == ErrorCode::policy_not_satisfied);
  CHECK(code_of([&] { (void)decrypt(ct, k2); }) == ErrorCode::policy_not_satisfied);

  AttributeKey<Bls12> merged = k1;
  merged.per_attr.insert(*k2.per_attr.begin());
  CHECK(code_of([&] { (void)decrypt(ct, merged); }) == ErrorCode::authentication_failed);
}

TEST_CASE("bls12: record codec round-trips and rejects damage") {
  SystemRandom rng;
  auto keys = setup<Bls12>(rng);
  auto sub = gen_partial_token<Bls12>(keys.public_key, parse_policy("(s/a OR s/b)"), rng);
  auto iss = gen_partial_token<Bls12>(keys.public_key, parse_policy("THRESHOLD(2; i/c, i/d, i/e)"), rng);
  auto tok = combine_tokens(sub, iss);
  auto ct = encrypt_with_token<Bls12>(keys.public_key, tok, msg("payload"), rng);
  auto key = keygen<Bls12>(keys.secret, keys.public_key, "req", {L("s/b"), L("i/c"), L("i/d")}, rng);

  auto mpk2 = decode_master_public_key<Bls12>(encode(keys.public_key));
  CHECK(mpk2.g_beta == keys.public_key.g_beta);
  CHECK(mpk2.egg_alpha == keys.public_key.egg_alpha);
  auto msk2 = decode_master_secret_key<Bls12>(encode(keys.secret));
  CHECK(msk2.beta == keys.secret.beta);
  auto sub2 = decode_partial_token<Bls12>(encode(sub));
  CHECK(sub2.tree == sub.tree);
  CHECK(sub2.leaves == sub.leaves);
  auto tok2 = decode_combined_token<Bls12>(encode(tok));
  CHECK(tok2.c1 == tok.c1);
  auto ct2 = decode_ciphertext<Bls12>(encode(ct));
  auto key2 = decode_attribute_key<Bls12>(encode(key));
  CHECK(encode(ct2) == encode(ct));
  CHECK(encode(key2) == encode(key));
  CHECK(decrypt(ct2, key2) == msg("payload"));

  auto bytes = encode(ct);
  CHECK(peek_record(bytes).type == RecordType::ciphertext);
  auto bumped = bytes;
  bumped[5] = kRecordVersion + 1;
  CHECK(code_of([&] { (void)decode_ciphertext<Bls12>(bumped); }) == ErrorCode::version_mismatch);
  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  CHECK(code_of([&] { (void)decode_ciphertext<Bls12>(truncated); }) == ErrorCode::malformed_encoding);
  CHECK(code_of([&] { (void)decode_attribute_key<Bls12>(bytes); }) == ErrorCode::malformed_encoding);
  CHECK(code_of([&] { (void)decode_ciphertext<ToyGroup>(bytes); }) == ErrorCode::malformed_encoding);
}

TEST_CASE("symmetric layer") {
  SystemRandom rng;
  auto k = symmetric::derive_key(as_bytes("element"));
  CHECK(k == symmetric::derive_key(as_bytes("element")));
  CHECK_FALSE(k == symmetric::derive_key(as_bytes("elemenu")));
  auto sealed = symmetric::seal(k, as_bytes("hello"), rng);
  CHECK(sealed.size() == symmetric::kNonceSize + 5 + symmetric::kTagSize);
  CHECK(symmetric::open(k, sealed) == msg("hello"));
  CHECK(code_of([&] { (void)symmetric::open(k, ByteView(sealed).first(10)); }) ==
        ErrorCode::authentication_failed);
}
