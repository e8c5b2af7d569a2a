#include "privlocker/abe/scheme.hpp"

#include "privlocker/abe/symmetric.hpp"
#include "privlocker/error.hpp"
#include "privlocker/group/bls12.hpp"
#include "privlocker/group/toy.hpp"
#include "privlocker/policy/sharing.hpp"

namespace privlocker::abe {

namespace {

template <group::PairingGroup G>
typename G::Source hash_label(const AttributeLabel& label) {
  return G::hash_to_group(as_bytes(label.canonical()));
}

template <group::PairingGroup G>
PartialToken<G> partial_token_from_secret(const MasterPublicKey<G>& mpk, const AccessTree& subtree,
                                          const typename G::Scalar& secret, RandomSource& rng) {
  const auto shares = policy::assign_shares<G>(subtree, secret, rng);
  const auto g = G::generator();
  PartialToken<G> out{subtree, mpk.egg_alpha.pow(secret), mpk.g_beta.pow(secret), {}};
  for (NodeId leaf : subtree.leaves()) {
    const auto& q = shares[leaf];
    out.leaves.push_back({g.pow(q), hash_label<G>(subtree.node(leaf).attribute).pow(q)});
  }
  return out;
}

template <group::PairingGroup G>
void check_leaf_count(const AccessTree& tree, std::size_t count, const char* what) {
  if (tree.leaf_count() != count) {
    throw Error(ErrorCode::invalid_argument, std::string(what) + ": leaf components do not match the tree");
  }
}

template <group::PairingGroup G>
Ciphertext<G> encrypt_impl(const CombinedToken<G>& token, ByteView message, const typename G::Scalar& r_ie,
                           RandomSource& rng) {
  if (message.empty()) throw Error(ErrorCode::invalid_argument, "message must not be empty");
  check_leaf_count<G>(token.tree, token.leaves.size(), "token");
  const auto key_element = G::pair_generator().pow(G::random_scalar(rng));
  Ciphertext<G> ct;
  ct.tree = token.tree;
  ct.c1 = token.c1.pow(r_ie) * key_element;
  ct.c2 = token.c2.pow(r_ie);
  ct.leaves.reserve(token.leaves.size());
  for (const auto& leaf : token.leaves) ct.leaves.push_back({leaf.c3.pow(r_ie), leaf.c4.pow(r_ie)});
  ct.suite = symmetric::kSuiteId;
  ct.c5 = symmetric::seal(symmetric::derive_key(key_element.to_bytes()), message, rng);
  return ct;
}

template <group::PairingGroup G>
std::optional<typename G::Target> decrypt_node_impl(const Ciphertext<G>& ct, const AttributeKey<G>& key,
                                                    const std::vector<std::size_t>& leaf_ordinal, NodeId id) {
  const auto& n = ct.tree.node(id);
  if (n.is_leaf()) {
    auto it = key.per_attr.find(n.attribute);
    if (it == key.per_attr.end()) return std::nullopt;
    const auto& leaf = ct.leaves[leaf_ordinal[id]];
    // H-bearing factors (d_j, c4) go on the left of the pairing.
    return G::pair(it->second.d_j, leaf.c3) / G::pair(leaf.c4, it->second.d_j_prime);
  }
  std::vector<std::optional<typename G::Target>> results;
  std::vector<bool> ok;
  results.reserve(n.children.size());
  for (auto c : n.children) {
    results.push_back(decrypt_node_impl(ct, key, leaf_ordinal, c));
    ok.push_back(results.back().has_value());
  }
  auto chosen = policy::select_satisfying_children(n, ok);
  if (!chosen) return std::nullopt;
  const auto coeffs = policy::recombination_coefficients<typename G::Scalar>(n, *chosen);
  typename G::Target acc;
  for (std::size_t i = 0; i < chosen->size(); ++i) {
    const auto& value = *results[(*chosen)[i] - 1];
    acc = acc * (n.kind == policy::NodeKind::joint ? value : value.pow(coeffs[i]));
  }
  return acc;
}

template <group::PairingGroup G>
std::vector<std::size_t> leaf_ordinals(const Ciphertext<G>& ct) {
  check_leaf_count<G>(ct.tree, ct.leaves.size(), "ciphertext");
  std::vector<std::size_t> out(ct.tree.size(), 0);
  std::size_t next = 0;
  for (NodeId id = 0; id < ct.tree.size(); ++id) {
    if (ct.tree.node(id).is_leaf()) out[id] = next++;
  }
  return out;
}

}  // namespace

template <group::PairingGroup G>
MasterKeyPair<G> setup(RandomSource& rng) {
  const auto alpha = G::random_scalar(rng);
  const auto beta = G::random_scalar(rng);
  const auto g = G::generator();
  MasterKeyPair<G> keys;
  keys.secret = {beta, g.pow(alpha)};
  keys.public_key = {g.pow(beta), G::pair_generator().pow(alpha)};
  return keys;
}

template <group::PairingGroup G>
PartialToken<G> gen_partial_token(const MasterPublicKey<G>& mpk, const AccessTree& subtree, RandomSource& rng) {
  return partial_token_from_secret<G>(mpk, subtree, G::random_scalar(rng), rng);
}

template <group::PairingGroup G>
CombinedToken<G> combine_tokens(const PartialToken<G>& subscriber, const PartialToken<G>& issuer) {
  check_leaf_count<G>(subscriber.tree, subscriber.leaves.size(), "subscriber token");
  check_leaf_count<G>(issuer.tree, issuer.leaves.size(), "issuer token");
  if (subscriber.c2 == issuer.c2 && subscriber.c1 == issuer.c1) {
    throw Error(ErrorCode::overlapping_tokens, "subscriber and issuer tokens share their randomness");
  }
  CombinedToken<G> out;
  out.tree = AccessTree::joint({subscriber.tree, issuer.tree});
  out.c1 = subscriber.c1 * issuer.c1;
  out.c2 = subscriber.c2 * issuer.c2;
  out.leaves = subscriber.leaves;
  out.leaves.insert(out.leaves.end(), issuer.leaves.begin(), issuer.leaves.end());
  return out;
}

template <group::PairingGroup G>
Ciphertext<G> encrypt_with_token(const MasterPublicKey<G>& /*mpk*/, const CombinedToken<G>& token, ByteView message,
                                 RandomSource& rng) {
  return encrypt_impl<G>(token, message, G::random_scalar(rng), rng);
}

template <group::PairingGroup G>
AttributeKey<G> keygen(const MasterSecretKey<G>& msk, const MasterPublicKey<G>& /*mpk*/, const std::string& holder,
                       const AttributeSet& attrs, RandomSource& rng) {
  if (attrs.empty()) throw Error(ErrorCode::empty_attribute_set, "key needs at least one attribute");
  const auto g = G::generator();
  const auto r = G::random_scalar(rng);
  const auto g_r = g.pow(r);
  AttributeKey<G> key;
  key.holder = holder;
  key.d = (msk.g_alpha * g_r).pow(msk.beta.inverse());
  for (const auto& label : attrs) {
    const auto r_j = G::random_scalar(rng);
    key.per_attr.emplace(label, KeyComponent<G>{g_r * hash_label<G>(label).pow(r_j), g.pow(r_j)});
    key.issuer_set.insert(label.authority);
  }
  return key;
}

template <group::PairingGroup G>
std::optional<typename G::Target> decrypt_node(const Ciphertext<G>& ct, const AttributeKey<G>& key, NodeId node) {
  if (node >= ct.tree.size()) throw Error(ErrorCode::invalid_argument, "node outside the ciphertext tree");
  return decrypt_node_impl(ct, key, leaf_ordinals(ct), node);
}

template <group::PairingGroup G>
Bytes open_payload(const Ciphertext<G>& ct, const typename G::Target& key_element) {
  if (ct.suite != symmetric::kSuiteId) {
    throw Error(ErrorCode::malformed_encoding, "unsupported symmetric suite");
  }
  return symmetric::open(symmetric::derive_key(key_element.to_bytes()), ct.c5);
}

template <group::PairingGroup G>
Bytes decrypt(const Ciphertext<G>& ct, const AttributeKey<G>& key) {
  auto a = decrypt_node(ct, key, 0);
  if (!a) throw Error(ErrorCode::policy_not_satisfied, "key attributes do not satisfy the access tree");
  // pair(c2, d) / A = e(g,g)^{alpha s r_ie}
  const auto blinding = G::pair(ct.c2, key.d) / *a;
  return open_payload(ct, ct.c1 / blinding);
}

#ifdef PRIVLOCKER_TEST_HOOKS
namespace testing {

template <group::PairingGroup G>
PartialToken<G> gen_partial_token_with_secret(const MasterPublicKey<G>& mpk, const AccessTree& subtree,
                                              const typename G::Scalar& secret, RandomSource& rng) {
  return partial_token_from_secret<G>(mpk, subtree, secret, rng);
}

template <group::PairingGroup G>
Ciphertext<G> encrypt_with_exponent(const MasterPublicKey<G>& /*mpk*/, const CombinedToken<G>& token,
                                    ByteView message, const typename G::Scalar& r_ie, RandomSource& rng) {
  return encrypt_impl<G>(token, message, r_ie, rng);
}

}  // namespace testing
#endif

#define PRIVLOCKER_INSTANTIATE_SCHEME(G)                                                                   \
  template MasterKeyPair<G> setup<G>(RandomSource&);                                                       \
  template PartialToken<G> gen_partial_token<G>(const MasterPublicKey<G>&, const AccessTree&, RandomSource&); \
  template CombinedToken<G> combine_tokens<G>(const PartialToken<G>&, const PartialToken<G>&);             \
  template Ciphertext<G> encrypt_with_token<G>(const MasterPublicKey<G>&, const CombinedToken<G>&, ByteView, \
                                               RandomSource&);                                             \
  template AttributeKey<G> keygen<G>(const MasterSecretKey<G>&, const MasterPublicKey<G>&, const std::string&, \
                                     const AttributeSet&, RandomSource&);                                  \
  template std::optional<G::Target> decrypt_node<G>(const Ciphertext<G>&, const AttributeKey<G>&, NodeId);  \
  template Bytes decrypt<G>(const Ciphertext<G>&, const AttributeKey<G>&);                                 \
  template Bytes open_payload<G>(const Ciphertext<G>&, const G::Target&);

PRIVLOCKER_INSTANTIATE_SCHEME(group::Bls12)
PRIVLOCKER_INSTANTIATE_SCHEME(group::ToyGroup)

#ifdef PRIVLOCKER_TEST_HOOKS
#define PRIVLOCKER_INSTANTIATE_HOOKS(G)                                                                    \
  template PartialToken<G> testing::gen_partial_token_with_secret<G>(const MasterPublicKey<G>&,            \
                                                                     const AccessTree&, const G::Scalar&,  \
                                                                     RandomSource&);                       \
  template Ciphertext<G> testing::encrypt_with_exponent<G>(const MasterPublicKey<G>&, const CombinedToken<G>&, \
                                                           ByteView, const G::Scalar&, RandomSource&);

PRIVLOCKER_INSTANTIATE_HOOKS(group::Bls12)
PRIVLOCKER_INSTANTIATE_HOOKS(group::ToyGroup)
#endif

}  // namespace privlocker::abe
