#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "privlocker/bytes.hpp"
#include "privlocker/group/concepts.hpp"
#include "privlocker/policy/access_tree.hpp"
#include "privlocker/random.hpp"

// Ciphertext-policy ABE with two-party reusable encryption tokens.
//
// Notation in comments: g generator, e the pairing, H hash-to-group,
// alpha/beta master secrets. A token for tree T carries
//   c1 = e(g,g)^{alpha s}, c2 = g^{beta s}, and per leaf y
//   c3_y = g^{q_y(0)}, c4_y = H(attr(y))^{q_y(0)}
// where s is the token secret shared over T. Encryption raises every
// component to a fresh r_ie and multiplies a random key element K into c1.
//
// Explicit instantiations exist for group::Bls12 and group::ToyGroup.
namespace privlocker::abe {

using policy::AccessTree;
using policy::AttributeLabel;
using policy::AttributeSet;
using policy::NodeId;

template <group::PairingGroup G>
struct MasterSecretKey {
  typename G::Scalar beta;
  typename G::Source g_alpha;
};

template <group::PairingGroup G>
struct MasterPublicKey {
  typename G::Source g_beta;
  typename G::Target egg_alpha;
};

template <group::PairingGroup G>
struct MasterKeyPair {
  MasterSecretKey<G> secret;
  MasterPublicKey<G> public_key;
};

template <group::PairingGroup G>
struct LeafComponents {
  typename G::Source c3;  // g-side
  typename G::Source c4;  // H-side
  friend bool operator==(const LeafComponents&, const LeafComponents&) = default;
};

// One party's share of a token. `leaves` follows tree.leaves() order.
template <group::PairingGroup G>
struct PartialToken {
  AccessTree tree;
  typename G::Target c1;
  typename G::Source c2;
  std::vector<LeafComponents<G>> leaves;
};

// Token over JOINT(subscriber subtree, issuer subtree); reusable across
// encryptions.
template <group::PairingGroup G>
struct CombinedToken {
  AccessTree tree;
  typename G::Target c1;
  typename G::Source c2;
  std::vector<LeafComponents<G>> leaves;
};

template <group::PairingGroup G>
struct Ciphertext {
  AccessTree tree;
  typename G::Target c1;  // e(g,g)^{alpha s r_ie} * K
  typename G::Source c2;  // g^{beta s r_ie}
  std::vector<LeafComponents<G>> leaves;
  std::uint8_t suite = 0;
  Bytes c5;               // nonce || AEAD(message) under KDF(K)
};

template <group::PairingGroup G>
struct KeyComponent {
  typename G::Source d_j;        // g^r * H(j)^{r_j}
  typename G::Source d_j_prime;  // g^{r_j}
};

template <group::PairingGroup G>
struct AttributeKey {
  std::string holder;
  std::set<std::string> issuer_set;
  typename G::Source d;  // g^{(alpha + r)/beta}
  std::map<AttributeLabel, KeyComponent<G>> per_attr;

  AttributeSet attributes() const {
    AttributeSet out;
    for (const auto& [label, _] : per_attr) out.insert(label);
    return out;
  }
};

template <group::PairingGroup G>
MasterKeyPair<G> setup(RandomSource& rng);

template <group::PairingGroup G>
PartialToken<G> gen_partial_token(const MasterPublicKey<G>& mpk, const AccessTree& subtree, RandomSource& rng);

// Composes the two parties' tokens under a JOINT root: the combined secret
// is r_s + r_i. Throws overlapping_tokens when both arguments carry the
// same randomness (one partial token passed twice).
template <group::PairingGroup G>
CombinedToken<G> combine_tokens(const PartialToken<G>& subscriber, const PartialToken<G>& issuer);

template <group::PairingGroup G>
Ciphertext<G> encrypt_with_token(const MasterPublicKey<G>& mpk, const CombinedToken<G>& token, ByteView message,
                                 RandomSource& rng);

template <group::PairingGroup G>
AttributeKey<G> keygen(const MasterSecretKey<G>& msk, const MasterPublicKey<G>& mpk, const std::string& holder,
                       const AttributeSet& attrs, RandomSource& rng);

// e(g,g)^{r r_ie q_x(0)} when the key satisfies the subtree at `node`.
template <group::PairingGroup G>
std::optional<typename G::Target> decrypt_node(const Ciphertext<G>& ct, const AttributeKey<G>& key, NodeId node);

// Throws policy_not_satisfied or authentication_failed.
template <group::PairingGroup G>
Bytes decrypt(const Ciphertext<G>& ct, const AttributeKey<G>& key);

// Symmetric tail of decrypt once the key element K has been recovered.
template <group::PairingGroup G>
Bytes open_payload(const Ciphertext<G>& ct, const typename G::Target& key_element);

#ifdef PRIVLOCKER_TEST_HOOKS
namespace testing {

// Fixed token secret instead of a fresh one (zero is allowed here).
template <group::PairingGroup G>
PartialToken<G> gen_partial_token_with_secret(const MasterPublicKey<G>& mpk, const AccessTree& subtree,
                                              const typename G::Scalar& secret, RandomSource& rng);

// Fixed r_ie instead of a fresh one.
template <group::PairingGroup G>
Ciphertext<G> encrypt_with_exponent(const MasterPublicKey<G>& mpk, const CombinedToken<G>& token, ByteView message,
                                    const typename G::Scalar& r_ie, RandomSource& rng);

}  // namespace testing
#endif

}  // namespace privlocker::abe
