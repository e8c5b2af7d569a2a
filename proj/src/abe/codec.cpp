#include "privlocker/abe/codec.hpp"

#include <algorithm>

#include "privlocker/error.hpp"
#include "privlocker/group/bls12.hpp"
#include "privlocker/group/toy.hpp"

namespace privlocker::abe {

namespace {

template <group::PairingGroup G>
ByteWriter begin(RecordType type) {
  ByteWriter w;
  w.put_raw(kRecordMagic);
  w.put_u8(static_cast<std::uint8_t>(type));
  w.put_u8(kRecordVersion);
  w.put_u8(G::kId);
  return w;
}

template <group::PairingGroup G>
ByteReader open_record(ByteView bytes, RecordType expected) {
  const auto header = peek_record(bytes);
  if (header.type != expected) {
    throw Error(ErrorCode::malformed_encoding, std::string("expected a ") +
                                                   std::string(record_type_name(expected)) + " record, found " +
                                                   std::string(record_type_name(header.type)));
  }
  if (header.group_id != G::kId) {
    throw Error(ErrorCode::malformed_encoding, "record belongs to a different group backend");
  }
  ByteReader r(bytes);
  r.get_raw(kRecordMagic.size() + 3);
  return r;
}

template <class T>
T get_element(ByteReader& r) {
  return T::from_bytes(r.get_blob());
}

void put_tree(ByteWriter& w, const AccessTree& tree) {
  ByteWriter inner;
  policy::encode_tree(inner, tree);
  w.put_blob(inner.bytes());
}

AccessTree get_tree(ByteReader& r) {
  ByteReader inner(r.get_blob());
  auto tree = policy::decode_tree(inner);
  inner.expect_end();
  return tree;
}

template <group::PairingGroup G>
void put_leaves(ByteWriter& w, const std::vector<LeafComponents<G>>& leaves) {
  w.put_u32(static_cast<std::uint32_t>(leaves.size()));
  for (const auto& l : leaves) {
    w.put_blob(l.c3.to_bytes());
    w.put_blob(l.c4.to_bytes());
  }
}

template <group::PairingGroup G>
std::vector<LeafComponents<G>> get_leaves(ByteReader& r, const AccessTree& tree) {
  const auto n = r.get_u32();
  if (n != tree.leaf_count()) {
    throw Error(ErrorCode::malformed_encoding, "leaf component count does not match the access tree");
  }
  std::vector<LeafComponents<G>> out;
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    auto c3 = get_element<typename G::Source>(r);
    auto c4 = get_element<typename G::Source>(r);
    out.push_back({c3, c4});
  }
  return out;
}

template <group::PairingGroup G, class Token>
Bytes encode_token(RecordType type, const Token& t) {
  auto w = begin<G>(type);
  put_tree(w, t.tree);
  w.put_blob(t.c1.to_bytes());
  w.put_blob(t.c2.to_bytes());
  put_leaves<G>(w, t.leaves);
  return w.take();
}

template <group::PairingGroup G, class Token>
Token decode_token(ByteView bytes, RecordType type) {
  auto r = open_record<G>(bytes, type);
  Token t;
  t.tree = get_tree(r);
  t.c1 = get_element<typename G::Target>(r);
  t.c2 = get_element<typename G::Source>(r);
  t.leaves = get_leaves<G>(r, t.tree);
  r.expect_end();
  return t;
}

}  // namespace

std::string_view record_type_name(RecordType type) noexcept {
  switch (type) {
    case RecordType::master_public_key: return "master_public_key";
    case RecordType::master_secret_key: return "master_secret_key";
    case RecordType::partial_token: return "partial_token";
    case RecordType::combined_token: return "combined_token";
    case RecordType::ciphertext: return "ciphertext";
    case RecordType::attribute_key: return "attribute_key";
  }
  return "unknown";
}

RecordHeader peek_record(ByteView bytes) {
  ByteReader r(bytes);
  auto magic = r.get_raw(kRecordMagic.size());
  if (!std::equal(magic.begin(), magic.end(), kRecordMagic.begin())) {
    throw Error(ErrorCode::malformed_encoding, "not a privlocker record (bad magic)");
  }
  const auto type = r.get_u8();
  const auto version = r.get_u8();
  const auto group_id = r.get_u8();
  if (version != kRecordVersion) {
    throw Error(ErrorCode::version_mismatch, "record version " + std::to_string(version) + " is not supported");
  }
  if (type < 1 || type > 6) throw Error(ErrorCode::malformed_encoding, "unknown record type");
  return {static_cast<RecordType>(type), version, group_id};
}

template <group::PairingGroup G>
Bytes encode(const MasterPublicKey<G>& v) {
  auto w = begin<G>(RecordType::master_public_key);
  w.put_blob(v.g_beta.to_bytes());
  w.put_blob(v.egg_alpha.to_bytes());
  return w.take();
}

template <group::PairingGroup G>
Bytes encode(const MasterSecretKey<G>& v) {
  auto w = begin<G>(RecordType::master_secret_key);
  w.put_blob(v.beta.to_bytes());
  w.put_blob(v.g_alpha.to_bytes());
  return w.take();
}

template <group::PairingGroup G>
Bytes encode(const PartialToken<G>& v) {
  return encode_token<G>(RecordType::partial_token, v);
}

template <group::PairingGroup G>
Bytes encode(const CombinedToken<G>& v) {
  return encode_token<G>(RecordType::combined_token, v);
}

template <group::PairingGroup G>
Bytes encode(const Ciphertext<G>& v) {
  auto w = begin<G>(RecordType::ciphertext);
  put_tree(w, v.tree);
  w.put_blob(v.c1.to_bytes());
  w.put_blob(v.c2.to_bytes());
  put_leaves<G>(w, v.leaves);
  w.put_u8(v.suite);
  w.put_blob(v.c5);
  return w.take();
}

template <group::PairingGroup G>
Bytes encode(const AttributeKey<G>& v) {
  auto w = begin<G>(RecordType::attribute_key);
  w.put_string(v.holder);
  w.put_u32(static_cast<std::uint32_t>(v.issuer_set.size()));
  for (const auto& issuer : v.issuer_set) w.put_string(issuer);
  w.put_blob(v.d.to_bytes());
  w.put_u32(static_cast<std::uint32_t>(v.per_attr.size()));
  for (const auto& [label, comp] : v.per_attr) {
    w.put_string(label.authority);
    w.put_string(label.name);
    w.put_blob(comp.d_j.to_bytes());
    w.put_blob(comp.d_j_prime.to_bytes());
  }
  return w.take();
}

template <group::PairingGroup G>
MasterPublicKey<G> decode_master_public_key(ByteView bytes) {
  auto r = open_record<G>(bytes, RecordType::master_public_key);
  MasterPublicKey<G> v;
  v.g_beta = get_element<typename G::Source>(r);
  v.egg_alpha = get_element<typename G::Target>(r);
  r.expect_end();
  return v;
}

template <group::PairingGroup G>
MasterSecretKey<G> decode_master_secret_key(ByteView bytes) {
  auto r = open_record<G>(bytes, RecordType::master_secret_key);
  MasterSecretKey<G> v;
  v.beta = get_element<typename G::Scalar>(r);
  v.g_alpha = get_element<typename G::Source>(r);
  r.expect_end();
  if (v.beta.is_zero()) throw Error(ErrorCode::malformed_encoding, "master secret beta is zero");
  return v;
}

template <group::PairingGroup G>
PartialToken<G> decode_partial_token(ByteView bytes) {
  return decode_token<G, PartialToken<G>>(bytes, RecordType::partial_token);
}

template <group::PairingGroup G>
CombinedToken<G> decode_combined_token(ByteView bytes) {
  return decode_token<G, CombinedToken<G>>(bytes, RecordType::combined_token);
}

template <group::PairingGroup G>
Ciphertext<G> decode_ciphertext(ByteView bytes) {
  auto r = open_record<G>(bytes, RecordType::ciphertext);
  Ciphertext<G> v;
  v.tree = get_tree(r);
  v.c1 = get_element<typename G::Target>(r);
  v.c2 = get_element<typename G::Source>(r);
  v.leaves = get_leaves<G>(r, v.tree);
  v.suite = r.get_u8();
  auto c5 = r.get_blob();
  v.c5.assign(c5.begin(), c5.end());
  r.expect_end();
  return v;
}

template <group::PairingGroup G>
AttributeKey<G> decode_attribute_key(ByteView bytes) {
  auto r = open_record<G>(bytes, RecordType::attribute_key);
  AttributeKey<G> v;
  v.holder = r.get_string();
  const auto issuers = r.get_u32();
  for (std::uint32_t i = 0; i < issuers; ++i) v.issuer_set.insert(r.get_string());
  v.d = get_element<typename G::Source>(r);
  const auto count = r.get_u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    policy::AttributeLabel label;
    label.authority = r.get_string();
    label.name = r.get_string();
    auto d_j = get_element<typename G::Source>(r);
    auto d_j_prime = get_element<typename G::Source>(r);
    v.per_attr.emplace(std::move(label), KeyComponent<G>{d_j, d_j_prime});
  }
  r.expect_end();
  if (v.per_attr.empty()) throw Error(ErrorCode::malformed_encoding, "attribute key without attributes");
  return v;
}

#define PRIVLOCKER_INSTANTIATE_CODEC(G)                                           \
  template Bytes encode<G>(const MasterPublicKey<G>&);                            \
  template Bytes encode<G>(const MasterSecretKey<G>&);                            \
  template Bytes encode<G>(const PartialToken<G>&);                               \
  template Bytes encode<G>(const CombinedToken<G>&);                              \
  template Bytes encode<G>(const Ciphertext<G>&);                                 \
  template Bytes encode<G>(const AttributeKey<G>&);                               \
  template MasterPublicKey<G> decode_master_public_key<G>(ByteView);              \
  template MasterSecretKey<G> decode_master_secret_key<G>(ByteView);              \
  template PartialToken<G> decode_partial_token<G>(ByteView);                     \
  template CombinedToken<G> decode_combined_token<G>(ByteView);                   \
  template Ciphertext<G> decode_ciphertext<G>(ByteView);                          \
  template AttributeKey<G> decode_attribute_key<G>(ByteView);

PRIVLOCKER_INSTANTIATE_CODEC(group::Bls12)
PRIVLOCKER_INSTANTIATE_CODEC(group::ToyGroup)

}  // namespace privlocker::abe
