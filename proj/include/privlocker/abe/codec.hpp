#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "privlocker/abe/scheme.hpp"
#include "privlocker/bytes.hpp"

// Binary records for scheme artifacts:
//
//   magic "PLAB" | type u8 | version u8 | group id u8 | fields...
//
// Group elements and scalars are u32-length-prefixed blobs holding the
// backend's fixed-length encoding; the access tree is a blob holding
// policy::encode_tree. Field order per type:
//   master public key : g_beta, egg_alpha
//   master secret key : beta, g_alpha
//   partial / combined: tree, c1, c2, u32 n, n x (c3, c4)
//   ciphertext        : tree, c1, c2, u32 n, n x (c3, c4), suite u8, c5
//   attribute key     : holder, u32 m, m x issuer, d, u32 k, k x (authority, name, d_j, d_j')
namespace privlocker::abe {

inline constexpr std::array<std::uint8_t, 4> kRecordMagic = {'P', 'L', 'A', 'B'};
inline constexpr std::uint8_t kRecordVersion = 1;

enum class RecordType : std::uint8_t {
  master_public_key = 1,
  master_secret_key = 2,
  partial_token = 3,
  combined_token = 4,
  ciphertext = 5,
  attribute_key = 6,
};

struct RecordHeader {
  RecordType type;
  std::uint8_t version;
  std::uint8_t group_id;
};

std::string_view record_type_name(RecordType type) noexcept;

// Validates magic, version and type tag; throws malformed_encoding or
// version_mismatch.
RecordHeader peek_record(ByteView bytes);

template <group::PairingGroup G> Bytes encode(const MasterPublicKey<G>& v);
template <group::PairingGroup G> Bytes encode(const MasterSecretKey<G>& v);
template <group::PairingGroup G> Bytes encode(const PartialToken<G>& v);
template <group::PairingGroup G> Bytes encode(const CombinedToken<G>& v);
template <group::PairingGroup G> Bytes encode(const Ciphertext<G>& v);
template <group::PairingGroup G> Bytes encode(const AttributeKey<G>& v);

template <group::PairingGroup G> MasterPublicKey<G> decode_master_public_key(ByteView bytes);
template <group::PairingGroup G> MasterSecretKey<G> decode_master_secret_key(ByteView bytes);
template <group::PairingGroup G> PartialToken<G> decode_partial_token(ByteView bytes);
template <group::PairingGroup G> CombinedToken<G> decode_combined_token(ByteView bytes);
template <group::PairingGroup G> Ciphertext<G> decode_ciphertext(ByteView bytes);
template <group::PairingGroup G> AttributeKey<G> decode_attribute_key(ByteView bytes);

}  // namespace privlocker::abe
