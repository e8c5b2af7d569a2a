#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "privlocker/bytes.hpp"
#include "privlocker/random.hpp"

// Bridge from the target-group key element to a byte-oriented AEAD.
namespace privlocker::abe::symmetric {

// Suite 1: key = BLAKE2b-256 keyed with kKdfTag over the encoded target
// element; payload = XChaCha20-Poly1305 (IETF), 24-byte random nonce
// prepended, kPayloadAd as associated data.
inline constexpr std::uint8_t kSuiteId = 1;
inline constexpr std::string_view kKdfTag = "privlocker/kem-kdf/v1";
inline constexpr std::string_view kPayloadAd = "privlocker/document/v1";
inline constexpr std::size_t kNonceSize = 24;
inline constexpr std::size_t kTagSize = 16;

using Key = std::array<std::uint8_t, 32>;

Key derive_key(ByteView encoded_element);
Bytes seal(const Key& key, ByteView plaintext, RandomSource& rng);
// Throws Error(authentication_failed) on any tag mismatch.
Bytes open(const Key& key, ByteView sealed);

}  // namespace privlocker::abe::symmetric
