#pragma once

#include <array>
#include <cstdint>
#include <filesystem>

#include "privlocker/bytes.hpp"

// On-disk envelope shared by every store file:
//   magic "PLST" | tag u8 | version u8 | payload (u32 length + bytes) | checksum[32]
// The checksum is unkeyed BLAKE2b-256 over everything before it.
namespace privlocker::locker {

inline constexpr std::array<std::uint8_t, 4> kStoreMagic = {'P', 'L', 'S', 'T'};
inline constexpr std::uint8_t kStoreVersion = 1;
inline constexpr std::size_t kStoreChecksumSize = 32;

enum class StoreTag : std::uint8_t {
  authority = 1,
  issuers = 2,
  attributes = 3,
  tokens = 4,
  documents = 5,
  keys = 6,
};

std::string_view store_file_name(StoreTag tag) noexcept;

Bytes wrap_store_file(StoreTag tag, ByteView payload);

// Checks, in order: envelope shape and tag (malformed_encoding), version
// (version_mismatch), checksum (checksum_mismatch).
Bytes unwrap_store_file(StoreTag expected, ByteView file);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, ByteView data);

}  // namespace privlocker::locker
