#include "privlocker/locker/store_file.hpp"

#include <sodium.h>

#include <algorithm>
#include <fstream>
#include <iterator>

#include "privlocker/error.hpp"
#include "privlocker/random.hpp"

namespace privlocker::locker {
namespace {

std::array<std::uint8_t, kStoreChecksumSize> checksum(ByteView data) {
  ensure_sodium();
  std::array<std::uint8_t, kStoreChecksumSize> out{};
  crypto_generichash(out.data(), out.size(), data.data(), data.size(), nullptr, 0);
  return out;
}

}  // namespace

std::string_view store_file_name(StoreTag tag) noexcept {
  switch (tag) {
    case StoreTag::authority: return "authority.bin";
    case StoreTag::issuers: return "issuers.bin";
    case StoreTag::attributes: return "attributes.bin";
    case StoreTag::tokens: return "tokens.bin";
    case StoreTag::documents: return "documents.bin";
    case StoreTag::keys: return "keys.bin";
  }
  return "unknown.bin";
}

Bytes wrap_store_file(StoreTag tag, ByteView payload) {
  ByteWriter w;
  w.put_raw(kStoreMagic);
  w.put_u8(static_cast<std::uint8_t>(tag));
  w.put_u8(kStoreVersion);
  w.put_blob(payload);
  const auto sum = checksum(w.bytes());
  w.put_raw(sum);
  return w.take();
}

Bytes unwrap_store_file(StoreTag expected, ByteView file) {
  constexpr std::size_t kHeader = kStoreMagic.size() + 2;
  if (file.size() < kHeader || !std::equal(kStoreMagic.begin(), kStoreMagic.end(), file.begin())) {
    throw Error(ErrorCode::malformed_encoding, "not a store file");
  }
  if (file[4] != static_cast<std::uint8_t>(expected)) {
    throw Error(ErrorCode::malformed_encoding, "store file has the wrong tag");
  }
  if (file[5] != kStoreVersion) {
    throw Error(ErrorCode::version_mismatch,
                "store file version " + std::to_string(file[5]) + ", expected " + std::to_string(kStoreVersion));
  }
  if (file.size() < kHeader + kStoreChecksumSize) throw Error(ErrorCode::checksum_mismatch, "store file truncated");
  const auto body = file.first(file.size() - kStoreChecksumSize);
  const auto sum = checksum(body);
  if (!std::equal(sum.begin(), sum.end(), file.end() - kStoreChecksumSize)) {
    throw Error(ErrorCode::checksum_mismatch, std::string(store_file_name(expected)) + " checksum mismatch");
  }
  ByteReader r(body.subspan(kHeader));
  const auto payload = r.get_blob();
  r.expect_end();
  return Bytes(payload.begin(), payload.end());
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  Bytes out{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (in.bad()) throw Error(ErrorCode::io_error, "cannot read " + path.string());
  return out;
}

void write_file(const std::filesystem::path& path, ByteView data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
}

}  // namespace privlocker::locker
