#include "privlocker/bytes.hpp"

#include "privlocker/error.hpp"

namespace privlocker {

std::string to_hex(ByteView data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) {
    throw Error(ErrorCode::malformed_encoding, "odd-length hex string");
  }
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) {
      throw Error(ErrorCode::malformed_encoding, "invalid hex digit");
    }
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

void ByteWriter::put_u16(std::uint16_t v) {
  put_u8(static_cast<std::uint8_t>(v >> 8));
  put_u8(static_cast<std::uint8_t>(v));
}

void ByteWriter::put_u32(std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) put_u8(static_cast<std::uint8_t>(v >> shift));
}

void ByteWriter::put_u64(std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) put_u8(static_cast<std::uint8_t>(v >> shift));
}

void ByteWriter::put_blob(ByteView data) {
  if (data.size() > UINT32_MAX) {
    throw Error(ErrorCode::invalid_argument, "blob exceeds 4 GiB");
  }
  put_u32(static_cast<std::uint32_t>(data.size()));
  put_raw(data);
}

ByteView ByteReader::get_raw(std::size_t n) {
  if (remaining() < n) {
    throw Error(ErrorCode::malformed_encoding, "truncated record");
  }
  auto out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::uint8_t ByteReader::get_u8() { return get_raw(1)[0]; }

std::uint16_t ByteReader::get_u16() {
  auto b = get_raw(2);
  return static_cast<std::uint16_t>((b[0] << 8) | b[1]);
}

std::uint32_t ByteReader::get_u32() {
  auto b = get_raw(4);
  std::uint32_t v = 0;
  for (auto x : b) v = (v << 8) | x;
  return v;
}

std::uint64_t ByteReader::get_u64() {
  auto b = get_raw(8);
  std::uint64_t v = 0;
  for (auto x : b) v = (v << 8) | x;
  return v;
}

ByteView ByteReader::get_blob() { return get_raw(get_u32()); }

std::string ByteReader::get_string() {
  auto b = get_blob();
  return {b.begin(), b.end()};
}

void ByteReader::expect_end() const {
  if (!at_end()) {
    throw Error(ErrorCode::malformed_encoding, "trailing bytes after record");
  }
}

}  // namespace privlocker
