#include "privlocker/group/toy.hpp"

#include <sodium.h>

#include <array>

#include "privlocker/error.hpp"

namespace privlocker::group {

namespace toy_detail {

std::uint64_t add(std::uint64_t a, std::uint64_t b) noexcept {
  std::uint64_t s = a + b;  // < 2^62, no overflow
  return s >= kToyOrder ? s - kToyOrder : s;
}

std::uint64_t mul(std::uint64_t a, std::uint64_t b) noexcept {
  unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  return static_cast<std::uint64_t>(p % kToyOrder);
}

std::uint64_t neg(std::uint64_t a) noexcept { return a == 0 ? 0 : kToyOrder - a; }

std::uint64_t decode(ByteView bytes, const char* what) {
  if (bytes.size() != 8) {
    throw Error(ErrorCode::malformed_encoding, std::string(what) + " encoding must be 8 bytes");
  }
  std::uint64_t v = 0;
  for (auto b : bytes) v = (v << 8) | b;
  return v;
}

Bytes encode(std::uint64_t v) {
  Bytes out(8);
  for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(v >> (56 - 8 * i));
  return out;
}

}  // namespace toy_detail

ToyScalar ToyScalar::from_bytes(ByteView bytes) {
  auto v = toy_detail::decode(bytes, "toy scalar");
  if (v >= kToyOrder) throw Error(ErrorCode::malformed_encoding, "toy scalar not reduced");
  return ToyScalar(v);
}

ToyScalar ToyScalar::inverse() const {
  if (is_zero()) throw Error(ErrorCode::invalid_argument, "inverse of zero scalar");
  // Fermat: v^(p-2).
  std::uint64_t result = 1;
  std::uint64_t base = v_;
  for (std::uint64_t e = kToyOrder - 2; e != 0; e >>= 1) {
    if (e & 1) result = toy_detail::mul(result, base);
    base = toy_detail::mul(base, base);
  }
  return ToyScalar(result);
}

ToySource ToySource::from_bytes(ByteView bytes) {
  auto v = toy_detail::decode(bytes, "toy source element");
  if (v >= kToyOrder) throw Error(ErrorCode::off_group_point, "toy source element out of range");
  return ToySource(ToyScalar::from_u64(v));
}

ToyTarget ToyTarget::from_bytes(ByteView bytes) {
  auto v = toy_detail::decode(bytes, "toy target element");
  if (v >= kToyOrder) throw Error(ErrorCode::off_group_point, "toy target element out of range");
  return ToyTarget(ToyScalar::from_u64(v));
}

ToySource ToyGroup::hash_to_group(ByteView message) {
  ensure_sodium();
  static constexpr std::string_view kTag = "privlocker/toy-hash/v1";
  std::array<std::uint8_t, 16> digest{};
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, digest.size());
  crypto_generichash_update(&st, reinterpret_cast<const unsigned char*>(kTag.data()), kTag.size());
  crypto_generichash_update(&st, message.data(), message.size());
  crypto_generichash_final(&st, digest.data(), digest.size());
  unsigned __int128 wide = 0;
  for (auto b : digest) wide = (wide << 8) | b;
  auto log = static_cast<std::uint64_t>(wide % kToyOrder);
  return ToySource::from_log(ToyScalar::from_u64(log == 0 ? 1 : log));
}

ToyScalar ToyGroup::random_scalar(RandomSource& rng) {
  std::array<std::uint8_t, 16> wide{};
  for (;;) {
    rng.fill(wide);
    unsigned __int128 v = 0;
    for (auto b : wide) v = (v << 8) | b;
    auto s = ToyScalar::from_u64(static_cast<std::uint64_t>(v % kToyOrder));
    if (!s.is_zero()) return s;
  }
}

}  // namespace privlocker::group
