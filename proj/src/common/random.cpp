#include "privlocker/random.hpp"

#include <sodium.h>

#include <algorithm>

#include "privlocker/error.hpp"

namespace privlocker {

void ensure_sodium() {
  static const int status = sodium_init();
  if (status < 0) {
    throw Error(ErrorCode::entropy_failure, "libsodium initialisation failed");
  }
}

SystemRandom::SystemRandom() { ensure_sodium(); }

void SystemRandom::fill(std::span<std::uint8_t> out) {
  randombytes_buf(out.data(), out.size());
}

#ifdef PRIVLOCKER_TEST_HOOKS

SeededRandom::SeededRandom(std::uint64_t seed, std::string_view label) {
  ensure_sodium();
  std::array<std::uint8_t, 8> seed_bytes{};
  for (int i = 0; i < 8; ++i) seed_bytes[i] = static_cast<std::uint8_t>(seed >> (56 - 8 * i));
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, key_.size());
  static constexpr std::string_view kTag = "privlocker/seeded-random/v1";
  crypto_generichash_update(&st, reinterpret_cast<const unsigned char*>(kTag.data()), kTag.size());
  crypto_generichash_update(&st, seed_bytes.data(), seed_bytes.size());
  crypto_generichash_update(&st, reinterpret_cast<const unsigned char*>(label.data()), label.size());
  crypto_generichash_final(&st, key_.data(), key_.size());
}

void SeededRandom::refill() {
  static constexpr std::array<std::uint8_t, crypto_stream_chacha20_ietf_NONCEBYTES> kNonce{};
  block_.fill(0);
  crypto_stream_chacha20_ietf_xor_ic(block_.data(), block_.data(), block_.size(), kNonce.data(),
                                     counter_++, key_.data());
  used_ = 0;
}

void SeededRandom::fill(std::span<std::uint8_t> out) {
  std::size_t pos = 0;
  while (pos < out.size()) {
    if (used_ == block_.size()) refill();
    std::size_t n = std::min(out.size() - pos, block_.size() - used_);
    std::copy_n(block_.begin() + static_cast<std::ptrdiff_t>(used_), n, out.begin() + static_cast<std::ptrdiff_t>(pos));
    used_ += n;
    pos += n;
  }
}

#endif

}  // namespace privlocker
