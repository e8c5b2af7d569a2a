#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include "privlocker/bytes.hpp"

namespace privlocker {

// Entropy source handed to every randomized operation. Not thread-safe:
// confine an instance to one caller or synchronize externally.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;

  Bytes bytes(std::size_t n) {
    Bytes out(n);
    fill(out);
    return out;
  }
};

// Operating-system CSPRNG via libsodium.
class SystemRandom final : public RandomSource {
 public:
  SystemRandom();
  void fill(std::span<std::uint8_t> out) override;
};

#ifdef PRIVLOCKER_TEST_HOOKS
// Deterministic ChaCha20 keystream keyed from (seed, label). Test builds only.
class SeededRandom final : public RandomSource {
 public:
  explicit SeededRandom(std::uint64_t seed, std::string_view label = {});
  void fill(std::span<std::uint8_t> out) override;

 private:
  void refill();

  std::array<std::uint8_t, 32> key_{};
  std::array<std::uint8_t, 64> block_{};
  std::size_t used_ = 64;
  std::uint32_t counter_ = 0;
};
#endif

// Calls sodium_init() once; throws Error(entropy_failure) if it fails.
void ensure_sodium();

}  // namespace privlocker
