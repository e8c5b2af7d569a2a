#pragma once

#include <cstdint>
#include <string_view>

#include "privlocker/bytes.hpp"
#include "privlocker/random.hpp"

// NOT SECURE. A pairing "emulation" in which every group element is stored
// as its discrete logarithm in the clear: the source and target groups are
// both (Z_p, +) written multiplicatively, and pair(g^a, g^b) = e(g,g)^{ab}
// is a modular product. It exists so tests can check exponent identities
// exactly. Never use it to protect data.
namespace privlocker::group {

inline constexpr std::uint64_t kToyOrder = (std::uint64_t{1} << 61) - 1;  // Mersenne prime

namespace toy_detail {
std::uint64_t add(std::uint64_t a, std::uint64_t b) noexcept;
std::uint64_t mul(std::uint64_t a, std::uint64_t b) noexcept;
std::uint64_t neg(std::uint64_t a) noexcept;
std::uint64_t decode(ByteView bytes, const char* what);
Bytes encode(std::uint64_t v);
}  // namespace toy_detail

class ToyScalar {
 public:
  static constexpr std::size_t kEncodedSize = 8;

  constexpr ToyScalar() noexcept = default;

  static ToyScalar from_u64(std::uint64_t v) noexcept { return ToyScalar(v % kToyOrder); }
  static ToyScalar zero() noexcept { return {}; }
  static ToyScalar one() noexcept { return from_u64(1); }
  static ToyScalar from_bytes(ByteView bytes);

  Bytes to_bytes() const { return toy_detail::encode(v_); }
  std::uint64_t value() const noexcept { return v_; }

  ToyScalar inverse() const;
  bool is_zero() const noexcept { return v_ == 0; }

  friend ToyScalar operator+(ToyScalar a, ToyScalar b) noexcept {
    return ToyScalar(toy_detail::add(a.v_, b.v_));
  }
  friend ToyScalar operator-(ToyScalar a, ToyScalar b) noexcept {
    return ToyScalar(toy_detail::add(a.v_, toy_detail::neg(b.v_)));
  }
  friend ToyScalar operator*(ToyScalar a, ToyScalar b) noexcept {
    return ToyScalar(toy_detail::mul(a.v_, b.v_));
  }
  friend ToyScalar operator-(ToyScalar a) noexcept { return ToyScalar(toy_detail::neg(a.v_)); }
  friend bool operator==(ToyScalar a, ToyScalar b) noexcept = default;

 private:
  explicit constexpr ToyScalar(std::uint64_t v) noexcept : v_(v) {}
  std::uint64_t v_ = 0;
};

// Source element g^x, stored as x.
class ToySource {
 public:
  static constexpr std::size_t kEncodedSize = 8;

  constexpr ToySource() noexcept = default;
  static ToySource from_log(ToyScalar x) noexcept { return ToySource(x); }
  static ToySource identity() noexcept { return {}; }
  static ToySource from_bytes(ByteView bytes);

  ToyScalar log() const noexcept { return x_; }
  Bytes to_bytes() const { return x_.to_bytes(); }

  ToySource pow(ToyScalar e) const noexcept { return ToySource(x_ * e); }
  ToySource inverse() const noexcept { return ToySource(-x_); }
  bool is_identity() const noexcept { return x_.is_zero(); }

  friend ToySource operator*(ToySource a, ToySource b) noexcept { return ToySource(a.x_ + b.x_); }
  friend bool operator==(ToySource a, ToySource b) noexcept = default;

 private:
  explicit constexpr ToySource(ToyScalar x) noexcept : x_(x) {}
  ToyScalar x_;
};

// Target element e(g,g)^x, stored as x.
class ToyTarget {
 public:
  static constexpr std::size_t kEncodedSize = 8;

  constexpr ToyTarget() noexcept = default;
  static ToyTarget from_log(ToyScalar x) noexcept { return ToyTarget(x); }
  static ToyTarget identity() noexcept { return {}; }
  static ToyTarget from_bytes(ByteView bytes);

  ToyScalar log() const noexcept { return x_; }
  Bytes to_bytes() const { return x_.to_bytes(); }

  ToyTarget pow(ToyScalar e) const noexcept { return ToyTarget(x_ * e); }
  ToyTarget inverse() const noexcept { return ToyTarget(-x_); }
  bool is_identity() const noexcept { return x_.is_zero(); }

  friend ToyTarget operator*(ToyTarget a, ToyTarget b) noexcept { return ToyTarget(a.x_ + b.x_); }
  friend ToyTarget operator/(ToyTarget a, ToyTarget b) noexcept { return ToyTarget(a.x_ - b.x_); }
  friend bool operator==(ToyTarget a, ToyTarget b) noexcept = default;

 private:
  explicit constexpr ToyTarget(ToyScalar x) noexcept : x_(x) {}
  ToyScalar x_;
};

struct ToyGroup {
  using Scalar = ToyScalar;
  using Source = ToySource;
  using Target = ToyTarget;

  static constexpr std::uint8_t kId = 0xee;
  static constexpr std::string_view kName = "toy-insecure";

  static Source generator() noexcept { return Source::from_log(Scalar::one()); }
  static Target pair(Source a, Source b) noexcept { return Target::from_log(a.log() * b.log()); }
  static Target pair_generator() noexcept { return Target::from_log(Scalar::one()); }
  // Discrete log of H(m) is BLAKE2b(tag || m) mod p, never zero.
  static Source hash_to_group(ByteView message);
  static Scalar random_scalar(RandomSource& rng);
};

}  // namespace privlocker::group
