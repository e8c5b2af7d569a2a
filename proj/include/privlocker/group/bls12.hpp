#pragma once

#include <blst.h>

#include <cstdint>
#include <string_view>

#include "privlocker/bytes.hpp"
#include "privlocker/random.hpp"

namespace privlocker::group {

// Element of Z_r, r the 255-bit BLS12-381 subgroup order.
// Encoding: 32 bytes big-endian, must be < r.
class BlsScalar {
 public:
  static constexpr std::size_t kEncodedSize = 32;

  BlsScalar() noexcept : v_{} {}

  static BlsScalar from_u64(std::uint64_t v) noexcept;
  static BlsScalar zero() noexcept { return {}; }
  static BlsScalar one() noexcept { return from_u64(1); }
  // Reduces an arbitrary-length little-endian integer modulo r.
  static BlsScalar from_wide_bytes(ByteView le_bytes);
  static BlsScalar from_bytes(ByteView bytes);

  Bytes to_bytes() const;
  blst_scalar to_blst() const noexcept;

  BlsScalar inverse() const;
  bool is_zero() const noexcept;

  friend BlsScalar operator+(const BlsScalar& a, const BlsScalar& b) noexcept;
  friend BlsScalar operator-(const BlsScalar& a, const BlsScalar& b) noexcept;
  friend BlsScalar operator*(const BlsScalar& a, const BlsScalar& b) noexcept;
  friend BlsScalar operator-(const BlsScalar& a) noexcept;
  friend bool operator==(const BlsScalar& a, const BlsScalar& b) noexcept;

 private:
  blst_fr v_;
};

// Logical element of the symmetric source group, carried as a G1 point and
// a G2 point exponentiated in lockstep. Encoding: compressed G1 (48 bytes)
// followed by compressed G2 (96 bytes).
//
// For elements derived from the generator the two sides share one discrete
// log, so pair() is symmetric on them. Hashed elements are hashed onto each
// side independently; such elements must be passed as the LEFT pairing
// operand, where only their G1 side is read.
class BlsSource {
 public:
  static constexpr std::size_t kEncodedSize = 48 + 96;

  BlsSource() noexcept : g1_{}, g2_{} {}
  BlsSource(const blst_p1& g1, const blst_p2& g2) noexcept : g1_(g1), g2_(g2) {}

  static BlsSource identity() noexcept { return {}; }
  static BlsSource from_bytes(ByteView bytes);

  Bytes to_bytes() const;
  BlsSource pow(const BlsScalar& e) const;
  BlsSource inverse() const;
  bool is_identity() const noexcept;

  const blst_p1& g1() const noexcept { return g1_; }
  const blst_p2& g2() const noexcept { return g2_; }

  friend BlsSource operator*(const BlsSource& a, const BlsSource& b) noexcept;
  friend bool operator==(const BlsSource& a, const BlsSource& b) noexcept;

 private:
  blst_p1 g1_;
  blst_p2 g2_;
};

// Element of the order-r subgroup of Fp12*. Encoding: blst's 576-byte
// big-endian coefficient order, canonical and subgroup-checked on decode.
class BlsTarget {
 public:
  static constexpr std::size_t kEncodedSize = 48 * 12;

  BlsTarget() noexcept : v_(*blst_fp12_one()) {}
  explicit BlsTarget(const blst_fp12& v) noexcept : v_(v) {}

  static BlsTarget identity() noexcept { return {}; }
  static BlsTarget from_bytes(ByteView bytes);

  Bytes to_bytes() const;
  BlsTarget pow(const BlsScalar& e) const;
  BlsTarget inverse() const;
  bool is_identity() const noexcept;

  friend BlsTarget operator*(const BlsTarget& a, const BlsTarget& b) noexcept;
  friend BlsTarget operator/(const BlsTarget& a, const BlsTarget& b);
  friend bool operator==(const BlsTarget& a, const BlsTarget& b) noexcept;

 private:
  blst_fp12 v_;
};

struct Bls12 {
  using Scalar = BlsScalar;
  using Source = BlsSource;
  using Target = BlsTarget;

  static constexpr std::uint8_t kId = 1;
  static constexpr std::string_view kName = "bls12-381";
  // Hash-to-curve domain tag, used verbatim for both the G1 and G2 side.
  static constexpr std::string_view kHashTag = "PRIVLOCKER-V01-ATTR_XMD:SHA-256_SSWU_RO_";

  static Source generator() noexcept;
  // pair(P, Q) = e(P.g1, Q.g2).
  static Target pair(const Source& left, const Source& right);
  // e(g, g), cached.
  static const Target& pair_generator_ref();
  static Target pair_generator() { return pair_generator_ref(); }
  static Source hash_to_group(ByteView message);
  static Scalar random_scalar(RandomSource& rng);
};

}  // namespace privlocker::group
