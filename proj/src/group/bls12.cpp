#include "privlocker/group/bls12.hpp"

#include <algorithm>
#include <array>
#include <cstring>

#include "privlocker/error.hpp"

namespace privlocker::group {

namespace {

constexpr std::size_t kScalarBits = 255;

bool limbs_equal(const void* a, const void* b, std::size_t n) noexcept {
  return std::memcmp(a, b, n) == 0;
}

}  // namespace

// ---- BlsScalar ----

BlsScalar BlsScalar::from_u64(std::uint64_t v) noexcept {
  const std::uint64_t limbs[4] = {v, 0, 0, 0};
  BlsScalar out;
  blst_fr_from_uint64(&out.v_, limbs);
  return out;
}

BlsScalar BlsScalar::from_wide_bytes(ByteView le_bytes) {
  blst_scalar s;
  blst_scalar_from_le_bytes(&s, le_bytes.data(), le_bytes.size());
  BlsScalar out;
  blst_fr_from_scalar(&out.v_, &s);
  return out;
}

BlsScalar BlsScalar::from_bytes(ByteView bytes) {
  if (bytes.size() != kEncodedSize) {
    throw Error(ErrorCode::malformed_encoding, "scalar encoding must be 32 bytes");
  }
  blst_scalar s;
  blst_scalar_from_bendian(&s, bytes.data());
  if (!blst_scalar_fr_check(&s)) {
    throw Error(ErrorCode::malformed_encoding, "scalar not reduced modulo the group order");
  }
  BlsScalar out;
  blst_fr_from_scalar(&out.v_, &s);
  return out;
}

Bytes BlsScalar::to_bytes() const {
  blst_scalar s = to_blst();
  Bytes out(kEncodedSize);
  blst_bendian_from_scalar(out.data(), &s);
  return out;
}

blst_scalar BlsScalar::to_blst() const noexcept {
  blst_scalar s;
  blst_scalar_from_fr(&s, &v_);
  return s;
}

BlsScalar BlsScalar::inverse() const {
  if (is_zero()) throw Error(ErrorCode::invalid_argument, "inverse of zero scalar");
  BlsScalar out;
  blst_fr_eucl_inverse(&out.v_, &v_);
  return out;
}

bool BlsScalar::is_zero() const noexcept {
  static const blst_fr kZero{};
  return limbs_equal(&v_, &kZero, sizeof(v_));
}

BlsScalar operator+(const BlsScalar& a, const BlsScalar& b) noexcept {
  BlsScalar out;
  blst_fr_add(&out.v_, &a.v_, &b.v_);
  return out;
}

BlsScalar operator-(const BlsScalar& a, const BlsScalar& b) noexcept {
  BlsScalar out;
  blst_fr_sub(&out.v_, &a.v_, &b.v_);
  return out;
}

BlsScalar operator*(const BlsScalar& a, const BlsScalar& b) noexcept {
  BlsScalar out;
  blst_fr_mul(&out.v_, &a.v_, &b.v_);
  return out;
}

BlsScalar operator-(const BlsScalar& a) noexcept {
  BlsScalar out;
  blst_fr_cneg(&out.v_, &a.v_, true);
  return out;
}

bool operator==(const BlsScalar& a, const BlsScalar& b) noexcept {
  return limbs_equal(&a.v_, &b.v_, sizeof(a.v_));
}

// ---- BlsSource ----

BlsSource BlsSource::from_bytes(ByteView bytes) {
  if (bytes.size() != kEncodedSize) {
    throw Error(ErrorCode::malformed_encoding, "source element encoding must be 144 bytes");
  }
  auto check = [](BLST_ERROR err) {
    if (err == BLST_SUCCESS) return;
    if (err == BLST_BAD_ENCODING) throw Error(ErrorCode::malformed_encoding, "bad point encoding");
    throw Error(ErrorCode::off_group_point, "point is not on the curve");
  };
  blst_p1_affine a1;
  blst_p2_affine a2;
  check(blst_p1_uncompress(&a1, bytes.data()));
  check(blst_p2_uncompress(&a2, bytes.data() + 48));
  if (!blst_p1_affine_in_g1(&a1) || !blst_p2_affine_in_g2(&a2)) {
    throw Error(ErrorCode::off_group_point, "point outside the prime-order subgroup");
  }
  BlsSource out;
  blst_p1_from_affine(&out.g1_, &a1);
  blst_p2_from_affine(&out.g2_, &a2);
  return out;
}

Bytes BlsSource::to_bytes() const {
  Bytes out(kEncodedSize);
  blst_p1_compress(out.data(), &g1_);
  blst_p2_compress(out.data() + 48, &g2_);
  return out;
}

BlsSource BlsSource::pow(const BlsScalar& e) const {
  const blst_scalar s = e.to_blst();
  BlsSource out;
  blst_p1_mult(&out.g1_, &g1_, s.b, kScalarBits);
  blst_p2_mult(&out.g2_, &g2_, s.b, kScalarBits);
  return out;
}

BlsSource BlsSource::inverse() const {
  BlsSource out = *this;
  blst_p1_cneg(&out.g1_, true);
  blst_p2_cneg(&out.g2_, true);
  return out;
}

bool BlsSource::is_identity() const noexcept {
  return blst_p1_is_inf(&g1_) && blst_p2_is_inf(&g2_);
}

BlsSource operator*(const BlsSource& a, const BlsSource& b) noexcept {
  BlsSource out;
  blst_p1_add_or_double(&out.g1_, &a.g1_, &b.g1_);
  blst_p2_add_or_double(&out.g2_, &a.g2_, &b.g2_);
  return out;
}

bool operator==(const BlsSource& a, const BlsSource& b) noexcept {
  return blst_p1_is_equal(&a.g1_, &b.g1_) && blst_p2_is_equal(&a.g2_, &b.g2_);
}

// ---- BlsTarget ----

BlsTarget BlsTarget::from_bytes(ByteView bytes) {
  if (bytes.size() != kEncodedSize) {
    throw Error(ErrorCode::malformed_encoding, "target element encoding must be 576 bytes");
  }
  blst_fp12 v;
  const std::uint8_t* p = bytes.data();
  // Mirrors blst_bendian_from_fp12's coefficient order.
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 2; ++j) {
      blst_fp_from_bendian(&v.fp6[j].fp2[i].fp[0], p);
      p += 48;
      blst_fp_from_bendian(&v.fp6[j].fp2[i].fp[1], p);
      p += 48;
    }
  }
  BlsTarget out(v);
  // Non-canonical coefficients (>= field modulus) do not survive the round trip.
  Bytes canonical = out.to_bytes();
  if (!std::equal(canonical.begin(), canonical.end(), bytes.begin())) {
    throw Error(ErrorCode::malformed_encoding, "non-canonical target element encoding");
  }
  if (!blst_fp12_in_group(&v)) {
    throw Error(ErrorCode::off_group_point, "element outside the pairing target group");
  }
  return out;
}

Bytes BlsTarget::to_bytes() const {
  Bytes out(kEncodedSize);
  blst_bendian_from_fp12(out.data(), &v_);
  return out;
}

BlsTarget BlsTarget::pow(const BlsScalar& e) const {
  const blst_scalar s = e.to_blst();
  // Fixed 4-bit window, most significant nibble first.
  std::array<blst_fp12, 16> table;
  table[0] = *blst_fp12_one();
  table[1] = v_;
  for (std::size_t i = 2; i < table.size(); ++i) blst_fp12_mul(&table[i], &table[i - 1], &v_);

  blst_fp12 acc = *blst_fp12_one();
  for (int byte = 31; byte >= 0; --byte) {
    for (int half = 1; half >= 0; --half) {
      for (int k = 0; k < 4; ++k) blst_fp12_cyclotomic_sqr(&acc, &acc);
      const unsigned nibble = (s.b[byte] >> (4 * half)) & 0x0f;
      if (nibble != 0) blst_fp12_mul(&acc, &acc, &table[nibble]);
    }
  }
  return BlsTarget(acc);
}

BlsTarget BlsTarget::inverse() const {
  BlsTarget out;
  blst_fp12_inverse(&out.v_, &v_);
  return out;
}

bool BlsTarget::is_identity() const noexcept { return blst_fp12_is_one(&v_); }

BlsTarget operator*(const BlsTarget& a, const BlsTarget& b) noexcept {
  BlsTarget out;
  blst_fp12_mul(&out.v_, &a.v_, &b.v_);
  return out;
}

BlsTarget operator/(const BlsTarget& a, const BlsTarget& b) { return a * b.inverse(); }

bool operator==(const BlsTarget& a, const BlsTarget& b) noexcept {
  return blst_fp12_is_equal(&a.v_, &b.v_);
}

// ---- Bls12 ----

BlsSource Bls12::generator() noexcept {
  return BlsSource(*blst_p1_generator(), *blst_p2_generator());
}

BlsTarget Bls12::pair(const BlsSource& left, const BlsSource& right) {
  if (blst_p1_is_inf(&left.g1()) || blst_p2_is_inf(&right.g2())) return BlsTarget::identity();
  blst_p1_affine p;
  blst_p2_affine q;
  blst_p1_to_affine(&p, &left.g1());
  blst_p2_to_affine(&q, &right.g2());
  blst_fp12 ml;
  blst_fp12 out;
  blst_miller_loop(&ml, &q, &p);
  blst_final_exp(&out, &ml);
  return BlsTarget(out);
}

const BlsTarget& Bls12::pair_generator_ref() {
  static const BlsTarget egg = pair(generator(), generator());
  return egg;
}

BlsSource Bls12::hash_to_group(ByteView message) {
  const auto* tag = reinterpret_cast<const std::uint8_t*>(kHashTag.data());
  blst_p1 h1;
  blst_p2 h2;
  blst_hash_to_g1(&h1, message.data(), message.size(), tag, kHashTag.size(), nullptr, 0);
  blst_hash_to_g2(&h2, message.data(), message.size(), tag, kHashTag.size(), nullptr, 0);
  return BlsSource(h1, h2);
}

BlsScalar Bls12::random_scalar(RandomSource& rng) {
  std::array<std::uint8_t, 64> wide{};
  for (;;) {
    rng.fill(wide);
    BlsScalar s = BlsScalar::from_wide_bytes(wide);
    if (!s.is_zero()) return s;
  }
}

}  // namespace privlocker::group
