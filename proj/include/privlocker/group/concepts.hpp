#pragma once

#include <concepts>
#include <cstdint>
#include <string_view>

#include "privlocker/bytes.hpp"
#include "privlocker/random.hpp"

namespace privlocker::group {

// What the scheme needs from a group: a prime-order source group written
// multiplicatively, a target group, a pairing that is bilinear in the
// contract's sense, a hash onto the source group, and canonical
// fixed-length encodings for all three element kinds.
template <class G>
concept PairingGroup = requires(const typename G::Scalar& s, const typename G::Source& p,
                                const typename G::Target& t, ByteView bytes, RandomSource& rng) {
  { G::kId } -> std::convertible_to<std::uint8_t>;
  { G::kName } -> std::convertible_to<std::string_view>;
  { G::generator() } -> std::same_as<typename G::Source>;
  { G::pair(p, p) } -> std::same_as<typename G::Target>;
  { G::pair_generator() } -> std::same_as<typename G::Target>;
  { G::hash_to_group(bytes) } -> std::same_as<typename G::Source>;
  { G::random_scalar(rng) } -> std::same_as<typename G::Scalar>;

  { s + s } -> std::same_as<typename G::Scalar>;
  { s - s } -> std::same_as<typename G::Scalar>;
  { s * s } -> std::same_as<typename G::Scalar>;
  { -s } -> std::same_as<typename G::Scalar>;
  { s.inverse() } -> std::same_as<typename G::Scalar>;
  { s.is_zero() } -> std::same_as<bool>;
  { G::Scalar::from_u64(std::uint64_t{}) } -> std::same_as<typename G::Scalar>;
  { s.to_bytes() } -> std::same_as<Bytes>;
  { G::Scalar::from_bytes(bytes) } -> std::same_as<typename G::Scalar>;

  { p * p } -> std::same_as<typename G::Source>;
  { p.pow(s) } -> std::same_as<typename G::Source>;
  { p.inverse() } -> std::same_as<typename G::Source>;
  { p == p } -> std::same_as<bool>;
  { p.to_bytes() } -> std::same_as<Bytes>;
  { G::Source::from_bytes(bytes) } -> std::same_as<typename G::Source>;

  { t * t } -> std::same_as<typename G::Target>;
  { t / t } -> std::same_as<typename G::Target>;
  { t.pow(s) } -> std::same_as<typename G::Target>;
  { t.is_identity() } -> std::same_as<bool>;
  { t == t } -> std::same_as<bool>;
  { t.to_bytes() } -> std::same_as<Bytes>;
  { G::Target::from_bytes(bytes) } -> std::same_as<typename G::Target>;
};

}  // namespace privlocker::group
