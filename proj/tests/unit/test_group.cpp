#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "privlocker/error.hpp"
#include "privlocker/group/bls12.hpp"
#include "privlocker/group/concepts.hpp"
#include "privlocker/group/toy.hpp"

using namespace privlocker;
using group::Bls12;
using group::ToyGroup;

static_assert(group::PairingGroup<Bls12>);
static_assert(group::PairingGroup<ToyGroup>);

#define BACKENDS Bls12, ToyGroup

TEST_CASE_TEMPLATE("random scalars are nonzero and distinct", G, BACKENDS) {
  SystemRandom rng;
  auto a = G::random_scalar(rng);
  auto b = G::random_scalar(rng);
  CHECK_FALSE(a.is_zero());
  CHECK_FALSE(a == b);
}

TEST_CASE_TEMPLATE("seeded source reproduces its sequence", G, BACKENDS) {
  SeededRandom first(42, "stream");
  SeededRandom second(42, "stream");
  SeededRandom other(43, "stream");
  for (int i = 0; i < 5; ++i) {
    auto a = G::random_scalar(first);
    CHECK(a == G::random_scalar(second));
    CHECK_FALSE(a == G::random_scalar(other));
  }
}

TEST_CASE_TEMPLATE("scalar field arithmetic", G, BACKENDS) {
  using S = typename G::Scalar;
  SystemRandom rng;
  for (int i = 0; i < 100; ++i) {
    auto a = G::random_scalar(rng);
    CHECK(a * a.inverse() == S::from_u64(1));
    CHECK(a + (-a) == S::zero());
    CHECK(S::from_bytes(a.to_bytes()) == a);
  }
  CHECK_THROWS_AS(S::zero().inverse(), Error);
  CHECK(S::from_u64(2) * S::from_u64(3) == S::from_u64(6));
  CHECK(S::from_u64(0) - S::from_u64(1) == -S::from_u64(1));
}

TEST_CASE_TEMPLATE("pairing is bilinear, symmetric on generator powers, non-degenerate", G, BACKENDS) {
  SystemRandom rng;
  const auto g = G::generator();
  const auto egg = G::pair(g, g);
  CHECK_FALSE(egg.is_identity());
  CHECK(egg == G::pair_generator());
  for (int i = 0; i < 10; ++i) {
    auto a = G::random_scalar(rng);
    auto b = G::random_scalar(rng);
    CHECK(G::pair(g.pow(a), g.pow(b)) == egg.pow(a * b));
    CHECK(G::pair(g.pow(a), g.pow(b)) == G::pair(g.pow(b), g.pow(a)));
  }
  using S = typename G::Scalar;
  CHECK(G::pair(g.pow(S::from_u64(2)), g.pow(S::from_u64(3))) == egg.pow(S::from_u64(6)));
  CHECK(G::pair(g, g.pow(S::zero())).is_identity());
}

TEST_CASE_TEMPLATE("exponentiation composes", G, BACKENDS) {
  SystemRandom rng;
  auto a = G::random_scalar(rng);
  auto b = G::random_scalar(rng);
  auto p = G::generator().pow(G::random_scalar(rng));
  CHECK(p.pow(a).pow(b) == p.pow(a * b));
  CHECK(p.pow(a) * p.pow(b) == p.pow(a + b));
  CHECK((p * p.inverse()).is_identity());
  auto t = G::pair_generator();
  CHECK(t.pow(a).pow(b) == t.pow(a * b));
  CHECK(t.pow(a) / t.pow(a) == G::Target::identity());
}

TEST_CASE_TEMPLATE("hash_to_group is deterministic and separates inputs", G, BACKENDS) {
  auto a1 = G::hash_to_group(as_bytes("a"));
  auto a2 = G::hash_to_group(as_bytes("a"));
  auto b = G::hash_to_group(as_bytes("b"));
  auto empty = G::hash_to_group(as_bytes(""));
  CHECK(a1 == a2);
  CHECK_FALSE(a1 == b);
  CHECK_FALSE(empty.is_identity());
  CHECK(G::Source::from_bytes(empty.to_bytes()) == empty);
}

TEST_CASE_TEMPLATE("element encodings round-trip and reject truncation", G, BACKENDS) {
  SystemRandom rng;
  for (int i = 0; i < 20; ++i) {
    auto p = G::generator().pow(G::random_scalar(rng));
    auto t = G::pair_generator().pow(G::random_scalar(rng));
    auto pb = p.to_bytes();
    auto tb = t.to_bytes();
    CHECK(pb.size() == G::Source::kEncodedSize);
    CHECK(tb.size() == G::Target::kEncodedSize);
    CHECK(G::Source::from_bytes(pb) == p);
    CHECK(G::Target::from_bytes(tb) == t);
    pb.pop_back();
    try {
      (void)G::Source::from_bytes(pb);
      FAIL("truncated encoding accepted");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::malformed_encoding);
    }
  }
}

TEST_CASE("bls12 rejects all-zero and off-group encodings") {
  Bytes zeros(group::BlsSource::kEncodedSize, 0);
  // Compressed encodings must carry the 0x80 flag; all-zero lacks it.
  try {
    (void)group::BlsSource::from_bytes(zeros);
    FAIL("all-zero source accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::malformed_encoding);
  }
  Bytes tzeros(group::BlsTarget::kEncodedSize, 0);
  CHECK_THROWS_AS((void)group::BlsTarget::from_bytes(tzeros), Error);

  // A corrupted x coordinate is either off the curve or decodes to a different point.
  auto g = Bls12::generator().to_bytes();
  g[20] ^= 0x01;
  bool rejected = false;
  try {
    auto p = group::BlsSource::from_bytes(g);
    rejected = !(p == Bls12::generator());
  } catch (const Error& e) {
    rejected = e.code() == ErrorCode::off_group_point || e.code() == ErrorCode::malformed_encoding;
  }
  CHECK(rejected);

  // A target element that is a valid Fp12 value but not in the order-r subgroup.
  auto one = group::BlsTarget::identity().to_bytes();
  one[47] = 2;  // constant coefficient 2
  try {
    (void)group::BlsTarget::from_bytes(one);
    FAIL("element outside the target group accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::off_group_point);
  }
}

TEST_CASE("bls12 scalars reject unreduced encodings") {
  Bytes all_ff(32, 0xff);
  CHECK_THROWS_AS((void)group::BlsScalar::from_bytes(all_ff), Error);
  CHECK(group::BlsScalar::from_bytes(group::BlsScalar::from_u64(7).to_bytes()) == group::BlsScalar::from_u64(7));
}

TEST_CASE("toy group keeps exponents in the clear") {
  using group::ToyScalar;
  auto g = ToyGroup::generator();
  auto a = ToyScalar::from_u64(11);
  auto b = ToyScalar::from_u64(13);
  CHECK(ToyGroup::pair(g.pow(a), g.pow(b)).log() == ToyScalar::from_u64(143));
  CHECK(ToyScalar::from_u64(group::kToyOrder) == ToyScalar::zero());
  Bytes big = {0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff};
  CHECK_THROWS_AS((void)group::ToySource::from_bytes(big), Error);
}
