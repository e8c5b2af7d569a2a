#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <random>

#include "privlocker/group/toy.hpp"
#include "privlocker/policy/access_tree.hpp"
#include "privlocker/policy/sharing.hpp"

using namespace privlocker;
using namespace privlocker::policy;
using group::ToyGroup;
using group::ToyScalar;

namespace {

AttributeLabel L(std::string_view s) { return AttributeLabel::parse(s); }
AccessTree leaf(std::string_view s) { return AccessTree::leaf(L(s)); }

ErrorCode parse_error_code(std::string_view text) {
  try {
    (void)parse_policy(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("policy parsed unexpectedly: " << text);
  return ErrorCode::invalid_argument;
}

// Random tree of depth <= max_depth over attributes a/0..a/(n-1).
AccessTree random_tree(std::mt19937_64& gen, int max_depth, int n_attrs) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); };
  if (max_depth <= 1 || pick(0, 3) == 0) return leaf("a/" + std::to_string(pick(0, n_attrs - 1)));
  const int n = pick(1, 4);
  std::vector<AccessTree> kids;
  for (int i = 0; i < n; ++i) kids.push_back(random_tree(gen, max_depth - 1, n_attrs));
  switch (pick(0, 3)) {
    case 0: return AccessTree::all_of(std::move(kids));
    case 1: return AccessTree::any_of(std::move(kids));
    case 2: return AccessTree::joint(std::move(kids));
    default: return AccessTree::threshold(static_cast<std::uint32_t>(pick(1, n)), std::move(kids));
  }
}

AttributeSet random_subset(std::mt19937_64& gen, int n_attrs) {
  AttributeSet s;
  for (int i = 0; i < n_attrs; ++i) {
    if (gen() & 1) s.insert(L("a/" + std::to_string(i)));
  }
  return s;
}

// Test-local interpolation: q(0) from points (x_i, y_i) by the textbook formula.
ToyScalar interpolate_at_zero(const std::vector<std::pair<std::uint64_t, ToyScalar>>& pts) {
  ToyScalar acc = ToyScalar::zero();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    ToyScalar w = ToyScalar::one();
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (i == j) continue;
      auto xi = ToyScalar::from_u64(pts[i].first);
      auto xj = ToyScalar::from_u64(pts[j].first);
      w = w * xj * (xj - xi).inverse();
    }
    acc = acc + pts[i].second * w;
  }
  return acc;
}

// Reconstructs the root share from the leaf shares the attribute set unlocks;
// nullopt when some gate lacks enough children.
std::optional<ToyScalar> reconstruct(const AccessTree& t, NodeId id, const ShareAssignment<ToyScalar>& sh,
                                     const AttributeSet& attrs) {
  const auto& n = t.node(id);
  if (n.is_leaf()) return attrs.contains(n.attribute) ? std::optional(sh[id]) : std::nullopt;
  std::vector<std::pair<std::uint64_t, ToyScalar>> pts;
  for (auto c : n.children) {
    if (auto v = reconstruct(t, c, sh, attrs)) pts.emplace_back(t.node(c).index, *v);
  }
  if (pts.size() < n.threshold) return std::nullopt;
  pts.resize(n.threshold);
  if (n.kind == NodeKind::joint) {
    ToyScalar sum = ToyScalar::zero();
    for (auto& [_, v] : pts) sum = sum + v;
    return sum;
  }
  return interpolate_at_zero(pts);
}

}  // namespace

TEST_CASE("parse AND / OR / THRESHOLD forms") {
  auto t = parse_policy("(cbse/student AND uni/faculty)");
  CHECK(t.root().kind == NodeKind::threshold);
  CHECK(t.root().threshold == 2);
  CHECK(t.root().children.size() == 2);
  CHECK(t.node(1).attribute == L("cbse/student"));
  CHECK(t.node(2).index == 2);

  auto th = parse_policy("THRESHOLD(2; a/x, a/y, a/z)");
  CHECK(th.root().threshold == 2);
  CHECK(th.root().children.size() == 3);

  auto o = parse_policy("(a/x or a/y)");
  CHECK(o.root().threshold == 1);

  CHECK(parse_policy("((a/x))") == leaf("a/x"));
  CHECK(parse_policy("a/x/y").root().attribute.name == "x/y");
}

TEST_CASE("parse errors carry codes and positions") {
  CHECK(parse_error_code("THRESHOLD(4; a/x, a/y)") == ErrorCode::threshold_out_of_range);
  CHECK(parse_error_code("THRESHOLD(0; a/x)") == ErrorCode::threshold_out_of_range);
  CHECK(parse_error_code("()") == ErrorCode::empty_gate);
  CHECK(parse_error_code("JOINT()") == ErrorCode::empty_gate);
  CHECK(parse_error_code("(a/x AND a/y OR a/z)") == ErrorCode::parse_error);
  CHECK(parse_error_code("(a/x AND") == ErrorCode::parse_error);
  CHECK(parse_error_code("noslash") == ErrorCode::parse_error);
  CHECK(parse_error_code("a/x a/y") == ErrorCode::parse_error);
  try {
    (void)parse_policy("(a/x AND a/y OR a/z)");
  } catch (const PolicyParseError& e) {
    CHECK(e.position() == 13);
  }
}

TEST_CASE("satisfies follows the recursive threshold definition") {
  auto and_ab = parse_policy("(a/a AND a/b)");
  auto or_ab = parse_policy("(a/a OR a/b)");
  CHECK_FALSE(satisfies(and_ab, {L("a/a")}));
  CHECK(satisfies(and_ab, {L("a/a"), L("a/b")}));
  CHECK(satisfies(or_ab, {L("a/b")}));
  CHECK_FALSE(satisfies(or_ab, {}));

  // Enumerate all 8 subsets of {a,b,c}; oracle: at least two members present.
  auto th = parse_policy("THRESHOLD(2; a/a, a/b, a/c)");
  const char* names[] = {"a/a", "a/b", "a/c"};
  for (unsigned mask = 0; mask < 8; ++mask) {
    AttributeSet s;
    int count = 0;
    for (int i = 0; i < 3; ++i) {
      if (mask & (1u << i)) {
        s.insert(L(names[i]));
        ++count;
      }
    }
    CHECK(satisfies(th, s) == (count >= 2));
  }
}

TEST_CASE("duplicate labels are distinct leaves") {
  auto t = parse_policy("(a/x AND a/x)");
  CHECK(t.leaf_count() == 2);
  CHECK(satisfies(t, {L("a/x")}));
}

TEST_CASE("lagrange coefficients") {
  const std::uint32_t s1[] = {1};
  const std::uint32_t s12[] = {1, 2};
  CHECK(lagrange_coeff<ToyScalar>(1, s1) == ToyScalar::one());
  CHECK(lagrange_coeff<ToyScalar>(1, s12) == ToyScalar::from_u64(2));
  CHECK(lagrange_coeff<ToyScalar>(2, s12) == ToyScalar::from_u64(group::kToyOrder - 1));
  CHECK_THROWS_AS(lagrange_coeff<ToyScalar>(3, s12), Error);

  // Degree-2 polynomial q(x) = 5 + 7x + 11x^2 evaluated directly.
  auto q = [](std::uint64_t x) { return ToyScalar::from_u64(5 + 7 * x + 11 * x * x); };
  const std::uint32_t s123[] = {1, 2, 3};
  ToyScalar acc = ToyScalar::zero();
  for (auto i : s123) acc = acc + q(i) * lagrange_coeff<ToyScalar>(i, s123);
  CHECK(acc == ToyScalar::from_u64(5));
}

TEST_CASE("select_satisfying_children takes the lowest successful indices") {
  PolicyNode gate;
  gate.kind = NodeKind::threshold;
  gate.threshold = 2;
  CHECK(*select_satisfying_children(gate, {true, false, true, true}) == std::vector<std::uint32_t>{1, 3});
  CHECK_FALSE(select_satisfying_children(gate, {false, false, true}).has_value());
  gate.threshold = 1;
  CHECK(*select_satisfying_children(gate, {false, true}) == std::vector<std::uint32_t>{2});
}

TEST_CASE("assign_shares shapes") {
  SystemRandom rng;
  const auto s = ToyGroup::random_scalar(rng);

  auto single = assign_shares<ToyGroup>(leaf("a/a"), s, rng);
  CHECK(single.shares.size() == 1);
  CHECK(single.root_secret() == s);

  auto and_sh = assign_shares<ToyGroup>(parse_policy("(a/a AND a/b)"), s, rng);
  CHECK(ToyScalar::from_u64(2) * and_sh[1] - and_sh[2] == s);

  auto or_sh = assign_shares<ToyGroup>(parse_policy("(a/a OR a/b)"), s, rng);
  CHECK(or_sh[1] == s);
  CHECK(or_sh[2] == s);

  auto joint_sh = assign_shares<ToyGroup>(parse_policy("JOINT(a/a, a/b, a/c)"), s, rng);
  CHECK(joint_sh[1] + joint_sh[2] + joint_sh[3] == s);
}

TEST_CASE("property: reconstruction succeeds iff satisfied, and recovers the secret") {
  std::mt19937_64 gen(7);
  SystemRandom rng;
  for (int trial = 0; trial < 300; ++trial) {
    auto t = random_tree(gen, 3, 5);
    auto secret = ToyGroup::random_scalar(rng);
    auto sh = assign_shares<ToyGroup>(t, secret, rng);
    auto attrs = random_subset(gen, 5);
    auto got = reconstruct(t, 0, sh, attrs);
    REQUIRE(got.has_value() == satisfies(t, attrs));
    if (got) CHECK(*got == secret);
  }
}

TEST_CASE("property: satisfaction is monotone") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 300; ++trial) {
    auto t = random_tree(gen, 3, 5);
    auto a = random_subset(gen, 5);
    auto b = a;
    for (auto& extra : random_subset(gen, 5)) b.insert(extra);
    if (satisfies(t, a)) CHECK(satisfies(t, b));
  }
}

TEST_CASE("property: render/parse and binary encoding round-trip") {
  std::mt19937_64 gen(13);
  for (int trial = 0; trial < 200; ++trial) {
    auto t = random_tree(gen, 4, 6);
    CHECK(parse_policy(render_policy(t)) == t);
    ByteWriter w;
    encode_tree(w, t);
    ByteReader r(w.bytes());
    CHECK(decode_tree(r) == t);
    CHECK(r.at_end());
  }
}

TEST_CASE("decode_tree rejects malformed input") {
  ByteWriter w;
  encode_tree(w, parse_policy("THRESHOLD(2; a/x, a/y)"));
  auto bytes = w.take();
  auto truncated = bytes;
  truncated.pop_back();
  ByteReader r1(truncated);
  CHECK_THROWS_AS(decode_tree(r1), Error);
  bytes[4] = 9;  // threshold 2 -> 9 (low byte of the u32)
  ByteReader r2(bytes);
  try {
    (void)decode_tree(r2);
    FAIL("bad threshold accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::malformed_encoding);
  }
}

TEST_CASE("subtree and authorities") {
  auto t = parse_policy("JOINT((s/a AND s/b), THRESHOLD(1; i/c))");
  CHECK(t.authorities() == std::set<std::string>{"i", "s"});
  CHECK(t.depth() == 3);
  CHECK(t.subtree(1) == parse_policy("(s/a AND s/b)"));
  CHECK(t.leaves() == std::vector<NodeId>{2, 3, 5});
}
