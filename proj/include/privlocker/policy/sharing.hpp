#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "privlocker/error.hpp"
#include "privlocker/group/concepts.hpp"
#include "privlocker/policy/access_tree.hpp"
#include "privlocker/random.hpp"

namespace privlocker::policy {

// q_x(0) for every node, indexed by preorder NodeId; shares[0] is the secret.
template <class Scalar>
struct ShareAssignment {
  std::vector<Scalar> shares;

  const Scalar& root_secret() const { return shares.front(); }
  const Scalar& operator[](NodeId id) const { return shares.at(id); }
};

// Top-down sharing of `secret` over the tree. A threshold gate draws a
// degree k-1 polynomial with q(0) = its own share and hands child i the
// value q(i); a joint gate splits its share additively.
template <group::PairingGroup G>
ShareAssignment<typename G::Scalar> assign_shares(const AccessTree& tree, const typename G::Scalar& secret,
                                                  RandomSource& rng) {
  using Scalar = typename G::Scalar;
  ShareAssignment<Scalar> out;
  out.shares.resize(tree.size());
  out.shares[0] = secret;
  for (NodeId id = 0; id < tree.size(); ++id) {
    const auto& n = tree.node(id);
    if (n.is_leaf()) continue;
    const Scalar& own = out.shares[id];
    if (n.kind == NodeKind::joint) {
      Scalar rest = own;
      for (std::size_t i = 0; i + 1 < n.children.size(); ++i) {
        Scalar s = G::random_scalar(rng);
        out.shares[n.children[i]] = s;
        rest = rest - s;
      }
      out.shares[n.children.back()] = rest;
      continue;
    }
    std::vector<Scalar> coeffs{own};
    for (std::uint32_t d = 1; d < n.threshold; ++d) coeffs.push_back(G::random_scalar(rng));
    for (auto c : n.children) {
      const Scalar x = Scalar::from_u64(tree.node(c).index);
      Scalar acc = coeffs.back();
      for (std::size_t j = coeffs.size() - 1; j-- > 0;) acc = acc * x + coeffs[j];
      out.shares[c] = acc;
    }
  }
  return out;
}

// Delta_{i,S}(0) = prod_{j in S, j != i} (0 - j) / (i - j).
template <class Scalar>
Scalar lagrange_coeff(std::uint32_t i, std::span<const std::uint32_t> indices) {
  if (std::find(indices.begin(), indices.end(), i) == indices.end()) {
    throw Error(ErrorCode::invalid_argument, "lagrange index not in the interpolation set");
  }
  Scalar num = Scalar::from_u64(1);
  Scalar den = Scalar::from_u64(1);
  const Scalar xi = Scalar::from_u64(i);
  for (auto j : indices) {
    if (j == 0) throw Error(ErrorCode::invalid_argument, "interpolation indices must be nonzero");
    if (j == i) continue;
    const Scalar xj = Scalar::from_u64(j);
    num = num * (-xj);
    den = den * (xi - xj);
  }
  if (den.is_zero()) throw Error(ErrorCode::invalid_argument, "duplicate interpolation index");
  return num * den.inverse();
}

// `child_ok[p]` reports whether the child at 1-based index p+1 produced a
// value. Picks the k_x lowest successful indices, or nothing when fewer
// than k_x succeeded.
std::optional<std::vector<std::uint32_t>> select_satisfying_children(const PolicyNode& gate,
                                                                     const std::vector<bool>& child_ok);

// Coefficients that recombine the chosen children's shares into the gate's:
// Lagrange weights for threshold gates, all ones for joint gates.
template <class Scalar>
std::vector<Scalar> recombination_coefficients(const PolicyNode& gate, std::span<const std::uint32_t> chosen) {
  std::vector<Scalar> out;
  out.reserve(chosen.size());
  for (auto i : chosen) {
    out.push_back(gate.kind == NodeKind::joint ? Scalar::from_u64(1) : lagrange_coeff<Scalar>(i, chosen));
  }
  return out;
}

}  // namespace privlocker::policy
