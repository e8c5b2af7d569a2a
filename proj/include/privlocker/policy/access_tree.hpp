#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "privlocker/bytes.hpp"
#include "privlocker/error.hpp"

namespace privlocker::policy {

// `authority/name`. The authority is the issuing attribute authority; the
// name may itself contain '/', only the first one separates.
struct AttributeLabel {
  std::string authority;
  std::string name;

  static AttributeLabel parse(std::string_view canonical);
  std::string canonical() const { return authority + "/" + name; }

  friend auto operator<=>(const AttributeLabel&, const AttributeLabel&) = default;
};

using AttributeSet = std::set<AttributeLabel>;

// Preorder position of a node; the root is 0.
using NodeId = std::size_t;

enum class NodeKind : std::uint8_t {
  leaf = 1,
  // k-of-n gate with Shamir sharing; k = n is AND, k = 1 is OR.
  threshold = 2,
  // n-of-n gate with additive sharing: children's shares sum to the parent's.
  // Produced when two parties' subtrees are composed under one root.
  joint = 3,
};

struct PolicyNode {
  NodeKind kind = NodeKind::leaf;
  std::uint32_t threshold = 1;         // k_x; 1 for leaves, n for joint gates
  std::uint32_t index = 0;             // 1-based position under the parent, 0 at the root
  std::optional<NodeId> parent;
  std::vector<NodeId> children;
  AttributeLabel attribute;            // leaves only

  bool is_leaf() const noexcept { return kind == NodeKind::leaf; }
  friend bool operator==(const PolicyNode&, const PolicyNode&) = default;
};

// Immutable threshold-gate access tree stored flat in preorder.
class AccessTree {
 public:
  static AccessTree leaf(AttributeLabel attribute);
  // Throws threshold_out_of_range unless 1 <= k <= children.size(), and
  // empty_gate for no children.
  static AccessTree threshold(std::uint32_t k, std::vector<AccessTree> children);
  static AccessTree all_of(std::vector<AccessTree> children);
  static AccessTree any_of(std::vector<AccessTree> children);
  static AccessTree joint(std::vector<AccessTree> children);

  const PolicyNode& node(NodeId id) const { return nodes_.at(id); }
  const PolicyNode& root() const { return nodes_.front(); }
  std::size_t size() const noexcept { return nodes_.size(); }
  std::span<const PolicyNode> nodes() const noexcept { return nodes_; }

  // Leaf node ids in preorder. Ciphertext leaf components use this order.
  std::vector<NodeId> leaves() const;
  std::size_t leaf_count() const;
  // Distinct authorities appearing on leaves.
  std::set<std::string> authorities() const;
  std::size_t depth() const;

  // Copy of the subtree rooted at `id`, renumbered from 0.
  AccessTree subtree(NodeId id) const;

  friend bool operator==(const AccessTree& a, const AccessTree& b);

 private:
  static AccessTree gate(NodeKind kind, std::uint32_t k, std::vector<AccessTree> children);
  std::vector<PolicyNode> nodes_;
};

// Recursive satisfaction: a leaf holds iff its label is in `attrs`; a gate
// holds iff at least k_x children hold.
bool satisfies(const AccessTree& tree, const AttributeSet& attrs);
bool satisfies(const AccessTree& tree, NodeId node, const AttributeSet& attrs);

// Policy text. Grammar:
//   expr := attr | '(' expr ')' | '(' expr (AND expr)+ ')' | '(' expr (OR expr)+ ')'
//         | THRESHOLD '(' k ';' expr (',' expr)* ')' | JOINT '(' expr (',' expr)* ')'
//   attr := authority '/' name
// Keywords are case-insensitive. Mixing AND and OR inside one group is an error.
class PolicyParseError : public Error {
 public:
  PolicyParseError(ErrorCode code, const std::string& message, std::size_t position)
      : Error(code, message + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

AccessTree parse_policy(std::string_view text);
// Canonical text form; parse_policy(render_policy(t)) == t.
std::string render_policy(const AccessTree& tree);

// Canonical binary form (preorder): per node a kind tag, then for leaves the
// authority and name blobs, for gates the threshold and child count (u32).
void encode_tree(ByteWriter& out, const AccessTree& tree);
AccessTree decode_tree(ByteReader& in);

}  // namespace privlocker::policy
