#include "privlocker/policy/access_tree.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

namespace privlocker::policy {

namespace {

constexpr std::size_t kMaxDepth = 64;
constexpr std::size_t kMaxNodes = 1u << 16;

bool is_reserved_char(char c) {
  return std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == ',' || c == ';';
}

void validate_label(const AttributeLabel& label) {
  if (label.authority.empty() || label.name.empty()) {
    throw Error(ErrorCode::invalid_argument, "attribute label needs authority and name");
  }
  if (label.authority.find('/') != std::string::npos) {
    throw Error(ErrorCode::invalid_argument, "attribute authority must not contain '/'");
  }
  auto bad = [](const std::string& s) { return std::any_of(s.begin(), s.end(), is_reserved_char); };
  if (bad(label.authority) || bad(label.name)) {
    throw Error(ErrorCode::invalid_argument,
                "attribute label contains whitespace or policy punctuation: " + label.canonical());
  }
}

}  // namespace

AttributeLabel AttributeLabel::parse(std::string_view canonical) {
  auto slash = canonical.find('/');
  if (slash == std::string_view::npos) {
    throw Error(ErrorCode::invalid_argument,
                "attribute label must be authority/name: " + std::string(canonical));
  }
  AttributeLabel label{std::string(canonical.substr(0, slash)), std::string(canonical.substr(slash + 1))};
  validate_label(label);
  return label;
}

AccessTree AccessTree::leaf(AttributeLabel attribute) {
  validate_label(attribute);
  AccessTree t;
  PolicyNode n;
  n.kind = NodeKind::leaf;
  n.threshold = 1;
  n.attribute = std::move(attribute);
  t.nodes_.push_back(std::move(n));
  return t;
}

AccessTree AccessTree::gate(NodeKind kind, std::uint32_t k, std::vector<AccessTree> children) {
  if (children.empty()) throw Error(ErrorCode::empty_gate, "gate without children");
  if (k < 1 || k > children.size()) {
    throw Error(ErrorCode::threshold_out_of_range,
                "threshold " + std::to_string(k) + " outside 1.." + std::to_string(children.size()));
  }
  AccessTree t;
  PolicyNode g;
  g.kind = kind;
  g.threshold = k;
  t.nodes_.push_back(std::move(g));
  for (std::size_t i = 0; i < children.size(); ++i) {
    const NodeId offset = t.nodes_.size();
    for (auto n : children[i].nodes_) {
      for (auto& c : n.children) c += offset;
      if (n.parent) *n.parent += offset;
      t.nodes_.push_back(std::move(n));
    }
    auto& child_root = t.nodes_[offset];
    child_root.parent = 0;
    child_root.index = static_cast<std::uint32_t>(i + 1);
    t.nodes_[0].children.push_back(offset);
  }
  if (t.nodes_.size() > kMaxNodes) throw Error(ErrorCode::invalid_argument, "access tree too large");
  return t;
}

AccessTree AccessTree::threshold(std::uint32_t k, std::vector<AccessTree> children) {
  return gate(NodeKind::threshold, k, std::move(children));
}

AccessTree AccessTree::all_of(std::vector<AccessTree> children) {
  auto n = static_cast<std::uint32_t>(children.size());
  return gate(NodeKind::threshold, n, std::move(children));
}

AccessTree AccessTree::any_of(std::vector<AccessTree> children) {
  return gate(NodeKind::threshold, 1, std::move(children));
}

AccessTree AccessTree::joint(std::vector<AccessTree> children) {
  auto n = static_cast<std::uint32_t>(children.size());
  return gate(NodeKind::joint, n, std::move(children));
}

std::vector<NodeId> AccessTree::leaves() const {
  std::vector<NodeId> out;
  for (NodeId i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].is_leaf()) out.push_back(i);
  }
  return out;
}

std::size_t AccessTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const PolicyNode& n) { return n.is_leaf(); }));
}

std::set<std::string> AccessTree::authorities() const {
  std::set<std::string> out;
  for (const auto& n : nodes_) {
    if (n.is_leaf()) out.insert(n.attribute.authority);
  }
  return out;
}

std::size_t AccessTree::depth() const {
  std::function<std::size_t(NodeId)> rec = [&](NodeId id) -> std::size_t {
    std::size_t d = 0;
    for (auto c : nodes_[id].children) d = std::max(d, rec(c));
    return d + 1;
  };
  return rec(0);
}

AccessTree AccessTree::subtree(NodeId id) const {
  const auto& n = node(id);
  if (n.is_leaf()) return leaf(n.attribute);
  std::vector<AccessTree> kids;
  kids.reserve(n.children.size());
  for (auto c : n.children) kids.push_back(subtree(c));
  return gate(n.kind, n.threshold, std::move(kids));
}

bool operator==(const AccessTree& a, const AccessTree& b) { return a.nodes_ == b.nodes_; }

bool satisfies(const AccessTree& tree, NodeId id, const AttributeSet& attrs) {
  const auto& n = tree.node(id);
  if (n.is_leaf()) return attrs.contains(n.attribute);
  std::uint32_t held = 0;
  for (auto c : n.children) {
    if (satisfies(tree, c, attrs) && ++held >= n.threshold) return true;
  }
  return false;
}

bool satisfies(const AccessTree& tree, const AttributeSet& attrs) { return satisfies(tree, 0, attrs); }

// ---- text form ----

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  AccessTree parse() {
    AccessTree t = expr(0);
    skip_ws();
    if (pos_ != text_.size()) fail(ErrorCode::parse_error, "unexpected trailing input");
    return t;
  }

 private:
  [[noreturn]] void fail(ErrorCode code, const std::string& what) const { fail_at(code, what, pos_); }
  [[noreturn]] static void fail_at(ErrorCode code, const std::string& what, std::size_t pos) {
    throw PolicyParseError(code, what, pos);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  void expect(char c) {
    if (!peek(c)) fail(ErrorCode::parse_error, std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string_view word() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && !is_reserved_char(text_[pos_])) ++pos_;
    return text_.substr(start, pos_ - start);
  }

  static bool keyword_is(std::string_view w, std::string_view kw) {
    return w.size() == kw.size() &&
           std::equal(w.begin(), w.end(), kw.begin(), [](char a, char b) {
             return std::toupper(static_cast<unsigned char>(a)) == b;
           });
  }

  AccessTree expr(std::size_t depth) {
    if (depth > kMaxDepth) fail(ErrorCode::parse_error, "policy nested too deeply");
    skip_ws();
    if (pos_ >= text_.size()) fail(ErrorCode::parse_error, "unexpected end of policy");
    if (text_[pos_] == '(') return group(depth);

    const std::size_t start = pos_;
    std::string_view w = word();
    if (w.empty()) fail(ErrorCode::parse_error, "expected attribute or gate");
    if (keyword_is(w, "THRESHOLD") && peek('(')) return threshold_gate(depth);
    if (keyword_is(w, "JOINT") && peek('(')) return joint_gate(depth);
    try {
      return AccessTree::leaf(AttributeLabel::parse(w));
    } catch (const PolicyParseError&) {
      throw;
    } catch (const Error& e) {
      fail_at(ErrorCode::parse_error, e.what(), start);
    }
  }

  AccessTree group(std::size_t depth) {
    expect('(');
    if (peek(')')) fail(ErrorCode::empty_gate, "empty group");
    std::vector<AccessTree> kids;
    kids.push_back(expr(depth + 1));
    std::string op;
    while (!peek(')')) {
      const std::size_t at = pos_;
      std::string_view w = word();
      std::string this_op;
      if (keyword_is(w, "AND")) this_op = "AND";
      else if (keyword_is(w, "OR")) this_op = "OR";
      else fail_at(ErrorCode::parse_error, "expected AND, OR or ')'", at);
      if (!op.empty() && op != this_op) fail_at(ErrorCode::parse_error, "mixed AND/OR without parentheses", at);
      op = this_op;
      kids.push_back(expr(depth + 1));
    }
    expect(')');
    if (kids.size() == 1) return std::move(kids.front());
    return op == "AND" ? AccessTree::all_of(std::move(kids)) : AccessTree::any_of(std::move(kids));
  }

  std::vector<AccessTree> comma_list(std::size_t depth) {
    std::vector<AccessTree> kids;
    if (peek(')')) return kids;
    kids.push_back(expr(depth + 1));
    while (peek(',')) {
      ++pos_;
      kids.push_back(expr(depth + 1));
    }
    return kids;
  }

  AccessTree threshold_gate(std::size_t depth) {
    expect('(');
    skip_ws();
    const std::size_t k_pos = pos_;
    std::string_view digits = word();
    if (digits.empty() || digits.size() > 9 ||
        !std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      fail_at(ErrorCode::parse_error, "expected threshold count", k_pos);
    }
    const auto k = static_cast<std::uint32_t>(std::stoul(std::string(digits)));
    expect(';');
    auto kids = comma_list(depth);
    expect(')');
    if (kids.empty()) fail(ErrorCode::empty_gate, "THRESHOLD without children");
    if (k < 1 || k > kids.size()) {
      fail_at(ErrorCode::threshold_out_of_range,
              "threshold " + std::to_string(k) + " outside 1.." + std::to_string(kids.size()), k_pos);
    }
    return AccessTree::threshold(k, std::move(kids));
  }

  AccessTree joint_gate(std::size_t depth) {
    expect('(');
    auto kids = comma_list(depth);
    expect(')');
    if (kids.empty()) fail(ErrorCode::empty_gate, "JOINT without children");
    return AccessTree::joint(std::move(kids));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void render_node(const AccessTree& tree, NodeId id, std::string& out) {
  const auto& n = tree.node(id);
  if (n.is_leaf()) {
    out += n.attribute.canonical();
    return;
  }
  const auto count = n.children.size();
  auto list = [&](std::string_view sep) {
    for (std::size_t i = 0; i < count; ++i) {
      if (i) out += sep;
      render_node(tree, n.children[i], out);
    }
  };
  if (n.kind == NodeKind::joint) {
    out += "JOINT(";
    list(", ");
    out += ')';
  } else if (count >= 2 && n.threshold == count) {
    out += '(';
    list(" AND ");
    out += ')';
  } else if (count >= 2 && n.threshold == 1) {
    out += '(';
    list(" OR ");
    out += ')';
  } else {
    out += "THRESHOLD(" + std::to_string(n.threshold) + "; ";
    list(", ");
    out += ')';
  }
}

AccessTree decode_node(ByteReader& in, std::size_t depth, std::size_t& budget) {
  if (depth > kMaxDepth || budget == 0) {
    throw Error(ErrorCode::malformed_encoding, "encoded access tree too deep or too large");
  }
  --budget;
  const auto kind = in.get_u8();
  try {
    switch (static_cast<NodeKind>(kind)) {
      case NodeKind::leaf: {
        AttributeLabel label;
        label.authority = in.get_string();
        label.name = in.get_string();
        return AccessTree::leaf(std::move(label));
      }
      case NodeKind::threshold:
      case NodeKind::joint: {
        const auto k = in.get_u32();
        const auto n = in.get_u32();
        if (n > budget) throw Error(ErrorCode::malformed_encoding, "child count exceeds record");
        std::vector<AccessTree> kids;
        kids.reserve(n);
        for (std::uint32_t i = 0; i < n; ++i) kids.push_back(decode_node(in, depth + 1, budget));
        if (static_cast<NodeKind>(kind) == NodeKind::joint) {
          if (k != n) throw Error(ErrorCode::malformed_encoding, "joint gate threshold must equal child count");
          return AccessTree::joint(std::move(kids));
        }
        return AccessTree::threshold(k, std::move(kids));
      }
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::malformed_encoding) throw;
    throw Error(ErrorCode::malformed_encoding, std::string("invalid encoded access tree: ") + e.what());
  }
  throw Error(ErrorCode::malformed_encoding, "unknown access tree node tag");
}

void encode_node(ByteWriter& out, const AccessTree& tree, NodeId id) {
  const auto& n = tree.node(id);
  out.put_u8(static_cast<std::uint8_t>(n.kind));
  if (n.is_leaf()) {
    out.put_string(n.attribute.authority);
    out.put_string(n.attribute.name);
    return;
  }
  out.put_u32(n.threshold);
  out.put_u32(static_cast<std::uint32_t>(n.children.size()));
  for (auto c : n.children) encode_node(out, tree, c);
}

}  // namespace

AccessTree parse_policy(std::string_view text) { return Parser(text).parse(); }

std::string render_policy(const AccessTree& tree) {
  std::string out;
  render_node(tree, 0, out);
  return out;
}

void encode_tree(ByteWriter& out, const AccessTree& tree) { encode_node(out, tree, 0); }

AccessTree decode_tree(ByteReader& in) {
  std::size_t budget = kMaxNodes;
  return decode_node(in, 0, budget);
}

}  // namespace privlocker::policy
