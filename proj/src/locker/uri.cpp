#include "privlocker/locker/uri.hpp"

#include <array>

#include "privlocker/error.hpp"

namespace privlocker::locker {
namespace {

constexpr std::string_view kSep = "::";

bool valid_component(std::string_view c) {
  return !c.empty() && c.find(kSep) == std::string_view::npos && c.front() != ':' && c.back() != ':';
}

}  // namespace

std::string DocumentUri::render() const {
  if (!valid_component(issuer_id) || !valid_component(doc_type) || !valid_component(doc_id)) {
    throw Error(ErrorCode::invalid_argument, "uri components must be non-empty and free of '::'");
  }
  std::string out;
  out.reserve(issuer_id.size() + doc_type.size() + doc_id.size() + 4);
  out.append(issuer_id).append(kSep).append(doc_type).append(kSep).append(doc_id);
  return out;
}

DocumentUri DocumentUri::parse(std::string_view text) {
  std::array<std::string_view, 3> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i < 2; ++i) {
    const auto at = text.find(kSep, start);
    if (at == std::string_view::npos) throw Error(ErrorCode::parse_error, "uri needs three '::'-separated parts");
    parts[i] = text.substr(start, at - start);
    start = at + kSep.size();
  }
  parts[2] = text.substr(start);
  for (auto p : parts) {
    if (!valid_component(p)) throw Error(ErrorCode::parse_error, "bad uri component in '" + std::string(text) + "'");
  }
  return {std::string(parts[0]), std::string(parts[1]), std::string(parts[2])};
}

}  // namespace privlocker::locker
