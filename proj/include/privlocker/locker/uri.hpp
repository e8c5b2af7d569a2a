#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace privlocker::locker {

inline constexpr std::string_view kPrivDocType = "PRIV";

// IssuerID::DocType::DocID
struct DocumentUri {
  std::string issuer_id;
  std::string doc_type;
  std::string doc_id;

  std::string render() const;
  // Throws parse_error.
  static DocumentUri parse(std::string_view text);

  bool is_private() const { return doc_type == kPrivDocType; }

  friend auto operator<=>(const DocumentUri&, const DocumentUri&) = default;
};

}  // namespace privlocker::locker
