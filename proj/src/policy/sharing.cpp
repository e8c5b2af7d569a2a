#include "privlocker/policy/sharing.hpp"

namespace privlocker::policy {

std::optional<std::vector<std::uint32_t>> select_satisfying_children(const PolicyNode& gate,
                                                                     const std::vector<bool>& child_ok) {
  std::vector<std::uint32_t> chosen;
  for (std::size_t p = 0; p < child_ok.size() && chosen.size() < gate.threshold; ++p) {
    if (child_ok[p]) chosen.push_back(static_cast<std::uint32_t>(p + 1));
  }
  if (chosen.size() < gate.threshold) return std::nullopt;
  return chosen;
}

}  // namespace privlocker::policy
