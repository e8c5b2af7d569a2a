#pragma once

#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace privlocker::cli {

// Ordered key=value pairs forming one output line.
using Fields = std::vector<std::pair<std::string, std::string>>;

// key=value separated by single spaces; values containing spaces, quotes
// or backslashes are double-quoted with backslash escapes.
std::string format_fields(const Fields& fields);
Fields parse_fields(std::string_view line);

// Whitespace-separated words with double-quote grouping and backslash
// escapes inside quotes. Throws parse_error on an unterminated quote.
std::vector<std::string> split_words(std::string_view line);

// Runs one command line (without the program name). Prints a single result
// line on `out`, diagnostics on `err`, and returns the process exit status.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace privlocker::cli
