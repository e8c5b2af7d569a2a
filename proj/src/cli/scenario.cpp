#include "privlocker/cli/scenario.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "privlocker/locker/store_file.hpp"

namespace privlocker::cli {
namespace {

namespace fs = std::filesystem;

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Position of a '#' that starts a trailing comment, outside double quotes.
std::size_t comment_start(std::string_view line) {
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes && c == '\\') {
      ++i;
    } else if (c == '"') {
      in_quotes = !in_quotes;
    } else if (!in_quotes && c == '#' && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
      return i;
    }
  }
  return std::string_view::npos;
}

std::string substitute(const std::string& word, const std::map<std::string, std::string>& vars) {
  std::string out;
  std::size_t i = 0;
  while (i < word.size()) {
    const auto open = word.find("${", i);
    if (open == std::string::npos) {
      out.append(word, i);
      break;
    }
    const auto close = word.find('}', open);
    if (close == std::string::npos) throw Error(ErrorCode::parse_error, "unterminated ${ in '" + word + "'");
    out.append(word, i, open - i);
    const auto name = word.substr(open + 2, close - open - 2);
    const auto it = vars.find(name);
    if (it == vars.end()) throw Error(ErrorCode::invalid_argument, "undefined variable ${" + name + "}");
    out += it->second;
    i = close + 1;
  }
  return out;
}

struct Outcome {
  std::optional<ErrorCode> error;
  Fields fields;
  std::string diagnostics;
};

Outcome run_compare(const std::vector<std::string>& words) {
  if (words.size() != 3) return {ErrorCode::invalid_argument, {}, "compare takes two files"};
  const auto a = locker::read_file(words[1]);
  const auto b = locker::read_file(words[2]);
  if (a != b) {
    return {ErrorCode::expectation_failed,
            {},
            "files differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()) + " bytes"};
  }
  return {std::nullopt, {{"compare", "equal"}, {"bytes", std::to_string(a.size())}}, {}};
}

Outcome run_step(const std::vector<std::string>& words, const std::vector<std::string>& global_args) {
  try {
    if (words.front() == "compare") return run_compare(words);
    std::vector<std::string> args = global_args;
    args.insert(args.end(), words.begin(), words.end());
    std::ostringstream out;
    std::ostringstream err;
    const int status = run_cli(args, out, err);
    auto fields = parse_fields(trim(out.str()));
    if (status == 0) return {std::nullopt, std::move(fields), err.str()};
    for (const auto& [k, v] : fields) {
      if (k == "error") {
        if (auto code = error_code_from_name(v)) return {code, std::move(fields), err.str()};
      }
    }
    return {ErrorCode::expectation_failed, std::move(fields), err.str()};
  } catch (const Error& e) {
    return {e.code(), {}, e.what()};
  }
}

}  // namespace

std::vector<ScenarioStep> parse_scenario(std::string_view text) {
  std::vector<ScenarioStep> steps;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    ScenarioStep step;
    step.line = line_no;
    const auto hash = comment_start(line);
    step.words = split_words(line.substr(0, hash));
    if (step.words.empty()) continue;
    if (hash != std::string_view::npos) {
      const auto comment = trim(line.substr(hash + 1));
      constexpr std::string_view kExpect = "expect:";
      if (comment.starts_with(kExpect)) {
        auto words = split_words(comment.substr(kExpect.size()));
        if (words.empty()) throw Error(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": empty expect");
        if (words.front() != "ok") {
          step.expected_error = error_code_from_name(words.front());
          if (!step.expected_error) {
            throw Error(ErrorCode::parse_error,
                        "line " + std::to_string(line_no) + ": unknown error code '" + words.front() + "'");
          }
        }
        std::ostringstream rest;
        for (std::size_t i = 1; i < words.size(); ++i) rest << (i > 1 ? " " : "") << words[i];
        step.expected_fields = parse_fields(rest.str());
      }
    }
    steps.push_back(std::move(step));
  }
  return steps;
}

ScenarioReport run_scenario(const fs::path& script, const fs::path& store, const std::vector<std::string>& global_args,
                            std::ostream& log) {
  const auto text = locker::read_file(script);
  const auto steps = parse_scenario(std::string_view(reinterpret_cast<const char*>(text.data()), text.size()));

  std::map<std::string, std::string> vars = {
      {"STORE", store.string()},
      {"SCENARIO_DIR", fs::absolute(script).parent_path().string()},
  };

  ScenarioReport report;
  for (const auto& step : steps) {
    ++report.steps;
    Outcome outcome;
    std::vector<std::string> words;
    try {
      for (const auto& w : step.words) words.push_back(substitute(w, vars));
      outcome = run_step(words, global_args);
    } catch (const Error& e) {
      outcome = {e.code(), {}, e.what()};
    }

    std::string problem;
    const auto got = outcome.error ? std::string(error_code_name(*outcome.error)) : std::string("ok");
    const auto want = step.expected_error ? std::string(error_code_name(*step.expected_error)) : std::string("ok");
    if (got != want) {
      problem = "expected " + want + ", got " + got;
    } else {
      for (const auto& [k, v] : step.expected_fields) {
        const auto it = std::find_if(outcome.fields.rbegin(), outcome.fields.rend(),
                                     [&](const auto& f) { return f.first == k; });
        if (it == outcome.fields.rend()) {
          problem = "missing output field " + k;
        } else if (it->second != v) {
          problem = k + "=" + it->second + ", expected " + v;
        }
        if (!problem.empty()) break;
      }
    }

    const bool pass = problem.empty();
    if (pass) ++report.passed;
    if (!outcome.error) {
      for (const auto& [k, v] : outcome.fields) vars[k] = v;
    }
    log << (pass ? "[pass] " : "[FAIL] ") << script.filename().string() << ':' << step.line << ' '
        << step.words.front() << " -> " << (outcome.fields.empty() ? got : format_fields(outcome.fields));
    if (!pass) log << " (" << problem << ')';
    log << '\n';
    if (!pass && !outcome.diagnostics.empty()) log << "       " << trim(outcome.diagnostics) << '\n';
  }
  return report;
}

}  // namespace privlocker::cli
