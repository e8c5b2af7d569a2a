#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "privlocker/cli/cli.hpp"
#include "privlocker/error.hpp"

// Scenario scripts: one command per line, written exactly as on the command
// line but without the global flags. A trailing comment of the form
//   # expect: <ok|error_code> [key=value ...]
// states the expected outcome; a line without one must succeed. Lines that
// are blank or start with '#' are skipped.
//
// ${STORE} and ${SCENARIO_DIR} are predefined. Every key=value printed by a
// successful step becomes a variable for later steps.
//
// `compare <file> <file>` is a script-only step that succeeds when the two
// files are byte-identical and fails with expectation_failed otherwise.
namespace privlocker::cli {

struct ScenarioStep {
  std::size_t line = 0;
  std::vector<std::string> words;
  std::optional<ErrorCode> expected_error;  // nullopt: expect success
  Fields expected_fields;
};

std::vector<ScenarioStep> parse_scenario(std::string_view text);

struct ScenarioReport {
  std::size_t steps = 0;
  std::size_t passed = 0;
  bool ok() const { return steps == passed; }
};

// `global_args` (store and seed flags) are prepended to every step.
ScenarioReport run_scenario(const std::filesystem::path& script, const std::filesystem::path& store,
                            const std::vector<std::string>& global_args, std::ostream& log);

}  // namespace privlocker::cli
