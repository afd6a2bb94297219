#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace wysiwim::cli {

// Exit status contract shared by every subcommand.
enum ExitCode : int {
  kSuccess = 0,
  kItemFailures = 1,  // the run completed but some snippets or pairs failed
  kConfigError = 2,   // bad flags, unreadable or malformed inputs
};

// Entry point of the `wysiwim` tool: render, embed, calibrate, detect,
// classify, evaluate. Reports go to --report or, without it, to `out`;
// diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wysiwim::cli
