#pragma once

#include <iosfwd>

namespace dabag::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsage = 1,
  kData = 2,
  kInternal = 3,
};

// Entry point of the dabag tool. Diagnostics go to `err`, tables to `out`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dabag::cli
