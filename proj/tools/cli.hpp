#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hanf::cli {

/// Process exit codes, one per failure class.
enum ExitCode : int {
  kOk = 0,
  kParseError = 1,
  kBudgetExceeded = 2,
  /// equiv found a disagreement.
  kCounterexample = 3,
  kUsage = 4,
  kIoError = 5,
  /// Well-formed input that the library rejects (unassigned variable,
  /// signature mismatch, out-of-range argument).
  kInvalidInput = 6,
};

/// Runs one hanfc invocation. `args` excludes the program name. Results go
/// to `out`, diagnostics and traces to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hanf::cli
