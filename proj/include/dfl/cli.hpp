#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dfl {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitCapacity = 2, kExitSelftest = 3 };

/// Runs one CLI invocation. `args` excludes the program name. Results go to
/// `out`; failures are reported to `err` as one JSON object per line.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses "6,8,12" into integers and "0.1:1.0:64" into (lo, hi, points).
std::vector<unsigned> parse_int_list(const std::string& text);
struct BetaRange {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t points = 0;
};
BetaRange parse_beta_range(const std::string& text);

}  // namespace dfl
