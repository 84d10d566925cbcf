#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "genmean/gaussian.hpp"

namespace genmean::cli {

/// Process exit codes.
enum ExitCode : int {
  kSuccess = 0,
  kInputError = 2,
  kNumericalError = 3,
  kConsistencyError = 4,
};

/// Runs one invocation. `args` excludes the program name. Result tables go
/// to `out`, logs and error messages to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses "mean:std;mean:std;..." into univariate Gaussians.
std::vector<GaussianDensity> parse_experts(const std::string& text);

}  // namespace genmean::cli
