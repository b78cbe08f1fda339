#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ltv::cli {

/// Runs one command line (`args` excludes the program name) and returns the
/// exit code: 0 clean, 1 usage or I/O error, 2 hypothesis unmet,
/// 3 failed verification.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ltv::cli
