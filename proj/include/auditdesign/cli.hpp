#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace auditdesign::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitInternal = 2;

/// Runs the command line (arguments after the program name). Reports go to
/// `out`, diagnostics to `err`. Returns 0 on success, 1 on invalid input or
/// usage, 2 on an internal error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace auditdesign::cli
