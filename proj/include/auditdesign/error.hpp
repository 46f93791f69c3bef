#pragma once

#include <stdexcept>
#include <string>

namespace auditdesign {

/// Raised for bad input: malformed files, out-of-range parameters, violated
/// preconditions. The CLI maps it to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace auditdesign
