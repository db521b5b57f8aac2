#pragma once

#include <stdexcept>
#include <string>

namespace binreg {

// Raised for malformed input files, violated preconditions and bad
// configuration. Solver outcomes are reported as statuses, never thrown.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace binreg
