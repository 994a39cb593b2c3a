#pragma once

#include <stdexcept>
#include <string>

namespace grouprl {

enum class ErrorCode : int {
  kInvalidArgument = 1,   // bad sizes, out-of-range indices, config errors
  kInvalidData = 2,       // file parse / representation validation failures
  kInconsistent = 3,      // violated invariants (mass sums, mismatched inputs)
  kUndefined = 4,         // undefined quantity (e.g. posterior at P(E)=0)
  kOutOfRegime = 5,       // formula outside its domain of validity
  kInstability = 6,       // numeric blow-up during integration/training
  kIo = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace grouprl
