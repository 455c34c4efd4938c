#pragma once

#include <stdexcept>
#include <string>

namespace fdl {

// Failure categories. Validation failures map to process exit code 1,
// numerical failures (NonConvergence, NanDetected, Divergence) to exit code 2.
enum class ErrorKind {
  BaseOrder,         // bases out of order: need 2 <= a <= b
  ParityImpossible,  // b - a odd, unit steps cannot sum to +-a
  SumMismatch,       // template steps do not sum to +-a
  RangeViolation,    // template partial sums leave [0, a]
  BadShape,          // wrong container length / malformed argument
  Overflow,          // a^n or b^n not representable in 62 bits
  IndexOutOfRange,
  AlphaOutOfRange,   // kernel exponent outside (0, 1)
  ZeroIncrement,     // curve interval with zero increment
  MismatchedLevel,   // operands sampled at different levels
  DegenerateNorm,
  NotAdmissible,     // exponent pair violates the admissibility relation
  MismatchedOrder,   // pair order differs from the curve order
  TauZero,
  NotContained,      // field mass not concentrated in the inner half-domain
  BadConfig,
  IoFailure,
  NonConvergence,
  NanDetected,
  Divergence,
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

int exit_code_for(ErrorKind k);

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace fdl
