#pragma once

#include <stdexcept>
#include <string>

namespace eot {

enum class ErrorCode {
  EmptySupport = 1,
  NonpositiveWeight,
  WeightSumOutOfRange,
  DimensionMismatch,
  NegativeCost,
  AssumptionViolated,
  AllTermsVanish,
  Overflow,
  NotATransformPair,
  NegativeDualValue,
  MaxItersExceeded,
  TooLarge,
  EmptyBall,
  InvalidArgument,
  Parse,
  Io,
};

const char* to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code. Every failure raised by the
/// library is an `eot::Error`; the C API maps the code to an `eot_status`.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// Validation failures (bad input) as opposed to runtime conditions.
  bool is_validation() const noexcept;

 private:
  ErrorCode code_;
};

}  // namespace eot
