#include "eot/error.hpp"

namespace eot {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptySupport: return "EmptySupport";
    case ErrorCode::NonpositiveWeight: return "NonpositiveWeight";
    case ErrorCode::WeightSumOutOfRange: return "WeightSumOutOfRange";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NegativeCost: return "NegativeCost";
    case ErrorCode::AssumptionViolated: return "AssumptionViolated";
    case ErrorCode::AllTermsVanish: return "AllTermsVanish";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::NotATransformPair: return "NotATransformPair";
    case ErrorCode::NegativeDualValue: return "NegativeDualValue";
    case ErrorCode::MaxItersExceeded: return "MaxItersExceeded";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::EmptyBall: return "EmptyBall";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

bool Error::is_validation() const noexcept {
  switch (code_) {
    case ErrorCode::EmptySupport:
    case ErrorCode::NonpositiveWeight:
    case ErrorCode::WeightSumOutOfRange:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NegativeCost:
    case ErrorCode::AssumptionViolated:
    case ErrorCode::AllTermsVanish:
    case ErrorCode::NotATransformPair:
    case ErrorCode::NegativeDualValue:
    case ErrorCode::TooLarge:
    case ErrorCode::EmptyBall:
    case ErrorCode::InvalidArgument:
    case ErrorCode::Parse:
    case ErrorCode::Io:
      return true;
    default:
      return false;
  }
}

}  // namespace eot
