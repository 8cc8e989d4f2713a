#include "bandsplit/error.hpp"

namespace bandsplit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidStats: return "InvalidStats";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kOverload: return "Overload";
    case ErrorCode::kBranchInvalid: return "BranchInvalid";
    case ErrorCode::kNoFeasibleBranch: return "NoFeasibleBranch";
    case ErrorCode::kBracketFailure: return "BracketFailure";
    case ErrorCode::kDimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::kNoAvailableBand: return "NoAvailableBand";
    case ErrorCode::kOptimizerFailure: return "OptimizerFailure";
    case ErrorCode::kAllBandsUnavailable: return "AllBandsUnavailable";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kOverloadDetected: return "OverloadDetected";
    case ErrorCode::kDuplicateSeq: return "DuplicateSeq";
    case ErrorCode::kInsufficientSamples: return "InsufficientSamples";
    case ErrorCode::kMismatchedSeeds: return "MismatchedSeeds";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace bandsplit
