#include "gmsep/common.hpp"

namespace gmsep {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kOk: return "Ok";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonPositiveEigenvalue: return "NonPositiveEigenvalue";
    case ErrorCode::kNonOrthonormalRotation: return "NonOrthonormalRotation";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kDegenerateSample: return "DegenerateSample";
    case ErrorCode::kInvalidDelta: return "InvalidDelta";
    case ErrorCode::kMissingMedianRadius: return "MissingMedianRadius";
    case ErrorCode::kInfeasiblePlacement: return "InfeasiblePlacement";
    case ErrorCode::kThresholdTooLarge: return "ThresholdTooLarge";
    case ErrorCode::kNoGapWithinCap: return "NoGapWithinCap";
    case ErrorCode::kResidualPointsAfterKPeels: return "ResidualPointsAfterKPeels";
    case ErrorCode::kEmptyPeel: return "EmptyPeel";
    case ErrorCode::kPairNotSeparated: return "PairNotSeparated";
    case ErrorCode::kGridTooCoarse: return "GridTooCoarse";
    case ErrorCode::kTooFewPoints: return "TooFewPoints";
    case ErrorCode::kInstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::kZeroSigma: return "ZeroSigma";
    case ErrorCode::kIndexMismatch: return "IndexMismatch";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kUnknown: return "Unknown";
  }
  return "Unknown";
}

}  // namespace gmsep
