#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gmsep {

// Points are stored one per row so that a sample is a contiguous span.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = std::int64_t;
using IndexSet = std::vector<Index>;

// Kept in sync with gm_status in gmsep.h; the numeric values are part of the C ABI.
enum class ErrorCode : int {
  kOk = 0,
  kDimensionMismatch = 1,
  kNonPositiveEigenvalue = 2,
  kNonOrthonormalRotation = 3,
  kTooFewSamples = 4,
  kDegenerateSample = 5,
  kInvalidDelta = 6,
  kMissingMedianRadius = 7,
  kInfeasiblePlacement = 8,
  kThresholdTooLarge = 9,
  kNoGapWithinCap = 10,
  kResidualPointsAfterKPeels = 11,
  kEmptyPeel = 12,
  kPairNotSeparated = 13,
  kGridTooCoarse = 14,
  kTooFewPoints = 15,
  kInstanceTooLarge = 16,
  kZeroSigma = 17,
  kIndexMismatch = 18,
  kParseError = 19,
  kSchemaError = 20,
  kIoError = 21,
  kInvalidArgument = 22,
  kUnknown = 99,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace gmsep
