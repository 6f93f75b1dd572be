#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace trafficlens {

enum class ErrorKind {
  // geometry
  DegeneratePoint,
  SingularMatrix,
  InvalidCamera,
  InsufficientPairs,
  DegenerateConfiguration,
  // imaging
  ShapeMismatch,
  EmptyImage,
  MalformedHeader,
  TruncatedData,
  // calibration
  InvalidProbability,
  InsufficientMatches,
  NoConsensus,
  DegeneratePoints,
  InsufficientTrajectories,
  // motion
  DegenerateDisplacement,
  BufferExceeded,
  // roadmodel
  NoSeeds,
  EmptyMask,
  InsufficientIntersection,
  // box3d / analytics
  MissingPrior,
  MissingCalibration,
  EmptyHeatMap,
  // pipeline
  InvalidSpec,
  SchemaError,
  ConfigError,
  IoError,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

/// Exception carrying a machine-readable kind. The message always starts with
/// the kind name so CLI output stays grep-able.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail);

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

/// Process exit code for an error kind: 2 for precondition/validation
/// failures, 1 for runtime failures.
int exit_code_for(ErrorKind kind);

}  // namespace trafficlens
