#include "trafficlens/error.hpp"

namespace trafficlens {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegeneratePoint: return "DegeneratePoint";
    case ErrorKind::SingularMatrix: return "SingularMatrix";
    case ErrorKind::InvalidCamera: return "InvalidCamera";
    case ErrorKind::InsufficientPairs: return "InsufficientPairs";
    case ErrorKind::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::EmptyImage: return "EmptyImage";
    case ErrorKind::MalformedHeader: return "MalformedHeader";
    case ErrorKind::TruncatedData: return "TruncatedData";
    case ErrorKind::InvalidProbability: return "InvalidProbability";
    case ErrorKind::InsufficientMatches: return "InsufficientMatches";
    case ErrorKind::NoConsensus: return "NoConsensus";
    case ErrorKind::DegeneratePoints: return "DegeneratePoints";
    case ErrorKind::InsufficientTrajectories: return "InsufficientTrajectories";
    case ErrorKind::DegenerateDisplacement: return "DegenerateDisplacement";
    case ErrorKind::BufferExceeded: return "BufferExceeded";
    case ErrorKind::NoSeeds: return "NoSeeds";
    case ErrorKind::EmptyMask: return "EmptyMask";
    case ErrorKind::InsufficientIntersection: return "InsufficientIntersection";
    case ErrorKind::MissingPrior: return "MissingPrior";
    case ErrorKind::MissingCalibration: return "MissingCalibration";
    case ErrorKind::EmptyHeatMap: return "EmptyHeatMap";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind), detail_(detail) {}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InsufficientPairs:
    case ErrorKind::InsufficientMatches:
    case ErrorKind::InsufficientTrajectories:
    case ErrorKind::InvalidCamera:
    case ErrorKind::InvalidProbability:
    case ErrorKind::MalformedHeader:
    case ErrorKind::TruncatedData:
    case ErrorKind::ShapeMismatch:
    case ErrorKind::MissingCalibration:
    case ErrorKind::MissingPrior:
    case ErrorKind::InvalidSpec:
    case ErrorKind::SchemaError:
    case ErrorKind::ConfigError:
    case ErrorKind::InvalidArgument:
    case ErrorKind::NoSeeds:
    case ErrorKind::EmptyMask:
      return 2;
    default:
      return 1;
  }
}

}  // namespace trafficlens
