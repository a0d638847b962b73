#include "tsk/error.hpp"

namespace tsk {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::ConstantFeature: return "ConstantFeature";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::EmptyBatch: return "EmptyBatch";
    case ErrorKind::MaskShapeMismatch: return "MaskShapeMismatch";
    case ErrorKind::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorKind::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::ZeroBaseline: return "ZeroBaseline";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::MissingTarget: return "MissingTarget";
    case ErrorKind::NonNumericTarget: return "NonNumericTarget";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::TooSmall: return "TooSmall";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::GridTooLarge: return "GridTooLarge";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace tsk
