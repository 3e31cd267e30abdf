#include "fqlab/error.hpp"

namespace fqlab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonPrime: return "NonPrime";
    case ErrorCode::kWrongResidue: return "WrongResidue";
    case ErrorCode::kDivisionByZero: return "DivisionByZero";
    case ErrorCode::kNotADivisor: return "NotADivisor";
    case ErrorCode::kZeroSide: return "ZeroSide";
    case ErrorCode::kTooFewEdges: return "TooFewEdges";
    case ErrorCode::kConstructionFailed: return "ConstructionFailed";
    case ErrorCode::kUnknownExperiment: return "UnknownExperiment";
    case ErrorCode::kInvalidParameters: return "InvalidParameters";
    case ErrorCode::kFieldMismatch: return "FieldMismatch";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

}  // namespace fqlab
