#include "jane/error.hpp"

namespace jane {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::NotConnected: return "NotConnected";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::NonPositiveScale: return "NonPositiveScale";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidFraction: return "InvalidFraction";
    case ErrorCode::EmptyLabelSet: return "EmptyLabelSet";
    case ErrorCode::NoLabels: return "NoLabels";
    case ErrorCode::DivergenceDetected: return "DivergenceDetected";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UnknownLabelValue: return "UnknownLabelValue";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::IOError: return "IOError";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
  }
  return "Unknown";
}

}  // namespace jane
