#include "abkit/error.hpp"

namespace abkit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::OutsideImage: return "OutsideImage";
    case ErrorCode::InsufficientPool: return "InsufficientPool";
    case ErrorCode::UnknownAssignment: return "UnknownAssignment";
    case ErrorCode::ClosedAssignment: return "ClosedAssignment";
    case ErrorCode::NonMonotoneTimestamp: return "NonMonotoneTimestamp";
    case ErrorCode::PageAlreadySubmitted: return "PageAlreadySubmitted";
    case ErrorCode::NoPagesSubmitted: return "NoPagesSubmitted";
    case ErrorCode::MissingGroundTruth: return "MissingGroundTruth";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DegenerateBox: return "DegenerateBox";
    case ErrorCode::NonPositiveBeta: return "NonPositiveBeta";
    case ErrorCode::NonPositiveBandwidth: return "NonPositiveBandwidth";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DivergedTraining: return "DivergedTraining";
    case ErrorCode::EmptyTestSet: return "EmptyTestSet";
    case ErrorCode::NoCooccurrence: return "NoCooccurrence";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace abkit
