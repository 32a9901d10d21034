#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace abkit {

enum class ErrorCode {
  MalformedRecord,
  InvariantViolation,
  OutsideImage,
  InsufficientPool,
  UnknownAssignment,
  ClosedAssignment,
  NonMonotoneTimestamp,
  PageAlreadySubmitted,
  NoPagesSubmitted,
  MissingGroundTruth,
  EmptyInput,
  DegenerateBox,
  NonPositiveBeta,
  NonPositiveBandwidth,
  ShapeMismatch,
  DivergedTraining,
  EmptyTestSet,
  NoCooccurrence,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorCode code);

// Base for every domain error raised by the toolkit. The CLI maps these to
// exit status 1.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Record-level failures carry the JSON path of the offending field.
class RecordError : public Error {
 public:
  RecordError(ErrorCode code, std::string field_path, std::string detail)
      : Error(code, field_path + ": " + detail),
        field_path_(std::move(field_path)),
        detail_(std::move(detail)) {}

  const std::string& field_path() const noexcept { return field_path_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string field_path_;
  std::string detail_;
};

}  // namespace abkit
