#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lcdur {

enum class ErrorCode {
  InvalidArgument,
  MissingFile,
  MalformedRow,
  UnknownVehicleClass,
  InconsistentFrameSequence,
  UnknownTrack,
  MissingData,
  EmptySample,
  ExactModeTooLarge,
  DegenerateSample,
  NonPositiveDuration,
  DomainError,
  OverlappingEvents,
  EventOutsideRecording,
  InconsistentEventChain,
  MissingGroup,
  Io,
};

std::string_view error_code_name(ErrorCode code);

/// Exception type thrown by every lcdur module. The code is stable and is
/// what the C API reports; the message names the offending record.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lcdur
