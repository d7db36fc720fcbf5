#include "lcdur/types.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "lcdur/error.hpp"

namespace lcdur {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::UnknownVehicleClass: return "UnknownVehicleClass";
    case ErrorCode::InconsistentFrameSequence: return "InconsistentFrameSequence";
    case ErrorCode::UnknownTrack: return "UnknownTrack";
    case ErrorCode::MissingData: return "MissingData";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::ExactModeTooLarge: return "ExactModeTooLarge";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::NonPositiveDuration: return "NonPositiveDuration";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::OverlappingEvents: return "OverlappingEvents";
    case ErrorCode::EventOutsideRecording: return "EventOutsideRecording";
    case ErrorCode::InconsistentEventChain: return "InconsistentEventChain";
    case ErrorCode::MissingGroup: return "MissingGroup";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

std::string_view to_string(VehicleClass c) {
  return c == VehicleClass::Car ? "car" : "truck";
}

std::string_view to_string(LaneChangeDirection d) {
  return d == LaneChangeDirection::Left ? "left" : "right";
}

std::optional<VehicleClass> parse_vehicle_class(std::string_view s) {
  const auto v = lower(s);
  if (v == "car") return VehicleClass::Car;
  if (v == "truck") return VehicleClass::Truck;
  return std::nullopt;
}

std::optional<LaneChangeDirection> parse_direction(std::string_view s) {
  const auto v = lower(s);
  if (v == "left") return LaneChangeDirection::Left;
  if (v == "right") return LaneChangeDirection::Right;
  return std::nullopt;
}

}  // namespace lcdur
