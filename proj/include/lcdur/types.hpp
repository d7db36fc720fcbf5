#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace lcdur {

enum class VehicleClass { Car, Truck };

/// highD drivingDirection: 1 = upper carriageway (travels toward -x),
/// 2 = lower carriageway (travels toward +x).
enum class DrivingDirection { Upper = 1, Lower = 2 };

enum class LaneChangeDirection { Left, Right };

std::string_view to_string(VehicleClass c);
std::string_view to_string(LaneChangeDirection d);

/// Accepts "car"/"truck" in any letter case (highD writes "Car"/"Truck").
std::optional<VehicleClass> parse_vehicle_class(std::string_view s);
std::optional<LaneChangeDirection> parse_direction(std::string_view s);

}  // namespace lcdur
